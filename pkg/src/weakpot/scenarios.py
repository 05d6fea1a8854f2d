"""Canned reproductions of the two selection experiments, plus sweeps and fits.

``fock_coupling``
    Two oscillators coupled by ``lambda x1 x2``; particle 1 pre-selected in
    ``|0> - i|1> + |2>`` and post-selected in ``|0> + |1> - |2>``, the test
    oscillator starts in ``|0>``.

``gaussian_pair``
    Particle 1 pre-selected in the coherent state centred at ``+x0`` and
    post-selected (after whole periods) in the one centred at ``-x0``. A test
    oscillator in the momentum profile ``exp(-p^2)`` receives a short kick
    through ``p1 p2`` (or, as the control, ``exp(-x^2)`` through ``x1 x2``).
    The kick coupling enters the propagator as ``exp(+i lambda int g p1 p2
    dt)``, i.e. ``H_int = -lambda g(t) p1 p2``, so a positive kick weak value
    ``cos(t_kick) > 0`` pushes the test momentum up by
    ``lambda x0 cos(t_kick) / 2``.

Scenario runs are deterministic functions of the config.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, DegenerateSweep, DimensionGuard, OrthogonalSelection
from . import hilbert
from .hilbert import FockSpace
from .oracle import DIMENSION_GUARD, TwoBodySystem, conditional_observable, conditional_state
from .weakpotential import (
    PiecewiseConstantProfile,
    SeparableInteraction,
    conditional_evolve_first_order,
    dyson_terms,
    time_grid,
)
from .weakvalue import OVERLAP_FLOOR, PrePostPair, weak_trajectory

SCENARIOS = ("fock_coupling", "gaussian_pair")
INTERACTIONS = ("xx", "pp")
DEFAULT_CUTOFF = {"fock_coupling": 10, "gaussian_pair": 32}
DEFAULT_INTERACTION = {"fock_coupling": "xx", "gaussian_pair": "pp"}
X0_RANGE = (1.0, 4.0)
LAMBDA_MAX = 0.2
CONVERGENCE_TOL = 1e-6

TRAJECTORY_COLUMNS = ("t", "x_w_re", "x_w_im", "p_w_re", "p_w_im", "H_w_re", "H_w_im")
RESIDUAL_COLUMNS = (
    "lambda",
    "first_order_residual",
    "second_order_residual",
    "linearized_residual",
    "second_minus_first",
    "first_order_infidelity",
    "second_order_infidelity",
    "overlap_abs",
    "oracle_norm",
)
# keys echoing the configuration; excluded from convergence comparisons
_ECHO_KEYS = {"lambda", "x0", "cutoff", "period_count", "steps_per_period", "kick_time", "kick_width"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Run parameters. In config files ``lam`` is spelled ``lambda``.

    ``kick_center`` and ``kick_width`` are in periods, measured from the
    pre-selection time. ``cutoff`` and ``interaction`` default per scenario.
    """

    scenario: str
    lam: float = 1e-2
    x0: float = 2.0
    cutoff: int | None = None
    period_count: int = 1
    steps_per_period: int = 256
    kick_center: float = 0.5
    kick_width: float = 0.02
    interaction: str | None = None
    sweep: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", DEFAULT_CUTOFF[self.scenario])
        if self.interaction is None:
            object.__setattr__(self, "interaction", DEFAULT_INTERACTION[self.scenario])
        if self.sweep is not None:
            object.__setattr__(self, "sweep", tuple(float(v) for v in self.sweep))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        """Build from a flat mapping with the file-format key names; unknown keys are errors."""
        names = {f.name for f in fields(cls)}
        names.discard("lam")
        names.add("lambda")
        for key in data:
            if key not in names:
                raise ConfigError(str(key), "unknown configuration key")
        if "scenario" not in data:
            raise ConfigError("scenario", "required")
        kwargs = {("lam" if k == "lambda" else k): v for k, v in data.items()}
        _coerce(kwargs)
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, Any]:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        if d["sweep"] is not None:
            d["sweep"] = list(d["sweep"])
        return {k: d[k] for k in sorted(d)}

    @property
    def tau(self) -> float:
        return 2.0 * np.pi * self.period_count

    @property
    def kick_time(self) -> float:
        return 2.0 * np.pi * self.kick_center

    def validate(self, override_guard: bool = False) -> None:
        """Check ranges; numerical guards (:class:`NumericalGuard`) are raised before range errors."""
        if self.scenario == "gaussian_pair":
            overlap = math.exp(-self.x0**2) if abs(self.x0) < 40 else 0.0
            if overlap <= OVERLAP_FLOOR:
                raise OrthogonalSelection(
                    f"x0={self.x0:g}: pre/post overlap exp(-x0^2) = e^{{-{self.x0**2:g}}} = {overlap:.3e} "
                    f"is below the floor {OVERLAP_FLOOR:.0e}"
                )
            if not X0_RANGE[0] <= self.x0 <= X0_RANGE[1]:
                raise ConfigError("x0", f"must lie in [{X0_RANGE[0]:g}, {X0_RANGE[1]:g}], got {self.x0:g}")
        if not 0.0 <= self.lam <= LAMBDA_MAX:
            raise ConfigError("lambda", f"must lie in [0, {LAMBDA_MAX:g}], got {self.lam:g}")
        if self.cutoff < 4:
            raise ConfigError("cutoff", f"must be >= 4, got {self.cutoff}")
        if not override_guard and self.cutoff**2 > DIMENSION_GUARD:
            raise DimensionGuard(
                f"cutoff {self.cutoff} gives two-body dimension {self.cutoff**2} > guard {DIMENSION_GUARD}"
            )
        if self.period_count < 1:
            raise ConfigError("period_count", f"must be >= 1, got {self.period_count}")
        if self.steps_per_period < 8:
            raise ConfigError("steps_per_period", f"must be >= 8, got {self.steps_per_period}")
        if self.interaction not in INTERACTIONS:
            raise ConfigError("interaction", f"must be one of {INTERACTIONS}, got {self.interaction!r}")
        if self.kick_width <= 0:
            raise ConfigError("kick_width", "must be positive")
        lo, hi = self.kick_center - self.kick_width / 2, self.kick_center + self.kick_width / 2
        if lo < 0 or hi > self.period_count:
            raise ConfigError("kick_center", f"kick window [{lo:g}, {hi:g}] leaves [0, {self.period_count}] periods")
        if self.sweep is not None:
            for v in self.sweep:
                if not 0.0 < v <= LAMBDA_MAX:
                    raise ConfigError("sweep", f"values must lie in (0, {LAMBDA_MAX:g}], got {v:g}")


_INT_FIELDS = ("cutoff", "period_count", "steps_per_period")
_FLOAT_FIELDS = ("lam", "x0", "kick_center", "kick_width")


def _coerce(kwargs: dict) -> None:
    for name in _INT_FIELDS:
        if name in kwargs and kwargs[name] is not None:
            v = kwargs[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
                raise ConfigError(name, f"must be an integer, got {v!r}")
            kwargs[name] = int(v)
    for name in _FLOAT_FIELDS:
        if name in kwargs:
            v = kwargs[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                key = "lambda" if name == "lam" else name
                raise ConfigError(key, f"must be a finite number, got {v!r}")
            kwargs[name] = float(v)
    for name in ("scenario", "interaction"):
        if name in kwargs and kwargs[name] is not None and not isinstance(kwargs[name], str):
            raise ConfigError(name, f"must be a string, got {kwargs[name]!r}")
    if "sweep" in kwargs and kwargs["sweep"] is not None:
        v = kwargs["sweep"]
        if not isinstance(v, (list, tuple)) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise ConfigError("sweep", f"must be a list of numbers, got {v!r}")


@dataclass
class ScenarioResult:
    """Tabular output of one run.

    ``trajectory`` and ``residuals`` map column name to array (columns in
    :data:`TRAJECTORY_COLUMNS` / :data:`RESIDUAL_COLUMNS` order);
    ``summary`` is a flat map of headline numbers.
    """

    config: ScenarioConfig
    trajectory: dict[str, np.ndarray]
    residuals: dict[str, np.ndarray]
    summary: dict[str, float]
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    slope_stderr: float
    max_deviation: float
    n_points: int


# ---------------------------------------------------------------------------
# shared pieces


def _infidelity(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0
    return float(max(0.0, 1.0 - (abs(np.vdot(a, b)) / (na * nb)) ** 2))


def _trajectory(pair: PrePostPair, space: FockSpace, t: np.ndarray) -> dict[str, np.ndarray]:
    ops = [hilbert.position_op(space), hilbert.momentum_op(space), hilbert.oscillator_hamiltonian(space)]
    wv = weak_trajectory(pair, ops, t)
    return {
        "t": t,
        "x_w_re": wv[0].real,
        "x_w_im": wv[0].imag,
        "p_w_re": wv[1].real,
        "p_w_im": wv[1].imag,
        "H_w_re": wv[2].real,
        "H_w_im": wv[2].imag,
    }


def _residual_row(lam, phi_ref, first, dyson, overlap, pair) -> dict[str, float]:
    zeroth, linear, quad = dyson
    second = zeroth + linear + quad
    return {
        "lambda": float(lam),
        "first_order_residual": float(np.linalg.norm(phi_ref - first)),
        "second_order_residual": float(np.linalg.norm(phi_ref - second)),
        "linearized_residual": float(np.linalg.norm(phi_ref - zeroth - linear)),
        "second_minus_first": float(np.linalg.norm(second - first)),
        "first_order_infidelity": _infidelity(phi_ref, first),
        "second_order_infidelity": _infidelity(phi_ref, second),
        "overlap_abs": float(abs(overlap) / pair.scale),
        "oracle_norm": float(np.linalg.norm(phi_ref)),
    }


def _single_row(row: dict[str, float]) -> dict[str, np.ndarray]:
    return {k: np.array([row[k]]) for k in RESIDUAL_COLUMNS}


def _interaction_ops(space: FockSpace, kind: str) -> tuple[np.ndarray, np.ndarray]:
    op = hilbert.position_op(space) if kind == "xx" else hilbert.momentum_op(space)
    return op, op


def fock_pair_states(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized selection states ``|0> - i|1> + |2>`` and ``|0> + |1> - |2>``."""
    pre = hilbert.superposition(space, [(0, 1.0), (1, -1j), (2, 1.0)])
    post = hilbert.superposition(space, [(0, 1.0), (1, 1.0), (2, -1.0)])
    return pre, post


def expected_fock_coefficient(lam: float) -> complex:
    """``lambda sqrt(1/2) [(1 - sqrt 2) + i (1 + sqrt 2)]`` with unit constants."""
    r2 = math.sqrt(2.0)
    return lam * math.sqrt(0.5) * complex(1.0 - r2, 1.0 + r2)


def gaussian_pair_states(space: FockSpace, x0: float) -> tuple[np.ndarray, np.ndarray]:
    """Coherent states centred at ``+x0`` (pre) and ``-x0`` (post)."""
    alpha = x0 / math.sqrt(2.0)
    return hilbert.coherent_state(space, alpha), hilbert.coherent_state(space, -alpha)


def _five_point_derivative(y: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order central difference on interior points ``2 .. n-3``."""
    return (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12.0 * dt)


def equations_of_motion_residual(t: np.ndarray, x_w: np.ndarray, p_w: np.ndarray) -> float:
    """Max deviation from ``dx_w/dt = p_w`` and ``dp_w/dt = -x_w`` on a uniform grid."""
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise ValueError("equations-of-motion check needs a uniform grid")
    dx = _five_point_derivative(x_w, dt)
    dp = _five_point_derivative(p_w, dt)
    return float(max(np.max(np.abs(dx - p_w[2:-2])), np.max(np.abs(dp + x_w[2:-2]))))


# ---------------------------------------------------------------------------
# scenarios


def run_fock_coupling(cfg: ScenarioConfig, override_guard: bool = False) -> ScenarioResult:
    """Coupled oscillators with Fock-superposition selection and a static coupling."""
    if cfg.scenario != "fock_coupling":
        raise ConfigError("scenario", f"run_fock_coupling needs fock_coupling, got {cfg.scenario!r}")
    cfg.validate(override_guard)
    space = FockSpace(cfg.cutoff)
    h = hilbert.oscillator_hamiltonian(space)
    pre, post = fock_pair_states(space)
    pair = PrePostPair(pre, post, h, 0.0, cfg.tau)
    steps = cfg.steps_per_period * cfg.period_count
    t = np.linspace(0.0, cfg.tau, steps + 1)
    traj = _trajectory(pair, space, t)

    a_op, b_op = _interaction_ops(space, cfg.interaction)
    interaction = SeparableInteraction([(a_op, b_op)], cfg.lam)
    a_w0 = complex(weak_trajectory(pair, [a_op], [0.0])[0, 0])
    coefficient = cfg.lam * a_w0

    phi0 = hilbert.fock_state(space, 0)
    grid = time_grid(pair, steps, interaction)
    system = TwoBodySystem(h, h, interaction)
    phi_c, overlap = conditional_state(system, pre, phi0, post, cfg.tau, override_guard=override_guard)
    phi_ref = phi_c / overlap
    first = conditional_evolve_first_order(phi0, pair, h, interaction, grid)
    dyson = dyson_terms(phi0, pair, h, interaction, grid)
    row = _residual_row(cfg.lam, phi_ref, first, dyson, overlap, pair)

    summary = {
        "lambda": cfg.lam,
        "cutoff": float(cfg.cutoff),
        "period_count": float(cfg.period_count),
        "steps_per_period": float(cfg.steps_per_period),
        "coefficient_real": coefficient.real,
        "coefficient_imag": coefficient.imag,
        "weak_value_ti_real": a_w0.real,
        "weak_value_ti_imag": a_w0.imag,
        "x_w_ti_real": float(traj["x_w_re"][0]),
        "x_w_ti_imag": float(traj["x_w_im"][0]),
        "p_w_ti_real": float(traj["p_w_re"][0]),
        "p_w_ti_imag": float(traj["p_w_im"][0]),
        "H_w_ti_real": float(traj["H_w_re"][0]),
        "H_w_ti_imag": float(traj["H_w_im"][0]),
    }
    if cfg.interaction == "xx":
        expected = expected_fock_coefficient(cfg.lam)
        summary["expected_coefficient_real"] = expected.real
        summary["expected_coefficient_imag"] = expected.imag
        summary["coefficient_error"] = abs(coefficient - expected)
    summary.update({k: v for k, v in row.items() if k != "lambda"})
    return ScenarioResult(cfg, traj, _single_row(row), summary)


def _kick_frame_deltas(phi: np.ndarray, phi0: np.ndarray, h2, x2, p2, t_kick: float, tau: float):
    """Shifts of ``<x2>``, ``<p2>`` seen right after the kick.

    The final state is carried back to the kick time with the free test
    Hamiltonian and compared with the freely evolved initial state there.
    """
    back = hilbert.evolve_free(phi, h2, -(tau - t_kick))
    ref = hilbert.evolve_free(phi0, h2, t_kick)
    dx = conditional_observable(back, x2) - conditional_observable(ref, x2)
    dp = conditional_observable(back, p2) - conditional_observable(ref, p2)
    return dx, dp


def run_gaussian_pair(cfg: ScenarioConfig, override_guard: bool = False) -> ScenarioResult:
    """Separated Gaussian selection: weak trajectories and the test-oscillator kick."""
    if cfg.scenario != "gaussian_pair":
        raise ConfigError("scenario", f"run_gaussian_pair needs gaussian_pair, got {cfg.scenario!r}")
    cfg.validate(override_guard)
    space = FockSpace(cfg.cutoff)
    h = hilbert.oscillator_hamiltonian(space)
    x, p = hilbert.position_op(space), hilbert.momentum_op(space)
    pre, post = gaussian_pair_states(space, cfg.x0)
    pair = PrePostPair(pre, post, h, 0.0, cfg.tau)
    warnings = []
    margin = max(1, cfg.cutoff // 8)
    for name, s in (("pre", pre), ("post", post)):
        tw = hilbert.tail_weight(s, margin)
        if tw > 1e-14:
            warnings.append(f"{name}-selected state carries weight {tw:.2e} in the top {margin} levels")

    steps = cfg.steps_per_period * cfg.period_count
    t = np.linspace(0.0, cfg.tau, steps + 1)
    traj = _trajectory(pair, space, t)
    x_w = traj["x_w_re"] + 1j * traj["x_w_im"]
    p_w = traj["p_w_re"] + 1j * traj["p_w_im"]
    h_w = traj["H_w_re"] + 1j * traj["H_w_im"]
    x2_w, p2_w = weak_trajectory(pair, [x @ x, p @ p], [0.0])[:, 0]
    h_w_linear = 0.5 * (x2_w + p2_w)

    # kick experiment
    a_op, b_op = _interaction_ops(space, cfg.interaction)
    t_kick = cfg.kick_time
    width = 2.0 * np.pi * cfg.kick_width
    window = PiecewiseConstantProfile.window(t_kick, width)
    interaction = SeparableInteraction([(a_op, b_op)], -cfg.lam, window)
    # the test oscillator carries the stated profile at the kick time
    profile_state = hilbert.squeezed_vacuum(space, 1.0 if cfg.interaction == "pp" else 0.25)
    phi0 = hilbert.evolve_free(profile_state, h, -t_kick)
    if cfg.interaction == "pp":
        predicted = cfg.lam * cfg.x0 * math.cos(t_kick) / 2.0
    else:
        predicted = cfg.lam * cfg.x0 * math.sin(t_kick) / 2.0
    grid = time_grid(pair, steps, interaction)

    system = TwoBodySystem(h, h, interaction)
    phi_c, overlap = conditional_state(system, pre, phi0, post, cfg.tau, override_guard=override_guard)
    phi_ref = phi_c / overlap
    first = conditional_evolve_first_order(phi0, pair, h, interaction, grid)
    dyson = dyson_terms(phi0, pair, h, interaction, grid)
    row = _residual_row(cfg.lam, phi_ref, first, dyson, overlap, pair)
    o_dx, o_dp = _kick_frame_deltas(phi_ref, phi0, h, x, p, t_kick, cfg.tau)
    f_dx, f_dp = _kick_frame_deltas(first, phi0, h, x, p, t_kick, cfg.tau)

    # test oscillator frozen apart from the kick
    h_static = np.zeros_like(h)
    static = TwoBodySystem(h, h_static, interaction)
    phi_s, ov_s = conditional_state(static, pre, profile_state, post, cfg.tau, override_guard=override_guard)
    s_dx, s_dp = _kick_frame_deltas(phi_s / ov_s, profile_state, h_static, x, p, t_kick, cfg.tau)

    # coupling spread uniformly over the whole interval
    spread = SeparableInteraction([(a_op, b_op)], -cfg.lam, PiecewiseConstantProfile.constant(0.0, cfg.tau))
    spread_sys = TwoBodySystem(h, h, spread)
    phi_u, ov_u = conditional_state(spread_sys, pre, phi0, post, cfg.tau, override_guard=override_guard)
    ref_u = hilbert.evolve_free(phi0, h, cfg.tau)
    u_dx = conditional_observable(phi_u, x) - conditional_observable(ref_u, x)
    u_dp = conditional_observable(phi_u, p) - conditional_observable(ref_u, p)

    periodic = np.abs(x_w + 1j * cfg.x0 * np.sin(t)).max(), np.abs(p_w + 1j * cfg.x0 * np.cos(t)).max()
    summary = {
        "lambda": cfg.lam,
        "x0": cfg.x0,
        "cutoff": float(cfg.cutoff),
        "period_count": float(cfg.period_count),
        "steps_per_period": float(cfg.steps_per_period),
        "kick_time": t_kick,
        "kick_width": width,
        "x_w_ti_real": float(x_w[0].real),
        "x_w_ti_imag": float(x_w[0].imag),
        "p_w_ti_real": float(p_w[0].real),
        "p_w_ti_imag": float(p_w[0].imag),
        "H_w_ti_real": float(h_w[0].real),
        "H_w_ti_imag": float(h_w[0].imag),
        "H_w_linear_real": float(h_w_linear.real),
        "H_w_linear_imag": float(h_w_linear.imag),
        "H_w_expected": (1.0 - cfg.x0**2) / 2.0,
        "H_w_max_drift": float(np.abs(h_w - h_w[0]).max()),
        "x_w_traj_max_dev": float(periodic[0]),
        "p_w_traj_max_dev": float(periodic[1]),
        "eom_max_residual": equations_of_motion_residual(t, x_w, p_w),
        "selection_overlap_abs": float(abs(pair.overlap) / pair.scale),
        "predicted_shift": predicted,
        "oracle_delta_x2": o_dx,
        "oracle_delta_p2": o_dp,
        "first_order_delta_x2": f_dx,
        "first_order_delta_p2": f_dp,
        "static_oracle_delta_x2": s_dx,
        "static_oracle_delta_p2": s_dp,
        "constant_profile_oracle_delta_x2": u_dx,
        "constant_profile_oracle_delta_p2": u_dp,
    }
    summary.update({k: v for k, v in row.items() if k != "lambda"})
    return ScenarioResult(cfg, traj, _single_row(row), summary, warnings)


RUNNERS = {"fock_coupling": run_fock_coupling, "gaussian_pair": run_gaussian_pair}


def run_scenario(cfg: ScenarioConfig, override_guard: bool = False) -> ScenarioResult:
    return RUNNERS[cfg.scenario](cfg, override_guard=override_guard)


# ---------------------------------------------------------------------------
# sweeps


def sweep_and_fit(lams: Sequence[float], residuals: Sequence[float]) -> PowerLawFit:
    """Least-squares slope of ``log(residual)`` against ``log(lambda)``.

    Raises
    ------
    DegenerateSweep
        Fewer than three points, a range under 4x, or a nonpositive residual.
    """
    lams = np.asarray(lams, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if lams.size < 3 or lams.size != res.size:
        raise DegenerateSweep(f"need at least 3 matching points, got {lams.size} lambdas, {res.size} residuals")
    if np.any(lams <= 0) or lams.max() / lams.min() < 4.0:
        raise DegenerateSweep("lambda values must be positive and span at least a factor of 4")
    if np.any(~np.isfinite(res)) or np.any(res <= 0):
        raise DegenerateSweep("residuals must be finite and positive")
    lx, ly = np.log(lams), np.log(res)
    fit = stats.linregress(lx, ly)
    dev = np.abs(ly - (fit.intercept + fit.slope * lx)).max()
    return PowerLawFit(float(fit.slope), float(fit.intercept), float(fit.stderr), float(dev), int(lams.size))


def _check_sweep(values) -> tuple[float, ...]:
    if values is None:
        raise DegenerateSweep("config has no sweep list")
    values = tuple(float(v) for v in values)
    if len(values) < 3:
        raise DegenerateSweep(f"sweep needs at least 3 lambda values, got {len(values)}")
    if min(values) <= 0 or max(values) / min(values) < 4.0:
        raise DegenerateSweep("sweep values must be positive and span at least a factor of 4")
    return values


def default_workers() -> int:
    env = os.environ.get("WEAKPOT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SweepResult:
    runs: list[ScenarioResult]
    fits: dict[str, PowerLawFit]

    @property
    def lams(self) -> list[float]:
        return [r.config.lam for r in self.runs]


SWEEP_FITS = {
    "first_order": "first_order_residual",
    "second_order": "second_order_residual",
    "second_minus_first": "second_minus_first",
}


def run_sweep(cfg: ScenarioConfig, workers: int | None = None, override_guard: bool = False) -> SweepResult:
    """Run the scenario at every ``cfg.sweep`` value and fit residual exponents.

    Runs fan out over a thread pool; results are kept in sweep order.
    """
    values = _check_sweep(cfg.sweep)
    cfg.validate(override_guard)
    configs = [replace(cfg, lam=v, sweep=None) for v in values]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda c: run_scenario(c, override_guard), configs))
    else:
        runs = [run_scenario(c, override_guard) for c in configs]
    fits = {
        name: sweep_and_fit(values, [r.summary[col] for r in runs]) for name, col in SWEEP_FITS.items()
    }
    return SweepResult(runs, fits)


def convergence_report(cfg: ScenarioConfig, override_guard: bool = False) -> list[dict[str, Any]]:
    """Rerun with doubled cutoff and, separately, doubled steps per period.

    Returns one row per headline number with the base value, both refined
    values, the largest change relative to ``max(|base|, 1)`` and a
    ``flagged`` bit when that exceeds the tolerance.
    """
    refined = [replace(cfg, cutoff=2 * cfg.cutoff), replace(cfg, steps_per_period=2 * cfg.steps_per_period)]
    # fail on the guard before spending time on the base run
    for c in [cfg] + refined:
        c.validate(override_guard)
    base = run_scenario(cfg, override_guard)
    finer_cut, finer_dt = (run_scenario(c, override_guard) for c in refined)
    rows = []
    for key in sorted(base.summary):
        if key in _ECHO_KEYS:
            continue
        b = base.summary[key]
        c = finer_cut.summary[key]
        s = finer_dt.summary[key]
        change = max(abs(c - b), abs(s - b)) / max(abs(b), 1.0)
        rows.append(
            {
                "key": key,
                "base": b,
                "cutoff_doubled": c,
                "steps_doubled": s,
                "relative_change": change,
                "flagged": change > CONVERGENCE_TOL,
            }
        )
    return rows
