"""Effective conditional dynamics of a test particle coupled to a pre/post-selected one.

The coupling is ``H_int(t) = lambda * g(t) * sum_k A_k (x) B_k`` with ``A_k``
acting on the selected particle 1 and ``B_k`` on the test particle 2. To first
order in ``lambda`` the test particle sees the (non-Hermitian) weak potential

    V_w(t) = lambda * g(t) * sum_k (A_k)_w(t) * B_k

and its conditional state is the time-ordered exponential of ``H_2 + V_w(t)``.
The second-order routine keeps the full two-time kernel
``<post| ... A_k(t) A_l(t') ... |pre> / <post|U|pre>`` instead of the product
of two weak values, i.e. the exact Dyson expansion through ``lambda^2``.

Both propagators work in the interaction picture of the free Hamiltonians and
step with the fourth-order Magnus scheme on two Gauss-Legendre nodes per
interval, so splitting error is ``O(lambda h^4)`` rather than ``O(h^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatch, StepTooLarge
from .hilbert import check_dims, eigensystem
from .weakvalue import PrePostPair, weak_trajectory

MAX_STEP_NORM = 0.1
_GAUSS_OFFSETS = np.array([0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0])


@dataclass(frozen=True, eq=False)
class PiecewiseConstantProfile:
    """Tabulated temporal profile ``g(t)``: ``values[j]`` on ``[edges[j], edges[j+1])``.

    Outside ``[edges[0], edges[-1]]`` the profile is zero. When
    ``normalized`` is set (the default) the integral must equal 1.
    """

    edges: np.ndarray
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)
        if edges.ndim != 1 or values.shape != (edges.size - 1,) or edges.size < 2:
            raise ValueError("need len(values) == len(edges) - 1 >= 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("profile edges must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("profile values must be nonnegative")
        if self.normalized and abs(self.integral() - 1.0) > 1e-10:
            raise ValueError(f"profile integrates to {self.integral():.12g}, expected 1")

    @classmethod
    def constant(cls, t_i: float, t_f: float) -> "PiecewiseConstantProfile":
        """Uniform ``g = 1/(t_f - t_i)`` on the selection interval."""
        return cls(np.array([t_i, t_f]), np.array([1.0 / (t_f - t_i)]))

    @classmethod
    def window(cls, center: float, width: float) -> "PiecewiseConstantProfile":
        """Box of height ``1/width`` centred on ``center``."""
        if width <= 0:
            raise ValueError("window width must be positive")
        return cls(np.array([center - width / 2, center + width / 2]), np.array([1.0 / width]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        return np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)

    def integral(self) -> float:
        return float(np.sum(self.values * np.diff(self.edges)))

    @property
    def breakpoints(self) -> np.ndarray:
        return self.edges

    def segments(self, t0: float, t1: float) -> list[tuple[float, float, float]]:
        """Split ``[t0, t1]`` into ``(start, stop, g)`` pieces of constant ``g``."""
        cuts = [t0] + [b for b in self.edges if t0 < b < t1] + [t1]
        return [(a, b, float(self(0.5 * (a + b)))) for a, b in zip(cuts[:-1], cuts[1:])]


@dataclass(frozen=True, eq=False)
class SeparableInteraction:
    """``lambda * g(t) * sum_k A_k (x) B_k``.

    ``profile=None`` means ``g = 1`` at all times: a static coupling term
    in the Hamiltonian, as in two oscillators coupled by ``lambda x1 x2``.
    """

    terms: Sequence[tuple[np.ndarray, np.ndarray]]
    coupling: float
    profile: PiecewiseConstantProfile | None = None

    def __post_init__(self):
        if not self.terms:
            raise ValueError("interaction needs at least one term")
        check_dims(*[a for a, _ in self.terms])
        check_dims(*[b for _, b in self.terms])

    @property
    def dims(self) -> tuple[int, int]:
        a, b = self.terms[0]
        return a.shape[0], b.shape[0]

    def g(self, t):
        if self.profile is None:
            return np.ones_like(np.asarray(t, dtype=float))
        return self.profile(t)

    def segments(self, t0: float, t1: float) -> list[tuple[float, float, float]]:
        if self.profile is None:
            return [(t0, t1, 1.0)]
        return self.profile.segments(t0, t1)

    def breakpoints(self) -> np.ndarray:
        return np.empty(0) if self.profile is None else self.profile.breakpoints

    def two_body_operator(self) -> np.ndarray:
        """``sum_k A_k (x) B_k`` without coupling or profile."""
        return sum(np.kron(a, b) for a, b in self.terms)

    def with_coupling(self, coupling: float) -> "SeparableInteraction":
        return SeparableInteraction(self.terms, coupling, self.profile)


@dataclass(frozen=True)
class EffectiveHamiltonianSeries:
    """``H_2 + V_w(t)`` tabulated on ``t_grid``; ``matrices[j]`` belongs to ``t_grid[j]``."""

    t_grid: np.ndarray
    matrices: np.ndarray = field(repr=False)


def time_grid(pair: PrePostPair, steps: int, interaction: SeparableInteraction | None = None) -> np.ndarray:
    """Uniform grid of ``steps`` intervals over the selection window, plus profile breakpoints."""
    grid = np.linspace(pair.t_i, pair.t_f, int(steps) + 1)
    return _merge_breakpoints(grid, interaction)


def _merge_breakpoints(grid: np.ndarray, interaction: SeparableInteraction | None) -> np.ndarray:
    if interaction is None:
        return grid
    t0, t1 = grid[0], grid[-1]
    span = t1 - t0
    extra = [b for b in interaction.breakpoints() if t0 < b < t1]
    merged = np.union1d(grid, extra)
    # drop near-duplicates left by the union so no step degenerates
    keep = np.concatenate([[True], np.diff(merged) > 1e-12 * span])
    merged = merged[keep]
    merged[-1] = t1
    return merged


def _resolve_grid(pair: PrePostPair, interaction: SeparableInteraction, t_grid) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing sequence of at least two times")
    tol = 1e-12 * pair.duration
    if abs(grid[0] - pair.t_i) > tol or abs(grid[-1] - pair.t_f) > tol:
        raise ValueError(f"t_grid must span the selection interval [{pair.t_i}, {pair.t_f}]")
    return _merge_breakpoints(grid, interaction)


class _Picture:
    """Eigenbasis of a free Hamiltonian, used to move operators into the interaction picture."""

    def __init__(self, h: np.ndarray, t0: float):
        self.t0 = t0
        self.e, self.v = eigensystem(h)
        self.gap = np.subtract.outer(self.e, self.e)

    def to_eigen_op(self, op: np.ndarray) -> np.ndarray:
        return op if self.v is None else self.v.conj().T @ op @ self.v

    def to_eigen_vec(self, vec: np.ndarray) -> np.ndarray:
        return vec if self.v is None else self.v.conj().T @ vec

    def rotate(self, op_eigen: np.ndarray, t: float) -> np.ndarray:
        """``U^dagger(t - t0) O U(t - t0)`` in the eigenbasis."""
        return op_eigen * np.exp(1j * self.gap * (t - self.t0))

    def to_lab_vec(self, vec_eigen: np.ndarray, t: float) -> np.ndarray:
        out = np.exp(-1j * self.e * (t - self.t0)) * vec_eigen
        return out if self.v is None else self.v @ out


def _gauss_nodes(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.diff(grid)
    nodes = grid[:-1, None] + h[:, None] * _GAUSS_OFFSETS[None, :]
    return h, nodes


def _step_weak_values(pair, interaction, nodes):
    ops = [a for a, _ in interaction.terms]
    wv = weak_trajectory(pair, ops, nodes.ravel())
    return wv.reshape(len(ops), *nodes.shape)


def _check_inputs(phi0, pair, h2, interaction):
    d1, d2 = interaction.dims
    check_dims(h2, dim=d2)
    if d1 != pair.dim:
        raise DimensionMismatch(f"interaction acts on particle-1 dimension {d1}, pair has {pair.dim}")
    if phi0.shape != (d2,):
        raise DimensionMismatch(f"phi0 has shape {phi0.shape}, expected ({d2},)")


def weak_potential_first_order(pair: PrePostPair, interaction: SeparableInteraction, t: float) -> np.ndarray:
    """Weak potential ``lambda g(t) sum_k (A_k)_w(t) B_k`` on particle 2 at time ``t``."""
    ops = [a for a, _ in interaction.terms]
    wv = weak_trajectory(pair, ops, [t])[:, 0]
    g = float(interaction.g(t))
    d2 = interaction.dims[1]
    out = np.zeros((d2, d2), dtype=complex)
    for w, (_, b) in zip(wv, interaction.terms):
        out += w * b
    return interaction.coupling * g * out


def effective_hamiltonian(
    pair: PrePostPair, h2: np.ndarray, interaction: SeparableInteraction, t_grid
) -> EffectiveHamiltonianSeries:
    """Tabulate ``H_2 + V_w(t)`` on a grid (values at the grid points themselves)."""
    t = np.asarray(t_grid, dtype=float)
    ops = [a for a, _ in interaction.terms]
    wv = weak_trajectory(pair, ops, t)
    g = interaction.g(t)
    mats = np.repeat(h2[None, :, :].astype(complex), t.size, axis=0)
    for k, (_, b) in enumerate(interaction.terms):
        mats += (interaction.coupling * g * wv[k])[:, None, None] * b[None, :, :]
    return EffectiveHamiltonianSeries(t, mats)


def conditional_evolve_first_order(
    phi0: np.ndarray,
    pair: PrePostPair,
    h2: np.ndarray,
    interaction: SeparableInteraction,
    t_grid,
    max_step_norm: float = MAX_STEP_NORM,
) -> np.ndarray:
    """Test-particle state under ``T exp(-i int [H_2 + V_w(t)] dt)``.

    The result is the unnormalized predicted conditional state, directly
    comparable with the exact post-selected amplitude divided by the free
    overlap ``<post|U_1(tau)|pre>``. It is never renormalized along the way:
    the weak potential is not Hermitian and the norm change is physical.

    Raises
    ------
    StepTooLarge
        If ``|V_w| * h`` reaches ``max_step_norm`` on some step
        (interaction-picture generator, spectral norm).
    """
    _check_inputs(phi0, pair, h2, interaction)
    grid = _resolve_grid(pair, interaction, t_grid)
    h, nodes = _gauss_nodes(grid)
    g = interaction.g(0.5 * (grid[:-1] + grid[1:]))
    wv = _step_weak_values(pair, interaction, nodes)
    pic = _Picture(h2, pair.t_i)
    bs = [pic.to_eigen_op(b) for _, b in interaction.terms]
    lam = interaction.coupling

    chi = pic.to_eigen_vec(phi0.astype(complex))
    for j in range(h.size):
        if g[j] == 0 or lam == 0:
            continue
        gens = []
        for q in range(2):
            m = sum(wv[k, j, q] * pic.rotate(b, nodes[j, q]) for k, b in enumerate(bs))
            gens.append(-1j * lam * g[j] * m)
        step_norm = max(np.linalg.norm(x, 2) for x in gens) * h[j]
        if step_norm >= max_step_norm:
            raise StepTooLarge(
                f"step {j} at t={grid[j]:.6g}: |V_w| h = {step_norm:.3g} >= {max_step_norm}; refine the grid"
            )
        a1, a2 = gens
        omega = 0.5 * h[j] * (a1 + a2) + (np.sqrt(3.0) / 12.0) * h[j] ** 2 * (a2 @ a1 - a1 @ a2)
        chi = expm(omega) @ chi
    return pic.to_lab_vec(chi, pair.t_f)


def dyson_terms(
    phi0: np.ndarray,
    pair: PrePostPair,
    h2: np.ndarray,
    interaction: SeparableInteraction,
    t_grid,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zeroth, first and second order Dyson contributions to the conditional state.

    Each term is already divided by ``<post|U_1(tau)|pre>``. The second-order
    term is

        -lambda^2 sum_kl int_{t > t'} g(t) g(t') K_kl(t, t') B_k(t) B_l(t') phi0

    with the two-time kernel ``K_kl = <post|U(t_f,t) A_k U(t,t') A_l U(t',t_i)|pre>
    / <post|U(t_f,t_i)|pre>``. It is evaluated by propagating the two-body
    hierarchy ``Y1' = F Y0``, ``Y2' = F Y1`` in the joint interaction picture
    and contracting with the post-selected state at the end; the
    contraction reproduces the kernel form exactly.
    """
    _check_inputs(phi0, pair, h2, interaction)
    grid = _resolve_grid(pair, interaction, t_grid)
    h, nodes = _gauss_nodes(grid)
    g = interaction.g(0.5 * (grid[:-1] + grid[1:]))
    pic1 = _Picture(pair.h_free, pair.t_i)
    pic2 = _Picture(h2, pair.t_i)
    as_ = [pic1.to_eigen_op(a) for a, _ in interaction.terms]
    bs = [pic2.to_eigen_op(b) for _, b in interaction.terms]
    lam = interaction.coupling

    y0 = np.outer(pic1.to_eigen_vec(pair.pre), pic2.to_eigen_vec(phi0.astype(complex)))
    y1 = np.zeros_like(y0)
    y2 = np.zeros_like(y0)

    for j in range(h.size):
        if g[j] == 0 or lam == 0:
            continue
        ops = []
        for q in range(2):
            s = nodes[j, q]
            ops.append([(pic1.rotate(a, s), pic2.rotate(b, s).T) for a, b in zip(as_, bs)])
        c = -1j * lam * g[j]

        def apply(q, y):
            return c * sum(a @ y @ bt for a, bt in ops[q])

        def omega1(y):
            return 0.5 * h[j] * (apply(0, y) + apply(1, y))

        def omega2(y):
            return (np.sqrt(3.0) / 12.0) * h[j] ** 2 * (apply(1, apply(0, y)) - apply(0, apply(1, y)))

        d1 = omega1(y0)
        y2 = y2 + omega1(y1) + 0.5 * omega1(d1) + omega2(y0)
        y1 = y1 + d1

    bra = np.exp(-1j * pic1.e * pair.duration).conj() * pic1.to_eigen_vec(pair.post)
    terms = []
    for y in (y0, y1, y2):
        phi = bra.conj() @ y
        terms.append(pic2.to_lab_vec(phi, pair.t_f) / pair.overlap)
    return terms[0], terms[1], terms[2]


def conditional_evolve_second_order(
    phi0: np.ndarray,
    pair: PrePostPair,
    h2: np.ndarray,
    interaction: SeparableInteraction,
    t_grid,
) -> np.ndarray:
    """Conditional test-particle state accurate through ``O(lambda^2)``.

    Same normalization convention as :func:`conditional_evolve_first_order`.
    Dropping the second-order term (``sum(dyson_terms(...)[:2])``) leaves
    the linearized first-order prediction.
    """
    z, f, s = dyson_terms(phi0, pair, h2, interaction, t_grid)
    return z + f + s
