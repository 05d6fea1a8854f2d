"""Command-line entry point.

    weakpot run CONFIG --out DIR [--override-dimension-guard]
    weakpot sweep CONFIG --out DIR [--override-dimension-guard]
    weakpot selftest

CONFIG is a flat JSON object whose keys are the :class:`ScenarioConfig`
field names (``lambda`` for the coupling). Unknown keys are rejected.

Exit codes: 0 success, 1 internal error, 2 invalid configuration
(including a time grid too coarse for the coupling) or degenerate sweep,
3 numerical guard tripped, 4 selftest failure.
``WEAKPOT_WORKERS`` sets the sweep thread count (default: all cores).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import __version__
from . import hilbert, scenarios, weakpotential, weakvalue
from .errors import ConfigError, DegenerateSweep, NumericalGuard, StepTooLarge

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_SELFTEST = 4

# summary.json keys are a stable contract; new keys may be added, none renamed
SWEEP_FIT_KEYS = ("exponent", "intercept", "exponent_stderr", "max_deviation")


def format_float(v: float) -> str:
    """17 significant digits: round-trips a double exactly."""
    return format(float(v), ".17g")


def write_csv(path: Path, columns: Mapping[str, Sequence[float]]) -> None:
    names = list(columns)
    n = len(next(iter(columns.values())))
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(format_float(columns[c][i]) for c in names))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_config(path) -> scenarios.ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return scenarios.ScenarioConfig.from_mapping(data)


def _write_run(out: Path, result: scenarios.ScenarioResult) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trajectory.csv", {c: result.trajectory[c] for c in scenarios.TRAJECTORY_COLUMNS})
    write_csv(out / "residuals.csv", {c: result.residuals[c] for c in scenarios.RESIDUAL_COLUMNS})
    write_json(out / "summary.json", {k: float(v) for k, v in result.summary.items()})
    return ["trajectory.csv", "residuals.csv", "summary.json"]


def _write_manifest(out: Path, command: str, cfg, files, started, override, warnings, extra=None) -> None:
    manifest = {
        "command": command,
        "config": cfg.to_mapping(),
        "version": __version__,
        "duration_seconds": time.perf_counter() - started,
        "flags": {"override_dimension_guard": bool(override)},
        "warnings": list(warnings),
        "files": {name: _sha256(out / name) for name in files},
    }
    if extra:
        manifest.update(extra)
    write_json(out / "manifest.json", manifest)


def _guarded(fn: Callable[[], int]) -> int:
    try:
        return fn()
    except (ConfigError, DegenerateSweep) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StepTooLarge as exc:
        print(f"error: steps_per_period: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuard as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except Exception as exc:  # noqa: BLE001 - report and map to the internal-error code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def cmd_run(config_path, out_dir, override_guard: bool = False) -> int:
    def body():
        started = time.perf_counter()
        cfg = load_config(config_path)
        cfg.validate(override_guard)
        result = scenarios.run_scenario(cfg, override_guard)
        out = Path(out_dir)
        files = _write_run(out, result)
        _write_manifest(out, "run", cfg, files, started, override_guard, result.warnings)
        for w in result.warnings:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_OK

    return _guarded(body)


def cmd_sweep(config_path, out_dir, override_guard: bool = False, workers: int | None = None) -> int:
    def body():
        started = time.perf_counter()
        cfg = load_config(config_path)
        cfg.validate(override_guard)
        sweep = scenarios.run_sweep(cfg, workers=workers, override_guard=override_guard)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        warnings = []
        subdirs = []
        for i, run in enumerate(sweep.runs):
            name = f"lambda_{i:02d}_{run.config.lam:.6g}"
            files = _write_run(out / name, run)
            _write_manifest(out / name, "sweep", run.config, files, started, override_guard, run.warnings)
            warnings.extend(run.warnings)
            subdirs.append(name)
        combined = {c: np.concatenate([r.residuals[c] for r in sweep.runs]) for c in scenarios.RESIDUAL_COLUMNS}
        write_csv(out / "residuals.csv", combined)
        fit = {}
        for label, f in sweep.fits.items():
            fit[f"{label}_exponent"] = f.slope
            fit[f"{label}_intercept"] = f.intercept
            fit[f"{label}_exponent_stderr"] = f.slope_stderr
            fit[f"{label}_max_deviation"] = f.max_deviation
        fit["n_points"] = float(len(sweep.runs))
        write_json(out / "sweep_fit.json", fit)
        _write_manifest(
            out,
            "sweep",
            cfg,
            ["residuals.csv", "sweep_fit.json"],
            started,
            override_guard,
            warnings,
            {"runs": subdirs, "workers": workers or scenarios.default_workers()},
        )
        return EXIT_OK

    return _guarded(body)


# ---------------------------------------------------------------------------
# selftest


def _check_ladder():
    space = hilbert.FockSpace(12)
    a = hilbert.annihilation(space)
    comm = a @ a.conj().T - a.conj().T @ a
    err = np.abs(comm[:-1, :-1] - np.eye(11)).max()
    return err < 1e-12, f"max |[a, a+] - 1| below cutoff = {err:.1e}"


def _check_xp():
    space = hilbert.FockSpace(30)
    c = hilbert.commutator(hilbert.position_op(space), hilbert.momentum_op(space))
    err = np.abs(c[:-2, :-2] - 1j * np.eye(28)).max()
    return err < 1e-12, f"max |[x, p] - i| for n < cutoff-2 = {err:.1e}"


def _check_hamiltonian():
    space = hilbert.FockSpace(30)
    diff = hilbert.quadrature_hamiltonian(space) - hilbert.oscillator_hamiltonian(space)
    err = np.abs(diff[:28, :28]).max()
    return err < 1e-10, f"(x^2+p^2)/2 vs diag(n+1/2) = {err:.1e}"


def _check_coherent_overlap():
    space = hilbert.FockSpace(40)
    a = math.sqrt(2.0)
    ov = hilbert.inner(hilbert.coherent_state(space, -a), hilbert.coherent_state(space, a))
    err = abs(ov - math.exp(-4.0))
    return err < 1e-10, f"<-a|a> - e^-4 = {err:.1e}"


def _check_fock_coefficient():
    space = hilbert.FockSpace(6)
    pre, post = scenarios.fock_pair_states(space)
    h = hilbert.oscillator_hamiltonian(space)
    pair = weakvalue.PrePostPair(pre, post, h)
    x = hilbert.position_op(space)
    lam = 1e-2
    vw = weakpotential.weak_potential_first_order(
        pair, weakpotential.SeparableInteraction([(x, x)], lam), 0.0
    )
    # V_w = c x2, so c = <0|V_w|1> / <0|x|1>
    coef = vw[0, 1] / x[0, 1]
    err = abs(coef - scenarios.expected_fock_coefficient(lam))
    return err < 1e-12, f"coefficient error {err:.1e}"


def _gaussian_pair(x0=2.0, cutoff=40):
    space = hilbert.FockSpace(cutoff)
    pre, post = scenarios.gaussian_pair_states(space, x0)
    return space, weakvalue.PrePostPair(pre, post, hilbert.oscillator_hamiltonian(space))


def _check_gaussian_endpoints():
    space, pair = _gaussian_pair()
    xw, pw = weakvalue.weak_trajectory(pair, [hilbert.position_op(space), hilbert.momentum_op(space)], [0.0])[:, 0]
    err = max(abs(xw), abs(pw + 2j))
    return err < 1e-9, f"|x_w(0)|, |p_w(0) + 2i| <= {err:.1e}"


def _check_gaussian_trajectory():
    space, pair = _gaussian_pair()
    t = np.linspace(0.0, 2 * np.pi, 64)
    xw, pw = weakvalue.weak_trajectory(pair, [hilbert.position_op(space), hilbert.momentum_op(space)], t)
    err = max(np.abs(xw + 2j * np.sin(t)).max(), np.abs(pw + 2j * np.cos(t)).max())
    return err < 1e-7, f"max trajectory deviation {err:.1e}"


def _check_energy_weak_value():
    worst = 0.0
    for x0 in (1.5, 2.0, 3.0):
        space, pair = _gaussian_pair(x0)
        hw = weakvalue.weak_value(pair, hilbert.oscillator_hamiltonian(space))
        worst = max(worst, abs(hw - (1 - x0**2) / 2))
    return worst < 1e-8, f"max |H_w - (1-x0^2)/2| = {worst:.1e}"


def _check_unitarity():
    space = hilbert.FockSpace(40)
    s = hilbert.coherent_state(space, math.sqrt(2.0))
    out = hilbert.evolve_free(s, hilbert.oscillator_hamiltonian(space), 1.234)
    err = abs(np.linalg.norm(out) - np.linalg.norm(s))
    return err < 1e-12, f"norm drift {err:.1e}"


def _check_fock_lambda_zero():
    res = scenarios.run_fock_coupling(scenarios.ScenarioConfig("fock_coupling", lam=0.0, cutoff=6))
    worst = max(res.summary[k] for k in ("first_order_residual", "second_order_residual", "second_minus_first"))
    return worst < 1e-10, f"max residual {worst:.1e}"


def _check_gaussian_lambda_zero():
    res = scenarios.run_gaussian_pair(scenarios.ScenarioConfig("gaussian_pair", lam=0.0, cutoff=24))
    worst = max(res.summary[k] for k in ("first_order_residual", "second_order_residual", "second_minus_first"))
    return worst < 1e-10, f"max residual {worst:.1e}"


SELFTEST_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("ladder_commutator", _check_ladder),
    ("xp_commutator", _check_xp),
    ("hamiltonian_crosscheck", _check_hamiltonian),
    ("coherent_overlap", _check_coherent_overlap),
    ("unitarity", _check_unitarity),
    ("fock_coefficient", _check_fock_coefficient),
    ("gaussian_endpoints", _check_gaussian_endpoints),
    ("gaussian_trajectories", _check_gaussian_trajectory),
    ("negative_energy_weak_value", _check_energy_weak_value),
    ("fock_lambda_zero", _check_fock_lambda_zero),
    ("gaussian_lambda_zero", _check_gaussian_lambda_zero),
]


def cmd_selftest(out=None) -> int:
    out = out or sys.stdout
    failed = []
    for name, check in SELFTEST_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'}  {name:<28} {detail}", file=out)
        if not ok:
            failed.append(name)
    if failed:
        print(f"selftest failed: {', '.join(failed)}", file=out)
        return EXIT_SELFTEST
    print(f"selftest passed: {len(SELFTEST_CHECKS)} checks", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakpot", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run one scenario"), ("sweep", "run a lambda sweep and fit exponents")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="flat JSON scenario config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--override-dimension-guard", action="store_true", help="allow two-body dimension > 4096")
    sub.add_parser("selftest", help="run the fast acceptance subset")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.override_dimension_guard)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.out, args.override_dimension_guard)
    return cmd_selftest()


if __name__ == "__main__":
    raise SystemExit(main())
