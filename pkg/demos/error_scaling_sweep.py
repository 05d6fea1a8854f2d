"""
How the approximations fail as the coupling grows
=================================================

Sweep ``lambda`` for the coupled-oscillator scenario and fit the residual of
each approximation against the exact conditional state on a log-log scale.
The first-order weak potential misses terms of order ``lambda^2`` and the
second-order expansion misses ``lambda^3``. The product formula used to
justify the first-order picture is checked alongside.
"""

import numpy as np
from scipy.stats import linregress

from weakpot import hilbert
from weakpot.oracle import TwoBodySystem, evolve_exact, evolve_trotter
from weakpot.scenarios import ScenarioConfig, run_sweep
from weakpot.weakpotential import SeparableInteraction

sweep = run_sweep(ScenarioConfig("fock_coupling", sweep=(1e-3, 2e-3, 4e-3, 8e-3)))
for run in sweep.runs:
    s = run.summary
    print(f"lambda={run.config.lam:.0e}  first={s['first_order_residual']:.3e}  "
          f"second={s['second_order_residual']:.3e}")
for name, fit in sweep.fits.items():
    print(f"{name:>20}: exponent {fit.slope:.4f} +/- {fit.slope_stderr:.1e}")

# %%
# Product formulas: interleaving converges like 1/N, grouping all the
# interaction factors together leaves an error linear in lambda.
space = hilbert.FockSpace(10)
h = hilbert.oscillator_hamiltonian(space)
x = hilbert.position_op(space)
g = hilbert.fock_state(space, 0)
psi = np.kron(g, g)
tau = 2 * np.pi

system = TwoBodySystem(h, h, SeparableInteraction([(x, x)], 0.05))
exact = evolve_exact(system, psi, tau)
steps = [32, 64, 128, 256]
errs = [np.linalg.norm(evolve_trotter(system, psi, tau, n) - exact) for n in steps]
print("interleaved errors:", ", ".join(f"{e:.2e}" for e in errs))
print("N-exponent:", linregress(np.log(steps), np.log(errs)).slope)

lams = [0.0125, 0.025, 0.05, 0.1]
devs = []
for lam in lams:
    sys_l = TwoBodySystem(h, h, SeparableInteraction([(x, x)], lam))
    devs.append(np.linalg.norm(evolve_trotter(sys_l, psi, tau, 256, "grouped") - evolve_exact(sys_l, psi, tau)))
print("grouped deviations:", ", ".join(f"{d:.2e}" for d in devs))
print("lambda-exponent:", linregress(np.log(lams), np.log(devs)).slope)
