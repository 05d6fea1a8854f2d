"""
Weak trajectories of a pre/post-selected Gaussian
=================================================

Pre-select a Gaussian centred at ``+x0`` and post-select one centred at
``-x0`` a full period later. The position weak value stays on the axis
(``x_w = -i x0 sin t``), the momentum weak value is imaginary
(``p_w = -i x0 cos t``), and the energy weak value is negative.
"""

import numpy as np

from weakpot import hilbert
from weakpot.scenarios import equations_of_motion_residual, gaussian_pair_states
from weakpot.weakvalue import PrePostPair, weak_trajectory

space = hilbert.FockSpace(40)
h = hilbert.oscillator_hamiltonian(space)
x, p = hilbert.position_op(space), hilbert.momentum_op(space)

x0 = 2.0
pair = PrePostPair(*gaussian_pair_states(space, x0), h)
print(f"selection overlap |<post|U|pre>| = {abs(pair.overlap):.4e}  (exp(-x0^2) = {np.exp(-x0**2):.4e})")

t = np.linspace(0, 2 * np.pi, 9)
xw, pw, hw = weak_trajectory(pair, [x, p, h], t)
print(f"{'t':>7} {'x_w':>22} {'p_w':>22} {'H_w':>8}")
for tj, a, b, c in zip(t, xw, pw, hw):
    print(f"{tj:7.3f} {a.real:+9.2e}{a.imag:+10.6f}i {b.real:+9.2e}{b.imag:+10.6f}i {c.real:+8.4f}")

# %%
# The weak values obey the oscillator's equations of motion.
fine = np.linspace(0, 2 * np.pi, 257)
xf, pf = weak_trajectory(pair, [x, p], fine)
print("equations-of-motion residual:", equations_of_motion_residual(fine, xf, pf))

# %%
# The energy weak value (1 - x0^2) / 2 gets more negative as the
# Gaussians are pulled apart, at the price of a vanishing overlap.
for x0 in (1.0, 1.5, 2.0, 3.0, 4.0):
    pair = PrePostPair(*gaussian_pair_states(space, x0), h)
    (hw,) = weak_trajectory(pair, [h], [0.0])
    print(f"x0={x0:3.1f}  H_w={hw[0].real:+8.4f}  overlap={abs(pair.overlap):.2e}")
