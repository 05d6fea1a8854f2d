"""
Weak potential between two coupled oscillators
==============================================

Particle 1 is pre-selected in ``|0> - i|1> + |2>`` and post-selected in
``|0> + |1> - |2>`` one period later. Particle 2 starts in its ground state
and the two are coupled by ``lambda x1 x2``. To first order the test
particle feels ``lambda (x1)_w x2`` with a complex weak value.
"""

import math

import numpy as np

from weakpot import hilbert
from weakpot.oracle import TwoBodySystem, conditional_state
from weakpot.scenarios import fock_pair_states
from weakpot.weakpotential import (
    SeparableInteraction,
    conditional_evolve_first_order,
    conditional_evolve_second_order,
    time_grid,
    weak_potential_first_order,
)
from weakpot.weakvalue import PrePostPair, weak_value

space = hilbert.FockSpace(10)
h = hilbert.oscillator_hamiltonian(space)
pre, post = fock_pair_states(space)
pair = PrePostPair(pre, post, h)

# The states are not normalized; weak values do not care.
a = hilbert.annihilation(space)
print("(a + a^dag)_w =", weak_value(pair, a + a.conj().T))
print("closed form   =", complex(1 - math.sqrt(2), 1 + math.sqrt(2)))

lam = 1e-2
x = hilbert.position_op(space)
coupling = SeparableInteraction([(x, x)], lam)
vw = weak_potential_first_order(pair, coupling, 0.0)
print("coefficient of x2 at t=0:", vw[0, 1] / x[0, 1])

# %%
# Compare the effective one-body evolution with the exact two-body one.
phi0 = hilbert.fock_state(space, 0)
grid = time_grid(pair, 256)
phi_c, overlap = conditional_state(TwoBodySystem(h, h, coupling), pre, phi0, post, pair.duration)
exact = phi_c / overlap
first = conditional_evolve_first_order(phi0, pair, h, coupling, grid)
second = conditional_evolve_second_order(phi0, pair, h, coupling, grid)
print(f"first-order residual : {np.linalg.norm(first - exact):.3e}")
print(f"second-order residual: {np.linalg.norm(second - exact):.3e}")
