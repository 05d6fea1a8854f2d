import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import linregress

from weakpot import hilbert
from weakpot import oracle
from weakpot.errors import DimensionGuard, DimensionMismatch, OrthogonalSelection, ZeroState
from weakpot.hilbert import FockSpace
from weakpot.oracle import (
    TwoBodySystem,
    conditional_observable,
    conditional_state,
    evolve_exact,
    evolve_trotter,
    reference_overlap,
)
from weakpot.weakpotential import PiecewiseConstantProfile, SeparableInteraction

TAU = 2 * math.pi


def _system(cutoff, lam, kind="xx", profile=None):
    s = FockSpace(cutoff)
    h = hilbert.oscillator_hamiltonian(s)
    op = hilbert.position_op(s) if kind == "xx" else hilbert.momentum_op(s)
    return s, TwoBodySystem(h, h, SeparableInteraction([(op, op)], lam, profile))


def _ground(s):
    g = hilbert.fock_state(s, 0)
    return np.kron(g, g)


def test_total_hamiltonian_hermitian():
    _, sys_ = _system(8, 0.1)
    assert sys_.is_hermitian()
    assert sys_.hamiltonian().shape == (64, 64)


def test_sparse_matches_dense():
    _, sys_ = _system(6, 0.07, "pp")
    np.testing.assert_allclose(sys_.sparse_hamiltonian(0.4).toarray(), sys_.hamiltonian(0.4), atol=1e-15)


def test_dimension_mismatch():
    s = FockSpace(4)
    x = hilbert.position_op(s)
    with pytest.raises(DimensionMismatch):
        TwoBodySystem(np.eye(5), np.eye(4), SeparableInteraction([(x, x)], 0.1))
    _, sys_ = _system(4, 0.1)
    with pytest.raises(DimensionMismatch):
        evolve_exact(sys_, np.ones(15), 1.0)


def test_dimension_guard():
    _, sys_ = _system(65, 0.01)
    psi = _ground(FockSpace(65))
    with pytest.raises(DimensionGuard):
        evolve_exact(sys_, psi, 1.0)
    with pytest.raises(DimensionGuard):
        evolve_trotter(sys_, psi, 1.0, 4)


def test_guard_override_runs():
    s, sys_ = _system(65, 0.01)
    out = evolve_exact(sys_, _ground(s), 0.5, override_guard=True)
    assert abs(np.linalg.norm(out) - 1) < 1e-11


def test_tau_zero_identity():
    s, sys_ = _system(6, 0.1)
    psi = np.random.default_rng(0).normal(size=36) + 0j
    np.testing.assert_array_equal(evolve_exact(sys_, psi, 0.0), psi)


def test_lambda_zero_separable():
    s, sys_ = _system(12, 0.0)
    h = hilbert.oscillator_hamiltonian(s)
    a, b = hilbert.coherent_state(s, 0.5), hilbert.coherent_state(s, -0.4j)
    out = evolve_exact(sys_, np.kron(a, b), 2.3)
    target = np.kron(hilbert.evolve_free(a, h, 2.3), hilbert.evolve_free(b, h, 2.3))
    assert abs(hilbert.fidelity(out, target) - 1) < 1e-10


def test_exact_matches_expm():
    s, sys_ = _system(6, 0.15, "pp")
    psi = np.random.default_rng(1).normal(size=36) + 0j
    np.testing.assert_allclose(evolve_exact(sys_, psi, 1.7), expm(-1j * 1.7 * sys_.hamiltonian()) @ psi, atol=1e-11)


def test_large_dimension_path_matches_eigh(monkeypatch):
    s, sys_ = _system(14, 0.05, "pp", PiecewiseConstantProfile.window(1.0, 0.5))
    psi = np.kron(hilbert.coherent_state(s, 0.6), hilbert.fock_state(s, 1))
    ref = evolve_exact(sys_, psi, 2.0)
    monkeypatch.setattr(oracle, "EIGH_LIMIT", 10)
    fresh = TwoBodySystem(sys_.h1, sys_.h2, sys_.interaction)
    np.testing.assert_allclose(evolve_exact(fresh, psi, 2.0), ref, atol=1e-12)


def test_windowed_profile_segments():
    # coupling only inside the window: outside it the evolution must be free
    s, sys_ = _system(8, 0.1, "xx", PiecewiseConstantProfile.window(3.0, 0.4))
    psi = _ground(s)
    h = hilbert.oscillator_hamiltonian(s)
    early = evolve_exact(sys_, psi, 2.5)
    np.testing.assert_allclose(early, hilbert.evolve_free(psi, np.kron(h, np.eye(8)) + np.kron(np.eye(8), h), 2.5))
    g = 1 / 0.4
    d = 64
    h0 = sys_.hamiltonian(0.0)
    manual = expm(-1j * 2.8 * h0) @ psi
    manual = expm(-1j * 0.4 * sys_.hamiltonian(g)) @ manual
    manual = expm(-1j * 1.0 * h0) @ manual
    np.testing.assert_allclose(evolve_exact(sys_, psi, 4.2), manual, atol=1e-11)
    assert manual.shape == (d,)


def test_unitarity_and_energy_coupled_oscillators():
    s, sys_ = _system(20, 0.01)
    psi = _ground(s)
    out = evolve_exact(sys_, psi, TAU)
    h = sys_.hamiltonian()
    assert abs(np.linalg.norm(out) - 1) < 1e-11
    e0 = np.vdot(psi, h @ psi).real
    assert abs(np.vdot(out, h @ out).real - e0) < 1e-9


def test_unitarity_at_cutoff_40():
    s, sys_ = _system(40, 0.05, "pp")
    psi = np.kron(hilbert.coherent_state(s, math.sqrt(2)), hilbert.squeezed_vacuum(s, 1.0))
    out = evolve_exact(sys_, psi, TAU)
    h = sys_.sparse_hamiltonian()
    assert abs(np.linalg.norm(out) - 1) < 1e-11
    assert abs(np.vdot(out, h @ out).real - np.vdot(psi, h @ psi).real) < 1e-9


def test_eigen_cache_thread_safe():
    s, sys_ = _system(8, 0.1)
    psi = _ground(s)
    with ThreadPoolExecutor(4) as ex:
        outs = list(ex.map(lambda t: evolve_exact(sys_, psi, t), [1.0] * 8))
    for o in outs[1:]:
        np.testing.assert_array_equal(o, outs[0])
    assert len(sys_._cache) == 1


def test_trotter_lambda_zero_grouped_exact():
    s, sys_ = _system(10, 0.0)
    psi = np.kron(hilbert.coherent_state(s, 0.4), hilbert.fock_state(s, 2))
    exact = evolve_exact(sys_, psi, TAU)
    for n in (1, 7):
        np.testing.assert_allclose(evolve_trotter(sys_, psi, TAU, n, "grouped"), exact, atol=1e-12)


def test_trotter_bad_arguments():
    s, sys_ = _system(4, 0.1)
    with pytest.raises(ValueError):
        evolve_trotter(sys_, _ground(s), 1.0, 0)
    with pytest.raises(ValueError):
        evolve_trotter(sys_, _ground(s), 1.0, 4, "strang")


def test_trotter_interleaved_halving():
    s, sys_ = _system(10, 0.05)
    psi = _ground(s)
    exact = evolve_exact(sys_, psi, TAU)
    errs = [np.linalg.norm(evolve_trotter(sys_, psi, TAU, n) - exact) for n in (64, 128, 256)]
    for a, b in zip(errs, errs[1:]):
        assert 1.8 <= a / b <= 2.2
    slope = linregress(np.log([64, 128, 256]), np.log(errs)).slope
    assert slope == pytest.approx(-1.0, abs=0.2)


def test_trotter_grouped_linear_in_lambda():
    devs = []
    lams = [0.0125, 0.025, 0.05]
    for lam in lams:
        s, sys_ = _system(10, lam)
        psi = _ground(s)
        devs.append(np.linalg.norm(evolve_trotter(sys_, psi, TAU, 256, "grouped") - evolve_exact(sys_, psi, TAU)))
    slope = linregress(np.log(lams), np.log(devs)).slope
    assert slope == pytest.approx(1.0, abs=0.3)


def test_reference_overlap_gaussian():
    s = FockSpace(40)
    _, sys_ = _system(40, 0.0)
    pre = hilbert.coherent_state(s, math.sqrt(2))
    post = hilbert.coherent_state(s, -math.sqrt(2))
    # one full period contributes exp(-i pi) to every level
    assert reference_overlap(sys_, pre, post, TAU) == pytest.approx(-math.exp(-4), abs=1e-10)


def test_conditional_state_lambda_zero():
    s, sys_ = _system(10, 0.0)
    pre = hilbert.superposition(s, [(0, 1), (1, -1j), (2, 1)])
    post = hilbert.superposition(s, [(0, 1), (1, 1), (2, -1)])
    phi0 = hilbert.coherent_state(s, 0.5)
    phi_c, ov = conditional_state(sys_, pre, phi0, post, TAU)
    np.testing.assert_allclose(phi_c / ov, hilbert.evolve_free(phi0, sys_.h2, TAU), atol=1e-12)


def test_conditional_state_orthogonal():
    s, sys_ = _system(6, 0.1)
    with pytest.raises(OrthogonalSelection):
        conditional_state(sys_, hilbert.fock_state(s, 0), hilbert.fock_state(s, 0), hilbert.fock_state(s, 1), TAU)


def test_conditional_observable_basics():
    s = FockSpace(6)
    h = hilbert.oscillator_hamiltonian(s)
    assert conditional_observable(3.0 * hilbert.fock_state(s, 0), h) == pytest.approx(0.5)
    psi = hilbert.superposition(s, [(0, 0.3j), (4, 2 - 1j)])
    assert conditional_observable(psi, np.eye(6)) == pytest.approx(1.0)
    with pytest.raises(ZeroState):
        conditional_observable(np.zeros(6), h)


def test_momentum_profile_state_observables():
    s = FockSpace(40)
    phi = hilbert.squeezed_vacuum(s, 1.0)
    p = hilbert.momentum_op(s)
    assert abs(conditional_observable(phi, p)) < 1e-12
    assert conditional_observable(phi, p @ p) == pytest.approx(0.25, abs=1e-12)
    x = hilbert.position_op(s)
    assert conditional_observable(phi, x @ x) == pytest.approx(1.0, abs=1e-10)
