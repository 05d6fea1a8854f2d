import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weakpot import hilbert
from weakpot.errors import DimensionMismatch, OrthogonalSelection
from weakpot.hilbert import FockSpace
from weakpot.weakvalue import PrePostPair, weak_ratio, weak_trajectory, weak_value, weak_value_at_time

from conftest import random_hermitian, random_state

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
NONZERO = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def _random_pair(seed, d=6):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(d, d))
    h = np.diag(np.sort(rng.uniform(0, 5, d))) + 0.1 * (m + m.T)
    return PrePostPair(random_state(rng, d), random_state(rng, d), h, 0.0, 1.3), rng


def test_fock_pair_coefficient(fock_pair, fock_space):
    a = hilbert.annihilation(fock_space)
    w = weak_value(fock_pair, a + a.conj().T)
    assert abs(w - complex(1 - math.sqrt(2), 1 + math.sqrt(2))) < 1e-12
    assert w.real == pytest.approx(-0.41421, abs=1e-5)
    assert w.imag == pytest.approx(2.41421, abs=1e-5)


def test_fock_pair_overlap(fock_pair):
    assert weak_ratio(fock_pair.post, np.eye(10), fock_pair.pre) == pytest.approx(1)
    # the full-period overlap is exp(-i pi) <post|pre> = i
    assert fock_pair.overlap == pytest.approx(1j)


def test_equal_states_give_expectation():
    s = FockSpace(12)
    psi = hilbert.coherent_state(s, 0.7 + 0.2j)
    pair = PrePostPair(psi, psi, hilbert.oscillator_hamiltonian(s))
    x = hilbert.position_op(s)
    w = weak_value(pair, x)
    assert abs(w.imag) < 1e-14
    assert w.real == pytest.approx(hilbert.expectation(psi, x).real)
    assert weak_value(pair, np.eye(12)) == pytest.approx(1)


def test_gaussian_p_static(gauss_pair, gauss_space):
    assert abs(weak_value(gauss_pair, hilbert.momentum_op(gauss_space)) - (-2j)) < 1e-9


def test_gaussian_endpoints(gauss_pair, gauss_space):
    x, p = hilbert.position_op(gauss_space), hilbert.momentum_op(gauss_space)
    assert abs(weak_value_at_time(gauss_pair, x, 0.0)) < 1e-9
    assert abs(weak_value_at_time(gauss_pair, p, 0.0) - (-2j)) < 1e-9


def test_gaussian_intermediate_times(gauss_pair, gauss_space):
    x, p = hilbert.position_op(gauss_space), hilbert.momentum_op(gauss_space)
    assert abs(weak_value_at_time(gauss_pair, p, math.pi / 3) - (-1j)) < 1e-8
    assert abs(weak_value_at_time(gauss_pair, x, math.pi / 2) - (-2j)) < 1e-8


def test_gaussian_trajectories_20_points(gauss_pair, gauss_space):
    t = np.linspace(0, 2 * math.pi, 20)
    x, p = hilbert.position_op(gauss_space), hilbert.momentum_op(gauss_space)
    xw, pw = weak_trajectory(gauss_pair, [x, p], t)
    assert np.abs(xw - (-2j * np.sin(t))).max() < 1e-7
    assert np.abs(pw - (-2j * np.cos(t))).max() < 1e-7


def test_energy_weak_value_constant(gauss_pair, gauss_space):
    t = np.linspace(0, 2 * math.pi, 33)
    (hw,) = weak_trajectory(gauss_pair, [hilbert.oscillator_hamiltonian(gauss_space)], t)
    assert np.abs(hw - (-1.5)).max() < 1e-8


def test_energy_by_linearity(gauss_pair, gauss_space):
    x, p = hilbert.position_op(gauss_space), hilbert.momentum_op(gauss_space)
    t = np.linspace(0, 2 * math.pi, 9)
    x2w, p2w, hw = weak_trajectory(gauss_pair, [x @ x, p @ p, hilbert.oscillator_hamiltonian(gauss_space)], t)
    # x^2 and p^2 from truncated matrices differ from the true squares only at the cutoff
    assert np.abs(hw - 0.5 * (x2w + p2w)).max() < 1e-10


def test_identity_trajectory_is_one(fock_pair):
    (w,) = weak_trajectory(fock_pair, [np.eye(10)], np.linspace(0, 2 * math.pi, 17))
    np.testing.assert_allclose(w, 1, atol=1e-12)


def test_single_point_grid_matches(gauss_pair, gauss_space):
    p = hilbert.momentum_op(gauss_space)
    assert weak_trajectory(gauss_pair, [p], [1.1])[0, 0] == weak_value_at_time(gauss_pair, p, 1.1)


def test_orthogonal_pair_rejected():
    s = FockSpace(4)
    with pytest.raises(OrthogonalSelection):
        PrePostPair(hilbert.fock_state(s, 0), hilbert.fock_state(s, 1), hilbert.oscillator_hamiltonian(s))
    with pytest.raises(OrthogonalSelection):
        weak_ratio(hilbert.fock_state(s, 0), np.eye(4), hilbert.fock_state(s, 2))


def test_large_x0_rejected():
    s = FockSpace(120)
    pre = hilbert.coherent_state(s, 7 / math.sqrt(2))
    post = hilbert.coherent_state(s, -7 / math.sqrt(2))
    with pytest.raises(OrthogonalSelection):
        PrePostPair(pre, post, hilbert.oscillator_hamiltonian(s))


def test_dimension_checks(fock_pair):
    with pytest.raises(DimensionMismatch):
        weak_value(fock_pair, np.eye(3))
    with pytest.raises(DimensionMismatch):
        PrePostPair(np.ones(3), np.ones(4), np.eye(3))


def test_grid_outside_interval(fock_pair):
    with pytest.raises(ValueError):
        weak_trajectory(fock_pair, [np.eye(10)], [-0.1])
    with pytest.raises(ValueError):
        PrePostPair(np.ones(2), np.ones(2), np.eye(2), 1.0, 1.0)


def test_endpoint_consistency(fock_pair, fock_space):
    # A_w(t_i) equals the static ratio with post back-evolved to t_i
    x = hilbert.position_op(fock_space)
    h = hilbert.oscillator_hamiltonian(fock_space)
    back = hilbert.evolve_free(fock_pair.post, h, -2 * math.pi)
    assert abs(weak_value_at_time(fock_pair, x, 0.0) - weak_ratio(back, x, fock_pair.pre)) < 1e-12
    fwd = hilbert.evolve_free(fock_pair.pre, h, 2 * math.pi)
    assert abs(weak_value_at_time(fock_pair, x, 2 * math.pi) - weak_ratio(fock_pair.post, x, fwd)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=SEEDS, alpha=st.complex_numbers(max_magnitude=10), beta=st.complex_numbers(max_magnitude=10))
def test_linearity(seed, alpha, beta):
    pair, rng = _random_pair(seed)
    a, b = random_hermitian(rng, 6), rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    t = float(rng.uniform(0, pair.t_f))
    lhs = weak_value_at_time(pair, alpha * a + beta * b, t)
    rhs = alpha * weak_value_at_time(pair, a, t) + beta * weak_value_at_time(pair, b, t)
    scale = 1 + abs(alpha * weak_value_at_time(pair, a, t)) + abs(beta * weak_value_at_time(pair, b, t))
    assert abs(lhs - rhs) <= 1e-12 * scale
    assert abs(weak_value(pair, alpha * a + beta * b) - alpha * weak_value(pair, a) - beta * weak_value(pair, b)) <= (
        1e-12 * (1 + abs(alpha * weak_value(pair, a)) + abs(beta * weak_value(pair, b)))
    )


@settings(max_examples=40, deadline=None)
@given(seed=SEEDS, c_pre=NONZERO, c_post=NONZERO)
def test_rescaling_invariance(seed, c_pre, c_post):
    pair, rng = _random_pair(seed)
    a = random_hermitian(rng, 6)
    t = np.linspace(0, pair.t_f, 5)
    base = weak_trajectory(pair, [a], t)
    scaled = weak_trajectory(pair.rescaled(c_pre, c_post), [a], t)
    assert np.abs(scaled - base).max() <= 1e-12 * (1 + np.abs(base).max())
    w0 = weak_value(pair, a)
    assert abs(weak_value(pair.rescaled(c_pre, c_post), a) - w0) <= 1e-12 * (1 + abs(w0))


@settings(max_examples=40, deadline=None)
@given(seed=SEEDS)
def test_conjugation_symmetry(seed):
    pair, rng = _random_pair(seed)
    a = random_hermitian(rng, 6)
    w = weak_value(pair, a)
    assert abs(weak_value(pair.swapped(), a) - np.conj(w)) <= 1e-12 * (1 + abs(w))


@settings(max_examples=25, deadline=None)
@given(seed=SEEDS)
def test_trajectory_matches_explicit_sandwich(seed):
    from scipy.linalg import expm

    pair, rng = _random_pair(seed)
    a = random_hermitian(rng, 6)
    t = float(rng.uniform(0, pair.t_f))
    h = pair.h_free
    num = np.vdot(pair.post, expm(-1j * h * (pair.t_f - t)) @ a @ expm(-1j * h * t) @ pair.pre)
    den = np.vdot(pair.post, expm(-1j * h * pair.t_f) @ pair.pre)
    w = weak_value_at_time(pair, a, t)
    assert abs(w - num / den) <= 1e-9 * (1 + abs(w))
