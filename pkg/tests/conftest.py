import math

import numpy as np
import pytest
from hypothesis import settings

from weakpot import hilbert
from weakpot.scenarios import fock_pair_states, gaussian_pair_states
from weakpot.weakvalue import PrePostPair

# fixed example sequence so a green run stays green
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fock_space():
    return hilbert.FockSpace(10)


@pytest.fixture
def fock_pair(fock_space):
    pre, post = fock_pair_states(fock_space)
    return PrePostPair(pre, post, hilbert.oscillator_hamiltonian(fock_space))


@pytest.fixture
def gauss_space():
    return hilbert.FockSpace(40)


@pytest.fixture
def gauss_pair(gauss_space):
    pre, post = gaussian_pair_states(gauss_space, 2.0)
    return PrePostPair(pre, post, hilbert.oscillator_hamiltonian(gauss_space))


def random_state(rng, d):
    return rng.normal(size=d) + 1j * rng.normal(size=d)


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return m + m.conj().T


@pytest.fixture
def sqrt2():
    return math.sqrt(2.0)
