"""Truncated Fock-space kernel.

States are 1-d complex ``numpy`` arrays indexed by Fock number ``n = 0 ..
cutoff-1``; operators are dense complex 2-d arrays. Nothing here normalizes a
state behind the caller's back: unnormalized kets are legitimate inputs
(ratios such as weak values do not care about scale).

Two-body objects use particle-1-major ordering: the amplitude of
``|n>_1 |m>_2`` sits at flat index ``n * d2 + m``, which is what
``np.kron(op1, op2)`` produces. Reshaping a two-body vector to ``(d1, d2)``
gives the matrix ``Psi[n, m]``.

Units follow the usual oscillator nondimensionalization (energy in hbar*omega,
length in sqrt(hbar/(m*omega))); ``mass``, ``omega`` and ``hbar`` default to 1
but are carried through the ladder-operator prefactors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import DimensionMismatch, IndexOutOfRange, TailTooHeavy

TAIL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """Single-oscillator Fock space truncated to ``cutoff`` levels."""

    cutoff: int
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")
        if self.mass <= 0 or self.omega <= 0 or self.hbar <= 0:
            raise ValueError("mass, omega and hbar must be positive")

    @property
    def dim(self) -> int:
        return int(self.cutoff)

    @property
    def length_scale(self) -> float:
        """``sqrt(hbar / (2 m omega))``, the prefactor of ``a + a^dagger`` in x."""
        return np.sqrt(self.hbar / (2.0 * self.mass * self.omega))

    @property
    def momentum_scale(self) -> float:
        """``sqrt(hbar m omega / 2)``, the prefactor of ``i(a^dagger - a)`` in p."""
        return np.sqrt(self.hbar * self.mass * self.omega / 2.0)


# ---------------------------------------------------------------------------
# operators


def identity(space: FockSpace) -> np.ndarray:
    return np.eye(space.dim, dtype=complex)


def annihilation(space: FockSpace) -> np.ndarray:
    """Lowering operator with ``<n-1|a|n> = sqrt(n)``."""
    n = np.arange(1, space.dim)
    return np.diag(np.sqrt(n).astype(complex), k=1)


def creation(space: FockSpace) -> np.ndarray:
    return annihilation(space).conj().T


def number_op(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim, dtype=complex))


def position_op(space: FockSpace) -> np.ndarray:
    r"""Position ``x = sqrt(hbar/2m\omega) (a + a^\dagger)``."""
    a = annihilation(space)
    return space.length_scale * (a + a.conj().T)


def momentum_op(space: FockSpace) -> np.ndarray:
    r"""Momentum ``p = i sqrt(hbar m\omega/2) (a^\dagger - a)``.

    With unit constants this is ``(a - a^\dagger)/(i sqrt 2)``, so
    ``<0|p|1> = -i/sqrt(2)``.
    """
    a = annihilation(space)
    return 1j * space.momentum_scale * (a.conj().T - a)


def oscillator_hamiltonian(space: FockSpace) -> np.ndarray:
    """Canonical free Hamiltonian ``hbar omega diag(n + 1/2)``.

    The diagonal form is exact on every retained level, unlike ``p^2/2m +
    m omega^2 x^2/2`` assembled from truncated ``x`` and ``p`` (see
    :func:`quadrature_hamiltonian`), which is wrong on the top two levels.
    """
    n = np.arange(space.dim)
    return np.diag((space.hbar * space.omega * (n + 0.5)).astype(complex))


def quadrature_hamiltonian(space: FockSpace) -> np.ndarray:
    """``p^2/2m + m omega^2 x^2/2`` built from the truncated quadratures."""
    x = position_op(space)
    p = momentum_op(space)
    return p @ p / (2.0 * space.mass) + 0.5 * space.mass * space.omega**2 * x @ x


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    return op.shape[0] == op.shape[1] and bool(np.max(np.abs(op - op.conj().T), initial=0.0) < tol)


# ---------------------------------------------------------------------------
# states


def fock_state(space: FockSpace, n: int) -> np.ndarray:
    if not 0 <= n < space.dim:
        raise IndexOutOfRange(f"Fock index {n} outside 0..{space.dim - 1}")
    state = np.zeros(space.dim, dtype=complex)
    state[n] = 1.0
    return state


def superposition(space: FockSpace, coeffs: Iterable[tuple[int, complex]]) -> np.ndarray:
    """Place amplitudes exactly; repeated indices accumulate. Never normalizes."""
    state = np.zeros(space.dim, dtype=complex)
    for n, c in coeffs:
        if not 0 <= n < space.dim:
            raise IndexOutOfRange(f"Fock index {n} outside 0..{space.dim - 1}")
        state[n] += c
    return state


def coherent_cutoff_hint(alpha: complex) -> int:
    """Heuristic cutoff ``|alpha|^2 + 6|alpha| + 10`` for a coherent state."""
    r = abs(alpha)
    return int(np.ceil(r * r + 6.0 * r + 10.0))


def coherent_state(space: FockSpace, alpha: complex, tail_tol: float = TAIL_TOLERANCE) -> np.ndarray:
    """Coherent state ``c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!)``.

    The amplitudes are the exact infinite-space ones restricted to the
    cutoff; the missing Poisson tail ``P(n >= cutoff)`` must stay below
    ``tail_tol``.

    Raises
    ------
    TailTooHeavy
        If the discarded weight exceeds ``tail_tol``.
    """
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    tail = float(gammainc(space.dim, r2)) if r2 > 0 else 0.0
    if tail > tail_tol:
        raise TailTooHeavy(
            f"coherent state |alpha|={abs(alpha):.4g} leaves tail weight {tail:.3g} "
            f"above cutoff {space.dim} (tolerance {tail_tol:.1g}); "
            f"try cutoff >= {coherent_cutoff_hint(alpha)}"
        )
    n = np.arange(space.dim)
    if alpha == 0:
        return fock_state(space, 0)
    log_mag = -0.5 * r2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def squeezed_vacuum(space: FockSpace, position_variance: float, tail_tol: float = TAIL_TOLERANCE) -> np.ndarray:
    """Centered real Gaussian wavepacket with the given position variance.

    In position representation the state is ``exp(-x^2 / (4 s))`` with
    ``s = position_variance`` (unit constants); the vacuum has ``s = 1/2``.
    Its Fock expansion is ``exp(zeta a^dagger^2 / 2)|0>`` up to
    normalization, with ``zeta = (1 - g)/(1 + g)`` and ``g = 1/(2 s)``:

        c_{2k} = (1 - zeta^2)^{1/4} zeta^k sqrt((2k)!) / (2^k k!)

    A momentum profile ``exp(-p^2)`` corresponds to ``s = 1``; a position
    profile ``exp(-x^2)`` to ``s = 1/4``.
    """
    if position_variance <= 0:
        raise ValueError("position_variance must be positive")
    g = 1.0 / (2.0 * position_variance)
    zeta = (1.0 - g) / (1.0 + g)
    k = np.arange((space.dim + 1) // 2)
    log_c = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1)
    if zeta != 0:
        log_c = log_c + k * np.log(abs(zeta))
    c = np.exp(log_c) * np.sign(zeta) ** k * (1.0 - zeta**2) ** 0.25
    state = np.zeros(space.dim, dtype=complex)
    state[0::2] = c
    tail = max(0.0, 1.0 - float(np.sum(np.abs(state) ** 2)))
    if tail > tail_tol:
        raise TailTooHeavy(
            f"Gaussian with position variance {position_variance:.4g} leaves tail weight "
            f"{tail:.3g} above cutoff {space.dim}"
        )
    return state


def norm(state: np.ndarray) -> float:
    return float(np.linalg.norm(state))


def is_normalized(state: np.ndarray, tol: float = 1e-12) -> bool:
    return abs(float(np.vdot(state, state).real) - 1.0) < tol


def normalized(state: np.ndarray) -> np.ndarray:
    return state / np.linalg.norm(state)


def tail_weight(state: np.ndarray, margin: int) -> float:
    """Weight carried by the top ``margin`` basis states."""
    if margin <= 0:
        return 0.0
    return float(np.sum(np.abs(state[-margin:]) ** 2))


def inner(bra: np.ndarray, ket: np.ndarray) -> complex:
    """``<bra|ket>`` (the bra is conjugated)."""
    if bra.shape != ket.shape:
        raise DimensionMismatch(f"inner product of shapes {bra.shape} and {ket.shape}")
    return complex(np.vdot(bra, ket))


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """``<s|O|s> / <s|s>``."""
    return complex(np.vdot(state, op @ state) / np.vdot(state, state))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>| / (|a| |b|)``, insensitive to global phase and scale."""
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


# ---------------------------------------------------------------------------
# time evolution


def _is_diagonal(op: np.ndarray) -> bool:
    return not np.any(op - np.diag(np.diagonal(op)))


def eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Eigenvalues and eigenvectors of a Hermitian matrix.

    For diagonal input the eigenvector matrix is returned as ``None``
    (the basis is already the eigenbasis), which lets callers skip two
    dense products per propagation.
    """
    if _is_diagonal(h):
        return np.real(np.diagonal(h)).copy(), None
    e, v = np.linalg.eigh(h)
    return e, v


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """Dense ``exp(-i H t)`` for Hermitian ``H``."""
    e, v = eigensystem(h)
    phases = np.exp(-1j * e * t)
    if v is None:
        return np.diag(phases)
    return (v * phases) @ v.conj().T


def evolve_free(state: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(-i H t) state``."""
    if h.shape != (state.shape[0], state.shape[0]):
        raise DimensionMismatch(f"Hamiltonian {h.shape} does not act on state of length {state.shape[0]}")
    if t == 0:
        return state.astype(complex, copy=True)
    e, v = eigensystem(h)
    phases = np.exp(-1j * e * t)
    if v is None:
        return phases * state
    return v @ (phases * (v.conj().T @ state))


# ---------------------------------------------------------------------------
# two-body helpers


def tensor(op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    """Two-body operator ``A (x) B`` in particle-1-major order."""
    return np.kron(op_a, op_b)


def tensor_state(s_a: np.ndarray, s_b: np.ndarray) -> np.ndarray:
    return np.kron(s_a, s_b)


def as_matrix(two_body: np.ndarray, d1: int) -> np.ndarray:
    """View a two-body vector as ``Psi[n, m]`` with ``n`` indexing particle 1."""
    if two_body.ndim != 1 or two_body.shape[0] % d1:
        raise DimensionMismatch(f"vector of length {two_body.shape[0]} is not a d1={d1} two-body state")
    return two_body.reshape(d1, -1)


def postselect_particle1(two_body: np.ndarray, post: np.ndarray) -> np.ndarray:
    """Unnormalized conditional amplitude of particle 2.

    ``phi_c[m] = sum_n conj(post[n]) Psi[n, m]``. The result is not divided
    by any overlap; callers pick the normalization convention.
    """
    psi = as_matrix(two_body, post.shape[0])
    return post.conj() @ psi


def apply_local(op1: np.ndarray | None, op2: np.ndarray | None, psi: np.ndarray) -> np.ndarray:
    """Apply ``op1 (x) op2`` to ``Psi`` given as a ``(d1, d2)`` matrix.

    ``None`` stands for the identity on that particle.
    """
    out = psi
    if op1 is not None:
        out = op1 @ out
    if op2 is not None:
        out = out @ op2.T
    return out


def check_dims(*ops: np.ndarray, dim: int | None = None) -> int:
    """Check that every operator is square with a common dimension."""
    dims: Sequence[int] = [op.shape[0] for op in ops]
    for op in ops:
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionMismatch(f"operator of shape {op.shape} is not square")
    if dim is None:
        dim = dims[0]
    if any(d != dim for d in dims):
        raise DimensionMismatch(f"operator dimensions {list(dims)} differ from {dim}")
    return dim
