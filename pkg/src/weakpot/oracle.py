"""Exact two-body evolution with post-selection, and the product-formula paths.

This module is the ground truth the weak-potential predictions are checked
against. It never uses weak values: the full Hamiltonian
``H1 (x) 1 + 1 (x) H2 + lambda g(t) sum_k A_k (x) B_k`` is exponentiated
piecewise (``g`` is piecewise constant) and the particle-1 projection is
taken only at the end.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .errors import DimensionGuard, DimensionMismatch, OrthogonalSelection, ZeroState
from .hilbert import apply_local, check_dims, eigensystem, is_hermitian, postselect_particle1, propagator
from .weakpotential import SeparableInteraction
from .weakvalue import OVERLAP_FLOOR

DIMENSION_GUARD = 4096
# above this two-body dimension a dense eigendecomposition is slower than
# applying the exponential to the single vector we need
EIGH_LIMIT = 1600


@dataclass(eq=False)
class TwoBodySystem:
    """Two oscillators with free Hamiltonians ``h1``, ``h2`` and a separable coupling."""

    h1: np.ndarray
    h2: np.ndarray
    interaction: SeparableInteraction
    dimension_guard: int = DIMENSION_GUARD
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        d1 = check_dims(self.h1)
        d2 = check_dims(self.h2)
        if self.interaction.dims != (d1, d2):
            raise DimensionMismatch(f"interaction dims {self.interaction.dims} vs free ({d1}, {d2})")

    @property
    def dims(self) -> tuple[int, int]:
        return self.h1.shape[0], self.h2.shape[0]

    @property
    def dim(self) -> int:
        d1, d2 = self.dims
        return d1 * d2

    def check_guard(self, override: bool = False) -> None:
        if not override and self.dim > self.dimension_guard:
            raise DimensionGuard(
                f"two-body dimension {self.dim} exceeds guard {self.dimension_guard} "
                "(pass override to run anyway)"
            )

    def hamiltonian(self, g: float = 1.0) -> np.ndarray:
        """Dense total Hamiltonian with the profile frozen at value ``g``."""
        d1, d2 = self.dims
        h = np.kron(self.h1, np.eye(d2)) + np.kron(np.eye(d1), self.h2)
        if g and self.interaction.coupling:
            h = h + self.interaction.coupling * g * self.interaction.two_body_operator()
        return h.astype(complex)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return is_hermitian(self.hamiltonian(), tol)

    def _eig(self, g: float):
        # computed outside the lock; a racing duplicate is harmless
        if g not in self._cache:
            e, v = np.linalg.eigh(self.hamiltonian(g))
            with self._lock:
                self._cache.setdefault(g, (e, v))
        return self._cache[g]

    def _propagate_segment(self, psi: np.ndarray, g: float, dt: float) -> np.ndarray:
        if dt == 0:
            return psi
        d1, d2 = self.dims
        if g == 0 or self.interaction.coupling == 0:
            u1 = propagator(self.h1, dt)
            u2 = propagator(self.h2, dt)
            return apply_local(u1, u2, psi.reshape(d1, d2)).ravel()
        if self.dim <= EIGH_LIMIT:
            e, v = self._eig(g)
            return v @ (np.exp(-1j * e * dt) * (v.conj().T @ psi))
        return expm_multiply(-1j * dt * self.sparse_hamiltonian(g), psi)

    def sparse_hamiltonian(self, g: float = 1.0) -> sparse.csr_matrix:
        """Same as :meth:`hamiltonian`, assembled in CSR form (ladder-built operators are banded)."""
        d1, d2 = self.dims
        csr = sparse.csr_matrix
        h = sparse.kron(csr(self.h1), sparse.identity(d2)) + sparse.kron(sparse.identity(d1), csr(self.h2))
        lam = self.interaction.coupling
        if g and lam:
            for a, b in self.interaction.terms:
                h = h + (lam * g) * sparse.kron(csr(a), csr(b))
        return h.tocsr().astype(complex)


def evolve_exact(
    system: TwoBodySystem, psi0: np.ndarray, tau: float, t0: float = 0.0, override_guard: bool = False
) -> np.ndarray:
    """``U(t0 + tau, t0) psi0`` for the full two-body Hamiltonian.

    Each constant-profile segment is propagated exactly: by the separable
    free propagator where the coupling is off, otherwise by eigendecomposition
    (or, above ``EIGH_LIMIT``, by applying the exponential to the vector).
    """
    system.check_guard(override_guard)
    if psi0.shape != (system.dim,):
        raise DimensionMismatch(f"state of shape {psi0.shape}, system dimension {system.dim}")
    psi = psi0.astype(complex, copy=True)
    for a, b, g in system.interaction.segments(t0, t0 + tau):
        psi = system._propagate_segment(psi, g, b - a)
    return psi


def evolve_trotter(
    system: TwoBodySystem,
    psi0: np.ndarray,
    tau: float,
    n_steps: int,
    scheme: str = "interleaved",
    t0: float = 0.0,
    override_guard: bool = False,
) -> np.ndarray:
    """Product-formula approximation of :func:`evolve_exact`.

    ``scheme="interleaved"`` is the first-order Lie-Trotter product
    ``prod_j exp(-i lambda g_j V dt) exp(-i H0 dt)``, error ``O(dt)``.

    ``scheme="grouped"`` collects all factors of the same kind:
    ``[prod_j exp(-i lambda g_j V dt)] exp(-i H2 tau) exp(-i H1 tau)``.
    It discards every ``[H0, V]`` commutator, so its error does not vanish
    with ``n_steps`` but is first order in ``lambda``.

    ``g_j`` is the profile at the midpoint of step ``j``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if scheme not in ("interleaved", "grouped"):
        raise ValueError(f"unknown scheme {scheme!r}")
    system.check_guard(override_guard)
    d1, d2 = system.dims
    dt = tau / n_steps
    mids = t0 + dt * (np.arange(n_steps) + 0.5)
    gs = system.interaction.g(mids)
    lam = system.interaction.coupling
    ev, vv = eigensystem(system.interaction.two_body_operator())

    def kick(psi, g):
        if g == 0 or lam == 0:
            return psi
        phases = np.exp(-1j * lam * g * dt * ev)
        return phases * psi if vv is None else vv @ (phases * (vv.conj().T @ psi))

    psi = psi0.astype(complex, copy=True)
    if scheme == "grouped":
        psi = apply_local(propagator(system.h1, tau), propagator(system.h2, tau), psi.reshape(d1, d2)).ravel()
        for g in gs:
            psi = kick(psi, g)
        return psi

    u1 = propagator(system.h1, dt)
    u2 = propagator(system.h2, dt)
    for g in gs:
        psi = apply_local(u1, u2, psi.reshape(d1, d2)).ravel()
        psi = kick(psi, g)
    return psi


def reference_overlap(system: TwoBodySystem, psi1: np.ndarray, post: np.ndarray, tau: float) -> complex:
    """``<post| exp(-i H1 tau) |psi1>``: the free particle-1 amplitude."""
    return complex(np.vdot(post, propagator(system.h1, tau) @ psi1))


def conditional_state(
    system: TwoBodySystem,
    psi1: np.ndarray,
    phi0: np.ndarray,
    post: np.ndarray,
    tau: float,
    t0: float = 0.0,
    overlap_floor: float = OVERLAP_FLOOR,
    override_guard: bool = False,
) -> tuple[np.ndarray, complex]:
    """Exact post-selected particle-2 amplitude and the free reference overlap.

    Returns ``(phi_c, overlap)`` where ``phi_c = <post|_1 U(tau) |psi1 phi0>``
    (unnormalized) and ``overlap = <post|exp(-i H1 tau)|psi1>``. The ratio
    ``phi_c / overlap`` is what the weak-potential propagators predict.
    """
    overlap = reference_overlap(system, psi1, post, tau)
    scale = np.linalg.norm(psi1) * np.linalg.norm(post)
    if scale == 0 or abs(overlap) <= overlap_floor * scale:
        raise OrthogonalSelection(f"free reference overlap {abs(overlap) / max(scale, 1e-300):.3e} below floor")
    psi = evolve_exact(system, np.kron(psi1, phi0), tau, t0=t0, override_guard=override_guard)
    return postselect_particle1(psi, post), overlap


def conditional_observable(phi: np.ndarray, op: np.ndarray) -> float:
    """``<phi|O|phi> / <phi|phi>`` for Hermitian ``O`` (real part returned)."""
    nrm = np.vdot(phi, phi).real
    if nrm == 0:
        raise ZeroState("conditional state has zero norm")
    return float((np.vdot(phi, op @ phi) / nrm).real)
