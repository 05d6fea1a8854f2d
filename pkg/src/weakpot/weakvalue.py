"""Weak values between pre- and post-selected oscillator states."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, OrthogonalSelection
from .hilbert import check_dims, eigensystem

OVERLAP_FLOOR = 1e-12


def weak_ratio(post: np.ndarray, op: np.ndarray, pre: np.ndarray, overlap_floor: float = OVERLAP_FLOOR) -> complex:
    """``<post|A|pre> / <post|pre>`` for states taken at the same instant.

    The floor is applied to the scale-free overlap ``|<post|pre>| /
    (|post| |pre|)``.
    """
    if op.shape != (pre.shape[0], pre.shape[0]) or post.shape != pre.shape:
        raise DimensionMismatch(f"operator {op.shape}, pre {pre.shape}, post {post.shape}")
    overlap = np.vdot(post, pre)
    _check_overlap(overlap, np.linalg.norm(post) * np.linalg.norm(pre), overlap_floor)
    return complex(np.vdot(post, op @ pre) / overlap)


def _check_overlap(overlap: complex, scale: float, floor: float) -> None:
    if scale == 0 or abs(overlap) <= floor * scale:
        rel = abs(overlap) / scale if scale else 0.0
        raise OrthogonalSelection(
            f"pre/post overlap {rel:.3e} (normalized) is at or below the floor {floor:.1e}"
        )


@dataclass(frozen=True, eq=False)
class PrePostPair:
    """Particle-1 selection: ``pre`` at ``t_i``, ``post`` at ``t_f``, evolving under ``h_free``.

    Construction fails with :class:`OrthogonalSelection` when the
    full-interval amplitude ``<post|U(t_f - t_i)|pre>`` is too small.
    """

    pre: np.ndarray
    post: np.ndarray
    h_free: np.ndarray
    t_i: float = 0.0
    t_f: float = 2.0 * np.pi
    overlap_floor: float = OVERLAP_FLOOR

    def __post_init__(self):
        if not self.t_f > self.t_i:
            raise ValueError(f"need t_f > t_i, got t_i={self.t_i}, t_f={self.t_f}")
        d = check_dims(self.h_free)
        if self.pre.shape != (d,) or self.post.shape != (d,):
            raise DimensionMismatch(
                f"states {self.pre.shape}, {self.post.shape} do not match Hamiltonian dimension {d}"
            )
        _check_overlap(self.overlap, self.scale, self.overlap_floor)

    @property
    def dim(self) -> int:
        return self.pre.shape[0]

    @property
    def duration(self) -> float:
        return self.t_f - self.t_i

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.pre) * np.linalg.norm(self.post))

    @cached_property
    def _eig(self):
        e, v = eigensystem(self.h_free)
        pre_c = self.pre if v is None else v.conj().T @ self.pre
        post_c = self.post if v is None else v.conj().T @ self.post
        return e, v, pre_c, post_c

    @cached_property
    def overlap(self) -> complex:
        """``<post| exp(-i H (t_f - t_i)) |pre>``."""
        e, _, pre_c, post_c = self._eig
        return complex(np.vdot(post_c, np.exp(-1j * e * self.duration) * pre_c))

    def forward(self, t) -> np.ndarray:
        """Pre-selected state evolved to time(s) ``t``; shape ``(d,)`` or ``(d, len(t))``."""
        e, v, pre_c, _ = self._eig
        t = np.asarray(t, dtype=float)
        c = np.exp(-1j * np.multiply.outer(e, t - self.t_i)) * pre_c.reshape((-1,) + (1,) * t.ndim)
        return c if v is None else v @ c

    def backward(self, t) -> np.ndarray:
        """Ket whose bra is ``<post| exp(-i H (t_f - t))``."""
        e, v, _, post_c = self._eig
        t = np.asarray(t, dtype=float)
        c = np.exp(1j * np.multiply.outer(e, self.t_f - t)) * post_c.reshape((-1,) + (1,) * t.ndim)
        return c if v is None else v @ c

    def rescaled(self, pre_factor: complex = 1.0, post_factor: complex = 1.0) -> "PrePostPair":
        return PrePostPair(
            pre_factor * self.pre, post_factor * self.post, self.h_free, self.t_i, self.t_f, self.overlap_floor
        )

    def swapped(self) -> "PrePostPair":
        """Pair with the roles of ``pre`` and ``post`` exchanged."""
        return PrePostPair(self.post, self.pre, self.h_free, self.t_i, self.t_f, self.overlap_floor)


def weak_value(pair: PrePostPair, op: np.ndarray) -> complex:
    """Equal-time weak value ``<post|A|pre> / <post|pre>`` of the stored states.

    No time evolution is applied; see :func:`weak_value_at_time` for the
    sandwich across the selection interval.
    """
    return weak_ratio(pair.post, op, pair.pre, pair.overlap_floor)


def _check_grid(pair: PrePostPair, t: np.ndarray) -> None:
    span = pair.duration
    if np.any(t < pair.t_i - 1e-12 * span) or np.any(t > pair.t_f + 1e-12 * span):
        raise ValueError(f"times must lie in [{pair.t_i}, {pair.t_f}]")


def weak_value_at_time(pair: PrePostPair, op: np.ndarray, t: float) -> complex:
    r"""Weak value of ``A`` at an intermediate time ``t``.

    .. math::
        A_w(t) = \frac{\langle post| U(t_f - t) A U(t - t_i) |pre\rangle}
                      {\langle post| U(t_f - t_i) |pre\rangle}
    """
    return complex(weak_trajectory(pair, [op], [t])[0, 0])


def weak_trajectory(pair: PrePostPair, ops: Sequence[np.ndarray], t_grid) -> np.ndarray:
    """Weak values of several operators on a time grid.

    Returns a complex array of shape ``(len(ops), len(t_grid))``. The free
    propagator is diagonalized once and shared by all grid points.
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    _check_grid(pair, t)
    check_dims(*ops, dim=pair.dim)
    fwd = pair.forward(t)
    bwd = pair.backward(t)
    out = np.empty((len(ops), t.size), dtype=complex)
    for k, op in enumerate(ops):
        out[k] = np.sum(bwd.conj() * (op @ fwd), axis=0)
    return out / pair.overlap
