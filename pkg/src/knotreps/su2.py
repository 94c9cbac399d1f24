"""
Unit quaternions as SU(2) elements, commuting-pair angles and class functions.

A quaternion ``w + x i + y j + z k`` is identified with the matrix

    [[w + i z,  i x - y],
     [i x + y,  w - i z]]

so that rotation about the z-axis by ``t`` is ``diag(e^{it}, e^{-it})``.
The array kernels (`qmul`, `qconj`, ...) work on ``(..., 4)`` arrays in
``(w, x, y, z)`` order and are safe for complex dtypes, which the solver
uses for complex-step differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev

NORM_TOL = 1e-12
TOL_COMMUTE = 1e-8


class NonCommuting(ValueError):
    """Raised when a pair of holonomies fails the commutation tolerance."""


# ---------------------------------------------------------------------------
# array kernels

def qmul(a, b):
    """Hamilton product of quaternion arrays of shape (..., 4)."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def qconj(a):
    return a * _CONJ


def qnormalize(a):
    # sqrt of the sum of squares (not abs) keeps complex steps analytic
    return a / np.sqrt(np.sum(a * a, axis=-1, keepdims=True))


# ---------------------------------------------------------------------------
# group elements

@dataclass(frozen=True)
class SU2Element:
    """A unit quaternion. The constructor renormalizes its input."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        n = math.sqrt(self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize a zero or non-finite quaternion")
        if abs(n - 1.0) > 0.0:
            for name in "wxyz":
                object.__setattr__(self, name, float(getattr(self, name)) / n)
        else:
            for name in "wxyz":
                object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, a) -> "SU2Element":
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2], a[3])

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array([[w + 1j * z, 1j * x - y],
                         [1j * x + y, w - 1j * z]])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __mul__(self, other: "SU2Element") -> "SU2Element":
        if not isinstance(other, SU2Element):
            return NotImplemented
        return SU2Element.from_array(qmul(self.as_array(), other.as_array()))

    def inverse(self) -> "SU2Element":
        return SU2Element(self.w, -self.x, -self.y, -self.z)

    def conjugate_by(self, g: "SU2Element") -> "SU2Element":
        """Return ``g self g^{-1}``."""
        return g * self * g.inverse()

    def trace(self) -> float:
        return 2.0 * self.w

    def angle(self) -> float:
        """Rotation angle in [0, pi]: the ``t`` with eigenvalues ``e^{+-it}``."""
        return math.acos(min(1.0, max(-1.0, self.w)))

    def distance(self, other: "SU2Element") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def is_central(self, tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(self.vector)) <= tol


IDENTITY = SU2Element(1.0, 0.0, 0.0, 0.0)


def su2_mul(u: SU2Element, v: SU2Element) -> SU2Element:
    return u * v


def su2_from_axis_angle(axis: Sequence[float], t: float) -> SU2Element:
    """``cos t + sin t (n . (i, j, k))`` for a unit axis ``n``."""
    n = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise ValueError("axis must be non-zero")
    n = n / norm
    s = math.sin(t)
    return SU2Element(math.cos(t), s * n[0], s * n[1], s * n[2])


def random_su2(rng: np.random.Generator) -> SU2Element:
    """Haar-random element (uniform on the 3-sphere)."""
    while True:
        v = rng.standard_normal(4)
        if np.linalg.norm(v) > 1e-6:
            return SU2Element.from_array(v)


def commutator_norm(u: SU2Element, v: SU2Element) -> float:
    """``||uv - vu||`` in the quaternion (Frobenius/sqrt 2) norm."""
    a, b = u.as_array(), v.as_array()
    return float(np.linalg.norm(qmul(a, b) - qmul(b, a)))


@dataclass(frozen=True)
class AnglePair:
    """Raw holonomy parameters; any real values, canonicalized elsewhere."""

    alpha: float
    beta: float


def commuting_pair_angles(ha: SU2Element, hb: SU2Element,
                          tol_commute: float = TOL_COMMUTE) -> AnglePair:
    """Simultaneously diagonalize two commuting elements.

    Returns ``(alpha, beta)`` with ``ha ~ diag(e^{i alpha}, e^{-i alpha})``
    and ``hb ~ diag(e^{i beta}, e^{-i beta})`` under one conjugation. The
    shared axis is taken from whichever element is further from the centre,
    so a central element reads as 0 or pi against the other's axis.
    """
    gap = commutator_norm(ha, hb)
    if gap > tol_commute:
        raise NonCommuting(f"commutator norm {gap:.3e} exceeds {tol_commute:.1e}")
    va, vb = ha.vector, hb.vector
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if max(na, nb) == 0.0:
        axis = np.array([0.0, 0.0, 1.0])
    elif na >= nb:
        axis = va / na
    else:
        axis = vb / nb
    alpha = math.atan2(float(va @ axis), ha.w)
    beta = math.atan2(float(vb @ axis), hb.w)
    return AnglePair(alpha, beta)


# ---------------------------------------------------------------------------
# class functions

@dataclass(frozen=True)
class ClassFunction:
    """Class function determined by the odd sine series ``g = f'``.

    ``g(t) = sum_k c_k sin(kt)`` and
    ``f(t) = offset + sum_k (c_k / k)(1 - cos kt)``; the class function is
    ``phi(U) = f(angle(U))``.
    """

    fourier_sine_coeffs: tuple = ()
    constant_offset: float = 0.0
    _k: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.fourier_sine_coeffs)
        object.__setattr__(self, "fourier_sine_coeffs", coeffs)
        object.__setattr__(self, "_k", np.arange(1, len(coeffs) + 1, dtype=float))

    @property
    def degree(self) -> int:
        return len(self.fourier_sine_coeffs)

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.fourier_sine_coeffs)

    def g(self, t):
        t = np.asarray(t, dtype=float)
        if self.degree == 0:
            return np.zeros_like(t)
        return np.sin(np.multiply.outer(t, self._k)) @ self.coeffs

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.degree == 0:
            return np.full_like(t, self.constant_offset)
        return self.constant_offset + (1.0 - np.cos(np.multiply.outer(t, self._k))) @ (self.coeffs / self._k)

    def fprime(self, t):
        return self.g(t)

    def evaluate_trace_half(self, w):
        """``f`` as a polynomial in ``w = cos t`` (Chebyshev form)."""
        # 1 - cos(kt) = 1 - T_k(w)
        cheb = np.zeros(self.degree + 1)
        if self.degree:
            cheb[1:] = -self.coeffs / self._k
        const = self.constant_offset + float(np.sum(self.coeffs / self._k)) if self.degree else self.constant_offset
        return const + chebyshev.chebval(w, cheb)

    def derivative_bound(self) -> float:
        """Lipschitz constant of ``g``: ``sum k |c_k|``."""
        return float(np.sum(self._k * np.abs(self.coeffs)))

    def sup_bound(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))


def classfn_from_g(coeffs: Sequence[float], offset: float = 0.0) -> ClassFunction:
    return ClassFunction(tuple(coeffs), offset)


def classfn_eval(phi: ClassFunction, u: SU2Element) -> float:
    """``phi(u)``; depends on ``u`` only through ``w = trace(u)/2``."""
    return float(phi.evaluate_trace_half(min(1.0, max(-1.0, u.w))))
