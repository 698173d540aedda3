"""Quaternion value algebra.

Two layers live here:

* :class:`Quaternion`, an immutable scalar value type used at API
  boundaries (coefficients, point evaluations), and :class:`Carrier`.
* Vectorised helpers operating on ``(..., 4)`` float arrays with
  component order ``(q0, q1, q2, q3)`` for ``q0 + i q1 + j q2 + k q3``.
  The heavy kernels use the symplectic split ``q = a + b j`` with ``a, b``
  ordinary complex numbers in the ``i``-plane (see :func:`to_split`).

There is deliberately no division operator: quaternion fractions are
side-ambiguous, so callers multiply by :func:`inverse` on an explicit side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateInput

EPS_DIV = 1e-300


@dataclass(frozen=True)
class Quaternion:
    q0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0

    def __post_init__(self):
        for name in ("q0", "q1", "q2", "q3"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def coerce(cls, value) -> "Quaternion":
        if isinstance(value, Quaternion):
            return value
        if np.isscalar(value):
            return cls(float(value))
        return cls.from_array(value)

    def to_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3])

    def __iter__(self):
        return iter((self.q0, self.q1, self.q2, self.q3))

    def __add__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)

    __radd__ = __add__

    def __sub__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.q0 - o.q0, self.q1 - o.q1, self.q2 - o.q2, self.q3 - o.q3)

    def __rsub__(self, other):
        return Quaternion.coerce(other) - self

    def __neg__(self):
        return Quaternion(-self.q0, -self.q1, -self.q2, -self.q3)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            s = float(other)
            return Quaternion(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
        return mul(self, Quaternion.coerce(other))

    def __rmul__(self, other):
        return mul(Quaternion.coerce(other), self)

    def conj(self) -> "Quaternion":
        return conj(self)

    @property
    def sc(self) -> float:
        return self.q0

    @property
    def vec(self) -> "Quaternion":
        return vec(self)

    def __abs__(self) -> float:
        return modulus(self)

    def isclose(self, other, atol: float = 1e-12) -> bool:
        o = Quaternion.coerce(other)
        return modulus(self - o) <= atol


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``."""
    a0, a1, a2, a3 = p
    b0, b1, b2, b3 = q
    return Quaternion(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.q0, -q.q1, -q.q2, -q.q3)


def sc(q: Quaternion) -> float:
    return q.q0


def vec(q: Quaternion) -> Quaternion:
    return Quaternion(0.0, q.q1, q.q2, q.q3)


def modulus(q: Quaternion) -> float:
    # hypot avoids overflow/underflow of the squared components
    return math.hypot(q.q0, q.q1, q.q2, q.q3)


def inverse(q: Quaternion, eps_div: float = EPS_DIV) -> Quaternion:
    """``conj(q) / |q|^2``; raises :class:`DegenerateInput` for ``|q| < eps_div``."""
    m = modulus(q)
    if not m >= eps_div:
        raise DegenerateInput(f"cannot invert quaternion of modulus {m:g}")
    # scale before squaring so tiny moduli do not underflow
    u = q * (1.0 / m)
    return conj(u) * (1.0 / m)


def cyclic_sc_check(q: Quaternion, r: Quaternion, s: Quaternion) -> tuple[float, float, float]:
    """Return ``(Sc[qrs], Sc[rsq], Sc[sqr])``; the three agree for all inputs."""
    return (
        sc(mul(mul(q, r), s)),
        sc(mul(mul(r, s), q)),
        sc(mul(mul(s, q), r)),
    )


def exp_i(t: float) -> Quaternion:
    """``exp(2 pi i t)``."""
    return Quaternion(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t), 0.0, 0.0)


def exp_j(t: float) -> Quaternion:
    """``exp(2 pi j t)``."""
    return Quaternion(math.cos(2 * math.pi * t), 0.0, math.sin(2 * math.pi * t), 0.0)


@dataclass(frozen=True)
class Carrier:
    """Left or right multiplication operator.

    ``Carrier("right", p).apply(q) == q p`` and
    ``Carrier("left", p).apply(q) == p q``.
    """

    side: Literal["left", "right"]
    value: Quaternion

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"carrier side must be 'left' or 'right', got {self.side!r}")

    def apply(self, q: Quaternion) -> Quaternion:
        if self.side == "right":
            return mul(q, self.value)
        return mul(self.value, q)

    def conj(self) -> "Carrier":
        other = "left" if self.side == "right" else "right"
        return Carrier(other, conj(self.value))

    def then(self, other: "Carrier") -> "Carrier":
        """Carrier equivalent to applying ``self`` first, then ``other`` (same side only)."""
        if self.side != other.side:
            raise ValueError("only carriers on the same side compose into a single carrier")
        if self.side == "right":
            return Carrier("right", mul(self.value, other.value))
        return Carrier("left", mul(other.value, self.value))


def right(p) -> Carrier:
    return Carrier("right", Quaternion.coerce(p))


def left(p) -> Carrier:
    return Carrier("left", Quaternion.coerce(p))


# ---------------------------------------------------------------------------
# array layer


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Broadcasting Hamilton product of ``(..., 4)`` arrays."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a0, a1, a2, a3 = (p[..., n] for n in range(4))
    b0, b1, b2, b3 = (q[..., n] for n in range(4))
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def qconj(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float) * _CONJ


def qabs(q: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(q), axis=-1))


def qinv(q: np.ndarray, eps_div: float = EPS_DIV) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    m = qabs(q)
    if np.any(~(m >= eps_div)):
        raise DegenerateInput(f"cannot invert quaternion of modulus {np.min(m):g}")
    return qconj(q) / (m * m)[..., None]


def exp_i_array(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), z, z], axis=-1)


def exp_j_array(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return np.stack([np.cos(2 * np.pi * t), z, np.sin(2 * np.pi * t), z], axis=-1)


def to_split(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``q = a + b j`` with ``a = q0 + i q1`` and ``b = q2 + i q3``.

    Since ``(q2 + i q3) j = q2 j + q3 k`` the split is exact.
    """
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_split(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def split_right_jplane(a, b, x, y):
    """``(a + b j) (x + y j)`` for real ``x, y``, returned in split form."""
    return a * x - b * y, a * y + b * x


def iplane(z: np.ndarray) -> np.ndarray:
    """Embed complex numbers as ``i``-plane quaternions."""
    z = np.asarray(z, dtype=complex)
    zero = np.zeros(z.shape)
    return np.stack([z.real, z.imag, zero, zero], axis=-1)


def jplane(z: np.ndarray) -> np.ndarray:
    """Embed complex numbers as ``j``-plane quaternions (``i`` mapped to ``j``)."""
    z = np.asarray(z, dtype=complex)
    zero = np.zeros(z.shape)
    return np.stack([z.real, zero, z.imag, zero], axis=-1)
