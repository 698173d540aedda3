"""Quaternionic Zak transform, theta series and the Gaussian-atom closed form.

``Z f(x, w) = Σ_m exp(2πi m1 w1) f(x - m) exp(2πj m2 w2)`` is evaluated on
a sampled field by exact grid lookups of the translates. On a grid
``w = cell + (l + offset) / K`` the phases ``m w`` are reduced with integer
arithmetic modulo ``2K`` and read from a table, so ``Z f(x, w + 1)`` and
``Z f(x, w)`` are bit-identical.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np

from . import quaternion as qt
from ._parallel import tile_map
from .errors import FormatError, GridMismatch, InsufficientDecay
from .field import GridSpec, QField, l2_norm, read_qf2, save_qf2_array
from .quaternion import Quaternion

DEFAULT_THETA_TERMS = 8
DEFAULT_ZAK_RADIUS = 6
DEFAULT_ZAK_GRID = 16
DEFAULT_DECAY_TOL = 1e-12


# ---------------------------------------------------------------------------
# theta series


def theta_complex(u, v, terms: int = DEFAULT_THETA_TERMS, centered: bool = False) -> np.ndarray:
    """``Σ_m exp(2πi m (u + i v) - π m^2)`` as an ordinary complex array.

    The sum runs over ``|m| <= terms``, or over ``|m - m*| <= terms`` around
    the dominant index ``m* = -round(v)`` when ``centered`` is set (needed
    when ``|v|`` is comparable to ``terms``).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    shift = -np.round(v) if centered else np.zeros(v.shape)
    out = np.zeros(u.shape, dtype=complex)
    for k in range(-terms, terms + 1):
        m = shift + k
        mag = np.exp(-2 * np.pi * m * v - np.pi * m * m)
        ang = 2 * np.pi * m * u
        out += mag * (np.cos(ang) + 1j * np.sin(ang))
    return out


def theta_tail_bound(v: float, terms: int = DEFAULT_THETA_TERMS) -> float:
    """Upper bound ``2 Σ_{m > terms} exp(-π m^2 + 2π m |v|)`` on the truncation error."""
    total = 0.0
    m = terms + 1
    while True:
        t = math.exp(-math.pi * m * m + 2 * math.pi * m * abs(v))
        total += 2 * t
        if m > abs(v) + 1 and t < 1e-300 + 1e-18 * total:
            break
        m += 1
    return total


@dataclass(frozen=True)
class ThetaEval:
    """Truncated theta series in the ``i``- or ``j``-plane."""

    axis: Literal["i", "j"] = "i"
    terms: int = DEFAULT_THETA_TERMS

    def __post_init__(self):
        if self.axis not in ("i", "j"):
            raise ValueError("axis must be 'i' or 'j'")
        if self.terms < 1:
            raise ValueError("theta truncation must be at least 1")

    def __call__(self, u: float, v: float) -> Quaternion:
        z = complex(theta_complex(u, v, self.terms))
        if self.axis == "i":
            return Quaternion(z.real, z.imag, 0.0, 0.0)
        return Quaternion(z.real, 0.0, z.imag, 0.0)

    def tail_bound(self, v: float) -> float:
        return theta_tail_bound(v, self.terms)


def theta(axis: Literal["i", "j"], z: tuple[float, float], terms: int = DEFAULT_THETA_TERMS) -> Quaternion:
    """Θ evaluated at ``u + axis·v`` for ``z = (u, v)``."""
    return ThetaEval(axis, terms)(z[0], z[1])


# ---------------------------------------------------------------------------
# Zak transform of sampled fields


def _axis_base(spec: GridSpec, K: int, axis: int) -> tuple[int, int]:
    r = spec.integer_resolution()
    if r % K:
        raise GridMismatch(f"field resolution {r} is not a multiple of the Zak grid size {K}")
    lo = spec.x1_min if axis == 1 else spec.x2_min
    base = lo * r
    if abs(base - round(base)) > 1e-9:
        raise GridMismatch("field origin is not aligned with its sample step")
    return r, int(round(base))


def _lookup(f: QField, idx1: np.ndarray, idx2: np.ndarray) -> np.ndarray:
    """Samples at integer index arrays (broadcast), zero outside the grid."""
    idx1, idx2 = np.broadcast_arrays(idx1, idx2)
    ok = (idx1 >= 0) & (idx1 < f.spec.n1) & (idx2 >= 0) & (idx2 < f.spec.n2)
    out = np.zeros(idx1.shape + (4,))
    out[ok] = f.data[idx1[ok], idx2[ok]]
    return out


def decay_tail(f: QField, radius: int, x_cell=(0, 0)) -> tuple[float, float]:
    """``(tail, total)`` Wiener sums of cell suprema outside/over all cells.

    Cells are unit cubes ``n + [0, 1)^2``; the tail collects cells ``n`` with
    ``max|n - x_cell| > radius``, i.e. translates a Zak sum of that radius
    drops. Partial cells at the grid border are allowed.
    """
    r = f.spec.integer_resolution()
    _, b1 = _axis_base(f.spec, 1, 1)
    _, b2 = _axis_base(f.spec, 1, 2)
    c1 = np.floor_divide(b1 + np.arange(f.spec.n1), r)
    c2 = np.floor_divide(b2 + np.arange(f.spec.n2), r)
    mod = f.modulus()
    u1, inv1 = np.unique(c1, return_inverse=True)
    u2, inv2 = np.unique(c2, return_inverse=True)
    sups = np.zeros((len(u1), len(u2)))
    np.maximum.at(sups, (inv1[:, None], inv2[None, :]), mod)
    far = (np.abs(u1[:, None] - x_cell[0]) > radius) | (np.abs(u2[None, :] - x_cell[1]) > radius)
    return math.fsum(sups[far].ravel()), math.fsum(sups.ravel())


def check_decay(f: QField, radius: int, tol: float = DEFAULT_DECAY_TOL, x_cell=(0, 0)) -> float:
    tail, total = decay_tail(f, radius, x_cell)
    if tail > tol * max(total, 1e-300):
        raise InsufficientDecay(
            f"Wiener tail {tail:.3g} outside Zak radius {radius} exceeds {tol:g} x {total:.3g}; "
            "increase --zak-radius or sample the signal on a larger extent with more decay"
        )
    return tail


def _phase_table(K: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(2 * K)
    ang = 2 * np.pi * r / (2 * K)
    return np.cos(ang), np.sin(ang)


def _omega_numerators(K: int, omega_offset: float, omega_cell: int, count: int | None = None) -> np.ndarray:
    """Integer ``n_l`` with ``w_l = n_l / (2K)``."""
    two_off = 2 * omega_offset
    if abs(two_off - round(two_off)) > 1e-12:
        raise ValueError("omega_offset must be 0 or 1/2 of a grid step")
    count = K if count is None else count
    return 2 * K * omega_cell + 2 * np.arange(count) + int(round(two_off))


@dataclass(frozen=True, eq=False)
class ZakGrid:
    """``data[k1, k2, l1, l2] = Z f(x, w)`` with ``x = x_cell + k / K`` and
    ``w = omega_cell + (l + omega_offset) / K``."""

    K: int
    n_zak: int
    data: np.ndarray = dc_field(repr=False)
    omega_offset: float = 0.0
    x_cell: tuple[int, int] = (0, 0)
    omega_cell: tuple[int, int] = (0, 0)

    def x_points(self, axis: int) -> np.ndarray:
        return self.x_cell[axis - 1] + np.arange(self.K) / self.K

    def omega_points(self, axis: int) -> np.ndarray:
        return self.omega_cell[axis - 1] + (np.arange(self.K) + self.omega_offset) / self.K

    def l2_norm(self) -> float:
        """Rectangle-rule ``‖Z‖`` over ``Q x Q``."""
        return math.sqrt(float(np.sum(np.square(self.data))) / self.K ** 4)

    def save(self, path: str | os.PathLike) -> None:
        header = {
            "kind": "zak", "n1": self.K, "n2": self.K, "n3": self.K, "n4": self.K,
            "K": self.K, "n_zak": self.n_zak, "omega_offset": float(self.omega_offset),
            "x_cell": f"{self.x_cell[0]},{self.x_cell[1]}",
            "omega_cell": f"{self.omega_cell[0]},{self.omega_cell[1]}",
        }
        save_qf2_array(path, self.data, header)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ZakGrid":
        header, payload = read_qf2(path)
        if header.get("kind") != "zak":
            raise FormatError("not a Zak grid file")
        try:
            K = int(header["K"])
            n = [int(header[k]) for k in ("n1", "n2", "n3", "n4")]
            xc = tuple(int(v) for v in header["x_cell"].split(","))
            wc = tuple(int(v) for v in header["omega_cell"].split(","))
            off = float(header["omega_offset"])
            n_zak = int(header["n_zak"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad Zak grid header: {exc}") from None
        if n != [K] * 4 or len(payload) != K ** 4 * 32:
            raise FormatError("Zak grid payload does not match its header")
        data = np.frombuffer(payload, dtype="<f8").reshape(K, K, K, K, 4).copy()
        return cls(K, n_zak, data, off, xc, wc)

    def export_slice_csv(self, path: str | os.PathLike, k1: int = 0, k2: int = 0) -> None:
        """CSV of ``Z f(x_k, ·)`` over the frequency cube at fixed ``x``."""
        w1, w2 = np.meshgrid(self.omega_points(1), self.omega_points(2), indexing="ij")
        vals = self.data[k1, k2].reshape(-1, 4)
        table = np.column_stack([w1.ravel(), w2.ravel(), vals, qt.qabs(vals)])
        np.savetxt(path, table, delimiter=",", header="w1,w2,q0,q1,q2,q3,modulus", comments="", fmt="%.17g")


def zak_grid(
    f: QField,
    K: int = DEFAULT_ZAK_GRID,
    n_zak: int = DEFAULT_ZAK_RADIUS,
    omega_offset: float = 0.0,
    x_cell=(0, 0),
    omega_cell=(0, 0),
    decay_tol: float | None = DEFAULT_DECAY_TOL,
) -> ZakGrid:
    """Zak transform on the ``K^4`` grid over ``(x_cell + Q) x (omega_cell + Q)``.

    Translates outside the field's extent read as zero. With ``decay_tol``
    set, :class:`InsufficientDecay` is raised when the signal's Wiener tail
    beyond ``n_zak`` cells is not negligible.
    """
    if K < 2:
        raise ValueError("Zak grid needs K >= 2")
    r, base1 = _axis_base(f.spec, K, 1)
    _, base2 = _axis_base(f.spec, K, 2)
    if decay_tol is not None:
        check_decay(f, n_zak, decay_tol, x_cell)
    step = r // K
    m = np.arange(-n_zak, n_zak + 1)
    k = np.arange(K)
    # field index of x_cell + k/K - m
    i1 = (x_cell[0] * r - base1) + k[:, None] * step - m[None, :] * r  # (K, M)
    i2 = (x_cell[1] * r - base2) + k[:, None] * step - m[None, :] * r

    cos_t, sin_t = _phase_table(K)
    n1 = _omega_numerators(K, omega_offset, omega_cell[0])
    n2 = _omega_numerators(K, omega_offset, omega_cell[1])
    r1 = np.mod(m[:, None] * n1[None, :], 2 * K)  # (M, K)
    r2 = np.mod(m[:, None] * n2[None, :], 2 * K)
    E1 = cos_t[r1] + 1j * sin_t[r1]
    C2, S2 = cos_t[r2], sin_t[r2]

    def tile(k1):
        vals = _lookup(f, i1[k1][None, :, None, None], i2[None, None, :, :])[0]  # (M1, K, M2, 4)
        vals = vals.transpose(1, 0, 2, 3)  # (K x2, M1, M2, 4)
        a, b = qt.to_split(vals)
        # right factor exp(2πj m2 w2) = cos + sin j
        ta = a @ C2 - b @ S2  # (K, M1, Kw2)
        tb = a @ S2 + b @ C2
        za = np.einsum("yml,mp->ypl", ta, E1)
        zb = np.einsum("yml,mp->ypl", tb, E1)
        return qt.from_split(za, zb)

    data = np.stack(tile_map(tile, range(K)))
    return ZakGrid(K, n_zak, data, float(omega_offset), tuple(x_cell), tuple(omega_cell))


def zak(f: QField, x, omega, n_zak: int = DEFAULT_ZAK_RADIUS) -> Quaternion:
    """Point value ``Z f(x, w)`` for on-grid ``x`` and arbitrary real ``w``."""
    k1, k2 = f.spec.index(x[0], 1), f.spec.index(x[1], 2)
    r = f.spec.integer_resolution()
    m = np.arange(-n_zak, n_zak + 1)
    vals = _lookup(f, (k1 - m * r)[:, None], (k2 - m * r)[None, :])
    left = qt.exp_i_array(m * omega[0])[:, None, :]
    right = qt.exp_j_array(m * omega[1])[None, :, :]
    terms = qt.qmul(qt.qmul(left, vals), right)
    return Quaternion.from_array(terms.reshape(-1, 4).sum(axis=0))


def zak_atom(
    mu,
    x,
    omega,
    terms: int = DEFAULT_THETA_TERMS,
    coeff=1.0,
    swap_factors: bool = False,
) -> Quaternion:
    """Closed-form Zak transform of the atom ``exp(2πi x1 θ1) c g(x - p) exp(2πj x2 θ2)``.

    For ``mu = (p1, p2, θ1, θ2)``::

        Z = exp(2πi θ1 x1) g(x1 - p1) Θ_i(θ1 - w1 + i (x1 - p1))
            · c ·
            Θ_j(θ2 - w2 + j (x2 - p2)) g(x2 - p2) exp(2πj θ2 x2)

    which for lattice points reduces to
    ``exp(2πi(θ1 x1 - p1 w1)) g(x1) Θ_i(-w1 + i x1) · c · Θ_j(-w2 + j x2) g(x2) exp(2πj(θ2 x2 - p2 w2))``.
    ``swap_factors`` multiplies the ``j`` block before the ``i`` block; it is
    wrong on purpose and only exists as a negative control.
    """
    p1, p2, t1, t2 = (float(v) for v in mu)
    x1, x2 = float(x[0]), float(x[1])
    w1, w2 = float(omega[0]), float(omega[1])
    th_i = complex(theta_complex(t1 - w1, x1 - p1, terms, centered=True))
    th_j = complex(theta_complex(t2 - w2, x2 - p2, terms, centered=True))
    left_c = np.exp(2j * np.pi * t1 * x1) * math.exp(-math.pi * (x1 - p1) ** 2) * th_i
    right_c = np.exp(2j * np.pi * t2 * x2) * math.exp(-math.pi * (x2 - p2) ** 2) * th_j
    left = Quaternion(left_c.real, left_c.imag, 0.0, 0.0)
    right = Quaternion(right_c.real, 0.0, right_c.imag, 0.0)
    c = Quaternion.coerce(coeff)
    if swap_factors:
        return right * c * left
    return left * c * right


def zak_gaussian_factors(K: int, omega_offset: float = 0.5, terms: int = DEFAULT_THETA_TERMS):
    """``i``-plane factor ``g(x1) Θ(-w1 + i x1)`` of ``Z e'_0`` on the ``(x, w)`` grid, as complex ``(K, K)``.

    By symmetry the ``j``-plane factor has the same complex values with
    ``i`` read as ``j``.
    """
    x = np.arange(K) / K
    w = (np.arange(K) + omega_offset) / K
    X, W = np.meshgrid(x, w, indexing="ij")
    return np.exp(-np.pi * X ** 2) * theta_complex(-W, X, terms)


def zak_inverse(Z: ZakGrid, cells: tuple[int, int] | None = None) -> QField:
    """``f(x) = ∫_Q Z f(x, w) dw`` by the rectangle rule over the frequency grid.

    Without ``cells`` the result covers ``x_cell + Q``. With ``cells=(lo, hi)``
    it covers ``[lo, hi)^2`` using ``f(x + n) = ∫ exp(2πi n1 w1) Z f(x, w) exp(2πj n2 w2) dw``.
    """
    a, b = qt.to_split(Z.data)
    if cells is None:
        return _zak_inverse_cells(Z, a, b, [0], [0], *Z.x_cell)
    lo, hi = cells
    ns1 = list(range(lo - Z.x_cell[0], hi - Z.x_cell[0]))
    ns2 = list(range(lo - Z.x_cell[1], hi - Z.x_cell[1]))
    return _zak_inverse_cells(Z, a, b, ns1, ns2, lo, lo)


def _zak_inverse_cells(Z, a, b, ns1, ns2, lo1, lo2) -> QField:
    K = Z.K
    cos_t, sin_t = _phase_table(K)
    num1 = _omega_numerators(K, Z.omega_offset, Z.omega_cell[0])
    num2 = _omega_numerators(K, Z.omega_offset, Z.omega_cell[1])
    out = np.zeros((len(ns1) * K, len(ns2) * K, 4))
    for p, n1 in enumerate(ns1):
        r1 = np.mod(n1 * num1, 2 * K)
        e1 = cos_t[r1] + 1j * sin_t[r1]  # over w1
        for s, n2 in enumerate(ns2):
            r2 = np.mod(n2 * num2, 2 * K)
            c2, s2 = cos_t[r2], sin_t[r2]
            # e^{iφ}(a + b j)(c + s j) summed over w
            pa = np.einsum("xypq,p,q->xy", a, e1, c2) - np.einsum("xypq,p,q->xy", b, e1, s2)
            pb = np.einsum("xypq,p,q->xy", a, e1, s2) + np.einsum("xypq,p,q->xy", b, e1, c2)
            out[p * K:(p + 1) * K, s * K:(s + 1) * K] = qt.from_split(pa, pb) / K ** 2
    spec = GridSpec(len(ns1) * K, len(ns2) * K, lo1, lo1 + len(ns1), lo2, lo2 + len(ns2))
    return QField(spec, out)


def zak_unitarity_check(f: QField, K: int | None = None, n_zak: int = DEFAULT_ZAK_RADIUS,
                        decay_tol: float | None = DEFAULT_DECAY_TOL) -> tuple[float, float]:
    """``(‖f‖², ‖Z f‖²_{L²(Q x Q)})``; ``K`` defaults to the field resolution."""
    K = f.spec.integer_resolution() if K is None else K
    Z = zak_grid(f, K, n_zak, decay_tol=decay_tol)
    return l2_norm(f) ** 2, Z.l2_norm() ** 2


def modulus_of_continuity(Z: ZakGrid) -> float:
    """Largest jump between neighbouring samples along any of the four axes."""
    worst = 0.0
    for ax in range(4):
        d = np.diff(Z.data, axis=ax)
        worst = max(worst, float(np.max(qt.qabs(d))))
    return worst
