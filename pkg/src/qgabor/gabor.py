"""Gaussian Gabor system on the integer lattice and its relaxed extension.

The lattice ``Λ = Z^2 x Z^2`` of points ``λ = (b, ω)`` has unit cell area
(critical density). The relaxed lattice adds a single sharp point
``# = (½, ½, ½, ½)``. Every ``f`` with enough decay expands as

    f = γ^#(f) e'_# + Σ_λ e'_λ-wedged coefficients γ^λ(f)

where ``e'_λ(x) = exp(2πi x1 ω1) · c · g(x - b) · exp(2πj x2 ω2)`` carries
its coefficient between the two kernels.

Coefficients are recovered through the Zak transform: after removing the
sharp component, ``F = A0^{-1} Z f_# B0^{-1}`` with
``A0(x1, ω1) = g(x1) Θ_i(-ω1 + i x1)`` and ``B0`` its ``j``-plane twin is a
trigonometric polynomial

    F(x, ω) = Σ_λ exp(2πi (ω1 x1 - b1 ω1')) c_λ exp(2πj (ω2 x2 - b2 ω2'))

(primes mark the Zak frequency variable), so ``c_λ`` is the 4-D Fourier
coefficient of ``F`` at ``x``-frequency ``ω`` and Zak-frequency ``-b``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Iterator, Literal, Mapping

import numpy as np

from . import quaternion as qt
from ._parallel import single_threaded_blas, tile_map
from .errors import FormatError, NearSingularTheta, NyquistViolation
from .field import GridSpec, QField, l2_norm, wedged_gaussian
from .quaternion import Quaternion
from .zak import (
    DEFAULT_DECAY_TOL,
    DEFAULT_THETA_TERMS,
    DEFAULT_ZAK_GRID,
    DEFAULT_ZAK_RADIUS,
    check_decay,
    theta_complex,
    zak,
    zak_gaussian_factors,
    zak_grid,
)

DEFAULT_LATTICE_RADIUS = 3
DEFAULT_EPS_THETA = 1e-8
SIGMA0_TERMS = 8


# ---------------------------------------------------------------------------
# lattice


@dataclass(frozen=True, order=True)
class LatticePoint:
    """``λ = (b, ω)`` with integer entries, or the sharp point ``(½, ½, ½, ½)``."""

    b: tuple[int, int] = (0, 0)
    w: tuple[int, int] = (0, 0)
    sharp: bool = False

    def __post_init__(self):
        if self.sharp:
            if self.b != (0, 0) or self.w != (0, 0):
                raise ValueError("the sharp point carries no integer coordinates")
            return
        b = tuple(int(v) for v in self.b)
        w = tuple(int(v) for v in self.w)
        if len(b) != 2 or len(w) != 2 or any(float(u) != float(v) for u, v in zip(b + w, tuple(self.b) + tuple(self.w))):
            raise ValueError(f"lattice coordinates must be integer 2-vectors, got b={self.b}, w={self.w}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "w", w)

    @property
    def mu(self) -> tuple[float, float, float, float]:
        """``(b1, b2, ω1, ω2)`` as floats."""
        if self.sharp:
            return (0.5, 0.5, 0.5, 0.5)
        return (float(self.b[0]), float(self.b[1]), float(self.w[0]), float(self.w[1]))

    @property
    def radius(self) -> int:
        return max(abs(v) for v in self.b + self.w)

    def __str__(self) -> str:
        return "#" if self.sharp else f"(b={self.b}, w={self.w})"


SHARP = LatticePoint(sharp=True)


def lattice_window(n_lat: int) -> Iterator[LatticePoint]:
    """All ``λ`` with ``|λ|_∞ <= n_lat`` in lexicographic ``(b1, b2, ω1, ω2)`` order."""
    r = range(-n_lat, n_lat + 1)
    for b1 in r:
        for b2 in r:
            for w1 in r:
                for w2 in r:
                    yield LatticePoint((b1, b2), (w1, w2))


Coefficients = Mapping[LatticePoint, Quaternion]


# ---------------------------------------------------------------------------
# atoms and synthesis


def atom_eval(lam: LatticePoint, x, variant: Literal["e", "e_prime"] = "e_prime", coeff=1.0) -> Quaternion:
    """Pointwise Gabor atom with the factors multiplied in displayed order.

    ``e_prime``: ``exp(2πi x1 ω1) · c · g(x - b) · exp(2πj x2 ω2)``
    ``e``:       ``exp(2πj x2 ω2) · c · g(x - b) · exp(2πi x1 ω1)``
    """
    b1, b2, w1, w2 = lam.mu
    x1, x2 = float(x[0]), float(x[1])
    g = math.exp(-math.pi * ((x1 - b1) ** 2 + (x2 - b2) ** 2))
    c = Quaternion.coerce(coeff) * g
    if variant == "e_prime":
        return qt.exp_i(x1 * w1) * c * qt.exp_j(x2 * w2)
    if variant == "e":
        return qt.exp_j(x2 * w2) * c * qt.exp_i(x1 * w1)
    raise ValueError(f"unknown atom variant {variant!r}")


def atom_field(lam: LatticePoint, spec: GridSpec, coeff=1.0) -> QField:
    """``e'_λ`` carrying ``coeff`` sampled on ``spec``."""
    b1, b2, w1, w2 = lam.mu
    return wedged_gaussian(spec, (b1, b2), (w1, w2), coeff)


def synthesize(coeffs: Coefficients, spec: GridSpec) -> QField:
    """``Σ_λ exp(2πi x1 ω1) c_λ g(x - b) exp(2πj x2 ω2)`` over the finite support of ``coeffs``.

    Every atom factors into an ``i``-plane function of ``x1`` and a
    ``j``-plane function of ``x2``, so the sum is two matrix products in the
    symplectic split. The sharp point may appear among the keys.
    """
    items = sorted(coeffs.items())
    if not items:
        return QField.zeros(spec)
    rows = sorted({(lam.mu[0], lam.mu[2]) for lam, _ in items})
    cols = sorted({(lam.mu[1], lam.mu[3]) for lam, _ in items})
    ri = {key: n for n, key in enumerate(rows)}
    ci = {key: n for n, key in enumerate(cols)}
    ca = np.zeros((len(rows), len(cols)), dtype=complex)
    cb = np.zeros((len(rows), len(cols)), dtype=complex)
    for lam, c in items:
        b1, b2, w1, w2 = lam.mu
        q = Quaternion.coerce(c)
        p, s = ri[(b1, w1)], ci[(b2, w2)]
        ca[p, s] += complex(q.q0, q.q1)
        cb[p, s] += complex(q.q2, q.q3)
    x1, x2 = spec.points(1), spec.points(2)
    rb = np.array([r[0] for r in rows])
    rw = np.array([r[1] for r in rows])
    left = np.exp(2j * np.pi * np.outer(x1, rw)) * np.exp(-np.pi * (x1[:, None] - rb[None, :]) ** 2)
    cbv = np.array([c[0] for c in cols])
    cwv = np.array([c[1] for c in cols])
    g2 = np.exp(-np.pi * (x2[:, None] - cbv[None, :]) ** 2)
    rc = g2 * np.cos(2 * np.pi * np.outer(x2, cwv))
    rs = g2 * np.sin(2 * np.pi * np.outer(x2, cwv))
    with single_threaded_blas():
        la = left @ ca  # (n1, cols): i-plane factor times coefficient, split a
        lb = left @ cb
        out_a = la @ rc.T - lb @ rs.T
        out_b = la @ rs.T + lb @ rc.T
    return QField(spec, qt.from_split(out_a, out_b))


@dataclass(frozen=True)
class Sigma0:
    value: float
    terms: int
    tail_bound: float


def sigma0(terms: int = SIGMA0_TERMS) -> Sigma0:
    """``Σ_{|n| <= terms} exp(-π n^2 / 2)`` with a bound on the dropped tail."""
    if terms < 0:
        raise ValueError("terms must be non-negative")
    value = math.fsum(math.exp(-math.pi * n * n / 2) for n in range(-terms, terms + 1))
    # the ratio of consecutive tail terms is at most exp(-π (2 terms + 3) / 2)
    first = math.exp(-math.pi * (terms + 1) ** 2 / 2)
    ratio = math.exp(-math.pi * (2 * terms + 3) / 2)
    return Sigma0(value, terms, 2 * first / (1 - ratio))


def lattice_gaussian_sum(terms: int = SIGMA0_TERMS) -> float:
    """``Σ_{|b|, |ω| <= terms} exp(-π (b^2 + ω^2) / 2)`` over ``Z^2``; equals ``sigma0(terms)^2``."""
    r = range(-terms, terms + 1)
    return math.fsum(math.exp(-math.pi * (b * b + w * w) / 2) for b in r for w in r)


def coefficient_norm(coeffs: Coefficients) -> float:
    return math.sqrt(math.fsum(abs(Quaternion.coerce(c)) ** 2 for c in coeffs.values()))


def synthesis_bound(coeffs: Coefficients, terms: int = SIGMA0_TERMS) -> float:
    """``σ0^2 ‖c‖_2``.

    For separable ``c_λ = c_i(b1, ω1) c_j(b2, ω2)`` the norm factors as
    ``‖c_i‖ ‖c_j‖``, which is the form of the synthesis bound.
    """
    return sigma0(terms).value ** 2 * coefficient_norm(coeffs)


def separable_draw(rng: np.random.Generator, radius: int = 2) -> tuple[dict[LatticePoint, Quaternion], float, float]:
    """Random ``c_λ = c_i(b1, ω1) · c_j(b2, ω2)`` with Gaussian quaternion factors.

    Returns ``(coeffs, ‖c_i‖, ‖c_j‖)``.
    """
    n = 2 * radius + 1
    ci = rng.standard_normal((n, n, 4))
    cj = rng.standard_normal((n, n, 4))
    coeffs = {}
    for lam in lattice_window(radius):
        (b1, b2), (w1, w2) = lam.b, lam.w
        p = ci[b1 + radius, w1 + radius]
        q = cj[b2 + radius, w2 + radius]
        coeffs[lam] = Quaternion.from_array(qt.qmul(p, q))
    return coeffs, float(np.sqrt(np.sum(ci ** 2))), float(np.sqrt(np.sum(cj ** 2)))


# ---------------------------------------------------------------------------
# sharp functional


def _theta0(terms: int) -> float:
    return float(theta_complex(0.0, 0.0, terms).real)


def sharp_functional(
    f: QField,
    n_zak: int = DEFAULT_ZAK_RADIUS,
    terms: int = DEFAULT_THETA_TERMS,
    decay_tol: float | None = DEFAULT_DECAY_TOL,
) -> Quaternion:
    """``γ^#(f) = (i Θ(0))^{-1} · Z f(#) · (j Θ(0))^{-1}``.

    The left inverse multiplies from the left and the right inverse from
    the right. ``e'_#`` maps to 1 and every lattice atom to 0.
    """
    if decay_tol is not None:
        check_decay(f, n_zak, decay_tol)
    z = zak(f, (0.5, 0.5), (0.5, 0.5), n_zak)
    t0 = _theta0(terms)
    left = qt.inverse(qt.I * t0)
    right = qt.inverse(qt.J * t0)
    return left * z * right


def residual(f: QField, gamma: Quaternion | None = None, **kwargs) -> QField:
    """``f_# = f - e'_#`` carrying ``γ^#(f)``; satisfies ``γ^#(f_#) = 0``."""
    gamma = sharp_functional(f, **kwargs) if gamma is None else gamma
    return f - atom_field(SHARP, f.spec, gamma)


# ---------------------------------------------------------------------------
# coefficient extraction


@dataclass(frozen=True, eq=False)
class RelaxedCoefficients:
    """Coefficients of the relaxed expansion over the window ``|λ|_∞ <= n_lat``."""

    gamma_sharp: Quaternion
    gamma: dict[LatticePoint, Quaternion] = dc_field(repr=False)
    n_lat: int = DEFAULT_LATTICE_RADIUS
    tail_estimate: float = 0.0
    f_sup: float = float("nan")

    def __getitem__(self, lam: LatticePoint) -> Quaternion:
        if lam.sharp:
            return self.gamma_sharp
        return self.gamma[lam]

    def as_map(self, include_sharp: bool = True) -> dict[LatticePoint, Quaternion]:
        out = dict(self.gamma)
        if include_sharp:
            out[SHARP] = self.gamma_sharp
        return out

    def lattice_energy(self) -> float:
        """``Σ_λ |γ^λ|^2`` over the window."""
        return math.fsum(abs(c) ** 2 for c in self.gamma.values())

    def shell_sums(self) -> list[float]:
        """``Σ |γ^λ|`` over each shell ``|λ|_∞ = r``, ``r = 0..n_lat``."""
        sums = [[] for _ in range(self.n_lat + 1)]
        for lam, c in self.gamma.items():
            sums[lam.radius].append(abs(c))
        return [math.fsum(s) for s in sums]

    def summary(self) -> dict:
        g = self.gamma_sharp
        return {
            "gamma_sharp": [g.q0, g.q1, g.q2, g.q3],
            "gamma_sharp_modulus": abs(g),
            "lattice_energy": self.lattice_energy(),
            "tail_estimate": self.tail_estimate,
            "lattice_radius": self.n_lat,
            "shell_sums": self.shell_sums(),
            "F_sup": self.f_sup,
        }

    def to_csv(self, path: str | os.PathLike) -> None:
        write_coefficients_csv(self.as_map(), path)

    def to_json(self, path: str | os.PathLike, extra: dict | None = None) -> None:
        doc = self.summary()
        if extra:
            doc.update(extra)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


CSV_COLUMNS = ["b1", "b2", "w1", "w2", "c0", "c1", "c2", "c3"]


def write_coefficients_csv(coeffs: Coefficients, path: str | os.PathLike) -> None:
    """One row per lattice point; the sharp point is the row with all four coordinates ``0.5``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for lam, c in sorted(coeffs.items()):
            q = Quaternion.coerce(c)
            coords = ["0.5"] * 4 if lam.sharp else [str(v) for v in lam.b + lam.w]
            w.writerow(coords + [repr(q.q0), repr(q.q1), repr(q.q2), repr(q.q3)])


def read_coefficients_csv(path: str | os.PathLike) -> dict[LatticePoint, Quaternion]:
    out: dict[LatticePoint, Quaternion] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        if [h.strip() for h in header] != CSV_COLUMNS:
            raise FormatError(f"coefficient CSV header must be {','.join(CSV_COLUMNS)}")
        for n, row in enumerate(reader, start=2):
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != 8:
                raise FormatError(f"line {n}: expected 8 columns, got {len(row)}")
            try:
                coords = [float(v) for v in row[:4]]
                q = Quaternion(*(float(v) for v in row[4:]))
            except ValueError as exc:
                raise FormatError(f"line {n}: {exc}") from None
            if coords == [0.5] * 4:
                lam = SHARP
            elif all(c == int(c) for c in coords):
                lam = LatticePoint((int(coords[0]), int(coords[1])), (int(coords[2]), int(coords[3])))
            else:
                raise FormatError(f"line {n}: {coords} is neither a lattice point nor the sharp point")
            if lam in out:
                raise FormatError(f"line {n}: duplicate coefficient for {lam}")
            out[lam] = q
    return out


def _phase(table_cos, table_sin, num):
    return table_cos[num], table_sin[num]


def extract_coefficients(
    f: QField,
    K: int = DEFAULT_ZAK_GRID,
    n_lat: int = DEFAULT_LATTICE_RADIUS,
    n_zak: int = DEFAULT_ZAK_RADIUS,
    terms: int = DEFAULT_THETA_TERMS,
    eps_theta: float = DEFAULT_EPS_THETA,
    decay_tol: float | None = DEFAULT_DECAY_TOL,
) -> RelaxedCoefficients:
    """Relaxed-expansion coefficients ``γ^#`` and ``γ^λ`` for ``|λ|_∞ <= n_lat``.

    The Zak grid samples ``x`` at ``k / K`` and ``ω`` at ``(l + ½) / K``, so
    the zero of the theta factors at the cube centre is never hit. The
    extracted Fourier coefficients are exact for trigonometric content up
    to order ``n_lat < K / 2``; higher orders alias.
    """
    if K % 2:
        raise NyquistViolation(f"Zak grid size K={K} must be even")
    if not 0 <= n_lat < K / 2:
        raise NyquistViolation(f"lattice radius {n_lat} must be below K/2 = {K // 2}")
    kw = dict(n_zak=n_zak, terms=terms, decay_tol=decay_tol)
    gamma_sharp = sharp_functional(f, **kw)
    fs = residual(f, gamma_sharp)
    Z = zak_grid(fs, K, n_zak, omega_offset=0.5, decay_tol=decay_tol)

    base = zak_gaussian_factors(K, 0.5, terms)  # (x, ω) for either plane
    smallest = float(np.min(np.abs(base)))
    if smallest < eps_theta:
        raise NearSingularTheta(f"|g Θ| reaches {smallest:.3g} < {eps_theta:g} on the Zak grid")
    inv = 1.0 / base
    a, b = qt.to_split(Z.data)  # (k1, k2, l1, l2)
    # left multiplication by an i-plane number acts on both split parts
    a = a * inv[:, None, :, None]
    b = b * inv[:, None, :, None]
    # right multiplication by the j-plane inverse (ir + ii j)
    ir, ii = inv.real[None, :, None, :], inv.imag[None, :, None, :]
    a, b = a * ir - b * ii, a * ii + b * ir
    f_sup = float(np.max(np.hypot(np.abs(a), np.abs(b))))

    # exact phases: (ω x - b ω') in units of 1 / (2K)
    k = np.arange(K)
    half = 2 * k + 1
    span = np.arange(-n_lat, n_lat + 1)
    n = len(span)
    ang = 2 * np.pi * np.arange(2 * K) / (2 * K)
    cos_t, sin_t = np.cos(ang), np.sin(ang)
    # num[p_b, p_w, k, l]
    num = np.mod(2 * span[None, :, None, None] * k[None, None, :, None]
                 - span[:, None, None, None] * half[None, None, None, :], 2 * K)
    ker_i = (cos_t[num] - 1j * sin_t[num]).reshape(n * n, K, K)  # exp(-2πi φ)
    ker_c = cos_t[num].reshape(n * n, K, K)
    ker_s = sin_t[num].reshape(n * n, K, K)

    def block(p):
        # left i-plane kernel over (k1, l1)
        ta = np.einsum("kl,kmln->mn", ker_i[p], a)
        tb = np.einsum("kl,kmln->mn", ker_i[p], b)
        # right j-plane kernel exp(-2πj φ) = cos - sin j over (k2, l2)
        ra = np.einsum("qmn,mn->q", ker_c, ta) + np.einsum("qmn,mn->q", ker_s, tb)
        rb = np.einsum("qmn,mn->q", ker_c, tb) - np.einsum("qmn,mn->q", ker_s, ta)
        return ra, rb

    blocks = tile_map(block, range(n * n))
    norm = float(K) ** 4
    gamma: dict[LatticePoint, Quaternion] = {}
    for p, (ra, rb) in enumerate(blocks):
        b1, w1 = span[p // n], span[p % n]
        for q in range(n * n):
            b2, w2 = span[q // n], span[q % n]
            gamma[LatticePoint((int(b1), int(b2)), (int(w1), int(w2)))] = Quaternion(
                ra[q].real / norm, ra[q].imag / norm, rb[q].real / norm, rb[q].imag / norm)
    gamma = dict(sorted(gamma.items()))
    tail = math.fsum(abs(c) for lam, c in gamma.items() if lam.radius == n_lat)
    return RelaxedCoefficients(gamma_sharp, gamma, n_lat, tail, f_sup)


# ---------------------------------------------------------------------------
# uniqueness diagnostics


def uniqueness_probe(coeffs: Coefficients, u, spec: GridSpec) -> float:
    """``‖u e'_# + Σ_λ c_λ e'_λ‖_2``."""
    full = dict(coeffs)
    full[SHARP] = Quaternion.coerce(u)
    return l2_norm(synthesize(full, spec))


def random_unit_draw(rng: np.random.Generator, radius: int = 2) -> tuple[dict[LatticePoint, Quaternion], Quaternion]:
    """Gaussian ``(u, c)`` on ``|λ|_∞ <= radius`` scaled to unit total norm."""
    lams = list(lattice_window(radius))
    raw = rng.standard_normal((len(lams) + 1, 4))
    raw /= np.sqrt(np.sum(raw ** 2))
    coeffs = {lam: Quaternion.from_array(raw[n]) for n, lam in enumerate(lams)}
    return coeffs, Quaternion.from_array(raw[-1])


def uniqueness_kappa(spec: GridSpec, n_draws: int = 100, radius: int = 2, seed: int = 0) -> float:
    """Smallest probe value over ``n_draws`` unit-norm draws (an empirical lower frame-type constant)."""
    rng = np.random.default_rng(seed)
    draws = [random_unit_draw(rng, radius) for _ in range(n_draws)]
    values = tile_map(lambda d: uniqueness_probe(d[0], d[1], spec), draws)
    return min(values)


def random_coefficients(seed: int, radius: int = 2) -> tuple[dict[LatticePoint, Quaternion], Quaternion]:
    """Deterministic random ``(c, u)`` with standard normal quaternion entries."""
    rng = np.random.default_rng(seed)
    lams = list(lattice_window(radius))
    raw = rng.standard_normal((len(lams) + 1, 4))
    return {lam: Quaternion.from_array(raw[n]) for n, lam in enumerate(lams)}, Quaternion.from_array(raw[-1])


def max_relative_error(found: Coefficients, expected: Coefficients, keys: Iterable[LatticePoint] | None = None) -> float:
    """``max_λ |found - expected| / max_λ |expected|`` over ``keys`` (default: union of supports)."""
    keys = set(found) | set(expected) if keys is None else set(keys)
    zero = Quaternion()
    scale = max((abs(Quaternion.coerce(expected.get(k, zero))) for k in keys), default=0.0)
    worst = max((abs(Quaternion.coerce(found.get(k, zero)) - Quaternion.coerce(expected.get(k, zero))) for k in keys),
                default=0.0)
    return worst / scale if scale > 0 else worst
