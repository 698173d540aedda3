"""Two-sided quaternionic Fourier transform and its windowed variant.

The transform ``∫ exp(-2πi x1 w1) f(x) exp(-2πj x2 w2) dx`` is evaluated
through the split ``f = a + b j`` (``a, b`` complex in the ``i``-plane).
For an ``i``-plane value ``z``, ``z exp(-jβ) = z cos β - (z sin β) j``, so
the right kernel reduces to cosine and sine transforms along ``x2``. Both
are obtained from two ordinary complex transforms along ``x2``, one with
the forward sign and one with the reversed sign:

    C z = (A⁻ + A⁺) / 2,      S z = i (A⁻ - A⁺) / 2,
    A∓ = Σ exp(-iα) exp(∓iβ) z,

and the result recombines as ``(C a + S b) + (C b - S a) j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import quaternion as qt
from ._parallel import chunks, tile_map
from .errors import ShapeMismatch, WindowNotReal
from .field import GridSpec, QField, gaussian_1d, l2_norm, real_inner
from .quaternion import Quaternion

DEFAULT_B_AXIS = np.arange(-16, 17) / 4.0
DEFAULT_W_AXIS = np.arange(-16, 17) / 4.0


@dataclass(frozen=True, eq=False)
class Spectrum(QField):
    """A :class:`QField` on the frequency grid dual to ``source``."""

    source: GridSpec | None = dc_field(default=None)


def dual_spec(spec: GridSpec) -> GridSpec:
    """Frequencies ``w_l = (l - n//2) / (n h)``, centred on zero."""
    d1 = 1.0 / (spec.n1 * spec.h1)
    d2 = 1.0 / (spec.n2 * spec.h2)
    c1, c2 = spec.n1 // 2, spec.n2 // 2
    return GridSpec(spec.n1, spec.n2, -c1 * d1, (spec.n1 - c1) * d1, -c2 * d2, (spec.n2 - c2) * d2)


def _uniform_dft(z: np.ndarray, axis: int, sign: int, src0: float, dsrc: float, dst0: float, ddst: float) -> np.ndarray:
    """``out[l] = Σ_k exp(sign 2πi s_k t_l) z[k]`` for uniform grids with ``dsrc·ddst = 1/n``."""
    n = z.shape[axis]
    k = np.arange(n)
    shape = [1] * z.ndim
    shape[axis] = n
    pre = np.exp(sign * 2j * np.pi * k * dsrc * dst0).reshape(shape)
    t = dst0 + k * ddst
    post = np.exp(sign * 2j * np.pi * src0 * t).reshape(shape)
    if sign < 0:
        core = np.fft.fft(z * pre, axis=axis)
    else:
        core = np.fft.ifft(z * pre, axis=axis) * n
    return core * post


def _two_sided(a: np.ndarray, b: np.ndarray, sign: int, src: GridSpec, dst: GridSpec):
    """Split-form ``Σ exp(sign 2πi s1 t1) (a + b j) exp(sign 2πj s2 t2)`` (no quadrature weight)."""
    def along1(z):
        return _uniform_dft(z, 0, sign, src.x1_min, src.h1, dst.x1_min, dst.h1)

    def along2(z, s):
        return _uniform_dft(z, 1, s, src.x2_min, src.h2, dst.x2_min, dst.h2)

    a1, b1 = along1(a), along1(b)
    # same-sign and reversed-sign transforms along x2
    a_same, a_rev = along2(a1, sign), along2(a1, -sign)
    b_same, b_rev = along2(b1, sign), along2(b1, -sign)
    ca, cb = (a_same + a_rev) / 2, (b_same + b_rev) / 2
    # Σ e^{±iα} z sin β
    sa = sign * -1j * (a_same - a_rev) / 2
    sb = sign * -1j * (b_same - b_rev) / 2
    if sign < 0:
        # z e^{-jβ} = z cos β - (z sin β) j
        return ca + sb, cb - sa
    # z e^{+jβ} = z cos β + (z sin β) j
    return ca - sb, cb + sa


def qft_forward(f: QField) -> Spectrum:
    dual = dual_spec(f.spec)
    a, b = qt.to_split(f.data)
    p, q = _two_sided(a, b, -1, f.spec, dual)
    w = f.spec.cell_area
    return Spectrum(dual, qt.from_split(p * w, q * w), source=f.spec)


def qft_inverse(F: QField, spec: GridSpec | None = None) -> QField:
    """Inverse transform onto ``spec``.

    Defaults to the signal grid recorded on a :class:`Spectrum`, else to the
    zero-centred grid whose dual is ``F.spec``.
    """
    if spec is None:
        spec = getattr(F, "source", None)
    if spec is None:
        d = F.spec
        h1 = 1.0 / (d.n1 * d.h1)
        h2 = 1.0 / (d.n2 * d.h2)
        spec = GridSpec(d.n1, d.n2, -(d.n1 // 2) * h1, (d.n1 - d.n1 // 2) * h1,
                        -(d.n2 // 2) * h2, (d.n2 - d.n2 // 2) * h2)
    if spec.shape != F.spec.shape:
        raise ShapeMismatch("target grid must have the spectrum's shape")
    a, b = qt.to_split(F.data)
    p, q = _two_sided(a, b, +1, F.spec, spec)
    w = F.spec.cell_area
    return QField(spec, qt.from_split(p * w, q * w))


def parseval_check(f: QField, g: QField) -> tuple[float, float]:
    """``(<f, g>, <f̂, ĝ>)`` with the real scalar product."""
    if f.spec != g.spec:
        raise ShapeMismatch("fields live on different grids")
    return real_inner(f, g), real_inner(qft_forward(f), qft_forward(g))


def spectral_leakage(f: QField, shell: float = 0.1) -> float:
    """Fraction of spectral energy in the outer ``shell`` of the frequency box."""
    F = qft_forward(f)
    w1, w2 = F.spec.mesh()
    lim1 = (1 - shell) * max(abs(F.spec.x1_min), abs(F.spec.x1_max))
    lim2 = (1 - shell) * max(abs(F.spec.x2_min), abs(F.spec.x2_max))
    outer = (np.abs(w1) > lim1) | (np.abs(w2) > lim2)
    energy = np.sum(np.square(F.data), axis=-1)
    total = float(np.sum(energy))
    return 0.0 if total == 0.0 else float(np.sum(energy[outer])) / total


# ---------------------------------------------------------------------------
# windowed transform


@dataclass(frozen=True, eq=False)
class WqftCoefficients:
    """``data[i1, i2, l1, l2]`` holds ``G_g f((b1[i1], b2[i2]), (w1[l1], w2[l2]))``."""

    b1: np.ndarray
    b2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    data: np.ndarray
    window: str = "gaussian"

    @property
    def cell(self) -> float:
        """Quadrature weight ``Δb1 Δb2 Δw1 Δw2`` of one coefficient."""
        return float(np.prod([_step(v) for v in (self.b1, self.b2, self.w1, self.w2)]))


def _step(v: np.ndarray) -> float:
    return float(v[1] - v[0]) if len(v) > 1 else 1.0


def _gaussian_window_norm2(spec: GridSpec) -> float:
    g1 = gaussian_1d(spec.points(1))
    g2 = gaussian_1d(spec.points(2))
    return float(np.sum(g1 ** 2) * np.sum(g2 ** 2)) * spec.cell_area


def _check_window(window: QField, spec: GridSpec) -> None:
    if window.spec != spec:
        raise ShapeMismatch("window must be sampled on the signal grid")
    if not window.is_real():
        raise WindowNotReal("window samples must have zero vector part")
    if not np.any(window.data[..., 0]):
        raise WindowNotReal("window must be non-zero")


def _kernels(t: np.ndarray, b: np.ndarray, w: np.ndarray, sign: int):
    """Rows indexed by ``(b, w)`` pairs: exp(sign 2πi t w) g(t - b), cos·g, sin·g."""
    g = gaussian_1d(t[None, None, :] - b[:, None, None])
    phase = 2 * np.pi * t[None, None, :] * w[None, :, None]
    n = len(b) * len(w)
    e = (np.exp(sign * 1j * phase) * g).reshape(n, len(t))
    c = (np.cos(phase) * g).reshape(n, len(t))
    s = (np.sin(phase) * g).reshape(n, len(t))
    return e, c, s


def wqft(
    f: QField,
    window: QField | None = None,
    b_axis: np.ndarray = DEFAULT_B_AXIS,
    w_axis: np.ndarray = DEFAULT_W_AXIS,
    b2_axis: np.ndarray | None = None,
    w2_axis: np.ndarray | None = None,
) -> WqftCoefficients:
    """Windowed QFT on the product grid ``(b1, b2, w1, w2)``.

    ``window=None`` selects the Gaussian ``exp(-π|x|^2)`` and uses the
    separable fast path; a real sampled window takes the general path and
    requires every ``b`` to be a whole number of samples.
    """
    b1 = np.asarray(b_axis, dtype=float)
    b2 = b1 if b2_axis is None else np.asarray(b2_axis, dtype=float)
    w1 = np.asarray(w_axis, dtype=float)
    w2 = w1 if w2_axis is None else np.asarray(w2_axis, dtype=float)
    if window is None:
        data = _wqft_gaussian(f, b1, b2, w1, w2)
        return WqftCoefficients(b1, b2, w1, w2, data, "gaussian")
    _check_window(window, f.spec)
    data = _wqft_sampled(f, window, b1, b2, w1, w2)
    return WqftCoefficients(b1, b2, w1, w2, data, "sampled")


def _wqft_gaussian(f, b1, b2, w1, w2) -> np.ndarray:
    x1, x2 = f.spec.points(1), f.spec.points(2)
    a, b = qt.to_split(f.data)
    L, _, _ = _kernels(x1, b1, w1, -1)
    _, Rc, Rs = _kernels(x2, b2, w2, -1)
    # right side: z e^{-jβ} = z cos β - (z sin β) j  =>  P = C a + S b, Q = C b - S a
    inner_p = a @ Rc.T + b @ Rs.T
    inner_q = b @ Rc.T - a @ Rs.T
    rows = chunks(L.shape[0], 64)

    def tile(sl):
        return L[sl] @ inner_p, L[sl] @ inner_q

    parts = tile_map(tile, rows)
    p = np.concatenate([t[0] for t in parts]) * f.spec.cell_area
    q = np.concatenate([t[1] for t in parts]) * f.spec.cell_area
    shape = (len(b1), len(w1), len(b2), len(w2))
    out = qt.from_split(p.reshape(shape), q.reshape(shape))
    return out.transpose(0, 2, 1, 3, 4)


def _shift_indices(spec: GridSpec, b: np.ndarray, axis: int) -> np.ndarray:
    h = spec.h1 if axis == 1 else spec.h2
    s = b / h
    si = np.round(s)
    if np.any(np.abs(s - si) > 1e-9):
        raise ShapeMismatch("sampled windows need translations that are whole sample steps")
    return si.astype(int)


def _shifted(window: np.ndarray, s1: int, s2: int) -> np.ndarray:
    """``g(x - b)`` for a shift of ``(s1, s2)`` samples, zero outside the grid."""
    out = np.zeros_like(window)
    n1, n2 = window.shape
    src1 = slice(max(0, -s1), min(n1, n1 - s1))
    dst1 = slice(max(0, s1), min(n1, n1 + s1))
    src2 = slice(max(0, -s2), min(n2, n2 - s2))
    dst2 = slice(max(0, s2), min(n2, n2 + s2))
    out[dst1, dst2] = window[src1, src2]
    return out


def _wqft_sampled(f, window, b1, b2, w1, w2) -> np.ndarray:
    x1, x2 = f.spec.points(1), f.spec.points(2)
    s1, s2 = _shift_indices(f.spec, b1, 1), _shift_indices(f.spec, b2, 2)
    g = window.data[..., 0]
    a, b = qt.to_split(f.data)
    L0 = np.exp(-2j * np.pi * np.outer(w1, x1))
    ph2 = 2 * np.pi * np.outer(w2, x2)
    Rc0, Rs0 = np.cos(ph2), np.sin(ph2)

    def tile(i1):
        out = np.empty((len(b2), len(w1), len(w2), 4))
        for i2 in range(len(b2)):
            gs = _shifted(g, s1[i1], s2[i2])
            ab, bb = a * gs, b * gs
            p = L0 @ (ab @ Rc0.T + bb @ Rs0.T)
            q = L0 @ (bb @ Rc0.T - ab @ Rs0.T)
            out[i2] = qt.from_split(p, q)
        return out

    parts = tile_map(tile, range(len(b1)))
    return np.stack(parts) * f.spec.cell_area


def gabor_inner(f: QField, b, w, window: QField | None = None) -> Quaternion:
    """Carrier-resolved ``(f, M_w T_b g)``: ``∫ exp(-2πi x1 w1) f(x) g(x-b) exp(-2πj x2 w2) dx``.

    Evaluated by plain quadrature with full quaternion products; this is
    the reference path the fast transforms are checked against.
    """
    x1, x2 = f.spec.mesh()
    if window is None:
        g = gaussian_1d(x1, b[0]) * gaussian_1d(x2, b[1])
    else:
        _check_window(window, f.spec)
        s1 = _shift_indices(f.spec, np.array([b[0]]), 1)[0]
        s2 = _shift_indices(f.spec, np.array([b[1]]), 2)[0]
        g = _shifted(window.data[..., 0], s1, s2)
    left = qt.exp_i_array(-x1 * w[0])
    right = qt.exp_j_array(-x2 * w[1])
    integrand = qt.qmul(qt.qmul(left, f.data * g[..., None]), right)
    return Quaternion.from_array(integrand.sum(axis=(0, 1)) * f.spec.cell_area)


def wqft_reconstruct(C: WqftCoefficients, spec: GridSpec, window: QField | None = None) -> QField:
    """Discretised ``‖g‖⁻² ∬ exp(2πi x1 w1) G(b, w) g(x-b) exp(2πj x2 w2) dw db``."""
    p_all, q_all = qt.to_split(C.data)
    x1, x2 = spec.points(1), spec.points(2)
    weight = C.cell
    if window is None:
        norm2 = _gaussian_window_norm2(spec)
        L, _, _ = _kernels(x1, C.b1, C.w1, +1)
        _, Rc, Rs = _kernels(x2, C.b2, C.w2, +1)
        nb1, nb2, nw1, nw2 = C.data.shape[:4]
        P = p_all.transpose(0, 2, 1, 3).reshape(nb1 * nw1, nb2 * nw2)
        Q = q_all.transpose(0, 2, 1, 3).reshape(nb1 * nw1, nb2 * nw2)
        # z e^{+jβ} = z cos β + (z sin β) j
        right_a = P @ Rc - Q @ Rs
        right_b = P @ Rs + Q @ Rc
        rows = chunks(spec.n1, 64)
        parts = tile_map(lambda sl: (L.T[sl] @ right_a, L.T[sl] @ right_b), rows)
        out_a = np.concatenate([t[0] for t in parts])
        out_b = np.concatenate([t[1] for t in parts])
    else:
        _check_window(window, spec)
        norm2 = l2_norm(window) ** 2
        s1, s2 = _shift_indices(spec, C.b1, 1), _shift_indices(spec, C.b2, 2)
        g = window.data[..., 0]
        L0 = np.exp(2j * np.pi * np.outer(x1, C.w1))
        ph2 = 2 * np.pi * np.outer(x2, C.w2)
        Rc0, Rs0 = np.cos(ph2), np.sin(ph2)

        def tile(i1):
            acc_a = np.zeros(spec.shape, dtype=complex)
            acc_b = np.zeros(spec.shape, dtype=complex)
            for i2 in range(len(C.b2)):
                P, Q = p_all[i1, i2], q_all[i1, i2]
                ta = L0 @ (P @ Rc0.T - Q @ Rs0.T)
                tb = L0 @ (P @ Rs0.T + Q @ Rc0.T)
                gs = _shifted(g, s1[i1], s2[i2])
                acc_a += ta * gs
                acc_b += tb * gs
            return acc_a, acc_b

        parts = tile_map(tile, range(len(C.b1)))
        out_a = np.zeros(spec.shape, dtype=complex)
        out_b = np.zeros(spec.shape, dtype=complex)
        for pa, pb in parts:
            out_a += pa
            out_b += pb
    scale = weight / norm2
    return QField(spec, qt.from_split(out_a * scale, out_b * scale))


@dataclass(frozen=True)
class GaborEnergy:
    scalar_energy: float
    full_energy: float
    signal_energy: float
    window_energy: float

    @property
    def scalar_ratio(self) -> float:
        """Measured constant ``∬|<f, e_λ>|² / ‖f‖²``."""
        return self.scalar_energy / self.signal_energy

    @property
    def full_ratio(self) -> float:
        """Measured constant ``∬|(f, e_λ)|² / ‖f‖²``."""
        return self.full_energy / self.signal_energy


def gabor_energy(
    f: QField,
    b_axis: np.ndarray = DEFAULT_B_AXIS,
    w_axis: np.ndarray = DEFAULT_W_AXIS,
) -> tuple[float, float]:
    """``(∬|<f, e_λ>|² dλ, ∬|(f, e_λ)|² dλ)`` by quadrature over the ``(b, w)`` box."""
    C = wqft(f, None, b_axis, w_axis)
    scalar = float(np.sum(np.square(C.data[..., 0]))) * C.cell
    full = float(np.sum(np.square(C.data))) * C.cell
    return scalar, full


def gabor_energy_report(f: QField, b_axis=DEFAULT_B_AXIS, w_axis=DEFAULT_W_AXIS) -> GaborEnergy:
    scalar, full = gabor_energy(f, b_axis, w_axis)
    return GaborEnergy(scalar, full, l2_norm(f) ** 2, _gaussian_window_norm2(f.spec))


def relative_l2_error(f: QField, ref: QField) -> float:
    denom = l2_norm(ref)
    err = l2_norm(f - ref)
    return err / denom if denom > 0 else err


__all__ = [
    "Spectrum", "dual_spec", "qft_forward", "qft_inverse", "parseval_check", "spectral_leakage",
    "WqftCoefficients", "wqft", "gabor_inner", "wqft_reconstruct", "gabor_energy",
    "gabor_energy_report", "GaborEnergy", "relative_l2_error", "DEFAULT_B_AXIS", "DEFAULT_W_AXIS",
]
