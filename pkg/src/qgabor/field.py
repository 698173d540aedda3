"""Quaternion-valued signals sampled on a uniform 2-D grid.

Sample ``k`` along an axis sits at the lower-left cell corner
``t_k = t_min + k h`` with ``h = (t_max - t_min) / n``, so a grid with an
integer origin and an integer number of samples per unit tiles the unit
cube ``Q = [0, 1)^2`` exactly. Integrals are rectangle-rule sums with
weight ``h1 h2``; for the smooth rapidly decaying or periodic integrands
used throughout, this rule is spectrally accurate.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable

import numpy as np

from . import quaternion as qt
from .errors import ExtentNotIntegral, FormatError, GridMismatch, ShapeMismatch, UnknownSignal
from .quaternion import Quaternion

DEFAULT_RESOLUTION = 16
_ON_GRID_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    n1: int
    n2: int
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float

    def __post_init__(self):
        if int(self.n1) != self.n1 or int(self.n2) != self.n2 or self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"need at least 2 integer samples per axis, got {self.n1}x{self.n2}")
        if not (self.x1_max > self.x1_min and self.x2_max > self.x2_min):
            raise ValueError("grid extent must satisfy max > min on both axes")
        vals = (self.x1_min, self.x1_max, self.x2_min, self.x2_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("grid extent must be finite")

    @classmethod
    def square(cls, half_width: float = 8.0, resolution: int = DEFAULT_RESOLUTION) -> "GridSpec":
        """``[-half_width, half_width)^2`` with ``resolution`` samples per unit length."""
        n = int(round(2 * half_width * resolution))
        return cls(n, n, -half_width, half_width, -half_width, half_width)

    @classmethod
    def box(cls, lo: float, hi: float, resolution: int = DEFAULT_RESOLUTION) -> "GridSpec":
        n = int(round((hi - lo) * resolution))
        return cls(n, n, lo, hi, lo, hi)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def h1(self) -> float:
        return (self.x1_max - self.x1_min) / self.n1

    @property
    def h2(self) -> float:
        return (self.x2_max - self.x2_min) / self.n2

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    def points(self, axis: int) -> np.ndarray:
        if axis == 1:
            return self.x1_min + np.arange(self.n1) * self.h1
        if axis == 2:
            return self.x2_min + np.arange(self.n2) * self.h2
        raise ValueError("axis must be 1 or 2")

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.points(1), self.points(2), indexing="ij")

    def resolution(self, axis: int) -> float:
        return 1.0 / (self.h1 if axis == 1 else self.h2)

    def index(self, t: float, axis: int) -> int:
        """Integer sample index of coordinate ``t``; raises if ``t`` is off-grid."""
        lo, h, n = (self.x1_min, self.h1, self.n1) if axis == 1 else (self.x2_min, self.h2, self.n2)
        k = (t - lo) / h
        kr = round(k)
        if abs(k - kr) > _ON_GRID_TOL:
            raise GridMismatch(f"coordinate {t!r} is not a sample point of axis {axis}")
        return int(kr)

    def contains_index(self, k: int, axis: int) -> bool:
        n = self.n1 if axis == 1 else self.n2
        return 0 <= k < n

    def integer_resolution(self) -> int:
        """Samples per unit length when it is the same integer on both axes."""
        r1, r2 = self.resolution(1), self.resolution(2)
        r = round(r1)
        if abs(r1 - r) > 1e-9 or abs(r2 - r) > 1e-9 or r < 1:
            raise GridMismatch(f"grid needs the same integer resolution on both axes, got {r1:g}, {r2:g}")
        return int(r)

    def as_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "x1_min": self.x1_min,
            "x1_max": self.x1_max,
            "x2_min": self.x2_min,
            "x2_max": self.x2_max,
        }


@dataclass(frozen=True, eq=False)
class QField:
    """Immutable sampled signal; ``data[k1, k2]`` is the sample at ``(t_k1, t_k2)``."""

    spec: GridSpec
    data: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.shape != (self.spec.n1, self.spec.n2, 4):
            raise ShapeMismatch(f"data shape {data.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("field samples must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "QField":
        return cls(spec, np.zeros(spec.shape + (4,)))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], spec: GridSpec) -> "QField":
        x1, x2 = spec.mesh()
        return cls(spec, fn(x1, x2))

    def __add__(self, other: "QField") -> "QField":
        _check_same(self, other)
        return QField(self.spec, self.data + other.data)

    def __sub__(self, other: "QField") -> "QField":
        _check_same(self, other)
        return QField(self.spec, self.data - other.data)

    def __neg__(self) -> "QField":
        return QField(self.spec, -self.data)

    def scale(self, a: float) -> "QField":
        return QField(self.spec, a * self.data)

    def left_mul(self, p) -> "QField":
        """Pointwise ``p f(x)``."""
        return QField(self.spec, qt.qmul(Quaternion.coerce(p).to_array(), self.data))

    def right_mul(self, p) -> "QField":
        """Pointwise ``f(x) p``."""
        return QField(self.spec, qt.qmul(self.data, Quaternion.coerce(p).to_array()))

    def modulus(self) -> np.ndarray:
        return qt.qabs(self.data)

    def sup_norm(self) -> float:
        return float(np.max(self.modulus()))

    def value_at(self, x1: float, x2: float) -> Quaternion:
        """Sample at an on-grid point; points outside the extent read as zero."""
        k1, k2 = self.spec.index(x1, 1), self.spec.index(x2, 2)
        if self.spec.contains_index(k1, 1) and self.spec.contains_index(k2, 2):
            return Quaternion.from_array(self.data[k1, k2])
        return Quaternion()

    def is_real(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.data[..., 1:]) <= atol))


def _check_same(f: QField, g: QField) -> None:
    if f.spec != g.spec:
        raise ShapeMismatch("fields live on different grids")


def l2_norm(f: QField) -> float:
    return math.sqrt(float(np.sum(np.square(f.data))) * f.spec.cell_area)


def real_inner(f: QField, g: QField) -> float:
    """``Sc ∫ f conj(g)``, i.e. the Euclidean product of the component vectors."""
    _check_same(f, g)
    return float(np.sum(f.data * g.data)) * f.spec.cell_area


def h_inner(f: QField, g: QField) -> Quaternion:
    """Quaternion-valued ``∫ f(x) conj(g(x)) dx``; left-linear in ``f``."""
    _check_same(f, g)
    prod = qt.qmul(f.data, qt.qconj(g.data))
    return Quaternion.from_array(prod.sum(axis=(0, 1)) * f.spec.cell_area)


@dataclass(frozen=True)
class WienerReport:
    norm_W: float
    per_cell: dict[tuple[int, int], float]

    def tail(self, radius: int) -> float:
        """Sum of cell suprema over cells ``n`` with ``max|n_i| > radius``."""
        return math.fsum(v for n, v in self.per_cell.items() if max(abs(n[0]), abs(n[1])) > radius)


def _cell_layout(spec: GridSpec, axis: int) -> tuple[int, int, int]:
    lo = spec.x1_min if axis == 1 else spec.x2_min
    hi = spec.x1_max if axis == 1 else spec.x2_max
    n = spec.n1 if axis == 1 else spec.n2
    width = hi - lo
    if abs(lo - round(lo)) > _ON_GRID_TOL or abs(width - round(width)) > _ON_GRID_TOL:
        raise ExtentNotIntegral(f"axis {axis} extent [{lo}, {hi}) is not aligned to unit cubes")
    per = n / round(width)
    if abs(per - round(per)) > _ON_GRID_TOL:
        raise ExtentNotIntegral(f"axis {axis} has a non-integer number of samples per unit")
    return int(round(lo)), int(round(width)), int(round(per))


def wiener_norm(f: QField) -> WienerReport:
    """Sum over unit cubes ``T_n Q`` of the discrete supremum of ``|f|``."""
    lo1, w1, r1 = _cell_layout(f.spec, 1)
    lo2, w2, r2 = _cell_layout(f.spec, 2)
    sups = f.modulus().reshape(w1, r1, w2, r2).max(axis=(1, 3))
    per_cell = {(lo1 + a, lo2 + b): float(sups[a, b]) for a in range(w1) for b in range(w2)}
    return WienerReport(norm_W=math.fsum(per_cell.values()), per_cell=per_cell)


# ---------------------------------------------------------------------------
# analytic test signals


def gaussian_1d(t: np.ndarray, center: float = 0.0, width: float = 1.0) -> np.ndarray:
    return np.exp(-np.pi * ((t - center) / width) ** 2)


def wedged_gaussian(
    spec: GridSpec,
    center=(0.0, 0.0),
    freq=(0.0, 0.0),
    coeff=1.0,
    width: float = 1.0,
) -> QField:
    """``exp(2 pi i x1 w1) c g(x - b) exp(2 pi j x2 w2)`` on ``spec``.

    The coefficient sits between the two kernels. The evaluation is
    separable: ``exp(2 pi i x1 w1) g1`` is an ``i``-plane function of ``x1``
    alone and ``g2 exp(2 pi j x2 w2)`` a ``j``-plane function of ``x2``.
    """
    c = Quaternion.coerce(coeff).to_array()
    x1, x2 = spec.points(1), spec.points(2)
    left = np.exp(2j * np.pi * x1 * freq[0]) * gaussian_1d(x1, center[0], width)
    g2 = gaussian_1d(x2, center[1], width)
    rx, ry = g2 * np.cos(2 * np.pi * x2 * freq[1]), g2 * np.sin(2 * np.pi * x2 * freq[1])
    ca, cb = complex(c[0], c[1]), complex(c[2], c[3])
    a = left[:, None] * ca
    b = left[:, None] * cb
    # (a + b j)(x + y j) with real x, y along axis 2
    out_a = a * rx[None, :] - b * ry[None, :]
    out_b = a * ry[None, :] + b * rx[None, :]
    return QField(spec, qt.from_split(out_a, out_b))


def indicator_q(spec: GridSpec) -> QField:
    x1, x2 = spec.mesh()
    eps = 1e-12
    inside = (x1 >= -eps) & (x1 < 1 - eps) & (x2 >= -eps) & (x2 < 1 - eps)
    data = np.zeros(spec.shape + (4,))
    data[..., 0] = inside
    return QField(spec, data)


def constant(spec: GridSpec, value=1.0) -> QField:
    q = Quaternion.coerce(value).to_array()
    return QField(spec, np.broadcast_to(q, spec.shape + (4,)))


def gaussian_mixture(spec: GridSpec, centers, amplitudes, widths=None) -> QField:
    """``sum_n a_n exp(-pi |x - b_n|^2 / s_n^2)`` with quaternion amplitudes on the left."""
    widths = [1.0] * len(centers) if widths is None else list(widths)
    if not (len(centers) == len(amplitudes) == len(widths)):
        raise ValueError("centers, amplitudes and widths must have equal length")
    x1, x2 = spec.points(1), spec.points(2)
    data = np.zeros(spec.shape + (4,))
    for b, a, s in zip(centers, amplitudes, widths):
        g = np.outer(gaussian_1d(x1, b[0], s), gaussian_1d(x2, b[1], s))
        data += g[..., None] * Quaternion.coerce(a).to_array()
    return QField(spec, data)


def random_mixture_params(seed: int, n_components: int = 3, spread: float = 1.5):
    """Deterministic random Gaussian-mixture parameters (centers, amplitudes, widths)."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-spread, spread, size=(n_components, 2))
    amplitudes = rng.normal(size=(n_components, 4))
    widths = rng.uniform(0.8, 1.3, size=n_components)
    return [tuple(c) for c in centers], [Quaternion.from_array(a) for a in amplitudes], list(widths)


def random_mixture(spec: GridSpec, seed: int, n_components: int = 3, spread: float = 1.5) -> QField:
    centers, amps, widths = random_mixture_params(seed, n_components, spread)
    return gaussian_mixture(spec, centers, amps, widths)


SIGNALS = ("gaussian", "modulated_gaussian", "gaussian_mixture", "random_mixture", "indicator", "constant", "image")


def sample(signal: str, spec: GridSpec | None = None, **params) -> QField:
    """Sample a named analytic signal on ``spec``.

    ``gaussian``            center, amplitude (left factor), width
    ``modulated_gaussian``  center, freq, coeff, width (coefficient wedged between kernels)
    ``gaussian_mixture``    centers, amplitudes, widths
    ``random_mixture``      seed, n_components, spread
    ``indicator``           indicator of the unit cube
    ``constant``            value
    ``image``               path to a binary PPM; ``resolution`` and ``origin`` place the pixels
    """
    if signal == "image":
        img = load_ppm(params["path"], resolution=params.get("resolution", DEFAULT_RESOLUTION),
                       origin=params.get("origin", (0.0, 0.0)))
        return img if spec is None else embed(img, spec)
    if spec is None:
        raise ValueError(f"signal {signal!r} needs a grid spec")
    if signal == "gaussian":
        center = params.get("center", (0.0, 0.0))
        width = params.get("width", 1.0)
        amp = params.get("amplitude", 1.0)
        return gaussian_mixture(spec, [center], [amp], [width])
    if signal == "modulated_gaussian":
        return wedged_gaussian(spec, params.get("center", (0.0, 0.0)), params.get("freq", (0.0, 0.0)),
                               params.get("coeff", 1.0), params.get("width", 1.0))
    if signal == "gaussian_mixture":
        return gaussian_mixture(spec, params["centers"], params["amplitudes"], params.get("widths"))
    if signal == "random_mixture":
        return random_mixture(spec, params.get("seed", 0), params.get("n_components", 3), params.get("spread", 1.5))
    if signal == "indicator":
        return indicator_q(spec)
    if signal == "constant":
        return constant(spec, params.get("value", 1.0))
    raise UnknownSignal(signal)


def embed(f: QField, spec: GridSpec) -> QField:
    """Zero-pad ``f`` into the larger aligned grid ``spec``."""
    if abs(f.spec.h1 - spec.h1) > 1e-12 or abs(f.spec.h2 - spec.h2) > 1e-12:
        raise GridMismatch("embedding requires identical sample steps")
    k1 = spec.index(f.spec.x1_min, 1)
    k2 = spec.index(f.spec.x2_min, 2)
    if k1 < 0 or k2 < 0 or k1 + f.spec.n1 > spec.n1 or k2 + f.spec.n2 > spec.n2:
        raise GridMismatch("source field does not fit inside the target grid")
    data = np.zeros(spec.shape + (4,))
    data[k1:k1 + f.spec.n1, k2:k2 + f.spec.n2] = f.data
    return QField(spec, data)


# ---------------------------------------------------------------------------
# file formats

QF2_MAGIC = "QF2"


def _write_header(fh, items: dict) -> None:
    lines = [f"magic={QF2_MAGIC}"] + [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in items.items()]
    lines += ["endianness=little", "dtype=float64", "end"]
    fh.write(("\n".join(lines) + "\n").encode("ascii"))


def _read_header(fh) -> dict[str, str]:
    header: dict[str, str] = {}
    while True:
        line = fh.readline()
        if not line:
            raise FormatError("unexpected end of file inside QF2 header")
        try:
            text = line.decode("ascii").strip()
        except UnicodeDecodeError:
            raise FormatError("QF2 header is not ASCII") from None
        if text == "end":
            break
        if "=" not in text:
            raise FormatError(f"malformed QF2 header line {text!r}")
        key, value = text.split("=", 1)
        header[key] = value
    if header.get("magic") != QF2_MAGIC:
        raise FormatError("missing QF2 magic")
    if header.get("endianness") != "little" or header.get("dtype") != "float64":
        raise FormatError("only little-endian float64 QF2 payloads are supported")
    return header


def save_qf2(f: QField, path: str | os.PathLike, extra: dict | None = None) -> None:
    items = {"kind": "field", **f.spec.as_dict(), **(extra or {})}
    with open(path, "wb") as fh:
        _write_header(fh, items)
        fh.write(np.ascontiguousarray(f.data, dtype="<f8").tobytes())


def save_qf2_array(path: str | os.PathLike, data: np.ndarray, header: dict) -> None:
    """Write an arbitrary-rank ``(..., 4)`` array with a custom header (used for 4-D Zak grids)."""
    with open(path, "wb") as fh:
        _write_header(fh, header)
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_qf2(path: str | os.PathLike) -> tuple[dict[str, str], bytes]:
    with open(path, "rb") as fh:
        header = _read_header(fh)
        payload = fh.read()
    return header, payload


def load_qf2(path: str | os.PathLike) -> QField:
    header, payload = read_qf2(path)
    if header.get("kind", "field") != "field":
        raise FormatError(f"expected a 2-D field, found kind={header.get('kind')}")
    try:
        spec = GridSpec(
            int(header["n1"]), int(header["n2"]),
            float(header["x1_min"]), float(header["x1_max"]),
            float(header["x2_min"]), float(header["x2_max"]),
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad QF2 grid header: {exc}") from None
    expected = spec.n1 * spec.n2 * 4 * 8
    if len(payload) != expected:
        raise FormatError(f"QF2 payload has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f8").reshape(spec.n1, spec.n2, 4)
    try:
        return QField(spec, data)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _ppm_tokens(raw: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        tokens.append(raw[start:pos])
    # exactly one whitespace byte separates header from raster
    return tokens, pos + 1


def load_ppm(path: str | os.PathLike, resolution: int = DEFAULT_RESOLUTION, origin=(0.0, 0.0)) -> QField:
    """Import an 8-bit binary PPM as the pure quaternion field ``(0, R, G, B) / 255``.

    Row ``r`` of the image maps to ``x1 = origin[0] + r / resolution`` and
    column ``c`` to ``x2 = origin[1] + c / resolution``.
    """
    raw = Path(path).read_bytes()
    tokens, start = _ppm_tokens(raw, 4)
    if tokens[0] != b"P6":
        raise FormatError("only binary P6 PPM files are supported")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("non-integer PPM header field") from None
    if maxval != 255:
        raise FormatError(f"only 8-bit PPM (maxval 255) is supported, got {maxval}")
    raster = raw[start:start + width * height * 3]
    if len(raster) != width * height * 3:
        raise FormatError("truncated PPM raster")
    rgb = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).astype(float) / 255.0
    data = np.zeros((height, width, 4))
    data[..., 1:] = rgb
    spec = GridSpec(height, width, origin[0], origin[0] + height / resolution,
                    origin[1], origin[1] + width / resolution)
    return QField(spec, data)


def save_ppm(path: str | os.PathLike, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def export_csv(f: QField, path: str | os.PathLike) -> None:
    """Per-sample CSV with columns ``x1, x2, q0, q1, q2, q3, modulus``."""
    x1, x2 = f.spec.mesh()
    table = np.column_stack([x1.ravel(), x2.ravel(), f.data.reshape(-1, 4), f.modulus().ravel()])
    np.savetxt(path, table, delimiter=",", header="x1,x2,q0,q1,q2,q3,modulus", comments="", fmt="%.17g")
