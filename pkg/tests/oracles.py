"""Independent brute-force reference implementations used by the test-suite.

Everything here is deliberately naive: explicit loops or dense sums with
full quaternion products, no FFTs and no symplectic split.
"""

import math

import numpy as np

from qgabor import quaternion as qt


def qft_direct(data, x1, x2, w1, w2, h1, h2, sign=-1):
    """O(N^4) ``Σ_x exp(sign 2πi x1 w1) f(x) exp(sign 2πj x2 w2) h1 h2``."""
    out = np.zeros((len(w1), len(w2), 4))
    for l1, a in enumerate(w1):
        left = qt.exp_i_array(sign * x1 * a)  # (n1, 4)
        for l2, b in enumerate(w2):
            right = qt.exp_j_array(sign * x2 * b)  # (n2, 4)
            terms = qt.qmul(qt.qmul(left[:, None, :], data), right[None, :, :])
            out[l1, l2] = terms.sum(axis=(0, 1)) * h1 * h2
    return out


def theta_direct(u, v, terms=40):
    """``Σ_{|m|<=terms} exp(2πi m (u + i v) - π m^2)`` as a Python complex, summed with fsum."""
    re = math.fsum(math.exp(-2 * math.pi * m * v - math.pi * m * m) * math.cos(2 * math.pi * m * u)
                   for m in range(-terms, terms + 1))
    im = math.fsum(math.exp(-2 * math.pi * m * v - math.pi * m * m) * math.sin(2 * math.pi * m * u)
                   for m in range(-terms, terms + 1))
    return complex(re, im)


def gaussian_integral_1d(a=2 * math.pi, lo=-10.0, hi=10.0, n=20001):
    """Composite Simpson rule for ``∫ exp(-a t^2) dt``."""
    t = np.linspace(lo, hi, n)
    y = np.exp(-a * t * t)
    h = (hi - lo) / (n - 1)
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def zak_direct(fn, x, w, radius=8):
    """Lattice sum ``Σ_m exp(2πi m1 w1) f(x - m) exp(2πj m2 w2)`` for a callable ``fn(x1, x2)``."""
    total = qt.Quaternion()
    for m1 in range(-radius, radius + 1):
        for m2 in range(-radius, radius + 1):
            val = qt.Quaternion.from_array(fn(x[0] - m1, x[1] - m2))
            total = total + qt.exp_i(m1 * w[0]) * val * qt.exp_j(m2 * w[1])
    return total


def atom_direct(b, w, c, x1, x2):
    """Pointwise ``exp(2πi x1 w1) c exp(-π|x-b|^2) exp(2πj x2 w2)`` via scalar quaternion products."""
    g = math.exp(-math.pi * ((x1 - b[0]) ** 2 + (x2 - b[1]) ** 2))
    return (qt.exp_i(x1 * w[0]) * (qt.Quaternion.coerce(c) * g) * qt.exp_j(x2 * w[1])).to_array()
