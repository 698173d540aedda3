import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgabor import quaternion as qt
from qgabor.errors import DegenerateInput
from qgabor.quaternion import I, J, K, ONE, Carrier, Quaternion

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)


def test_basis_products():
    assert I * J == K
    assert J * K == I
    assert K * I == J
    assert J * I == -K
    for u in (I, J, K):
        assert u * u == -ONE
    assert I * J * K == -ONE


def test_scalar_multiplication_both_sides():
    q = Quaternion(1, 2, 3, 4)
    assert 2 * q == q * 2 == Quaternion(2, 4, 6, 8)


def test_components_are_python_floats():
    q = Quaternion(np.float64(1.5), np.int64(2), 3, 4)
    assert all(type(v) is float for v in q)


@given(quats, quats, quats)
def test_cyclic_scalar_identity(q, r, s):
    a, b, c = qt.cyclic_sc_check(q, r, s)
    scale = max(abs(q) * abs(r) * abs(s), 1e-300)
    assert abs(a - b) <= 1e-13 * scale
    assert abs(b - c) <= 1e-13 * scale


@given(quats, quats)
def test_modulus_multiplicative(p, q):
    assert math.isclose(abs(p * q), abs(p) * abs(q), rel_tol=1e-13, abs_tol=1e-300)


@given(quats, quats)
def test_conjugate_reverses_products(p, q):
    lhs = (p * q).conj()
    rhs = q.conj() * p.conj()
    assert lhs.isclose(rhs, atol=1e-12 * max(1.0, abs(p) * abs(q)))


@given(quats)
def test_inverse_both_sides(q):
    if abs(q) < 1e-6:
        return
    inv = qt.inverse(q)
    assert (q * inv).isclose(ONE, 1e-12)
    assert (inv * q).isclose(ONE, 1e-12)


def test_inverse_of_zero_raises():
    with pytest.raises(DegenerateInput):
        qt.inverse(Quaternion())
    with pytest.raises(ZeroDivisionError):
        qt.inverse(Quaternion(1e-320))


def test_inverse_of_tiny_but_valid_modulus():
    q = Quaternion(0, 3e-200, 0, 4e-200)
    assert (q * qt.inverse(q)).isclose(ONE, 1e-12)


def test_modulus_does_not_overflow():
    assert abs(Quaternion(3e200, 4e200)) == pytest.approx(5e200)


def test_no_division_operator():
    with pytest.raises(TypeError):
        Quaternion(1) / Quaternion(2)


def test_sc_and_vec_split():
    q = Quaternion(1, 2, 3, 4)
    assert q.sc == 1.0
    assert q.vec == Quaternion(0, 2, 3, 4)
    assert q.sc + q.vec == q


def test_exp_kernels_lie_in_their_planes():
    assert qt.exp_i(0.25).isclose(I)
    assert qt.exp_j(0.25).isclose(J)
    assert qt.exp_i(0.5).isclose(-ONE)


def test_carriers_apply_on_their_side():
    q, p = Quaternion(1, 2, 3, 4), Quaternion(0.5, -1, 0.25, 2)
    assert qt.right(p).apply(q) == q * p
    assert qt.left(p).apply(q) == p * q
    assert qt.right(p).apply(q) != qt.left(p).apply(q)


def test_carrier_composition_and_conjugation():
    q, p, r = Quaternion(1, 2, 3, 4), Quaternion(0.5, -1, 0.25, 2), Quaternion(2, 0, 1, -1)
    both = qt.right(p).then(qt.right(r))
    assert both.apply(q).isclose(q * p * r)
    both = qt.left(p).then(qt.left(r))
    assert both.apply(q).isclose(r * p * q)
    # conj(q p) = conj(p) conj(q): a right carrier turns into a left one
    c = qt.right(p).conj()
    assert c.side == "left"
    assert c.apply(q.conj()).isclose(qt.right(p).apply(q).conj())
    with pytest.raises(ValueError):
        qt.right(p).then(qt.left(r))
    with pytest.raises(ValueError):
        Carrier("middle", p)


def test_array_layer_matches_scalar_layer():
    rng = np.random.default_rng(0)
    p, q = rng.standard_normal((50, 4)), rng.standard_normal((50, 4))
    prod = qt.qmul(p, q)
    for n in range(50):
        ref = Quaternion.from_array(p[n]) * Quaternion.from_array(q[n])
        assert np.allclose(prod[n], ref.to_array(), atol=1e-14)
    assert np.allclose(qt.qmul(p, qt.qinv(p)), [1, 0, 0, 0], atol=1e-12)
    assert np.allclose(qt.qabs(qt.qmul(p, q)), qt.qabs(p) * qt.qabs(q))


def test_split_round_trip_and_right_jplane_product():
    rng = np.random.default_rng(1)
    q = rng.standard_normal((7, 4))
    a, b = qt.to_split(q)
    assert np.array_equal(qt.from_split(a, b), q)
    x, y = rng.standard_normal(7), rng.standard_normal(7)
    ra, rb = qt.split_right_jplane(a, b, x, y)
    direct = qt.qmul(q, qt.jplane(x + 1j * y))
    assert np.allclose(qt.from_split(ra, rb), direct, atol=1e-14)


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_i_and_j_kernels_do_not_commute(s, t):
    a, b = qt.exp_i(s), qt.exp_j(t)
    comm = a * b - b * a
    # the commutator is 2 sin sin k
    expected = 2 * math.sin(2 * math.pi * s) * math.sin(2 * math.pi * t)
    assert comm.isclose(Quaternion(0, 0, 0, expected), 1e-12)
