"""Acceptance criteria at desk scale: 256² fields, K=16 Zak grid, N_lat=3.

Each test is one criterion; the conftest hook prints a PASS/FAIL line per test.
"""
import hashlib
import os
import subprocess
import sys
import warnings

import numpy as np
import pytest

from oracles import atom_direct, qft_direct, theta_direct, zak_direct
from qgabor import gabor as gb
from qgabor import qft
from qgabor import quaternion as qt
from qgabor import zak as zk
from qgabor.field import GridSpec, QField, l2_norm, random_mixture, save_qf2
from qgabor.quaternion import Quaternion

SPEC = GridSpec.square(8.0, 16)
K, N_LAT, N_ZAK, TERMS = 16, 3, 6, 8
THETA0 = 1.08643481
SIGMA0_8 = 1.41949549


def _quaternions(rng, n):
    return [Quaternion.from_array(v) for v in rng.standard_normal((n, 4))]


def test_criterion_01_algebra():
    rng = np.random.default_rng(0)
    q, r, s = (rng.standard_normal((10_000, 4)) for _ in range(3))
    qrs = qt.qmul(qt.qmul(q, r), s)
    rsq = qt.qmul(qt.qmul(r, s), q)
    sqr = qt.qmul(qt.qmul(s, q), r)
    scale = qt.qabs(q) * qt.qabs(r) * qt.qabs(s)
    assert np.max(np.abs(qrs[:, 0] - rsq[:, 0]) / scale) < 1e-13
    assert np.max(np.abs(qrs[:, 0] - sqr[:, 0]) / scale) < 1e-13
    pq = qt.qabs(qt.qmul(q, r))
    assert np.max(np.abs(pq - qt.qabs(q) * qt.qabs(r)) / pq) < 1e-13
    # the scalar API agrees with the array layer
    for a, b, c in zip(*(_quaternions(np.random.default_rng(k), 100) for k in (1, 2, 3))):
        x, y, z = qt.cyclic_sc_check(a, b, c)
        assert max(abs(x - y), abs(x - z)) < 1e-13 * abs(a) * abs(b) * abs(c)


def test_criterion_02_plancherel_parseval():
    for seed in range(20):
        f = random_mixture(SPEC, seed)
        g = random_mixture(SPEC, seed + 100)
        assert abs(l2_norm(qft.qft_forward(f)) / l2_norm(f) - 1) < 1e-10
        lhs, rhs = qft.parseval_check(f, g)
        assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_criterion_03_qft_oracle():
    rng = np.random.default_rng(3)
    for spec in (GridSpec(8, 8, -4, 4, -4, 4), GridSpec(8, 8, -1.5, 2.5, 0.25, 4.25)):
        f = QField(spec, rng.standard_normal(spec.shape + (4,)))
        F = qft.qft_forward(f)
        ref = qft_direct(f.data, spec.points(1), spec.points(2), F.spec.points(1), F.spec.points(2),
                         spec.h1, spec.h2)
        assert np.max(np.abs(F.data - ref)) < 1e-12


def test_criterion_04a_wqft_reconstruction():
    for seed in range(3):
        f = random_mixture(SPEC, seed)
        rec = qft.wqft_reconstruct(qft.wqft(f), SPEC)
        assert qft.relative_l2_error(rec, f) < 1e-3


def test_criterion_04b_gabor_energy_equals_signal_energy():
    """Full Gabor energy against ‖f‖². The measured ratio is ‖g‖² = 1/2, see the decisions ledger."""
    for seed in range(3):
        rep = qft.gabor_energy_report(random_mixture(SPEC, seed))
        print(f"seed {seed}: full energy / |f|^2 = {rep.full_ratio:.6f}")
        assert abs(rep.full_ratio - 1) < 1e-3


def test_criterion_04c_scalar_energy_constant_is_measured():
    ratios = [qft.gabor_energy_report(random_mixture(SPEC, seed)).scalar_ratio for seed in range(3)]
    print("scalar energy / |f|^2:", ", ".join(f"{r:.6f}" for r in ratios))
    assert all(0 < r < 1 for r in ratios)
    if all(abs(r - 0.25) < 1e-3 for r in ratios):
        return
    warnings.warn(f"scalar energy constant is signal dependent, not 1/4: {ratios}")


def test_criterion_05_theta():
    ti, tj = zk.ThetaEval("i", TERMS), zk.ThetaEval("j", TERMS)
    assert abs(ti(0, 0).q0 - THETA0) < 1e-8
    assert abs(theta_direct(0, 0).real - THETA0) < 1e-8
    assert abs(ti(0.5, 0.5)) < 1e-12 and abs(tj(0.5, 0.5)) < 1e-12
    for u in np.linspace(-1, 1, 9):
        for v in np.linspace(-1, 1, 9):
            for axis, ev in (("i", ti), ("j", tj)):
                t0 = ev(u, v)
                tol = 1e-13 * max(1.0, abs(t0))
                assert abs(ev(u + 1, v) - t0) < ev.tail_bound(v) * 2 + tol
                # Θ(z + i) = exp(π - 2πi z) Θ(z), with j in place of i on the j-plane
                factor = Quaternion(np.exp(np.pi + 2 * np.pi * v)) * (qt.exp_i(-u) if axis == "i" else qt.exp_j(-u))
                shifted = ev(u, v + 1)
                bound = ev.tail_bound(v + 1) + abs(factor) * ev.tail_bound(v) + 1e-13 * max(1.0, abs(shifted))
                assert abs(shifted - factor * t0) < bound


def test_criterion_06_zak():
    f = random_mixture(SPEC, 4)
    Z = zk.zak_grid(f, K, N_ZAK, omega_offset=0.5)
    # ω-periodicity is exact on the grid, x-quasi-periodicity holds to 1e-12
    assert np.array_equal(Z.data, zk.zak_grid(f, K, N_ZAK, omega_offset=0.5, omega_cell=(1, -1)).data)
    Zx = zk.zak_grid(f, K, N_ZAK, omega_offset=0.5, x_cell=(1, 0))
    e1 = qt.exp_i_array(Z.omega_points(1))[None, None, :, None, :]
    assert np.max(np.abs(Zx.data - qt.qmul(e1, Z.data))) < 1e-12
    Zy = zk.zak_grid(f, K, N_ZAK, omega_offset=0.5, x_cell=(0, 1))
    e2 = qt.exp_j_array(Z.omega_points(2))[None, None, None, :, :]
    assert np.max(np.abs(Zy.data - qt.qmul(Z.data, e2))) < 1e-12

    n2, z2 = zk.zak_unitarity_check(f)
    assert abs(n2 - z2) / n2 < 1e-6
    back = zk.zak_inverse(Z, cells=(-8, 8))
    assert qft.relative_l2_error(back, f) < 1e-9

    rng = np.random.default_rng(6)
    atoms = [((0, 0, 0, 0), Quaternion(1)), ((1, -2, 2, -1), Quaternion(0.3, -0.5, 0.7, 0.2)),
             ((0.5, 0.5, 0.5, 0.5), Quaternion(-0.4, 0.1, 0.2, 0.9))]
    for mu, c in atoms:
        fn = lambda a, b, mu=mu, c=c: atom_direct(mu[:2], mu[2:], c, a, b)  # noqa: E731
        for _ in range(48):
            x = tuple(rng.uniform(0, 1, 2))
            w = tuple(rng.uniform(0, 1, 2))
            assert abs(zk.zak_atom(mu, x, w, coeff=c) - zak_direct(fn, x, w, radius=10)) < 1e-9


def test_criterion_07_sharp_functional():
    kw = dict(n_zak=N_ZAK, terms=TERMS)
    assert abs(gb.sharp_functional(gb.atom_field(gb.SHARP, SPEC), **kw) - 1) < 1e-10
    lams = list(gb.lattice_window(2))
    assert len(lams) == 625
    worst = max(abs(gb.sharp_functional(gb.atom_field(lam, SPEC), **kw)) for lam in lams)
    assert worst < 1e-10


def test_criterion_08_relaxed_round_trip_and_synthesis_bound():
    keys = list(gb.lattice_window(2)) + [gb.SHARP]
    for seed in range(10):
        c, u = gb.random_coefficients(seed, 2)
        f = gb.synthesize({**c, gb.SHARP: u}, SPEC)
        R = gb.extract_coefficients(f, K, N_LAT, N_ZAK, TERMS)
        assert gb.max_relative_error(R.as_map(), {**c, gb.SHARP: u}, keys) < 1e-6
    s0 = gb.sigma0(8).value
    assert abs(s0 - SIGMA0_8) < 1e-8
    rng = np.random.default_rng(8)
    for _ in range(20):
        coeffs, ni, nj = gb.separable_draw(rng, 2)
        assert l2_norm(gb.synthesize(coeffs, SPEC)) <= s0 ** 2 * ni * nj


def test_criterion_09_uniqueness_witness():
    kappa16 = gb.uniqueness_kappa(GridSpec.square(8.0, 16), 100, 2, seed=9)
    kappa32 = gb.uniqueness_kappa(GridSpec.square(8.0, 32), 100, 2, seed=9)
    print(f"kappa: {kappa16:.6f} (16/unit), {kappa32:.6f} (32/unit)")
    assert kappa16 > 0 and kappa32 > 0
    assert abs(kappa16 - kappa32) <= 0.1 * kappa32


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_10_expand_determinism(tmp_path):
    c, u = gb.random_coefficients(10, 2)
    source = tmp_path / "f.qf2"
    save_qf2(gb.synthesize({**c, gb.SHARP: u}, SPEC), source)
    hashes = set()
    for threads in (1, 2, 8):
        out = tmp_path / f"c{threads}.csv"
        env = dict(os.environ, QGABOR_THREADS=str(threads))
        subprocess.run([sys.executable, "-m", "qgabor", "expand", "--input", str(source), "--output", str(out)],
                       env=env, check=True, capture_output=True)
        hashes.add((_digest(out), _digest(out.with_suffix(".json"))))
    assert len(hashes) == 1


@pytest.mark.parametrize("axis", ["i", "j"])
def test_theta_zero_is_simple(axis):
    """Companion to criterion 5: the zero at the centre is isolated."""
    ev = zk.ThetaEval(axis, TERMS)
    assert abs(ev(0.5 + 1e-3, 0.5)) > 1e-4
