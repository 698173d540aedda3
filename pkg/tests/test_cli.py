import hashlib
import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from qgabor import gabor as gb
from qgabor.cli import main
from qgabor.field import GridSpec, l2_norm, load_qf2, random_mixture, save_ppm, save_qf2, wedged_gaussian
from qgabor.quaternion import Quaternion
from qgabor.zak import ZakGrid


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_single_atom_csv_gives_the_base_atom(tmp_path, capsys):
    csv = tmp_path / "c.csv"
    gb.write_coefficients_csv({gb.LatticePoint(): Quaternion(1)}, csv)
    code, out, _ = run(["synthesize", "--input", csv, "--output", tmp_path / "f.qf2"], capsys)
    assert code == 0
    f = load_qf2(tmp_path / "f.qf2")
    assert np.array_equal(f.data, wedged_gaussian(GridSpec.square(8.0, 16), (0, 0), (0, 0), 1.0).data)
    assert "synthesis bound" in out


def test_empty_csv_gives_zero_field(tmp_path, capsys):
    csv = tmp_path / "c.csv"
    csv.write_text("b1,b2,w1,w2,c0,c1,c2,c3\n")
    code, out, _ = run(["synthesize", "--input", csv, "--output", tmp_path / "f.qf2"], capsys)
    assert code == 0
    assert l2_norm(load_qf2(tmp_path / "f.qf2")) == 0.0
    assert "L2 norm: 0" in out


def test_expand_sharp_atom(tmp_path, capsys):
    assert run(["sample", "--signal", "sharp_atom", "--output", tmp_path / "s.qf2"], capsys)[0] == 0
    code, out, _ = run(["expand", "--input", tmp_path / "s.qf2", "--output", tmp_path / "s.csv"], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "s.json").read_text())
    assert np.allclose(summary["gamma_sharp"], [1, 0, 0, 0], atol=1e-12)
    assert summary["tail_estimate"] < 1e-8
    assert summary["config"]["K"] == 16
    assert "runtime" not in summary
    assert "runtime:" in out


def test_expand_synthesize_round_trip(tmp_path, capsys):
    run(["synthesize", "--random", "--seed", 7, "--output", tmp_path / "f.qf2"], capsys)
    run(["expand", "--input", tmp_path / "f.qf2", "--output", tmp_path / "c.csv"], capsys)
    found = gb.read_coefficients_csv(tmp_path / "c.csv")
    c, u = gb.random_coefficients(7, 2)
    keys = list(gb.lattice_window(2)) + [gb.SHARP]
    assert gb.max_relative_error(found, {**c, gb.SHARP: u}, keys) < 1e-6


def test_identity_chain_on_base_atom(tmp_path, capsys):
    run(["sample", "--signal", "atom", "--output", tmp_path / "a.qf2"], capsys)
    run(["expand", "--input", tmp_path / "a.qf2", "--output", tmp_path / "a.csv"], capsys)
    code, out, _ = run(["reconstruct", "--input", tmp_path / "a.csv", "--reference", tmp_path / "a.qf2",
                        "--output", tmp_path / "r.qf2"], capsys)
    assert code == 0
    err = float(out.split("relative L2 error vs reference:")[1].split()[0])
    assert err < 1e-6


def test_reconstruct_without_reference(tmp_path, capsys):
    csv = tmp_path / "c.csv"
    gb.write_coefficients_csv({gb.SHARP: Quaternion(0, 1, 0, 0)}, csv)
    code, out, _ = run(["reconstruct", "--input", csv, "--output", tmp_path / "r.qf2"], capsys)
    assert code == 0
    assert "relative L2 error" not in out


@pytest.mark.xfail(strict=True, reason="off-lattice Gaussians converge slowly at critical density; "
                   "the N=3 window leaves a relative error near 0.36")
def test_gaussian_mixture_reconstruction_at_defaults(tmp_path, capsys):
    save_qf2(random_mixture(GridSpec.square(8.0, 16), 0), tmp_path / "m.qf2")
    run(["expand", "--input", tmp_path / "m.qf2", "--output", tmp_path / "m.csv"], capsys)
    _, out, _ = run(["reconstruct", "--input", tmp_path / "m.csv", "--reference", tmp_path / "m.qf2",
                     "--output", tmp_path / "r.qf2"], capsys)
    err = float(out.split("relative L2 error vs reference:")[1].split()[0])
    assert err < 1e-2


def test_expand_ppm_image(tmp_path, capsys):
    rgb = (np.random.default_rng(0).random((16, 16, 3)) * 255).astype(np.uint8)
    save_ppm(tmp_path / "img.ppm", rgb)
    start = time.perf_counter()
    code, out, _ = run(["expand", "--input", tmp_path / "img.ppm", "--output", tmp_path / "img.csv"], capsys)
    assert code == 0
    assert time.perf_counter() - start < 30
    summary = json.loads((tmp_path / "img.json").read_text())
    assert 0 < summary["reconstruction_rel_l2"] < 1
    assert "reconstruction rel. L2 error" in out


def test_qft_round_trip(tmp_path, capsys):
    f = random_mixture(GridSpec(32, 32, -1, 3, -2, 2), 1)
    save_qf2(f, tmp_path / "f.qf2")
    assert run(["qft", "--input", tmp_path / "f.qf2", "--output", tmp_path / "F.qf2"], capsys)[0] == 0
    assert run(["qft", "--inverse", "--input", tmp_path / "F.qf2", "--output", tmp_path / "g.qf2"], capsys)[0] == 0
    g = load_qf2(tmp_path / "g.qf2")
    assert g.spec == f.spec
    assert np.max(np.abs(g.data - f.data)) < 1e-12


def test_zak_command(tmp_path, capsys):
    run(["sample", "--signal", "atom", "--quick", "--output", tmp_path / "a.qf2"], capsys)
    code, _, _ = run(["zak", "--quick", "--input", tmp_path / "a.qf2", "--output", tmp_path / "z.qf2",
                      "--omega-offset", "0.5"], capsys)
    assert code == 0
    Z = ZakGrid.load(tmp_path / "z.qf2")
    assert Z.K == 8 and Z.omega_offset == 0.5
    assert run(["zak", "--quick", "--input", tmp_path / "a.qf2", "--output", tmp_path / "z.csv",
                "--format", "csv"], capsys)[0] == 0


def test_usage_errors_exit_2(tmp_path, capsys):
    code, _, err = run(["expand", "--input", "x", "--output", "y", "--lattice-radius", "8"], capsys)
    assert code == 2 and "K/2" in err
    code, _, _ = run(["synthesize", "--output", tmp_path / "f.qf2"], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["transmogrify"])
    assert exc.value.code == 2


def test_io_errors_exit_3(tmp_path, capsys):
    code, _, err = run(["expand", "--input", tmp_path / "missing.qf2", "--output", tmp_path / "c.csv"], capsys)
    assert code == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,coefficient,file\n")
    code, _, err = run(["reconstruct", "--input", bad, "--output", tmp_path / "r.qf2"], capsys)
    assert code == 3 and "FormatError" in err


def test_insufficient_decay_is_reported_with_a_hint(tmp_path, capsys):
    save_qf2(wedged_gaussian(GridSpec.square(8.0, 16), (0, 0), (0, 0), 1.0, width=4.0), tmp_path / "w.qf2")
    code, _, err = run(["expand", "--input", tmp_path / "w.qf2", "--output", tmp_path / "c.csv"], capsys)
    assert code == 3
    assert "increase --zak-radius" in err


def test_verify_quick_passes_and_echoes_config(tmp_path, capsys):
    start = time.perf_counter()
    code, out, _ = run(["verify", "--quick", "--output", tmp_path / "r.json"], capsys)
    assert code == 0
    assert time.perf_counter() - start < 60
    assert "overall: PASS" in out and "config: " in out
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["passed"] and report["config"]["K"] == 8


def test_verify_negative_control_fails(capsys):
    code, out, _ = run(["verify", "--quick", "--swap-atom-factors"], capsys)
    assert code == 1
    line = next(ln for ln in out.splitlines() if ln.startswith("zak: closed-form atom"))
    assert line.rstrip().endswith("FAIL")
    others = [ln for ln in out.splitlines() if "FAIL" in ln and not ln.startswith(("zak: closed-form", "overall"))]
    assert others == []


@pytest.mark.slow
def test_verify_default_config_passes(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0, out


def _subprocess(args, threads, cwd):
    env = dict(os.environ, QGABOR_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "qgabor", *map(str, args)], cwd=cwd, env=env, check=True,
                   capture_output=True)


def test_synthesize_is_deterministic_across_threads(tmp_path):
    hashes = set()
    for threads in (1, 2, 8):
        out = tmp_path / f"f{threads}.qf2"
        _subprocess(["synthesize", "--random", "--seed", 42, "--output", out], threads, tmp_path)
        hashes.add(digest(out))
    assert len(hashes) == 1


def test_bad_thread_setting_is_rejected(tmp_path):
    env = dict(os.environ, QGABOR_THREADS="zero")
    res = subprocess.run([sys.executable, "-m", "qgabor", "verify", "--quick"], env=env, capture_output=True)
    assert res.returncode != 0
    assert b"QGABOR_THREADS" in res.stderr
