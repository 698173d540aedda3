"""``qgabor`` command line.

Exit codes: 0 ok, 1 failed check, 2 usage, 3 input/output or format problem.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import gabor as gb
from . import qft
from . import zak as zk
from .errors import (
    ExtentNotIntegral,
    FormatError,
    GridMismatch,
    InsufficientDecay,
    NearSingularTheta,
    NyquistViolation,
    ShapeMismatch,
    UnknownSignal,
)
from .field import GridSpec, QField, export_csv, l2_norm, load_ppm, load_qf2, read_qf2, sample, save_qf2
from .verify import RunConfig, run_verify

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

INPUT_ERRORS = (OSError, FormatError, GridMismatch, ShapeMismatch, ExtentNotIntegral,
                InsufficientDecay, NearSingularTheta, UnknownSignal)

SIGNALS = ("gaussian", "atom", "sharp_atom", "random_mixture", "indicator")


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resolution", type=int, help="samples per unit length (default 16, quick 8)")
    p.add_argument("--extent", type=float, default=8.0, help="grid covers [-extent, extent)^2 (default 8)")
    p.add_argument("--zak-grid", type=int, dest="K", help="Zak grid size K per axis (default 16, quick 8)")
    p.add_argument("--lattice-radius", type=int, dest="n_lat", default=gb.DEFAULT_LATTICE_RADIUS,
                   help="coefficient window |lambda|_inf <= N (default 3)")
    p.add_argument("--zak-radius", type=int, dest="n_zak", default=zk.DEFAULT_ZAK_RADIUS,
                   help="translates kept in Zak sums (default 6)")
    p.add_argument("--theta-terms", type=int, default=zk.DEFAULT_THETA_TERMS, help="theta truncation M (default 8)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input", type=Path)
    p.add_argument("--output", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--format", choices=("csv", "json", "qf2"))
    p.add_argument("--quick", action="store_true", help="small grids for a fast run")
    p.add_argument("--swap-atom-factors", action="store_true", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgabor", description="Quaternionic Gabor expansions at critical density.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="write an analytic test signal")
    _common(p)
    p.add_argument("--signal", choices=SIGNALS, default="random_mixture")

    p = sub.add_parser("synthesize", help="coefficient CSV (or --seed draw) -> field")
    _common(p)
    p.add_argument("--random", action="store_true", help="draw coefficients on |lambda| <= 2 from --seed")

    p = sub.add_parser("expand", help="field or PPM image -> relaxed expansion coefficients")
    _common(p)

    p = sub.add_parser("reconstruct", help="coefficient CSV -> field, with optional error vs --reference")
    _common(p)

    p = sub.add_parser("verify", help="run the property suite")
    _common(p)

    p = sub.add_parser("qft", help="two-sided quaternion Fourier transform of a field")
    _common(p)
    p.add_argument("--inverse", action="store_true")

    p = sub.add_parser("zak", help="Zak transform of a field on the K^4 grid")
    _common(p)
    p.add_argument("--omega-offset", type=float, default=0.0, choices=(0.0, 0.5))
    return parser


def make_config(args) -> RunConfig:
    quick = bool(args.quick)
    K = args.K if args.K is not None else (8 if quick else 16)
    resolution = args.resolution if args.resolution is not None else K
    try:
        return RunConfig(resolution=resolution, extent=args.extent, K=K, n_lat=args.n_lat, n_zak=args.n_zak,
                         theta_terms=args.theta_terms, seed=args.seed, quick=quick,
                         swap_atom_factors=args.swap_atom_factors)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require(args, name: str) -> Path:
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for '{args.command}'")
    return value


def _echo(cfg: RunConfig) -> str:
    return json.dumps(cfg.as_dict(), sort_keys=True)


def _load_field(path: Path, cfg: RunConfig) -> QField:
    with open(path, "rb") as fh:
        magic = fh.read(3)
    if magic == b"P6\n" or magic[:2] == b"P6":
        return load_ppm(path, resolution=cfg.resolution)
    return load_qf2(path)


def _write_field(f: QField, path: Path, fmt: str | None) -> None:
    if fmt == "csv":
        export_csv(f, path)
    else:
        save_qf2(f, path)


def cmd_sample(args, cfg: RunConfig) -> int:
    out = _require(args, "output")
    spec = cfg.spec()
    if args.signal == "random_mixture":
        f = sample("random_mixture", spec, seed=cfg.seed)
    elif args.signal == "sharp_atom":
        f = gb.atom_field(gb.SHARP, spec)
    elif args.signal == "atom":
        f = gb.atom_field(gb.LatticePoint(), spec)
    else:
        f = sample(args.signal, spec)
    _write_field(f, out, args.format)
    print(f"{args.signal}: L2 norm {l2_norm(f):.12g} -> {out}")
    return EXIT_OK


def cmd_synthesize(args, cfg: RunConfig) -> int:
    out = _require(args, "output")
    if args.input is not None:
        coeffs = gb.read_coefficients_csv(args.input)
    elif args.random:
        c, u = gb.random_coefficients(cfg.seed, 2)
        coeffs = {**c, gb.SHARP: u}
    else:
        raise UsageError("synthesize needs --input CSV or --random")
    f = gb.synthesize(coeffs, cfg.spec())
    _write_field(f, out, args.format)
    print(f"L2 norm: {l2_norm(f):.12g}")
    print(f"synthesis bound sigma0^2 |c|: {gb.synthesis_bound(coeffs):.12g}")
    return EXIT_OK


def cmd_expand(args, cfg: RunConfig) -> int:
    src = _require(args, "input")
    out = _require(args, "output")
    f = _load_field(src, cfg)
    start = time.perf_counter()
    R = gb.extract_coefficients(f, cfg.K, cfg.n_lat, cfg.n_zak, cfg.theta_terms)
    runtime = time.perf_counter() - start
    summary = R.summary()
    summary["input_l2_norm"] = l2_norm(f)
    rec = gb.synthesize(R.as_map(), f.spec)
    summary["reconstruction_rel_l2"] = qft.relative_l2_error(rec, f)
    summary["config"] = cfg.as_dict()
    fmt = args.format or "csv"
    if fmt == "csv":
        R.to_csv(out)
        json_path = out.with_suffix(".json")
    elif fmt == "json":
        json_path = out
    else:
        raise UsageError("expand writes csv or json")
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    g = R.gamma_sharp
    print(f"gamma_sharp: ({g.q0:.12g}, {g.q1:.12g}, {g.q2:.12g}, {g.q3:.12g})")
    print(f"sum |gamma|^2: {R.lattice_energy():.12g}")
    print(f"tail estimate: {R.tail_estimate:.6g}")
    print(f"reconstruction rel. L2 error: {summary['reconstruction_rel_l2']:.6g}")
    print(f"runtime: {runtime:.3f} s")
    return EXIT_OK


def cmd_reconstruct(args, cfg: RunConfig) -> int:
    src = _require(args, "input")
    out = _require(args, "output")
    coeffs = gb.read_coefficients_csv(src)
    ref = _load_field(args.reference, cfg) if args.reference is not None else None
    spec = ref.spec if ref is not None else cfg.spec()
    f = gb.synthesize(coeffs, spec)
    _write_field(f, out, args.format)
    print(f"L2 norm: {l2_norm(f):.12g}")
    if ref is not None:
        print(f"relative L2 error vs reference: {qft.relative_l2_error(f, ref):.6g}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    rep = run_verify(cfg)
    if args.format == "json":
        text = rep.to_json()
        if args.output is not None:
            args.output.write_text(text + "\n")
        else:
            print(text)
    else:
        print("config: " + _echo(cfg))
        print(rep.table())
        if args.output is not None:
            args.output.write_text(rep.to_json() + "\n")
    print(f"runtime: {rep.runtime:.2f} s", file=sys.stderr if args.format == "json" else sys.stdout)
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_qft(args, cfg: RunConfig) -> int:
    src = _require(args, "input")
    out = _require(args, "output")
    if args.inverse:
        header, _ = read_qf2(src)
        F = load_qf2(src)
        spec = None
        if "source_x1_min" in header:
            try:
                spec = GridSpec(int(header["n1"]), int(header["n2"]),
                                *(float(header[f"source_{k}"]) for k in ("x1_min", "x1_max", "x2_min", "x2_max")))
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad spectrum header: {exc}") from None
        f = qft.qft_inverse(F, spec)
        _write_field(f, out, args.format)
        print(f"inverse QFT: L2 norm {l2_norm(f):.12g}")
        return EXIT_OK
    f = _load_field(src, cfg)
    F = qft.qft_forward(f)
    if args.format == "csv":
        export_csv(F, out)
    else:
        s = f.spec
        save_qf2(F, out, {"source_x1_min": s.x1_min, "source_x1_max": s.x1_max,
                          "source_x2_min": s.x2_min, "source_x2_max": s.x2_max})
    print(f"QFT: L2 norm {l2_norm(F):.12g} (signal {l2_norm(f):.12g})")
    return EXIT_OK


def cmd_zak(args, cfg: RunConfig) -> int:
    src = _require(args, "input")
    out = _require(args, "output")
    f = _load_field(src, cfg)
    Z = zk.zak_grid(f, cfg.K, cfg.n_zak, omega_offset=args.omega_offset)
    if args.format == "csv":
        Z.export_slice_csv(out)
    else:
        Z.save(out)
    print(f"Zak grid K={cfg.K}: L2 norm {Z.l2_norm():.12g} (signal {l2_norm(f):.12g})")
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "synthesize": cmd_synthesize,
    "expand": cmd_expand,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
    "qft": cmd_qft,
    "zak": cmd_zak,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, NyquistViolation) as exc:
        parser.print_usage(sys.stderr)
        print(f"qgabor {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientDecay as exc:
        print(f"qgabor {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except INPUT_ERRORS as exc:
        print(f"qgabor {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
