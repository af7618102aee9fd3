"""``spi-solve`` command line interface.

Exit codes: 0 success, 1 verification verdict "fail", 2 usage error,
3 contract violation, 4 file format error, 5 I/O error, 6 oracle failure,
7 undefined scale / degenerate input, 8 inconclusive verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, core, harness, mmio, oracle
from .errors import ContractError, SpiError
from .generator import (
    RNG_ID,
    GeneratorSpec,
    derive_seed,
    gaussian_vector,
    generate_block_diagonal,
    generate_system,
    make_stream,
)
from .solver import (
    DEFAULT_PROBES,
    DEFAULT_ZERO_TOL_FACTOR,
    BlockSystem,
    solve_block_diagonal,
    solve_spi,
    verify_spi,
)

log = logging.getLogger("spi_solve")

EXIT_OK = 0
EXIT_VERDICT_FAIL = 1
EXIT_IO = 5

SCHEMA_GENERATE = "spi-solve/generate-sidecar/v1"
SCHEMA_SOLVE = "spi-solve/solve-report/v1"
SCHEMA_VERIFY = "spi-solve/verify-report/v1"


def load_schema(schema_id: str) -> dict:
    """Bundled JSON schema for a report ``schema`` identifier."""
    from importlib.resources import files

    name = schema_id.split("/", 1)[1].replace("/", ".") + ".json"
    return json.loads(files("spi_solve").joinpath("schemas", name).read_text(encoding="utf-8"))


def _field_of(A) -> str:
    return "complex" if np.iscomplexobj(A) else "real"


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _parse_block(text: str):
    try:
        m, n, r, s = text.split(",")
        return int(m), int(n), int(r), float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"block must be M,N,R,S, got {text!r}") from None


def _parse_size(text: str):
    try:
        m, n = text.lower().split("x")
        return int(m), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must be MxN, got {text!r}") from None


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sidecar = {"schema": SCHEMA_GENERATE, "rng_id": RNG_ID, "seed": args.seed, "field": args.field}
    if args.block:
        specs = [
            GeneratorSpec(m, n, r, s, args.field, derive_seed(args.seed, k), args.full_qr)
            for k, (m, n, r, s) in enumerate(args.block)
        ]
        A, system = generate_block_diagonal(specs)
        t = gaussian_vector(A.shape[1], args.field, make_stream(derive_seed(args.seed, len(specs))))
        b = core.matvec(A, t)
        sidecar["blocks"] = [sp.to_dict() for sp in specs]
        sidecar["row_offsets"] = list(system.row_offsets)
        sidecar["col_offsets"] = list(system.col_offsets)
    else:
        spec = GeneratorSpec(args.m, args.n, args.r, args.s, args.field, args.seed, args.full_qr)
        A, t, b = generate_system(spec)
        sidecar["spec"] = spec.to_dict()
    if args.inconsistent:
        g = gaussian_vector(A.shape[0], args.field, make_stream(derive_seed(args.seed, 2**32)))
        b = b + oracle.range_complement(A, g)
    sidecar["m"], sidecar["n"] = A.shape
    sidecar["inconsistent"] = args.inconsistent
    files = {"matrix": "A.mtx"}
    mmio.write_matrix(out / "A.mtx", A)
    if args.rhs:
        mmio.write_vector(out / "t.mtx", t)
        mmio.write_vector(out / "b.mtx", b)
        files.update(t="t.mtx", b="b.mtx")
    sidecar["files"] = files
    _write_json(out / "spec.json", sidecar)
    print(f"wrote {', '.join(files.values())} and spec.json to {out}")
    return EXIT_OK


def _load_blocks(path, A) -> BlockSystem:
    with open(path, encoding="utf-8") as fh:
        meta = json.load(fh)
    try:
        ro, co = meta["row_offsets"], meta["col_offsets"]
    except KeyError:
        raise ContractError(f"{path}: no row_offsets/col_offsets (not a block sidecar)") from None
    if ro[-1] != A.shape[0] or co[-1] != A.shape[1]:
        raise ContractError(f"{path}: block offsets do not match matrix shape {A.shape}")
    blocks = tuple(
        np.asfortranarray(A[ro[k] : ro[k + 1], co[k] : co[k + 1]]) for k in range(len(ro) - 1)
    )
    return BlockSystem(blocks, tuple(ro), tuple(co))


def cmd_solve(args) -> int:
    A = core.as_matrix(mmio.read_matrix(args.matrix))
    b = core.as_vector(mmio.read_vector(args.rhs))
    if b.shape[0] != A.shape[0]:
        raise ContractError(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if args.blocks:
        rep = solve_block_diagonal(_load_blocks(args.blocks, A), b, args.zero_tol_factor)
        alpha_sq = None
        per_block = list(rep.alpha_sq)
    else:
        rep = solve_spi(A, b, args.zero_tol_factor)
        alpha_sq = rep.alpha_sq
        per_block = None
    elapsed = time.perf_counter() - t0
    mmio.write_vector(out / "x.mtx", rep.x)
    report = {
        "schema": SCHEMA_SOLVE,
        "m": A.shape[0],
        "n": A.shape[1],
        "field": _field_of(A),
        "zero_tol_factor": args.zero_tol_factor,
        "alpha_sq": alpha_sq,
        "block_alpha_sq": per_block,
        "zeroed": sorted(rep.zeroed),
        "consistency": rep.consistency,
        "warning": rep.warning,
        "timings": {"solve_seconds": elapsed},
        "x_file": "x.mtx",
    }
    _write_json(out / "report.json", report)
    if rep.warning:
        log.warning(rep.warning)
    print(f"wrote x.mtx and report.json to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    A = core.as_matrix(mmio.read_matrix(args.matrix))
    rep = verify_spi(A, args.probes, args.tol, args.seed, args.alpha_sq)
    report = {
        "schema": SCHEMA_VERIFY,
        "m": A.shape[0],
        "n": A.shape[1],
        "field": _field_of(A),
        "alpha_sq": rep.alpha_sq,
        "max_probe_deviation": rep.max_probe_deviation,
        "probes": rep.probes,
        "tol": rep.tol,
        "seed": args.seed,
        "verdict": rep.verdict,
    }
    if args.out:
        _write_json(args.out, report)
    print(
        f"{rep.verdict}: alpha^2 = {rep.alpha_sq:.17g}, "
        f"max deviation {rep.max_probe_deviation:.3e} (tol {rep.tol:.1e}, {rep.probes} probes)"
    )
    return EXIT_OK if rep.passed else EXIT_VERDICT_FAIL


def cmd_bench(args) -> int:
    if args.sizes:
        ladders = {"custom": args.sizes}
    else:
        ladders = {"rows": harness.ROWS_LADDER, "both": harness.BOTH_LADDER}
    report = harness.bench(ladders, args.field, args.repeats, args.seed)
    for name, rows in report["ladders"].items():
        print(f"ladder {name}")
        for rec in rows:
            ratio = "" if rec["ratio"] is None else f"  ratio {rec['ratio']:.2f}"
            print(f"  {rec['m']:>6} x {rec['n']:<6} median {rec['median_time'] * 1e3:9.3f} ms{ratio}")
    if args.out:
        _write_json(args.out, report)
    return EXIT_OK


def cmd_repro_tables(args) -> int:
    fields = ("real", "complex") if args.field == "both" else (args.field,)
    grid = harness.FULL_GRID if args.long else harness.DESK_GRID

    def progress(rec):
        if rec["status"] == "ok":
            log.info(
                "%s %dx%d r=%d: mean %.3e over %d trials",
                rec["field"], rec["m"], rec["n"], rec["r"], rec["mean_residual"], rec["trials"],
            )

    report = harness.repro_tables(
        fields, grid, args.trials, args.seed, args.zero_tol_factor, args.full_qr, progress
    )
    report["grid"] = "full" if args.long else "desk"
    for field in fields:
        print(harness.format_table(report["records"], field))
        print()
    if args.out:
        _write_json(args.out, report)
    failed = [r for r in report["records"] if r["status"] != "ok"]
    return 6 if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spi-solve",
        description="Least-squares solver for scaled partial-isometric systems.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate a random scaled partial isometry")
    g.add_argument("--m", type=int, default=100)
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--r", type=int, default=10)
    g.add_argument("--s", type=float, default=1.0)
    g.add_argument("--block", type=_parse_block, action="append", metavar="M,N,R,S",
                   help="add a diagonal block (repeatable); overrides --m/--n/--r/--s")
    g.add_argument("--field", choices=("real", "complex"), default="real")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--full-qr", action="store_true", help="factor full m x m and n x n matrices")
    g.add_argument("--no-rhs", dest="rhs", action="store_false", help="skip t and b = A t")
    g.add_argument("--inconsistent", action="store_true",
                   help="add a component orthogonal to range(A) to b")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="solve A x = b")
    s.add_argument("matrix")
    s.add_argument("rhs")
    s.add_argument("--blocks", help="generate sidecar JSON with block offsets")
    s.add_argument("--zero-tol-factor", type=float, default=DEFAULT_ZERO_TOL_FACTOR)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", parents=[common], help="probe A A^* A = alpha^2 A")
    v.add_argument("matrix")
    v.add_argument("--probes", type=int, default=DEFAULT_PROBES)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--alpha-sq", type=float, default=None)
    v.add_argument("--out", help="write JSON report here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", parents=[common], help="time solve_spi on doubling size ladders")
    b.add_argument("--sizes", type=_parse_size, nargs="+", metavar="MxN")
    b.add_argument("--field", choices=("real", "complex"), default="real")
    b.add_argument("--repeats", type=int, default=harness.BENCH_REPEATS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="write JSON report here")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("repro-tables", parents=[common], help="mean ||x - x*|| over random trials per size")
    t.add_argument("--field", choices=("real", "complex", "both"), default="both")
    t.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--zero-tol-factor", type=float, default=DEFAULT_ZERO_TOL_FACTOR)
    t.add_argument("--full-qr", action="store_true")
    t.add_argument("--long", action="store_true", help="use the full-scale size grid")
    t.add_argument("--out", help="write JSON report here")
    t.set_defaults(func=cmd_repro_tables)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    if getattr(args, "repeats", 5) < 1:
        parser.error("--repeats must be >= 1")
    try:
        limiter = core.apply_thread_limit()  # noqa: F841 (held for the process lifetime)
        return args.func(args)
    except SpiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        where = f" ({exc.filename})" if exc.filename else ""
        print(f"I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
