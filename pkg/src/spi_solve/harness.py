"""Table reproduction and timing ladders."""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import OracleError
from .generator import RNG_ID, GeneratorSpec, derive_seed, generate_system
from .solver import solve_partial_isometry, solve_spi

log = logging.getLogger(__name__)

SCHEMA_BENCH = "spi-solve/bench-report/v1"


@dataclass(frozen=True)
class Cell:
    m: int
    n: int
    r: int
    s: float = 10.0


# the published grid, and the same grid scaled down by 10x
FULL_GRID = (Cell(10000, 10000, 2000), Cell(10000, 2000, 400), Cell(5000, 10000, 2000), Cell(5000, 5000, 5000))
DESK_GRID = (Cell(1000, 1000, 200), Cell(1000, 200, 40), Cell(500, 1000, 200), Cell(500, 500, 500))

DEFAULT_TRIALS = 150
DEFAULT_REPEATS = 5
# timing noise on shared hosts needs more than the minimum of 5 repeats
BENCH_REPEATS = 15
# rows ladder: n fixed, m doubling; both ladder: m and n doubling. Every
# matrix is >= 64 MB (real) so the whole ladder runs memory-bound rather than
# straddling the last-level cache.
ROWS_LADDER = ((8192, 2048), (16384, 2048), (32768, 2048))
BOTH_LADDER = ((2896, 2896), (5792, 5792))


def run_cell(
    cell: Cell,
    field: str,
    trials: int,
    seed: int,
    cell_index: int = 0,
    zero_tol_factor: float = 100.0,
    full_qr: bool = False,
) -> dict:
    """Mean ``||x - x_star||`` over ``trials`` generated systems ``b = A t``."""
    residuals, fast, t_solver, t_oracle = [], [], 0.0, 0.0
    record = {
        "m": cell.m,
        "n": cell.n,
        "r": cell.r,
        "s": cell.s,
        "field": field,
        "trials": trials,
        "seed": seed,
        "rng_id": RNG_ID,
        "full_qr": full_qr,
    }
    try:
        for k in range(trials):
            spec = GeneratorSpec(
                cell.m, cell.n, cell.r, cell.s, field, derive_seed(seed, cell_index, k), full_qr
            )
            A, _, b = generate_system(spec)
            t0 = time.perf_counter()
            rep = solve_spi(A, b, zero_tol_factor)
            t1 = time.perf_counter()
            x_star = oracle.pinv_solve(A, b)
            t2 = time.perf_counter()
            t_solver += t1 - t0
            t_oracle += t2 - t1
            residuals.append(float(np.linalg.norm(rep.x - x_star)))
            fast.append(float(np.linalg.norm(solve_partial_isometry(A, b) / rep.alpha_sq - x_star)))
    except OracleError as exc:
        log.error("cell %dx%d r=%d %s: %s", cell.m, cell.n, cell.r, field, exc)
        record.update(status="oracle-failed", error=str(exc), completed_trials=len(residuals))
        return record
    record.update(
        status="ok",
        completed_trials=trials,
        mean_residual=statistics.fmean(residuals),
        min_residual=min(residuals),
        max_residual=max(residuals),
        mean_fastpath_residual=statistics.fmean(fast),
        wall_time_solver=t_solver,
        wall_time_oracle=t_oracle,
    )
    return record


def repro_tables(
    fields=("real", "complex"),
    grid=DESK_GRID,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    zero_tol_factor: float = 100.0,
    full_qr: bool = False,
    progress=None,
) -> dict:
    """Run every grid cell for every field; returns a bench report dict."""
    records = []
    for fi, field in enumerate(fields):
        for ci, cell in enumerate(grid):
            rec = run_cell(
                cell, field, trials, seed, cell_index=fi * len(grid) + ci,
                zero_tol_factor=zero_tol_factor, full_qr=full_qr,
            )
            records.append(rec)
            if progress is not None:
                progress(rec)
    return {"schema": SCHEMA_BENCH, "kind": "repro-tables", "records": records}


def format_table(records, field: str) -> str:
    """Render records of one field in the published row layout."""
    rows = [r for r in records if r["field"] == field]
    cells = [
        ("s", [f"{r['s']:g}" for r in rows]),
        ("Size", [f"{r['m']} x {r['n']}" for r in rows]),
        ("r", [str(r["r"]) for r in rows]),
        (
            "||x-x*||_2",
            [f"{r['mean_residual']:.2e}" if r["status"] == "ok" else "FAILED" for r in rows],
        ),
    ]
    width = max(len(v) for _, vals in cells for v in vals) if rows else 0
    out = [f"{field} matrices"]
    for label, vals in cells:
        out.append(f"{label:<11}" + "".join(f"  {v:>{width}}" for v in vals))
    return "\n".join(out)


def time_solve(A, b, repeats: int = DEFAULT_REPEATS, warmup: int = 1) -> list[float]:
    """Wall times of ``solve_spi`` after ``warmup`` untimed calls."""
    for _ in range(warmup):
        solve_spi(A, b)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve_spi(A, b)
        times.append(time.perf_counter() - t0)
    return times


def bench_ladder(sizes, field: str = "real", repeats: int = DEFAULT_REPEATS, seed: int = 0, s: float = 10.0) -> list[dict]:
    """Median solve time per size and the ratio to the previous size.

    Generation happens outside the timed region; ``r = max(1, min(m, n) // 5)``.
    Repeats are interleaved across sizes so slow drift in machine load affects
    every size alike.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    systems = []
    for k, (m, n) in enumerate(sizes):
        r = max(1, min(m, n) // 5)
        A, _, b = generate_system(GeneratorSpec(m, n, r, s, field, derive_seed(seed, k)))
        systems.append((r, A, b))
    times = [time_solve(A, b, 0, warmup=1) for _, A, b in systems]
    for _ in range(repeats):
        for k, (_, A, b) in enumerate(systems):
            times[k] += time_solve(A, b, 1, warmup=0)
    out = []
    prev = None
    for (m, n), (r, _, _), ts in zip(sizes, systems, times):
        med = statistics.median(ts)
        out.append(
            {
                "m": m,
                "n": n,
                "r": r,
                "s": s,
                "field": field,
                "repeats": repeats,
                "median_time": med,
                "min_time": min(ts),
                "max_time": max(ts),
                "ratio": (med / prev) if prev else None,
            }
        )
        prev = med
    return out


def bench(ladders=None, field: str = "real", repeats: int = BENCH_REPEATS, seed: int = 0) -> dict:
    if ladders is None:
        ladders = {"rows": ROWS_LADDER, "both": BOTH_LADDER}
    return {
        "schema": SCHEMA_BENCH,
        "kind": "bench",
        "timing": f"median of {repeats} repeats after 1 warm-up; matrix resident in memory",
        "rng_id": RNG_ID,
        "ladders": {
            name: bench_ladder(sizes, field, repeats, derive_seed(seed, i))
            for i, (name, sizes) in enumerate(ladders.items())
        },
    }
