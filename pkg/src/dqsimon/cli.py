"""Command-line front end: generate, solve, verify, bench, witness.

Exit codes: 0 success, 1 usage error, 2 promise or feasibility violation,
3 exactness failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .algorithms import ALGORITHMS, solve
from .gf2 import BitVector, Gf2Basis
from .instance import (
    HspInstance,
    InfeasibleParams,
    ProblemParams,
    PromiseViolation,
    generate,
    verify_instance,
)
from .witness import find_ds_witness

log = logging.getLogger("dqsimon")

EXIT_OK, EXIT_USAGE, EXIT_PROMISE, EXIT_INEXACT = 0, 1, 2, 3

BENCH_COLUMNS = (
    "n",
    "t",
    "m",
    "k",
    "k_l",
    "seed",
    "iterations",
    "quantum_queries_per_node",
    "classical_queries_total",
    "exact_success",
    "max_bad_probability",
    "wall_time_ms",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class BenchRow:
    n: int
    t: int
    m: int
    k: int
    k_l: int
    seed: int
    iterations: int
    quantum_queries_per_node: int
    classical_queries_total: int
    exact_success: bool
    max_bad_probability: float
    wall_time_ms: float


def trial_seed(master: int, n: int, t: int, m: int, k: int, trial: int) -> int:
    """Seed for one bench row; reproducible from the row's own coordinates."""
    seq = np.random.SeedSequence([master, n, t, m, k, trial])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def bench_row(n: int, t: int, m: int, k: int, seed: int, tolerance: float = 1e-9) -> BenchRow:
    """One full pipeline run; ``seed`` drives both the instance and the measurements."""
    start = time.perf_counter()
    inst = generate(ProblemParams(n, t, m, k, seed))
    trace = solve(inst, seed, "full")
    elapsed = (time.perf_counter() - start) * 1e3
    bad = trace.diagnostics["max_bad_probability"]
    return BenchRow(
        n,
        t,
        m,
        k,
        inst.k_l,
        seed,
        len(trace.iterations),
        trace.quantum_queries_per_node(),
        trace.classical_queries_total(),
        bool(trace.exact) and bad < tolerance,
        bad,
        round(elapsed, 3),
    )


def _bench_task(args: tuple) -> BenchRow:
    return bench_row(*args)


def bench_grid(
    ns, ts, ks=None, m=None, trials: int = 1, master_seed: int = 0
) -> list[tuple[int, int, int, int, int]]:
    """(n, t, m, k, seed) for every feasible grid point and trial, in grid order."""
    tasks = []
    for n in ns:
        for t in ts:
            for k in range(n + 1) if ks is None else ks:
                mm = max(n - k, 1) if m is None else m
                try:
                    ProblemParams(n, t, mm, k).validate()
                except InfeasibleParams:
                    continue
                for trial in range(trials):
                    tasks.append((n, t, mm, k, trial_seed(master_seed, n, t, mm, k, trial)))
    return tasks


def run_bench(tasks, tolerance: float = 1e-9, workers: int = 1) -> list[BenchRow]:
    jobs = [task + (tolerance,) for task in tasks]
    if workers <= 1:
        return [_bench_task(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_bench_task, jobs, chunksize=8))


def summarize(rows: list[BenchRow]) -> dict:
    if not rows:
        return {"rows": 0}
    return {
        "rows": len(rows),
        "success_rate": sum(r.exact_success for r in rows) / len(rows),
        "max_iterations": max(r.iterations for r in rows),
        "mean_iterations": float(np.mean([r.iterations for r in rows])),
        "mean_quantum_queries_per_node": float(np.mean([r.quantum_queries_per_node for r in rows])),
        "mean_classical_queries_total": float(np.mean([r.classical_queries_total for r in rows])),
        "iterations_within_n_minus_t": all(r.iterations <= r.n - r.t for r in rows),
        "queries_within_6_n_minus_t": all(
            r.quantum_queries_per_node <= 6 * (r.n - r.t) for r in rows
        ),
        "max_bad_probability": max(r.max_bad_probability for r in rows),
    }


def write_csv(rows: list[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))


def parse_int_list(text: str) -> list[int]:
    """'3-8' or '1,2' or '4' -> list of ints."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list: {text!r}")
    return out


def _load(path: str) -> HspInstance:
    try:
        return HspInstance.load(path)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from exc


def cmd_generate(args) -> int:
    params = ProblemParams(args.n, args.t, args.m, args.k, args.seed)
    inst = generate(params)
    inst.save(args.out)
    print(f"wrote {args.out}: n={inst.n} t={inst.t} m={inst.m} k={inst.k} k_l={inst.k_l}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    sl = None
    if args.sl is not None:
        vectors = [BitVector.from_str(s) for s in args.sl.split(",") if s]
        sl = Gf2Basis.spanning(inst.u_bits, vectors)
    trace = solve(inst, args.seed, args.algorithm, rounds=args.rounds, sl_override=sl)
    bad = trace.diagnostics.get("max_bad_probability", 0.0)
    exact = bool(trace.exact) and bad < args.tolerance
    text = json.dumps(trace.to_json(), indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)

    print(f"algorithm: {args.algorithm}")
    if trace.sl_basis is not None:
        print(f"S_l basis: {[str(v) for v in trace.sl_basis]}")
    if trace.subgroup is not None:
        print(f"subgroup ({len(trace.subgroup)}): {sorted(str(s) for s in trace.subgroup)}")
    print(f"iterations: {len(trace.iterations)}")
    print(f"quantum queries per node: {trace.quantum_queries_per_node()}")
    print(f"classical queries total: {trace.classical_queries_total()}")
    if "max_bad_probability" in trace.diagnostics:
        print(f"max bad probability at final d_l: {bad:.3e}")
    print(f"exact: {str(exact).lower()}")
    for s in trace.diagnostics.get("missing", [])[:1]:
        print(f"witness: {s} ∈ S but missing from the result")
    return EXIT_OK if exact else EXIT_INEXACT


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    checks = verify_instance(inst)
    for c in checks:
        line = f"{c.name}: {'pass' if c.passed else 'FAIL'} - {c.detail}"
        if c.counterexample:
            line += f" (counterexample {c.counterexample[0]}, {c.counterexample[1]})"
        print(line)
    if args.out:
        Path(args.out).write_text(json.dumps([asdict(c) for c in checks], indent=1) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_PROMISE


def cmd_bench(args) -> int:
    tasks = bench_grid(args.n, args.t, args.k, args.m, args.trials, args.seed)
    if not tasks:
        raise UsageError("grid contains no feasible parameter combination")
    log.info("running %d trials", len(tasks))
    rows = run_bench(tasks, args.tolerance, args.workers)
    if args.out:
        write_csv(rows, args.out)
    summary = summarize(rows)
    for key, value in summary.items():
        print(f"{key}: {value}")
    return EXIT_OK if summary["success_rate"] == 1.0 else EXIT_INEXACT


def cmd_witness(args) -> int:
    found = find_ds_witness(max_n=args.max_n, ts=args.t, seeds=range(args.seeds))
    if found is None:
        print("no witness found")
        return EXIT_INEXACT
    print(json.dumps(found.to_json(), indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dqsimon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random instance as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run a solver pipeline on an instance file")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=0, help="measurement RNG seed")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="full")
    p.add_argument("--rounds", type=int, default=None, help="sampling rounds for dsl/ds")
    p.add_argument("--sl", default=None, help="comma-separated S_l (or S'_l) basis for eds/ds")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--out", default=None, help="trace JSON path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="exhaustively check an instance file")
    p.add_argument("instance")
    p.add_argument("--out", default=None, help="report JSON path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run the exact pipeline over a parameter grid")
    p.add_argument("--n", type=parse_int_list, default=parse_int_list("4-8"))
    p.add_argument("--t", type=parse_int_list, default=parse_int_list("1,2"))
    p.add_argument("--k", type=parse_int_list, default=None, help="default: every k in 0..n")
    p.add_argument("--m", type=int, default=None, help="default: max(n−k, 1)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--out", default=None, help="CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("witness", help="search for an instance where the non-exact assembly fails")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--t", type=parse_int_list, default=parse_int_list("1,2"))
    p.add_argument("--seeds", type=int, default=20)
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InfeasibleParams, PromiseViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROMISE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
