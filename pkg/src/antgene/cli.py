"""Command-line surface: run | bench | oracle | bridge.

run     solve a TSPLIB or generated instance, emit tour/trace/summary
bench   time identical seeded workloads across worker counts
oracle  compare the solver against the exact optimum over seeded instances
bridge  the two-branch pheromone convergence scenario

Thread precedence: --threads flag, then the ANTGENE_THREADS environment
variable, then 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from .colony import AcoParams, select_next_city
from .errors import AntgeneError
from .genetic import GaParams
from .hybrid import HybridParams, solve
from .instance import (
    HELD_KARP_MAX,
    brute_force_optimum,
    load_tsplib,
    optimality_gap,
    random_instance,
    tour_to_text,
)
from .parallel import Purpose, StreamKey, THREADS_ENV_VAR, stream_for, threads_from_env

BENCH_CSV_HEADER = "threads,construction_s,total_s,speedup,best_length"
BRIDGE_CSV_HEADER = "iteration,tau_short,tau_long,short_count,long_count"

BRIDGE_SHORT_LENGTH = 1.0
BRIDGE_LONG_LENGTH = 2.0


# ---------------------------------------------------------------------------
# double-bridge scenario


@dataclass
class BridgeRecord:
    iteration: int
    tau_short: float
    tau_long: float
    short_count: int
    long_count: int


def run_double_bridge(iterations=50, seed=0, params=None):
    """Ants repeatedly pick one of two branches (lengths 1 and 2) between the
    same endpoints; trails evaporate and the chosen branch receives the
    ant-cycle deposit. Both branches start at the same trail level."""
    p = params if params is not None else AcoParams()
    tau = np.array([1.0, 1.0])
    eta = np.array([1.0 / BRIDGE_SHORT_LENGTH, 1.0 / BRIDGE_LONG_LENGTH])
    records = [BridgeRecord(0, tau[0], tau[1], 0, 0)]
    for it in range(1, iterations + 1):
        weights = np.power(tau, p.alpha) * np.power(eta, p.beta)
        probs = weights / weights.sum()
        counts = [0, 0]
        for ant in range(p.m):
            draw = float(stream_for(StreamKey(seed, it, ant, Purpose.TRANSITION)).random())
            counts[select_next_city(probs, draw)] += 1
        tau *= p.delta
        tau[0] += counts[0] * p.q / BRIDGE_SHORT_LENGTH
        tau[1] += counts[1] * p.q / BRIDGE_LONG_LENGTH
        records.append(BridgeRecord(it, float(tau[0]), float(tau[1]), counts[0], counts[1]))
    return records


def bridge_records_to_csv(records):
    lines = [BRIDGE_CSV_HEADER]
    for r in records:
        lines.append(f"{r.iteration},{r.tau_short!r},{r.tau_long!r},{r.short_count},{r.long_count}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# convergence SVG (built-in polyline writer; CSV stays the canonical output)


def write_convergence_svg(records, path, width=640, height=400, margin=40):
    xs = [r.iteration for r in records]
    series = {
        "#1f77b4": [r.best_so_far for r in records],
        "#aaaaaa": [r.mean_length for r in records],
    }
    lo = min(min(v) for v in series.values())
    hi = max(max(v) for v in series.values())
    span_x = max(xs) - min(xs) or 1
    span_y = hi - lo or 1.0

    def scale(x, y):
        px = margin + (x - min(xs)) / span_x * (width - 2 * margin)
        py = height - margin - (y - lo) / span_y * (height - 2 * margin)
        return f"{px:.2f},{py:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{margin}" y="{margin - 10}" font-size="12">tour length over iterations '
        f"(best: {series['#1f77b4'][-1]:.6g})</text>",
    ]
    for color, values in series.items():
        points = " ".join(scale(x, y) for x, y in zip(xs, values))
        parts.append(f'<polyline fill="none" stroke="{color}" points="{points}"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# argument plumbing


def _add_solver_flags(sub, iterations_default=500):
    sub.add_argument("--alpha", type=float, default=1.0, help="trail importance exponent")
    sub.add_argument("--beta", type=float, default=2.0, help="visibility importance exponent")
    sub.add_argument("--delta", type=float, default=0.9, help="trail persistence in (0, 1]")
    sub.add_argument("--ants", type=int, default=20, help="ants per iteration")
    sub.add_argument("--q", type=float, default=1.0, help="pheromone deposit constant")
    sub.add_argument("--pop-size", type=int, default=None,
                     help="genetic population size (default: one per ant)")
    sub.add_argument("--crossover-rate", type=float, default=0.9)
    sub.add_argument("--mutation-rate", type=float, default=0.1)
    sub.add_argument("--elitism", type=int, default=1)
    sub.add_argument("--no-ga", action="store_true", help="disable the genetic stage")
    sub.add_argument("--iterations", type=int, default=iterations_default, help="iteration budget")
    sub.add_argument("--stagnation", type=int, default=100,
                     help="stop after this many unimproved iterations")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--threads", type=int, default=None,
                     help=f"worker count, 0 = all cores (default: {THREADS_ENV_VAR} or 1)")


def _add_instance_flags(sub):
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--file", help="TSPLIB instance file")
    group.add_argument("--gen", metavar="N:SEED",
                       help="generate N random cities from SEED (e.g. 10:7)")


def _parse_gen(spec):
    try:
        n_text, seed_text = spec.split(":", 1)
        return int(n_text), int(seed_text)
    except ValueError:
        raise AntgeneError(f"--gen expects N:SEED (e.g. 10:7), got {spec!r}") from None


def _load_instance(args):
    if args.file is not None:
        return load_tsplib(args.file), {"file": args.file}
    n, seed = _parse_gen(args.gen)
    return random_instance(n, seed), {"generator": {"n": n, "seed": seed}}


def _params_from_args(args, local_search):
    aco = AcoParams(alpha=args.alpha, beta=args.beta, delta=args.delta,
                    m=args.ants, q=args.q)
    pop_size = args.pop_size if args.pop_size is not None else max(2, args.ants)
    ga = GaParams(pop_size=pop_size, crossover_rate=args.crossover_rate,
                  mutation_rate=args.mutation_rate, elitism=args.elitism)
    threads = args.threads if args.threads is not None else threads_from_env(default=1)
    return HybridParams(
        aco=aco,
        ga=ga,
        ga_enabled=not args.no_ga,
        max_iterations=args.iterations,
        stagnation_limit=args.stagnation,
        local_search=local_search,
        seed=args.seed,
        threads=threads,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args):
    inst, source = _load_instance(args)
    params = _params_from_args(args, local_search=not args.no_local_search)
    formats = {f.strip() for f in args.formats.split(",") if f.strip()}
    unknown = formats - {"csv", "json", "svg"}
    if unknown:
        raise AntgeneError(f"unknown output formats: {', '.join(sorted(unknown))}")
    if args.oracle_check and inst.n > HELD_KARP_MAX:
        raise AntgeneError(
            f"--oracle-check needs n <= {HELD_KARP_MAX}, instance has n = {inst.n}"
        )

    os.makedirs(args.out, exist_ok=True)
    written = []
    try:
        t0 = time.perf_counter()
        best, trace = solve(inst, params)
        total_s = time.perf_counter() - t0

        summary = {
            "instance": {"n": inst.n, "source": source},
            "params": asdict(params),
            "seed": params.seed,
            "result": {
                "best_length": best.length,
                "best_tour": [int(c) for c in best.order],
                "iterations_used": len(trace.records),
            },
            "timings": {
                "construction_s": sum(r.construction_s for r in trace.records),
                "update_s": sum(r.update_s for r in trace.records),
                "ga_s": sum(r.ga_s for r in trace.records),
                "total_s": total_s,
            },
        }
        if args.oracle_check:
            oracle = brute_force_optimum(inst)
            summary["oracle"] = {
                "length": oracle.length,
                "gap": optimality_gap(inst, best, oracle),
            }

        def emit(name, text):
            path = os.path.join(args.out, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            written.append(path)

        emit("best.tour", tour_to_text(best))
        if "csv" in formats:
            emit("trace.csv", trace.to_csv())
        if "json" in formats:
            emit("summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if "svg" in formats:
            svg_path = os.path.join(args.out, "convergence.svg")
            write_convergence_svg(trace.records, svg_path)
            written.append(svg_path)
    except Exception:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise

    print(f"best length {best.length!r} in {len(trace.records)} iterations "
          f"-> {', '.join(written)}")
    if args.oracle_check:
        print(f"oracle length {summary['oracle']['length']!r}, gap {summary['oracle']['gap']!r}")
    return 0


def cmd_bench(args):
    inst, _ = _load_instance(args)
    thread_counts = [int(t) for t in args.threads_list.split(",") if t.strip()]
    if not thread_counts:
        raise AntgeneError("--threads-list must name at least one worker count")

    rows = []
    reference = None
    for threads in thread_counts:
        args.threads = threads
        params = _params_from_args(args, local_search=args.local_search)
        t0 = time.perf_counter()
        best, trace = solve(inst, params)
        total_s = time.perf_counter() - t0
        construction_s = sum(r.construction_s for r in trace.records)
        values = (
            tuple(best.order),
            best.length,
            tuple((r.best_so_far, r.iteration_best, r.mean_length) for r in trace.records),
        )
        if reference is None:
            reference = values
        elif values != reference:
            print(f"error: results at threads={threads} differ from threads="
                  f"{thread_counts[0]}; determinism regression", file=sys.stderr)
            return 1
        rows.append((threads, construction_s, total_s, best.length))

    base_construction = rows[0][1]
    lines = [BENCH_CSV_HEADER]
    for threads, construction_s, total_s, best_length in rows:
        speedup = base_construction / construction_s if construction_s > 0 else float("inf")
        lines.append(f"{threads},{construction_s!r},{total_s!r},{speedup!r},{best_length!r}")
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    print(csv_text, end="")
    return 0


def _parse_seeds(spec):
    if "," in spec:
        return [int(s) for s in spec.split(",") if s.strip()]
    return list(range(int(spec)))


def cmd_oracle(args):
    if args.n > HELD_KARP_MAX:
        raise AntgeneError(
            f"oracle comparison needs n <= {HELD_KARP_MAX}, got n = {args.n}"
        )
    seeds = _parse_seeds(args.seeds)
    if not seeds:
        raise AntgeneError("no seeds given")

    lines = ["seed,solve_length,oracle_length,gap"]
    optimal = 0
    for seed in seeds:
        inst = random_instance(args.n, seed)
        args.seed = seed
        params = _params_from_args(args, local_search=not args.no_local_search)
        best, _ = solve(inst, params)
        oracle = brute_force_optimum(inst)
        gap = optimality_gap(inst, best, oracle)
        if gap == 0.0:
            optimal += 1
        lines.append(f"{seed},{best.length!r},{oracle.length!r},{gap!r}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    fraction = optimal / len(seeds)
    print(f"optimal on {optimal}/{len(seeds)} seeds (fraction {fraction:.3f})")
    return 0


def cmd_bridge(args):
    p = AcoParams(alpha=args.alpha, beta=args.beta, delta=args.delta,
                  m=args.ants, q=args.q)
    records = run_double_bridge(iterations=args.iterations, seed=args.seed, params=p)
    csv_text = bridge_records_to_csv(records)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    final = records[-1]
    tail = records[-10:] if len(records) > 10 else records[1:]
    picks = sum(r.short_count + r.long_count for r in tail)
    frequency = sum(r.short_count for r in tail) / picks if picks else 0.0
    print(f"tau_short {final.tau_short!r}, tau_long {final.tau_long!r} "
          f"after {args.iterations} iterations -> {args.out}")
    print(f"short branch stronger: {final.tau_short > final.tau_long}; "
          f"short-branch frequency over final 10 iterations: {frequency:.3f}")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="antgene",
        description="Deterministic parallel ant-colony + genetic TSP solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one instance and write artifacts")
    _add_instance_flags(run)
    _add_solver_flags(run)
    run.add_argument("--no-local-search", action="store_true", help="disable 2-opt refinement")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--formats", default="csv,json", help="comma list of csv,json,svg")
    run.add_argument("--oracle-check", action="store_true",
                     help="also run the exact oracle and report the gap (n <= 16)")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="speedup table across worker counts")
    _add_instance_flags(bench)
    _add_solver_flags(bench, iterations_default=20)
    bench.add_argument("--local-search", action="store_true",
                       help="enable 2-opt (off for benches: it swamps construction)")
    bench.add_argument("--threads-list", default="1,2,4",
                       help="comma list of worker counts to time")
    bench.add_argument("--out", default=None, help="also write the CSV here")
    bench.set_defaults(func=cmd_bench)

    oracle = sub.add_parser("oracle", help="exact-optimum sweep over seeded instances")
    oracle.add_argument("--n", type=int, required=True, help=f"city count (<= {HELD_KARP_MAX})")
    oracle.add_argument("--seeds", default="100",
                        help="seed count (e.g. 100) or explicit comma list (e.g. 3,7,9)")
    _add_solver_flags(oracle, iterations_default=200)
    oracle.add_argument("--no-local-search", action="store_true")
    oracle.add_argument("--out", default=None, help="also write the per-seed CSV here")
    oracle.set_defaults(func=cmd_oracle)

    bridge = sub.add_parser("bridge", help="two-branch pheromone convergence scenario")
    bridge.add_argument("--iterations", type=int, default=50)
    bridge.add_argument("--seed", type=int, default=0)
    bridge.add_argument("--alpha", type=float, default=1.0)
    bridge.add_argument("--beta", type=float, default=2.0)
    bridge.add_argument("--delta", type=float, default=0.9)
    bridge.add_argument("--ants", type=int, default=20)
    bridge.add_argument("--q", type=float, default=1.0)
    bridge.add_argument("--out", default="bridge.csv", help="per-iteration CSV path")
    bridge.set_defaults(func=cmd_bridge)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AntgeneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
