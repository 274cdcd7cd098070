"""Command-line driver: ``gen``, ``opt``, ``run``, ``validate`` and ``bench``.

Exit codes: 0 ok, 1 validation failure, 2 input error, 3 infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .engine import TraceFormatError, format_trace, parse_trace, validate_trace
from .framework import PROVIDERS, EvacuationResult, evacuate
from .graph import grid_size
from .instance import Instance, InstanceError, dumps, gen_grid, gen_star_chain, load
from .offline import Infeasible, compute_opt, strategy_to_trace

OK, INVALID, INPUT_ERROR, INFEASIBLE = 0, 1, 2, 3

BENCH_HEADER = ["instance", "n", "k", "exits", "seed", "opt", "length", "ratio",
                "epochs", "d", "wall_time"]

log = logging.getLogger("evacuation")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path: str) -> Instance:
    try:
        return load(path)
    except OSError as exc:
        raise CliError(INPUT_ERROR, f"cannot read {path}: {exc.strerror}") from exc
    except InstanceError as exc:
        raise CliError(INPUT_ERROR, str(exc)) from exc


def budget_holds(res: EvacuationResult) -> bool:
    return res.length <= res.budget


def run_framework(inst: Instance, provider: str, start_B: int) -> EvacuationResult:
    if provider == "grid":
        try:
            grid_size(inst.graph)
        except ValueError as exc:
            raise CliError(INPUT_ERROR, f"the grid provider needs a grid instance: {exc}") from exc
    if provider == "grid" and start_B % 2:
        raise CliError(INPUT_ERROR, "the grid provider needs an even --start-B")
    try:
        return evacuate(inst, PROVIDERS[provider], start_B=start_B)
    except Infeasible as exc:
        raise CliError(INFEASIBLE, f"infeasible: {exc}") from exc


# -- commands ------------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        if args.kind == "grid":
            inst = gen_grid(args.n, args.exits, 1 if args.agents is None else args.agents,
                            args.seed, args.exit_mode)
        else:
            inst = gen_star_chain(args.k, args.n, args.s, args.agents, args.seed)
    except InstanceError as exc:
        raise CliError(INPUT_ERROR, str(exc)) from exc
    _write(args.output, dumps(inst))
    return OK


def cmd_opt(args) -> int:
    inst = _load(args.instance)
    try:
        res = compute_opt(inst)
    except Infeasible as exc:
        raise CliError(INFEASIBLE, f"infeasible: {exc}") from exc
    trace = strategy_to_trace(res.witness)
    report = validate_trace(inst, trace)
    if not report.valid or report.length != res.opt:
        print(f"witness check failed: {report.summary()}", file=sys.stderr)
        return INVALID
    print(res.opt)
    if args.trace:
        Path(args.trace).write_text(format_trace(inst, trace))
    return OK


def epoch_table(res: EvacuationResult) -> str:
    lines = ["epoch      B    d  zones  evacuated  aborted"]
    for e in res.epochs:
        aborted = sum(len(p.aborted) for p in e.phases)
        lines.append(f"{e.index:5d} {e.B:6d} {e.d:4d} {e.n_zones:6d} {e.evacuated:10d} {aborted:8d}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    inst = _load(args.instance)
    res = run_framework(inst, args.provider, args.start_B)
    report = validate_trace(inst, res.trace)
    if not report.valid:
        print(f"framework trace rejected: {report.summary()}", file=sys.stderr)
        return INVALID
    try:
        opt = compute_opt(inst).opt
    except Infeasible as exc:
        raise CliError(INFEASIBLE, f"infeasible: {exc}") from exc
    print(f"length {res.length}")
    print(f"opt {opt}")
    print(f"ratio {res.length / opt:.3f}" if opt else "ratio n/a")
    print(f"budget {res.budget}")
    print(epoch_table(res))
    if args.trace:
        Path(args.trace).write_text(format_trace(inst, res.trace))
    if not budget_holds(res):
        print(f"length {res.length} exceeds the budget {res.budget}", file=sys.stderr)
        return INVALID
    return OK


def cmd_validate(args) -> int:
    inst = _load(args.instance)
    try:
        text = Path(args.trace_file).read_text()
        trace = parse_trace(inst, text)
    except OSError as exc:
        raise CliError(INPUT_ERROR, f"cannot read {args.trace_file}: {exc.strerror}") from exc
    except TraceFormatError as exc:
        raise CliError(INPUT_ERROR, f"parse error: {exc}") from exc
    report = validate_trace(inst, trace)
    print(report.summary())
    return OK if report.valid else INVALID


@dataclass
class BenchRow:
    instance: str
    n: int
    k: int
    exits: int
    seed: int
    opt: int
    length: int
    ratio: float
    epochs: int
    d: list[int]
    wall_time: float

    def cells(self, timing: bool) -> list[str]:
        return [self.instance, str(self.n), str(self.k), str(self.exits), str(self.seed),
                str(self.opt), str(self.length), f"{self.ratio:.4f}", str(self.epochs),
                ";".join(map(str, self.d)), f"{self.wall_time:.3f}" if timing else ""]


def bench_row(n: int, seed: int, exits: int | None, agents: int | None, mode: str,
              provider: str) -> BenchRow:
    n_exits = exits if exits is not None else max(1, n // 2)
    k = agents if agents is not None else max(1, n * n // 8)
    inst = gen_grid(n, n_exits, k, seed, mode)
    t0 = time.perf_counter()
    opt = compute_opt(inst).opt
    res = evacuate(inst, PROVIDERS[provider])
    wall = time.perf_counter() - t0
    report = validate_trace(inst, res.trace)
    if not report.valid:
        raise AssertionError(f"invalid trace: {report.summary()}")
    if not budget_holds(res):
        raise AssertionError(f"length {res.length} exceeds budget {res.budget}")
    if opt >= 1 and len(res.epochs) > max(0, (opt - 1).bit_length()) + 1:
        raise AssertionError(f"{len(res.epochs)} epochs for OPT={opt}")
    return BenchRow(f"grid-{n}-{seed}", n, inst.k, len(inst.exits), seed, opt, res.length,
                    res.length / opt if opt else 1.0, len(res.epochs),
                    [e.d for e in res.epochs], wall)


def cmd_bench(args) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    ratios: dict[int, list[float]] = {}
    failures = 0
    for n in args.n:
        for seed in args.seed:
            try:
                row = bench_row(n, seed, args.exits, args.agents, args.exit_mode, args.provider)
            except (AssertionError, InstanceError, Infeasible) as exc:
                failures += 1
                print(f"grid-{n}-{seed}: {exc}", file=sys.stderr)
                continue
            writer.writerow(row.cells(not args.no_timing))
            ratios.setdefault(n, []).append(row.ratio)
    _write(args.csv, buf.getvalue())
    for n, rs in ratios.items():
        print(f"n={n}: max ratio {max(rs):.3f}, median ratio {statistics.median(rs):.3f}",
              file=sys.stderr if args.csv in (None, "-") else sys.stdout)
    return INVALID if failures else OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evacuation", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance file")
    gen.add_argument("kind", choices=["grid", "star-chain"])
    gen.add_argument("--n", type=int, default=4, help="grid side, or leaves per star")
    gen.add_argument("--exits", type=int, default=1)
    gen.add_argument("--exit-mode", choices=["random", "border", "rows"], default="random")
    gen.add_argument("--agents", type=int, default=None)
    gen.add_argument("--k", type=int, default=1, help="star-chain: index of the last star")
    gen.add_argument("--s", type=int, default=1, help="star-chain: path length between stars")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", default=None)
    gen.set_defaults(func=cmd_gen)

    opt = sub.add_parser("opt", help="compute the optimum and a witness trace")
    opt.add_argument("instance")
    opt.add_argument("--trace", default=None)
    opt.set_defaults(func=cmd_opt)

    run = sub.add_parser("run", help="run the distributed strategy")
    run.add_argument("instance")
    run.add_argument("--provider", choices=sorted(PROVIDERS), default="generic")
    run.add_argument("--start-B", dest="start_B", type=int, default=2)
    run.add_argument("--trace", default=None)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a trace file against an instance")
    val.add_argument("instance")
    val.add_argument("trace_file")
    val.set_defaults(func=cmd_validate)

    bench = sub.add_parser("bench", help="competitive ratios on random grids")
    bench.add_argument("--n", type=int, nargs="+", default=[8, 16, 32])
    bench.add_argument("--seed", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    bench.add_argument("--exits", type=int, default=None)
    bench.add_argument("--agents", type=int, default=None)
    bench.add_argument("--exit-mode", choices=["random", "border", "rows"], default="random")
    bench.add_argument("--provider", choices=sorted(PROVIDERS), default="grid")
    bench.add_argument("--csv", default=None)
    bench.add_argument("--no-timing", action="store_true",
                       help="leave wall_time empty so the output is reproducible")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
