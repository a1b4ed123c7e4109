"""Command-line entry point: compile, validate, trace and bench.

Thin adapters over the library; identical parameters give identical results
(and byte-identical output files).  All randomness flows through --seed.

Exit codes: 0 ok, 1 generic failure / validation violations, 2 parse or
format error, 3 capacity or configuration error, 4 trap overflow, 5 I/O.
"""
from __future__ import annotations

import argparse
import sys

from .benchmarks import (bench_config, circuit_fit, compile_ordering,
                         make_ordering, run_sweep, InvalidShape)
from .commands import (FormatError, cost, parse_sequence, render_trace,
                       render_trace_svg, replay, serialize)
from .ordering import place_in_the_model
from .qasm import QasmError, parse_qasm
from .scheduler import schedule
from .trap import (CapacityExceeded, InvalidConfig, TrapConfig, TrapError,
                   TrapOverflow, TrapState)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_CAPACITY = 3
EXIT_OVERFLOW = 4
EXIT_IO = 5


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _trap_config(args) -> TrapConfig:
    overrides = {}
    if args.segments is not None:
        overrides["n_segments"] = args.segments
    if args.liz is not None:
        overrides["liz"] = args.liz
    return TrapConfig(**overrides)


def cmd_compile(args) -> int:
    try:
        text = _read(args.input)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    try:
        circuit = parse_qasm(text, decompose=args.decompose)
    except QasmError as e:
        return _fail(EXIT_PARSE, str(e))
    try:
        config = _trap_config(args)
        ordering = make_ordering(circuit, args.ordering,
                                 args.seed if args.ordering == "oir" else None)
        state = TrapState(config)
        place_in_the_model(state, ordering, circuit)
        result = schedule(circuit, state)
    except (CapacityExceeded, InvalidConfig) as e:
        return _fail(EXIT_CAPACITY, str(e))
    except TrapOverflow as e:
        return _fail(EXIT_OVERFLOW, str(e))
    except (TrapError, ValueError) as e:
        return _fail(EXIT_ERROR, str(e))

    sequence = result.sequence
    counts = sequence.opcode_counts()
    n2q = len(circuit.two_qubit_gates())
    print(f"qubits: {circuit.n_qubits}")
    print(f"gates: {len(circuit.gates)} (two-qubit: {n2q})")
    print(f"ordering: {args.ordering}")
    print(f"layout: {' '.join('[' + ' '.join(map(str, g)) + ']' for g in ordering.crystal_list)}")
    print(f"commands: {len(sequence)} ("
          + " ".join(f"{op}:{counts[op]}" for op in
                     ("AIC", "AEC", "REC", "SMU", "SMD", "RC", "S", "M", "DG"))
          + ")")
    print(f"cost (split+merge): {result.cost}")
    if n2q:
        print(f"circuit fit: {circuit_fit(result.cost, n2q):.6f}")
    try:
        if args.output:
            _write(args.output, serialize(sequence))
            print(f"wrote {args.output}")
        if args.trace:
            _write(args.trace, render_trace(sequence, config))
            print(f"wrote {args.trace}")
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        text = _read(args.input)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    try:
        sequence = parse_sequence(text)
    except FormatError as e:
        return _fail(EXIT_PARSE, str(e))
    config = None
    if args.segments is not None or args.liz is not None:
        config = _trap_config(args)
    report = replay(sequence, config, strict=args.strict)
    for seq, message in report.violations:
        print(f"command {seq}: {message}")
    print(f"commands: {len(sequence)}  splits: {report.s_count}  "
          f"merges: {report.m_count}  cost: {cost(sequence)}  "
          f"violations: {len(report.violations)}")
    return EXIT_OK if report.ok else EXIT_ERROR


def cmd_trace(args) -> int:
    try:
        text = _read(args.input)
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    try:
        sequence = parse_sequence(text)
    except FormatError as e:
        return _fail(EXIT_PARSE, str(e))
    config = None
    if args.segments is not None or args.liz is not None:
        config = _trap_config(args)
    try:
        grid = render_trace(sequence, config)
        if args.output:
            _write(args.output, grid)
        else:
            print(grid, end="")
        if args.svg:
            _write(args.svg, render_trace_svg(sequence, config))
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    except (TrapError, Exception) as e:  # noqa: BLE001 - replay errors surface here
        return _fail(EXIT_ERROR, str(e))
    return EXIT_OK


def cmd_bench(args) -> int:
    n_list = [int(x) for x in args.qubits.split(",") if x]
    config = None
    if args.segments is not None or args.liz is not None:
        config = _trap_config(args)
    methods = tuple(args.methods.split(","))
    try:
        report = run_sweep(args.suite, n_list, method_list=methods,
                           trials=args.trials, seed=args.seed,
                           n_gates=args.gates, config=config,
                           workers=args.workers)
    except (InvalidShape, ValueError) as e:
        return _fail(EXIT_ERROR, str(e))
    except TrapOverflow as e:
        return _fail(EXIT_OVERFLOW, str(e))
    for row in report.rows:
        print(f"{row.suite} n={row.n} {row.method}: trials={row.trials} "
              f"min={row.min_cost} mean={row.mean_cost:.1f} max={row.max_cost}")
    if args.csv:
        try:
            _write(args.csv, report.to_csv())
        except OSError as e:
            return _fail(EXIT_IO, str(e))
        print(f"wrote {args.csv}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionshuttle",
        description="Compile quantum circuits to ion-shuttling schedules")
    sub = parser.add_subparsers(dest="command", required=True)

    def trap_flags(p):
        p.add_argument("--segments", type=int, default=None,
                       help="trap segment count (default 32)")
        p.add_argument("--liz", type=int, default=None,
                       help="laser interaction zone segment (default 19)")

    p = sub.add_parser("compile", help="compile OpenQASM 2.0 to a shuttling sequence")
    p.add_argument("-i", "--input", required=True, help="OpenQASM 2.0 file")
    p.add_argument("-o", "--output", default=None, help="sequence output path")
    p.add_argument("--ordering", choices=("oai", "oir", "ipo"), default="ipo")
    p.add_argument("--seed", type=int, default=0, help="seed for --ordering oir")
    p.add_argument("--decompose", action="store_true",
                   help="expand ccx gates into two-qubit gates")
    p.add_argument("--trace", default=None, help="also write a text trace grid")
    trap_flags(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("validate", help="replay a sequence file against the constraints")
    p.add_argument("-i", "--input", required=True, help="sequence file")
    p.add_argument("--strict", action="store_true",
                   help="abort on the first violation")
    trap_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="render a sequence as a text grid / SVG")
    p.add_argument("-i", "--input", required=True, help="sequence file")
    p.add_argument("-o", "--output", default=None, help="text grid output (default stdout)")
    p.add_argument("--svg", default=None, help="SVG output path")
    trap_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("bench", help="run ordering sweeps and export CSV")
    p.add_argument("--suite", choices=("random", "qft", "toffoli"), required=True)
    p.add_argument("--qubits", required=True, help="comma-separated qubit counts")
    p.add_argument("--gates", type=int, default=1000,
                   help="gate count for random circuits")
    p.add_argument("--trials", type=int, default=1, help="randomized-ordering trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="oai,oir,ipo")
    p.add_argument("--csv", default=None, help="per-compile CSV output path")
    p.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    trap_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
