"""Command-line driver.

Exit codes: 0 success, 1 oracle mismatch, 2 parse/usage/index error,
3 unsupported gate, 4 size bound exceeded, 70 internal invariant breach.
"""
from __future__ import annotations

import argparse
import json
import os
import resource
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .abstract_state import AbstractSimulator, InvariantError
from .bench_gen import FAMILIES, BenchSpec, generate
from .circuit_ir import EXIT_PARSE, Circuit, CircuitError, CircuitSizeError, emit, parse

SCHEMA = "abstraqt.run/1"
EXIT_MISMATCH = 1
EXIT_INTERNAL = 70
ORACLE_MAX_QUBITS = 8
ORACLE_ATOL = 1e-8


@dataclass
class QueryResult:
    qubit: int
    kind: str
    raw: tuple[float, float]

    @property
    def clamped(self) -> tuple[float, float]:
        lo, hi = self.raw
        return min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)

    @property
    def exact_zero(self) -> bool:
        return self.raw == (0.0, 0.0)

    @property
    def verdict(self) -> str:
        return "Proved" if self.clamped[1] <= 0.0 else "Unknown"

    def to_json(self) -> dict:
        return {
            "qubit": self.qubit,
            "query": self.kind,
            "raw": [_num(v) for v in self.raw],
            "clamped": list(self.clamped),
            "exact_zero": self.exact_zero,
            "verdict": self.verdict,
        }


@dataclass
class RunReport:
    path: str
    n: int
    queries: list[QueryResult]
    trace: tuple[float, float]
    r: int
    summands: int
    wall_time: float
    peak_memory: int
    stats: dict = field(default_factory=dict)

    def to_json(self, with_stats: bool) -> dict:
        out = {
            "schema": SCHEMA,
            "file": self.path,
            "qubits": self.n,
            "trace": [_num(v) for v in self.trace],
            "queries": [q.to_json() for q in self.queries],
            "r": str(self.r),
            "summands": self.summands,
            "wall_time_s": self.wall_time,
            "peak_memory_bytes": self.peak_memory,
        }
        if with_stats:
            out["stats"] = self.stats
        return out


def _num(x: float) -> float | str:
    """JSON-safe number: infinities become the strings ``"inf"`` / ``"-inf"``."""
    if x != x:
        return "nan"
    if x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    return x


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_interval(iv) -> str:
    if isinstance(iv[0], str) or isinstance(iv[1], str):
        return f"[{iv[0]}, {iv[1]}]"
    return f"[{_fmt(iv[0])}, {_fmt(iv[1])}]"


def peak_memory_bytes() -> int:
    # ru_maxrss is in KiB on Linux
    return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss) * 1024


def read_circuit(path: str) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CircuitError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def simulate(
    circuit: Circuit,
    check_zero: Sequence[int] = (),
    prob_one: Sequence[int] = (),
    max_summands: int = 1,
    jobs: int = 1,
    path: str = "<circuit>",
) -> RunReport:
    start = time.perf_counter()
    for q in list(check_zero) + list(prob_one):
        if not 0 <= q < circuit.n:
            raise CircuitError(f"query qubit {q} out of range for {circuit.n} qubits")
    sim = AbstractSimulator(circuit.n, max_summands=max_summands).run(circuit)
    wanted = [(q, "check-zero") for q in check_zero] + [(q, "prob-one") for q in prob_one]

    def one(item):
        q, kind = item
        iv = sim.probability_one(q)
        return QueryResult(q, kind, (iv.lo, iv.hi))

    if jobs > 1 and len(wanted) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            queries = list(pool.map(one, wanted))
    else:
        queries = [one(item) for item in wanted]
    tr = sim.trace()
    st = sim.stats
    stats = {
        "instructions": len(circuit),
        "clifford_gates": st.clifford_gates,
        "decomposed_gates": st.decomposed_gates,
        "measurements": st.measurements,
        "projections": st.projections,
        "max_summands_seen": st.max_summands_seen,
        "gate_counts": circuit.gate_counts(),
    }
    return RunReport(
        path, circuit.n, queries, (tr.lo, tr.hi), sim.r, len(sim.summands),
        time.perf_counter() - start, peak_memory_bytes(), stats,
    )


def _print_report(report: RunReport, with_stats: bool) -> None:
    print(f"circuit {report.path}: {report.n} qubits, r = {report.r}, summands = {report.summands}")
    print(f"trace {_fmt_interval(report.trace)}")
    for q in report.queries:
        flag = " exact-zero" if q.exact_zero else ""
        line = f"q[{q.qubit}] P(1) in {_fmt_interval(q.clamped)} raw {_fmt_interval(q.raw)}{flag}"
        if q.kind == "check-zero":
            line += f" {q.verdict}"
        print(line)
    if with_stats:
        for key, value in report.stats.items():
            print(f"{key}: {value}")
        print(f"wall_time_s: {report.wall_time:.3f}")
        print(f"peak_memory_bytes: {report.peak_memory}")


def cmd_simulate(args) -> int:
    circuit = read_circuit(args.file)
    report = simulate(circuit, args.check_zero, args.prob_one, args.max_summands, args.jobs, args.file)
    if args.json:
        print(json.dumps(report.to_json(args.stats), indent=2, allow_nan=False))
    else:
        _print_report(report, args.stats)
    return 0


def cmd_bench(args) -> int:
    seed = int(os.environ.get("ABSTRAQT_SEED", args.seed), 0)
    spec = BenchSpec(args.family, args.qubits, args.gates, seed, args.rounds)
    circuit = generate(spec)
    text = emit(circuit)
    meta = {
        "schema": "abstraqt.bench/1",
        "family": spec.family,
        "qubits": spec.n_total,
        "gates_per_block": spec.gates_per_block,
        "seed": spec.seed,
        "rounds": spec.rounds,
        "instructions": len(circuit),
        "prng": "splitmix64",
    }
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        Path(args.output + ".json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.output} ({len(circuit)} instructions) and {args.output}.json")
    else:
        sys.stdout.write(text)
    return 0


def oracle_compare(circuit: Circuit) -> dict:
    from .oracle import ConcreteSumState, DenseState, prob_one, step

    if circuit.n > ORACLE_MAX_QUBITS:
        raise CircuitSizeError(f"oracle comparison limited to {ORACLE_MAX_QUBITS} qubits, got {circuit.n}")
    n = circuit.n
    dense_state = DenseState.init(n)
    sum_state = ConcreteSumState.init(n, merge=True)
    sim = AbstractSimulator(n)
    max_err = 0.0
    for g in circuit:
        dense_state = step(dense_state, g, n)
        sum_state = step(sum_state, g, n)
        sim.step(g)
        max_err = max(max_err, float(np.abs(dense_state.rho - sum_state.to_dense()).max()))
    rows = []
    for q in range(n):
        iv = sim.probability_one(q)
        pd, ps = prob_one(dense_state, q), prob_one(sum_state, q)
        rows.append({
            "qubit": q,
            "dense": float(pd),
            "sum": float(ps),
            "abstract": [_num(iv.lo), _num(iv.hi)],
            "contained": bool(iv.contains(pd, 1e-9) and iv.contains(ps, 1e-9)),
        })
    tr = sim.trace()
    return {
        "schema": "abstraqt.oracle/1",
        "qubits": n,
        "oracle_max_abs_error": max_err,
        "trace": {"dense": dense_state.trace(), "sum": sum_state.trace(), "abstract": [_num(tr.lo), _num(tr.hi)]},
        "trace_contained": bool(tr.contains(dense_state.trace(), 1e-9)),
        "qubits_report": rows,
        "ok": bool(max_err <= ORACLE_ATOL and all(r["contained"] for r in rows) and tr.contains(dense_state.trace(), 1e-9)),
    }


def cmd_oracle_compare(args) -> int:
    report = oracle_compare(read_circuit(args.file))
    if args.json:
        print(json.dumps(report, indent=2, allow_nan=False))
    else:
        print(f"oracle agreement (max abs): {report['oracle_max_abs_error']:.3g}")
        t = report["trace"]
        print(f"trace dense {_fmt(t['dense'])} sum {_fmt(t['sum'])} abstract {_fmt_interval(t['abstract'])}")
        for row in report["qubits_report"]:
            mark = "ok" if row["contained"] else "VIOLATION"
            print(
                f"q[{row['qubit']}] P(1) dense {_fmt(row['dense'])} sum {_fmt(row['sum'])} "
                f"abstract {_fmt_interval(row['abstract'])} {mark}"
            )
        print("PASS" if report["ok"] else "FAIL")
    return 0 if report["ok"] else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abstraqt", description="Abstract stabilizer simulation of quantum circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the abstract simulation and answer |1> probability queries")
    sim.add_argument("file")
    sim.add_argument("--check-zero", type=int, action="append", default=[], metavar="Q",
                     help="prove that qubit Q ends in |0> (repeatable)")
    sim.add_argument("--prob-one", type=int, action="append", default=[], metavar="Q",
                     help="report the probability interval of measuring 1 on Q (repeatable)")
    sim.add_argument("--max-summands", type=int, default=1, metavar="K")
    sim.add_argument("--json", action="store_true")
    sim.add_argument("--stats", action="store_true")
    sim.add_argument("--jobs", type=int, default=1, metavar="K")
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("bench", help="generate a benchmark circuit")
    bench.add_argument("family", choices=FAMILIES)
    bench.add_argument("--qubits", type=int, default=16)
    bench.add_argument("--gates", type=int, default=500)
    bench.add_argument("--seed", default="1")
    bench.add_argument("--rounds", type=int, default=20)
    bench.add_argument("-o", "--output")
    bench.set_defaults(func=cmd_bench)

    orc = sub.add_parser("oracle-compare", help="compare the abstract result with exact simulators")
    orc.add_argument("file")
    orc.add_argument("--json", action="store_true")
    orc.set_defaults(func=cmd_oracle_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_summands", 1) < 1 or getattr(args, "jobs", 1) < 1:
        parser.error("--max-summands and --jobs must be at least 1")
    try:
        return args.func(args)
    except CircuitError as exc:
        print(f"abstraqt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"abstraqt: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"abstraqt: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())
