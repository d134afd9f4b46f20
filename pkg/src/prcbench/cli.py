"""Command-line pipeline: generate a circuit suite, benchmark it against a
simulated noisy backend, render reports, and export OpenQASM.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import harness, metrics, qasm, report
from .circuits import BitString
from .errors import InvalidDimensionError, SchemaError
from .harness import BenchConfig
from .optimize import OptimizerConfig
from .sim import ShotHistogram
from .suite import generate_suite, load_suite, save_suite, suite_hash

ENV_OUTPUT_DIR = "PRCBENCH_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _default_out_dir() -> str:
    return os.environ.get(ENV_OUTPUT_DIR, ".")


def _parse_range(text: str) -> list[int]:
    """'2..6' (inclusive), '2,3,5', or a single integer."""
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise UsageError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        if "," in text:
            return [int(part) for part in text.split(",")]
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}: {exc}") from exc


def _cmd_generate(args) -> int:
    qubits = _parse_range(args.qubits)
    depths = _parse_range(args.depths)
    if min(qubits) < 2 or min(depths) < 2:
        raise UsageError("qubit counts and depths must be at least 2")
    optimizer = OptimizerConfig(
        stage1_iters=args.stage1_iters,
        stage2_iters=args.stage2_iters,
        adam_step=args.adam_step,
        stop_tol=args.stop_tol,
    )
    suite = generate_suite(
        qubits,
        depths,
        seed=args.seed,
        optimizer=optimizer,
        jobs=args.jobs,
        optimize_cells=not args.no_optimize,
    )
    manifest = save_suite(suite, args.out_dir, optimizer=optimizer)
    for (n, d), cell in suite.cells.items():
        print(f"n={n:2d} d={d:2d}  p_peak={cell.profile.p_peak:.6f}  r_p={cell.profile.r_p:.1f}")
    print(f"wrote {len(suite.cells)} circuits and manifest {manifest}")
    return 0


def _cmd_bench(args) -> int:
    try:
        config_doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"malformed config {args.config}: {exc}", file=sys.stderr)
        return 2

    suite = load_suite(args.suite)
    if "qubits" not in config_doc:
        config_doc["qubits"] = list(suite.qubits)
    if "depths" not in config_doc:
        config_doc["depths"] = list(suite.depths)
    try:
        config = BenchConfig.from_dict(config_doc)
    except SchemaError as exc:
        print(str(exc), file=sys.stderr)
        return 2

    provenance = {"suite": str(args.suite), "suite_hash": suite_hash(args.suite)}
    matrix = harness.run_matrix(
        suite.as_mapping(), config, jobs=args.jobs, provenance=provenance
    )
    harness.persist_matrix(matrix, args.out)
    if args.csv:
        Path(args.csv).write_text(harness.matrix_to_csv(matrix), encoding="utf-8")
    for n in matrix.qubits:
        row = [matrix.cells[(n, d)] for d in matrix.depths]
        identified = sum(1 for c in row if c.status == harness.STATUS_IDENTIFIED)
        skipped = sum(1 for c in row if c.status == harness.STATUS_SKIPPED)
        f_vals = [c.mean_f for c in row if c.mean_f is not None]
        mean_f = f"{sum(f_vals) / len(f_vals):.4f}" if f_vals else "n/a"
        print(
            f"n={n:2d}: identified {identified}/{len(row)} cells, "
            f"skipped {skipped}, mean F {mean_f}"
        )
    print(f"wrote matrix {args.out}")
    return 0


def _load_matrix_or_fail(path: str) -> harness.BenchmarkMatrix:
    return harness.load_matrix(path)


def _cmd_report(args) -> int:
    out = Path(args.out)
    if args.mode == "heatmap":
        if len(args.inputs) != 1:
            raise UsageError("heatmap mode takes exactly one matrix file")
        matrix = _load_matrix_or_fail(args.inputs[0])
        out.write_text(report.render_matrix_heatmap(matrix), encoding="utf-8")
        out.with_suffix(".csv").write_text(harness.matrix_to_csv(matrix), encoding="utf-8")
    elif args.mode == "delta":
        if len(args.inputs) != 2:
            raise UsageError("delta mode takes exactly two matrix files (A minus B)")
        ma = _load_matrix_or_fail(args.inputs[0])
        mb = _load_matrix_or_fail(args.inputs[1])
        delta = metrics.delta_matrix(ma, mb)
        out.write_text(report.render_delta_heatmap(delta), encoding="utf-8")
        out.with_suffix(".csv").write_text(report.delta_to_csv(delta), encoding="utf-8")
    else:  # histogram
        if len(args.inputs) != 1:
            raise UsageError("histogram mode takes exactly one matrix file")
        if not args.cell:
            raise UsageError("histogram mode needs --cell n,d")
        try:
            n_text, d_text = args.cell.split(",")
            key = (int(n_text), int(d_text))
        except ValueError as exc:
            raise UsageError(f"cannot parse --cell {args.cell!r}") from exc
        matrix = _load_matrix_or_fail(args.inputs[0])
        if key not in matrix.cells:
            print(f"cell {key} not present in matrix", file=sys.stderr)
            return 1
        cell = matrix.cells[key]
        if not cell.records or args.rep >= len(cell.records):
            print(f"cell {key} has no record for rep {args.rep}", file=sys.stderr)
            return 1
        record = cell.records[args.rep]
        if not record.top_counts:
            print(f"cell {key} rep {args.rep} carries no histogram entries", file=sys.stderr)
            return 1
        counts = {BitString.from_text(t).index: c for t, c in record.top_counts}
        hist = ShotHistogram(record.n, counts)
        svg = report.render_histogram(hist, BitString.from_text(record.target), args.top_k)
        out.write_text(svg, encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_export_qasm(args) -> int:
    suite = load_suite(args.suite)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed_hash = hashlib.sha256(str(suite.seed).encode()).hexdigest()[:8]
    lines = ["n,d,file,two_qubit,single_qubit"]
    for (n, d), cell in suite.cells.items():
        name = qasm.qasm_filename(n, d, seed_hash)
        (out_dir / name).write_text(qasm.emit_qasm(cell.circuit), encoding="utf-8")
        counts = qasm.gate_count(cell.circuit)
        lines.append(f"{n},{d},{name},{counts['two_qubit']},{counts['single_qubit']}")
    csv_path = out_dir / "gate_counts.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(suite.cells)} qasm files and {csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prcbench",
        description="Peaked random circuit fidelity benchmark pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build and optimize a circuit suite")
    gen.add_argument("--qubits", required=True, help="range like 2..6 or list 2,3,5")
    gen.add_argument("--depths", required=True, help="range like 2..10 or list 2,6,10")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", default=_default_out_dir())
    gen.add_argument("--stage1-iters", type=int, default=5000)
    gen.add_argument("--stage2-iters", type=int, default=10000)
    gen.add_argument("--adam-step", type=float, default=0.01)
    gen.add_argument("--stop-tol", type=float, default=1e-8)
    gen.add_argument("--jobs", type=int, default=1)
    gen.add_argument("--no-optimize", action="store_true", help="skip peaking optimization")
    gen.set_defaults(func=_cmd_generate)

    bench = sub.add_parser("bench", help="run the benchmark matrix over a suite")
    bench.add_argument("--suite", required=True, help="suite manifest path")
    bench.add_argument("--config", required=True, help="benchmark config JSON")
    bench.add_argument("--out", required=True, help="matrix JSON output path")
    bench.add_argument("--csv", default=None, help="optional flat CSV output path")
    bench.add_argument("--jobs", type=int, default=1)
    bench.set_defaults(func=_cmd_bench)

    rep = sub.add_parser("report", help="render SVG reports from matrix files")
    rep.add_argument("--mode", choices=("heatmap", "delta", "histogram"), required=True)
    rep.add_argument("inputs", nargs="+", help="matrix JSON file(s)")
    rep.add_argument("--out", required=True, help="SVG output path")
    rep.add_argument("--cell", default=None, help="histogram mode: cell as n,d")
    rep.add_argument("--rep", type=int, default=0, help="histogram mode: repetition index")
    rep.add_argument("--top-k", type=int, default=10)
    rep.set_defaults(func=_cmd_report)

    exp = sub.add_parser("export-qasm", help="emit OpenQASM 2.0 files plus gate counts")
    exp.add_argument("--suite", required=True, help="suite manifest path")
    exp.add_argument("--out-dir", default=_default_out_dir())
    exp.set_defaults(func=_cmd_export_qasm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvalidDimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SchemaError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
