"""Suite generation: carve every (n, d) cell out of one reference circuit,
optimize the peaking half, and persist circuit+profile files plus a
manifest consumed by the bench and export commands."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import sim
from .circuits import (
    Circuit,
    build_reference_circuit,
    circuit_from_json,
    circuit_to_dict,
    derive_subcircuit,
)
from .errors import SchemaError
from .optimize import (
    OptimizerConfig,
    PeakProfile,
    optimize,
    peak_profile,
    profile_from_dict,
    profile_to_dict,
)

SUITE_SCHEMA = "prc-suite/1"


@dataclass(frozen=True)
class SuiteCell:
    circuit: Circuit
    profile: PeakProfile
    final_objective: float


@dataclass(frozen=True)
class Suite:
    seed: int
    qubits: tuple[int, ...]
    depths: tuple[int, ...]
    cells: dict[tuple[int, int], SuiteCell]

    def as_mapping(self) -> dict[tuple[int, int], tuple[Circuit, PeakProfile]]:
        return {key: (c.circuit, c.profile) for key, c in self.cells.items()}


def generate_suite(
    qubits,
    depths,
    seed: int,
    optimizer: OptimizerConfig | None = None,
    jobs: int = 1,
    optimize_cells: bool = True,
) -> Suite:
    """Build the reference circuit at the grid's maximum size, then derive
    and (optionally) optimize every requested cell.  Deterministic for a
    fixed seed regardless of job count."""
    qubits = tuple(sorted(set(int(q) for q in qubits)))
    depths = tuple(sorted(set(int(d) for d in depths)))
    optimizer = optimizer or OptimizerConfig()
    reference = build_reference_circuit(max(qubits), max(depths), seed)

    def build_cell(key: tuple[int, int]) -> tuple[tuple[int, int], SuiteCell]:
        n, d = key
        circuit = derive_subcircuit(reference, n, d)
        if optimize_cells:
            circuit, trace = optimize(circuit, optimizer)
            final = trace.final_objective
        else:
            final = float(abs(sim.peak_amplitude(circuit)) ** 2)
        return key, SuiteCell(circuit=circuit, profile=peak_profile(circuit), final_objective=final)

    keys = [(n, d) for n in qubits for d in depths]
    cells: dict[tuple[int, int], SuiteCell] = {}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for key, cell in pool.map(build_cell, keys):
                cells[key] = cell
    else:
        for key in keys:
            cells[key] = build_cell(key)[1]
    return Suite(seed=int(seed), qubits=qubits, depths=depths, cells=dict(sorted(cells.items())))


def _cell_filename(n: int, d: int) -> str:
    return f"prc_n{n}_d{d}.json"


def save_suite(suite: Suite, out_dir, optimizer: OptimizerConfig | None = None) -> Path:
    """Write one circuit+profile JSON per cell plus the manifest; returns
    the manifest path.  Rerunning with identical inputs reproduces every
    byte."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for (n, d), cell in sorted(suite.cells.items()):
        name = _cell_filename(n, d)
        doc = circuit_to_dict(cell.circuit, profile=profile_to_dict(cell.profile))
        doc["final_objective"] = cell.final_objective
        (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
        files[f"{n}x{d}"] = name
    manifest = {
        "schema": SUITE_SCHEMA,
        "seed": suite.seed,
        "qubits": list(suite.qubits),
        "depths": list(suite.depths),
        "circuits": files,
    }
    if optimizer is not None:
        manifest["optimizer"] = {
            "stage1_iters": optimizer.stage1_iters,
            "stage2_iters": optimizer.stage2_iters,
            "adam_step": optimizer.adam_step,
            "stop_tol": optimizer.stop_tol,
        }
    path = out / "suite.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def load_suite(manifest_path) -> Suite:
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{manifest_path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SUITE_SCHEMA:
        raise SchemaError(
            f"unsupported suite schema {doc.get('schema')!r}; expected {SUITE_SCHEMA!r}"
        )
    cells: dict[tuple[int, int], SuiteCell] = {}
    for key, name in doc["circuits"].items():
        n_text, d_text = key.split("x")
        n, d = int(n_text), int(d_text)
        cell_path = manifest_path.parent / name
        if not cell_path.exists():
            raise FileNotFoundError(f"suite cell ({n}, {d}) missing: {cell_path}")
        text = cell_path.read_text(encoding="utf-8")
        circuit = circuit_from_json(text)
        cell_doc = json.loads(text)
        if "profile" not in cell_doc:
            raise SchemaError(f"{cell_path}: circuit file has no embedded profile")
        profile = profile_from_dict(cell_doc["profile"])
        cells[(n, d)] = SuiteCell(
            circuit=circuit,
            profile=profile,
            final_objective=float(cell_doc.get("final_objective", profile.p_peak)),
        )
    return Suite(
        seed=int(doc["seed"]),
        qubits=tuple(int(q) for q in doc["qubits"]),
        depths=tuple(int(d) for d in doc["depths"]),
        cells=dict(sorted(cells.items())),
    )


def suite_hash(manifest_path) -> str:
    """Provenance hash over the manifest bytes."""
    data = Path(manifest_path).read_bytes()
    return hashlib.sha256(data).hexdigest()
