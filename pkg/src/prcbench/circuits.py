"""Circuit structures: the mirrored brick-wall layout, reference-circuit
construction, sub-circuit derivation, exact-inverse peaking, retargeting,
and the JSON interchange format.

Global bit convention: qubit 0 is the least significant bit of a basis
index, and the text form of a bitstring lists qubit 0 first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidDimensionError, SchemaError
from .gates import GateParams, haar_random_unitary, kak_decompose

ROLE_RANDOM = "random-half"
ROLE_PEAKING = "peaking-half"

CIRCUIT_SCHEMA = "prc-circuit/1"

_X2 = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class BitString:
    """Ordered bits, bits[i] being qubit i's value."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """Basis index with qubit 0 as the least significant bit."""
        return sum(b << i for i, b in enumerate(self.bits))

    @property
    def text(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls((0,) * n)

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_index(cls, index: int, n: int) -> "BitString":
        return cls(tuple((index >> i) & 1 for i in range(n)))

    def __xor__(self, other: "BitString") -> "BitString":
        if len(other) != len(self):
            raise ValueError("length mismatch")
        return BitString(tuple(a ^ b for a, b in zip(self.bits, other.bits)))


@dataclass(frozen=True)
class GatePlacement:
    """A two-qubit gate at (qubit_low, qubit_low + 1) in one layer."""

    layer_index: int
    qubit_low: int
    params: GateParams
    role: str

    def __post_init__(self) -> None:
        if self.role not in (ROLE_RANDOM, ROLE_PEAKING):
            raise ValueError(f"unknown gate role {self.role!r}")


@dataclass(frozen=True)
class Circuit:
    """A brick-wall circuit split into a random half and a peaking half.

    ``final_x`` lists qubits that receive a standalone NOT after the last
    layer (produced by retargeting when the final layer's alignment skips
    a flipped qubit).  ``seed`` records the reference-circuit seed so that
    derived circuits can fill layout slots deterministically.
    """

    n: int
    d: int
    random_depth: int
    layers: tuple[tuple[GatePlacement, ...], ...]
    target: BitString
    final_x: tuple[int, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidDimensionError("need at least 2 qubits")
        if len(self.layers) != self.d:
            raise ValueError("layer count does not match depth")
        if len(self.target) != self.n:
            raise ValueError("target length does not match qubit count")
        for layer in self.layers:
            used: set[int] = set()
            for g in layer:
                if g.qubit_low < 0 or g.qubit_low + 1 >= self.n:
                    raise ValueError("gate crosses the register boundary")
                if g.qubit_low in used or g.qubit_low + 1 in used:
                    raise ValueError("overlapping gates within a layer")
                used.update((g.qubit_low, g.qubit_low + 1))

    @property
    def peaking_depth(self) -> int:
        return self.d - self.random_depth

    def placements(self):
        for layer in self.layers:
            yield from layer

    def peaking_placements(self):
        for layer in self.layers[self.random_depth:]:
            yield from layer

    def num_placements(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def with_target(self, target: BitString) -> "Circuit":
        return replace(self, target=target)


def random_depth_for(d: int) -> int:
    """Layer count of the random half: d/2 for even d, (d-1)/2 for odd d
    (the peaking half gets the extra layer)."""
    return d // 2


def _row_pairs(n: int, even: bool) -> list[int]:
    start = 0 if even else 1
    return list(range(start, n - 1, 2))


def _layer_even(layer_index: int, random_depth: int) -> bool:
    """Alignment of a layer: the random half alternates starting even at
    layer 0; the peaking half mirrors the sequence at the midpoint, i.e.
    layer random_depth + j matches layer random_depth - 1 - j (extended by
    parity for the odd-depth overhang)."""
    if layer_index < random_depth:
        m = layer_index
    else:
        m = random_depth - 1 - (layer_index - random_depth)
    return m % 2 == 0


def brickwall_layout(n: int, d: int) -> list[list[int]]:
    """Per-layer qubit_low positions of the mirrored brick-wall pattern.

    For n = 2 every layer is the single pair (0, 1).
    """
    if n < 2 or d < 2:
        raise InvalidDimensionError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    rd = random_depth_for(d)
    if n == 2:
        return [[0] for _ in range(d)]
    return [_row_pairs(n, _layer_even(t, rd)) for t in range(d)]


def _fill_rng(seed: int, role_tag: int, layer_in_half: int, qubit_low: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), role_tag, layer_in_half, qubit_low])
    )


def build_reference_circuit(n_max: int, d_max: int, seed: int) -> Circuit:
    """Full-size circuit whose gates are all Haar random; smaller benchmark
    circuits are carved out of it so difficulty grows incrementally."""
    if n_max < 2 or d_max < 2:
        raise InvalidDimensionError(f"need n >= 2 and d >= 2, got n={n_max}, d={d_max}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    rd = random_depth_for(d_max)
    layers = []
    for t, row in enumerate(brickwall_layout(n_max, d_max)):
        role = ROLE_RANDOM if t < rd else ROLE_PEAKING
        layer = tuple(
            GatePlacement(t, q, kak_decompose(haar_random_unitary(rng)), role)
            for q in row
        )
        layers.append(layer)
    return Circuit(
        n=n_max,
        d=d_max,
        random_depth=rd,
        layers=tuple(layers),
        target=BitString.zeros(n_max),
        seed=int(seed),
    )


def derive_subcircuit(reference: Circuit, n: int, d: int) -> Circuit:
    """Carve an (n, d) circuit out of the reference.

    The layout is re-mirrored for (n, d); each slot takes the gate at the
    same (layer-within-half, qubit) position of the reference, restricted
    to qubits 0..n-1.  Slots whose reference layer has no gate there (the
    halves' mirror alignments can disagree between sizes) are filled with
    a fresh Haar gate drawn from a seed derived from the slot position, so
    the fill is deterministic and independent of d.
    """
    if n > reference.n or d > reference.d:
        raise InvalidDimensionError("requested size exceeds the reference circuit")
    if n < 2 or d < 2:
        raise InvalidDimensionError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    rd = random_depth_for(d)
    rd_ref = reference.random_depth
    fill_seed = reference.seed if reference.seed is not None else 0

    by_slot: dict[tuple[int, int], GateParams] = {
        (g.layer_index, g.qubit_low): g.params for g in reference.placements()
    }

    layers = []
    for t, row in enumerate(brickwall_layout(n, d)):
        if t < rd:
            role, tag, j = ROLE_RANDOM, 0, t
            src_layer = j
        else:
            role, tag, j = ROLE_PEAKING, 1, t - rd
            src_layer = rd_ref + j
        layer = []
        for q in row:
            params = by_slot.get((src_layer, q))
            if params is None:
                params = kak_decompose(
                    haar_random_unitary(_fill_rng(fill_seed, tag, j, q))
                )
            layer.append(GatePlacement(t, q, params, role))
        layers.append(tuple(layer))
    return Circuit(
        n=n,
        d=d,
        random_depth=rd,
        layers=tuple(layers),
        target=BitString.zeros(n),
        seed=reference.seed,
    )


def build_exact_inverse_peaking(circuit: Circuit) -> Circuit:
    """Replace the peaking half with the layer-reversed inverse of the
    random half, making the circuit map the all-zero state to itself."""
    if circuit.d % 2 != 0 or circuit.random_depth != circuit.d // 2:
        raise InvalidDimensionError("mirror inverse requires even depth with equal halves")
    rd = circuit.random_depth
    by_slot = {
        (g.layer_index, g.qubit_low): g.params
        for layer in circuit.layers[:rd]
        for g in layer
    }
    layers = list(circuit.layers[:rd])
    for j in range(rd):
        t = rd + j
        src = rd - 1 - j
        layer = []
        for g in circuit.layers[t]:
            params = by_slot.get((src, g.qubit_low))
            if params is None:
                raise InvalidDimensionError(
                    "peaking layer alignment does not mirror the random half"
                )
            layer.append(
                GatePlacement(t, g.qubit_low, kak_decompose(params.matrix().conj().T), ROLE_PEAKING)
            )
        layers.append(tuple(layer))
    return replace(
        circuit,
        layers=tuple(layers),
        target=BitString.zeros(circuit.n),
        final_x=(),
    )


def retarget(circuit: Circuit, s: BitString) -> Circuit:
    """Move the peak from the all-zero bitstring to s by fusing NOT gates
    into the final layer (or appending standalone ones for qubits the last
    layer does not touch).  The output distribution is the old one with
    indices XORed by s."""
    if len(s) != circuit.n:
        raise ValueError("target length does not match qubit count")
    flips = {i for i, b in enumerate(s.bits) if b == 1}
    if not flips:
        return circuit.with_target(s)

    last = circuit.layers[-1]
    new_last = []
    for g in last:
        lo, hi = g.qubit_low, g.qubit_low + 1
        fuse_lo, fuse_hi = lo in flips, hi in flips
        flips.discard(lo)
        flips.discard(hi)
        if not (fuse_lo or fuse_hi):
            new_last.append(g)
            continue
        op = np.eye(4, dtype=complex)
        if fuse_lo:
            op = np.kron(np.eye(2), _X2) @ op
        if fuse_hi:
            op = np.kron(_X2, np.eye(2)) @ op
        new_last.append(replace(g, params=kak_decompose(op @ g.params.matrix())))
    layers = circuit.layers[:-1] + (tuple(new_last),)

    # Unfused flips toggle the standalone NOT set (X is self-inverse).
    final_x = set(circuit.final_x) ^ flips
    return replace(circuit, layers=layers, target=s, final_x=tuple(sorted(final_x)))


def _placement_to_json(g: GatePlacement) -> dict:
    return {
        "layer": g.layer_index,
        "qubit_low": g.qubit_low,
        "role": g.role,
        "params": [float(v) for v in g.params.to_vector()],
    }


def circuit_to_dict(circuit: Circuit, profile: dict | None = None) -> dict:
    doc = {
        "schema": CIRCUIT_SCHEMA,
        "n": circuit.n,
        "d": circuit.d,
        "random_depth": circuit.random_depth,
        "target": circuit.target.text,
        "final_x": list(circuit.final_x),
        "seed": circuit.seed,
        "layers": [
            [_placement_to_json(g) for g in layer] for layer in circuit.layers
        ],
    }
    if profile is not None:
        doc["profile"] = profile
    return doc


def circuit_to_json(circuit: Circuit, profile: dict | None = None) -> str:
    return json.dumps(circuit_to_dict(circuit, profile), indent=2, sort_keys=True)


def circuit_from_dict(doc: dict) -> Circuit:
    if not isinstance(doc, dict) or doc.get("schema") != CIRCUIT_SCHEMA:
        raise SchemaError(
            f"unsupported circuit schema {doc.get('schema')!r}; expected {CIRCUIT_SCHEMA!r}"
        )
    try:
        layers = tuple(
            tuple(
                GatePlacement(
                    layer_index=int(g["layer"]),
                    qubit_low=int(g["qubit_low"]),
                    params=GateParams.from_vector(g["params"]),
                    role=str(g["role"]),
                )
                for g in layer
            )
            for layer in doc["layers"]
        )
        return Circuit(
            n=int(doc["n"]),
            d=int(doc["d"]),
            random_depth=int(doc["random_depth"]),
            layers=layers,
            target=BitString.from_text(doc["target"]),
            final_x=tuple(int(q) for q in doc.get("final_x", [])),
            seed=doc.get("seed"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed circuit document: {exc}") from exc


def circuit_from_json(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return circuit_from_dict(doc)
