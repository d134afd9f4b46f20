import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prcbench.circuits import build_reference_circuit, derive_subcircuit


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_circuit():
    """Unoptimized (4, 6) circuit derived from a reference."""
    return derive_subcircuit(build_reference_circuit(4, 6, seed=11), 4, 6)


def brute_force_state(circuit) -> np.ndarray:
    """Independent oracle: full 2^n x 2^n layer matrices via explicit kron
    chains, multiplied in order, applied to |0...0>."""
    n = circuit.n
    dim = 1 << n
    total = np.eye(dim, dtype=complex)
    for layer in circuit.layers:
        m = np.eye(dim, dtype=complex)
        for g in layer:
            ops = []
            q = 0
            while q < n:
                if q == g.qubit_low:
                    ops.append(g.params.matrix())
                    q += 2
                else:
                    ops.append(np.eye(2, dtype=complex))
                    q += 1
            full = ops[-1]
            for op in reversed(ops[:-1]):
                full = np.kron(full, op)
            m = full @ m
        total = m @ total
    x2 = np.array([[0, 1], [1, 0]], dtype=complex)
    for q in circuit.final_x:
        ops = [x2 if i == q else np.eye(2, dtype=complex) for i in range(n)]
        full = ops[-1]
        for op in reversed(ops[:-1]):
            full = np.kron(full, op)
        total = full @ total
    return total[:, 0]
