"""Qubit-level reference for the teleported XOR of two classical bits.

Five qubits A, B, C (shared resource), D = K and E = R.  A two-qubit gate acts
on (A, D) and on (B, E); then D, E and C are read out in the computational
basis.  Gate matrices use the basis |a k> with index 2a + k.
"""

from __future__ import annotations

import numpy as np

_S = np.sqrt(0.5)
H = _S * np.array([[1, 1], [1, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

RESOURCE_TERMS = ("000", "011", "110", "101")


def printed_u_matrix() -> np.ndarray:
    """Columns read literally from U|0K> = (|0K> + |1~K>)/sqrt2, U|1K> = (|0~K> - |1K>)/sqrt2."""
    u = np.zeros((4, 4), dtype=complex)
    for a in (0, 1):
        for k in (0, 1):
            col = 2 * a + k
            if a == 0:
                u[2 * 0 + k, col] += _S
                u[2 * 1 + (1 - k), col] += _S
            else:
                u[2 * 0 + (1 - k), col] += _S
                u[2 * 1 + k, col] -= _S
    return u


def xor_gate_matrix() -> np.ndarray:
    """CNOT from the resource qubit onto the key bit, then a Hadamard on the resource qubit."""
    return np.kron(H, I2) @ CNOT


def resource_state() -> np.ndarray:
    """(|000> + |011> + |110> + |101>)/2 on (A, B, C) as a (2, 2, 2) array."""
    psi = np.zeros((2, 2, 2), dtype=complex)
    for bits in RESOURCE_TERMS:
        psi[tuple(int(b) for b in bits)] = 0.5
    return psi


def _apply_pair(state: np.ndarray, gate: np.ndarray, q1: int, q2: int) -> np.ndarray:
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, state, axes=([2, 3], [q1, q2]))
    return np.moveaxis(out, [0, 1], [q1, q2])


def qubit_reference_protocol(K: int, R: int, gate: np.ndarray | None = None) -> dict[str, float]:
    """Outcome distribution {"dec": probability} of measuring D, E, C."""
    if K not in (0, 1) or R not in (0, 1):
        raise ValueError(f"K and R must be bits, got {K!r}, {R!r}")
    gate = xor_gate_matrix() if gate is None else np.asarray(gate, dtype=complex)
    de = np.zeros((2, 2), dtype=complex)
    de[K, R] = 1.0
    state = np.multiply.outer(resource_state(), de)  # axes A, B, C, D, E
    state = _apply_pair(state, gate, 0, 3)
    state = _apply_pair(state, gate, 1, 4)
    probs = np.sum(np.abs(state) ** 2, axis=(0, 1))  # axes C, D, E
    out = {}
    for c in (0, 1):
        for d in (0, 1):
            for e in (0, 1):
                p = float(probs[c, d, e])
                if p > 1e-15:
                    out[f"{d}{e}{c}"] = p
    return dict(sorted(out.items()))
