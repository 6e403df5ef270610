"""Optical non-local XOR of two classical bits carried by coherent states.

Rail layout: 0 = resource A, 1 = Alice's bit K, 2 = resource B, 3 = Bob's bit R,
4 = resource C.  Bits are encoded -alpha -> 0, +alpha -> 1.  After a balanced
splitter on (A, K) and on (B, R), Alice and Bob record light/no light on rails 0
and 2 and Charlie reads the sign of rail 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..coherent import KetSuperposition, StateError, normalize, same_terms
from ..measurement import CLICK, PLUS, LabelMeasurement, measure_jointly
from ..optics import BeamSplitterSpec, beam_splitter
from .generators import MIN_ALPHA, resource_state
from .qubit import qubit_reference_protocol

RAIL_A, RAIL_K, RAIL_B, RAIL_R, RAIL_C = range(5)


def bit_amplitude(bit: int, alpha: float) -> float:
    if bit not in (0, 1):
        raise ValueError(f"expected a bit, got {bit!r}")
    return alpha if bit else -alpha


def xor_closed_form_state(alpha: float, k: float, r: float) -> KetSuperposition:
    """Pre-measurement state written out directly, coefficients 1/2.

    k and r are the coherent amplitudes carrying the bits K and R.
    """
    s2 = math.sqrt(2.0)
    a = alpha
    rows = [
        [-(a + k) / s2, (k - a) / s2, -(a + r) / s2, (r - a) / s2, -a],
        [-(a + k) / s2, (k - a) / s2, (a - r) / s2, (r + a) / s2, a],
        [(a - k) / s2, (k + a) / s2, -(a + r) / s2, (r - a) / s2, a],
        [(a - k) / s2, (k + a) / s2, (a - r) / s2, (r + a) / s2, -a],
    ]
    return KetSuperposition(np.full(4, 0.5), rows)


def xor_input_state(alpha: float, K: int, R: int) -> KetSuperposition:
    psi = resource_state(alpha)  # rails A, B, C
    bits = KetSuperposition.coherent(bit_amplitude(K, alpha), bit_amplitude(R, alpha))
    return psi.tensor(bits).permute_modes([0, 3, 1, 4, 2])


def xor_pre_measurement(alpha: float, K: int, R: int) -> KetSuperposition:
    s = xor_input_state(alpha, K, R)
    s = beam_splitter(s, BeamSplitterSpec(RAIL_A, RAIL_K))
    return beam_splitter(s, BeamSplitterSpec(RAIL_B, RAIL_R))


@dataclass(frozen=True)
class XorBranch:
    A: int
    B: int
    C: int
    probability: float

    @property
    def bits(self) -> str:
        return f"{self.A}{self.B}{self.C}"

    @property
    def xor(self) -> int:
        return self.A ^ self.B ^ self.C


@dataclass
class XorRunResult:
    K: int
    R: int
    alpha: float
    branches: list[XorBranch]
    matches_closed_form: bool = field(default=False)

    @property
    def xor_teleported(self) -> list[int]:
        return [b.xor for b in self.branches]

    @property
    def consistent(self) -> bool:
        return all(x == self.K ^ self.R for x in self.xor_teleported)

    @property
    def distribution(self) -> dict[str, float]:
        return {b.bits: b.probability for b in self.branches}

    def to_dict(self) -> dict:
        return {
            "branches": [
                {
                    "outcomes": {"A": b.A, "B": b.B, "C": b.C},
                    "prob": float(f"{b.probability:.12g}"),
                    "failed": False,
                    "xor": b.xor,
                }
                for b in self.branches
            ],
            "p_success": float(f"{sum(b.probability for b in self.branches):.12g}"),
            "K": self.K,
            "R": self.R,
            "xor": self.K ^ self.R if self.consistent else None,
        }


def optical_xor_protocol(alpha: float, K: int, R: int) -> XorRunResult:
    if alpha < MIN_ALPHA:
        raise StateError(f"alpha = {alpha} is below {MIN_ALPHA}")
    state = xor_pre_measurement(alpha, K, R)
    printed = xor_closed_form_state(alpha, bit_amplitude(K, alpha), bit_amplitude(R, alpha))
    closed = same_terms(state, normalize(printed), tol=1e-9)
    readout = [
        LabelMeasurement(RAIL_A, "A", "ideal"),
        LabelMeasurement(RAIL_B, "B", "ideal"),
        LabelMeasurement(RAIL_C, "C", "homodyne"),
    ]
    branches = [
        XorBranch(int(a == CLICK), int(b == CLICK), int(c == PLUS), res.probability)
        for (a, b, c), res in measure_jointly(state, readout).items()
        if not res.is_null
    ]
    branches.sort(key=lambda b: b.bits)
    return XorRunResult(K, R, alpha, branches, closed)


def total_variation(p: dict[str, float], q: dict[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def compare_with_qubit_reference(alpha: float, K: int, R: int) -> float:
    """Total-variation distance between optical (A, B, C) and qubit (D, E, C) statistics."""
    return total_variation(
        optical_xor_protocol(alpha, K, R).distribution, qubit_reference_protocol(K, R)
    )
