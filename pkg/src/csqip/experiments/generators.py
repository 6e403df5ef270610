"""Entangled-resource generators: the GHZ splitter and the heralded tripartite source."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuit import RunReport, run_circuit
from ..coherent import DyadMixture, KetSuperposition, StateError, fidelity, normalize, restrict
from ..corpus import load_circuit
from ..optics import BeamSplitterSpec, add_mode, beam_splitter

# sign patterns of the even-parity resource on three rails (-1 is logical 0)
RESOURCE_SIGNS = ((-1, -1, -1), (-1, 1, 1), (1, -1, 1), (1, 1, -1))
OUTPUT_RAILS = (1, 2, 3)
MIN_ALPHA = 1.5


def resource_state(alpha: float) -> KetSuperposition:
    """Normalized (|-a,-a,-a> + |-a,a,a> + |a,-a,a> + |a,a,-a>)/2."""
    return normalize(KetSuperposition(np.full(4, 0.5), alpha * np.array(RESOURCE_SIGNS, float)))


def ghz_target(alpha: float) -> KetSuperposition:
    return normalize(KetSuperposition([1.0, 1.0], [[-alpha] * 3, [alpha] * 3]))


def ghz_generator(alpha: float) -> KetSuperposition:
    """Split a cat of amplitude sqrt(3)*alpha into three rails of amplitude alpha."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    s = add_mode(add_mode(KetSuperposition.cat(math.sqrt(3.0) * alpha)))
    s = beam_splitter(s, BeamSplitterSpec.from_reflectivity(0, 1, 1 / math.sqrt(3.0)))
    return beam_splitter(s, BeamSplitterSpec.from_reflectivity(0, 2, 1 / math.sqrt(2.0)))


@dataclass
class TripartiteResult:
    alpha: float
    state: KetSuperposition  # corrected output on the three resource rails
    p_success: float
    branch_probabilities: dict[str, float]
    raw_branches: dict[str, KetSuperposition]  # before feed-forward, keyed plus/minus
    corrected_branches: dict[str, KetSuperposition]
    report: RunReport

    @property
    def mixture(self) -> DyadMixture:
        """Heralded output averaged over both successful branches."""
        out = None
        for sym, ket in self.corrected_branches.items():
            term = DyadMixture.pure(ket) * (self.branch_probabilities[sym] / self.p_success)
            out = term if out is None else out + term
        return out.compact(0.0)

    def fidelity(self, target: KetSuperposition | None = None) -> float:
        return fidelity(self.mixture, target or resource_state(self.alpha))


def _flip_last(s: KetSuperposition) -> KetSuperposition:
    amps = s.amps.copy()
    amps[:, -1] = -amps[:, -1]
    return KetSuperposition(s.coeffs, amps)


def tripartite_generator(alpha: float) -> TripartiteResult:
    if alpha < MIN_ALPHA:
        raise StateError(f"alpha = {alpha} is below {MIN_ALPHA}; the logical states are not separable")
    rep = run_circuit(load_circuit("fig3_tripartite"), {"alpha": alpha})
    # D1 dark <=> rail 0 carried +alpha ("plus"); D2 dark <=> -alpha ("minus", corrected by X)
    branches = {"plus": rep.find(D1="vac"), "minus": rep.find(D2="vac")}
    corrected = {sym: restrict(b.state, OUTPUT_RAILS) for sym, b in branches.items()}
    raw = {"plus": corrected["plus"], "minus": _flip_last(corrected["minus"])}
    probs = {sym: b.probability for sym, b in branches.items()}
    return TripartiteResult(
        alpha, corrected["plus"], rep.p_success, probs, raw, corrected, rep
    )
