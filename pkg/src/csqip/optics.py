"""Linear-optical elements acting on coherent labels.

A passive element maps every product coherent state to another product
coherent state, so it acts term by term on a superposition and never changes
coefficients.  Beam-splitter convention (normative throughout the package):

    (a, b) -> (t a - r b, r a + t b),    t = cos(mix_angle), r = sin(mix_angle)

so a balanced splitter sends |x, x> to |0, sqrt(2) x>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherent import KetSuperposition, StateError


@dataclass(frozen=True)
class BeamSplitterSpec:
    mode_a: int
    mode_b: int
    mix_angle: float = math.pi / 4

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise StateError(f"beam splitter needs two distinct modes, got {self.mode_a} twice")

    @classmethod
    def from_reflectivity(cls, mode_a: int, mode_b: int, r: float) -> "BeamSplitterSpec":
        """Amplitude reflectivity r in [0, 1]; mix_angle = arcsin(r)."""
        if not 0.0 <= r <= 1.0:
            raise StateError(f"amplitude reflectivity {r} outside [0, 1]")
        return cls(mode_a, mode_b, math.asin(r))

    @property
    def t(self) -> float:
        return self._tr()[0]

    @property
    def r(self) -> float:
        return self._tr()[1]

    def _tr(self) -> tuple[float, float]:
        t, r = math.cos(self.mix_angle), math.sin(self.mix_angle)
        if abs(t - r) < 1e-15:
            # cos(pi/4) and sin(pi/4) differ in the last bit; keep dark ports exactly dark.
            t = r = math.sqrt(0.5)
        return t, r


@dataclass(frozen=True)
class LossSpec:
    """Transmissivity-eta channel modelled by a splitter with a vacuum environment port."""

    mode: int
    eta: float
    placement: str = "input"

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise StateError(f"transmissivity {self.eta} outside [0, 1]")
        if self.placement not in ("input", "output"):
            raise StateError(f"unknown loss placement {self.placement!r}")


def _check_mode(s: KetSuperposition, mode: int) -> None:
    if not 0 <= mode < s.mode_count:
        raise StateError(f"mode {mode} out of range for a {s.mode_count}-mode state")


def beam_splitter(s: KetSuperposition, spec: BeamSplitterSpec) -> KetSuperposition:
    _check_mode(s, spec.mode_a)
    _check_mode(s, spec.mode_b)
    t, r = spec._tr()
    amps = s.amps.copy()
    a = s.amps[:, spec.mode_a]
    b = s.amps[:, spec.mode_b]
    amps[:, spec.mode_a] = t * a - r * b
    amps[:, spec.mode_b] = r * a + t * b
    return s.with_amps(amps)


def phase_factor(theta: float) -> complex:
    """e^{i theta}, exact at multiples of pi/2."""
    quarter = theta / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return (1, 1j, -1, -1j)[k % 4]
    return complex(math.cos(theta), math.sin(theta))


def phase_modulator(s: KetSuperposition, mode: int, theta: float) -> KetSuperposition:
    _check_mode(s, mode)
    amps = s.amps.copy()
    amps[:, mode] = amps[:, mode] * phase_factor(theta)
    return s.with_amps(amps)


def loss_channel(s: KetSuperposition, spec: LossSpec) -> KetSuperposition:
    """Split `spec.mode` with a fresh vacuum environment mode appended at the end."""
    _check_mode(s, spec.mode)
    a = s.amps[:, spec.mode]
    amps = np.hstack([s.amps, (math.sqrt(1.0 - spec.eta) * a)[:, None]])
    amps[:, spec.mode] = math.sqrt(spec.eta) * a
    return s.with_amps(amps)


def add_mode(s: KetSuperposition, init: complex = 0.0) -> KetSuperposition:
    """Append a mode prepared in the coherent state |init> to every term."""
    col = np.full((s.n_terms, 1), complex(init))
    return s.with_amps(np.hstack([s.amps, col]))
