"""Measurement branching on coherent superpositions.

Three detector models are provided:

* ``detect_onoff``: exact on/off photodetection with the projectors |0><0| and
  I - |0><0|.  The vacuum projection of |g> is e^{-|g|^2/2}|0>, still a
  coherent label, so both branches stay in superposition form.
* ``detect_ideal``: on/off detection in the well-separated limit.  A term whose
  amplitude at the mode is zero is "vac", any other term is a certain "click".
  Terms are partitioned by label, branch weights are the Gram norms of each
  part and are rescaled to sum to one.  The dropped cross-branch Gram terms are
  bounded by the vacuum overlap of the dimmest clicking amplitude.
* ``homodyne_sign``: binary +alpha/-alpha discrimination by the sign of
  Re(amplitude), with the same partition/rescale accounting.

``measure_jointly`` runs several label-based detectors at once with a single
partition, which keeps the outcome statistics independent of detector order.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .coherent import (
    ZERO_NORM_TOL,
    KetSuperposition,
    StateError,
    compact,
    gram,
    norm_squared,
)
from .optics import phase_modulator

log = logging.getLogger(__name__)

VAC, CLICK, PLUS, MINUS = "vac", "click", "plus", "minus"
IDEAL_ZERO_TOL = 1e-9


class MeasurementError(StateError):
    pass


class AmbiguousHomodyneError(MeasurementError):
    pass


@dataclass
class BranchOutcome:
    """One measurement outcome; ``post_state`` is None for a null (probability-0) branch."""

    outcome: dict[str, str]
    probability: float
    post_state: KetSuperposition | None
    info: dict = field(default_factory=dict)

    @property
    def is_null(self) -> bool:
        return self.post_state is None


def _check_mode(s: KetSuperposition, mode: int) -> None:
    if not 0 <= mode < s.mode_count:
        raise MeasurementError(f"mode {mode} out of range for a {s.mode_count}-mode state")


def _branch(detector: str, symbol: str, part: KetSuperposition | None, weight: float) -> BranchOutcome:
    if part is None or weight <= ZERO_NORM_TOL:
        return BranchOutcome({detector: symbol}, 0.0, None)
    return BranchOutcome({detector: symbol}, weight, part * (1.0 / math.sqrt(weight)))


def detect_onoff(
    s: KetSuperposition, mode: int, detector: str | None = None
) -> tuple[BranchOutcome, BranchOutcome]:
    """Exact vacuum / click projection on `mode` of a normalized state."""
    _check_mode(s, mode)
    detector = detector or f"mode{mode}"
    amps = s.amps.copy()
    amps[:, mode] = 0.0
    vac = compact(KetSuperposition(s.coeffs * np.exp(-0.5 * np.abs(s.amps[:, mode]) ** 2), amps))
    click = compact(s - vac)
    p_vac = norm_squared(vac)
    p_click = norm_squared(click)
    total = p_vac + p_click
    # near-cancelling superpositions (e.g. a renormalized faint click branch) lose digits in Gram sums
    mag = np.abs(s.coeffs)
    scale = float(mag @ np.abs(gram(s.amps, s.amps)) @ mag)
    if abs(total - 1.0) > max(1e-9, 1e-13 * scale):
        raise MeasurementError(f"detect_onoff needs a normalized state (branch weights sum to {total:.12g})")
    return _branch(detector, VAC, vac, p_vac), _branch(detector, CLICK, click, p_click)


@dataclass(frozen=True)
class LabelMeasurement:
    """A detector that reads the coherent label: ``ideal`` on/off or ``homodyne`` sign."""

    mode: int
    detector: str
    kind: str = "ideal"
    tol: float | None = None

    @property
    def symbols(self) -> tuple[str, str]:
        return (PLUS, MINUS) if self.kind == "homodyne" else (VAC, CLICK)


def _classify(s: KetSuperposition, m: LabelMeasurement) -> tuple[np.ndarray, KetSuperposition]:
    """Per-term symbol index (0 or 1) and the state with dark amplitudes snapped to 0."""
    _check_mode(s, m.mode)
    col = s.amps[:, m.mode]
    if m.kind == "homodyne":
        tol = 1e-6 if m.tol is None else m.tol
        bad = np.flatnonzero(np.abs(col.real) <= tol)
        if bad.size:
            j = bad[0]
            raise AmbiguousHomodyneError(
                f"homodyne {m.detector} on mode {m.mode}: term {j} has amplitude {col[j]:.6g}, "
                f"|Re| <= {tol:g}; the term cannot be assigned to +alpha or -alpha"
            )
        return (col.real < 0).astype(int), s
    if m.kind != "ideal":
        raise MeasurementError(f"unknown label measurement kind {m.kind!r}")
    tol = IDEAL_ZERO_TOL if m.tol is None else m.tol
    dark = np.abs(col) <= tol
    if dark.any():
        amps = s.amps.copy()
        amps[dark, m.mode] = 0.0
        s = s.with_amps(amps)
    return (~dark).astype(int), s


def measure_jointly(
    s: KetSuperposition, measurements: Sequence[LabelMeasurement]
) -> dict[tuple[str, ...], BranchOutcome]:
    """Simultaneous label measurements: one partition of the terms by joint outcome.

    Cross-class Gram terms are dropped once and the class weights rescaled to
    sum to 1, so the result does not depend on the order of `measurements`.
    Every joint outcome is returned; empty ones are null branches.
    """
    if len({m.mode for m in measurements}) != len(measurements):
        raise MeasurementError("simultaneous measurements must act on distinct modes")
    codes = np.zeros(s.n_terms, dtype=int)
    for m in measurements:
        idx, s = _classify(s, m)
        codes = 2 * codes + idx
    weights, parts = {}, {}
    for combo in itertools.product((0, 1), repeat=len(measurements)):
        code = int("".join(map(str, combo)) or "0", 2)
        mask = codes == code
        key = tuple(m.symbols[b] for m, b in zip(measurements, combo))
        if mask.any():
            parts[key] = KetSuperposition(s.coeffs[mask], s.amps[mask])
            weights[key] = norm_squared(parts[key])
        else:
            parts[key], weights[key] = None, 0.0
    raw = sum(weights.values())
    if raw <= ZERO_NORM_TOL:
        raise MeasurementError("measurement of a zero-norm state")
    names = ", ".join(m.detector for m in measurements)
    log.debug("measurement of %s: raw branch weight sum %.15g (deficit %.3g)", names, raw, 1 - raw)
    homodyne = [m for m in measurements if m.kind == "homodyne"]
    if homodyne:
        a_min = min(float(np.min(np.abs(s.amps[:, m.mode].real))) for m in homodyne)
        bound = 4 * math.exp(-2 * a_min**2)
        if abs(raw - 1.0) > bound + 1e-12:
            log.warning("measurement of %s: raw weight sum %.12g outside 1 +/- %.3g", names, raw, bound)
    out = {}
    for key, part in parts.items():
        w = weights[key]
        outcome = {m.detector: sym for m, sym in zip(measurements, key)}
        if part is None or w <= ZERO_NORM_TOL:
            br = BranchOutcome(outcome, 0.0, None)
        else:
            br = BranchOutcome(outcome, w / raw, part * (1.0 / math.sqrt(w)))
        br.info["raw_weight_sum"] = raw
        out[key] = br
    return out


def detect_ideal(
    s: KetSuperposition, mode: int, detector: str | None = None, zero_tol: float = IDEAL_ZERO_TOL
) -> tuple[BranchOutcome, BranchOutcome]:
    """On/off detection treating every nonzero coherent amplitude as a certain click."""
    m = LabelMeasurement(mode, detector or f"mode{mode}", "ideal", zero_tol)
    res = measure_jointly(s, [m])
    return res[(VAC,)], res[(CLICK,)]


def homodyne_sign(
    s: KetSuperposition, mode: int, detector: str | None = None, ambiguity_tol: float = 1e-6
) -> tuple[BranchOutcome, BranchOutcome]:
    """Binary sign discrimination of the coherent amplitude on `mode`."""
    m = LabelMeasurement(mode, detector or f"mode{mode}", "homodyne", ambiguity_tol)
    res = measure_jointly(s, [m])
    return res[(PLUS,)], res[(MINUS,)]


def feed_forward(
    branch: BranchOutcome, detector: str, rule: Mapping[str, tuple[int, float] | None]
) -> KetSuperposition:
    """Apply the phase-modulator correction that `rule` assigns to the branch outcome.

    `rule` maps each outcome symbol of `detector` to ``(mode, theta)`` or None.
    """
    if branch.is_null:
        raise MeasurementError("cannot apply feed-forward to a null branch")
    if detector not in branch.outcome:
        raise MeasurementError(f"branch has no outcome for detector {detector!r}")
    symbol = branch.outcome[detector]
    if symbol not in rule:
        raise MeasurementError(f"feed-forward rule has no entry for outcome {symbol!r} of {detector!r}")
    action = rule[symbol]
    if action is None:
        return branch.post_state
    mode, theta = action
    return phase_modulator(branch.post_state, mode, theta)
