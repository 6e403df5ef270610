"""Loss analysis of the heralded tripartite source.

Every input rail (the local oscillator included) passes a transmissivity-eta
splitter whose second port is an environment mode.  After heralding and the
sign readout, the environment is traced out.  The heralded state is then
compared with the decoherence model

    rho = 1/2 { w [ideal_+ + ideal_-] + (1 - w) (rho_1 + rho_2) },

in which w is the weight of the undisturbed resource.  The exact value
w = delta = exp(-4 alpha^2 (1 - eta)) comes from the environment labels of the
four heralded terms, which differ pairwise in exactly two rails.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from ..circuit import RunReport, run_circuit, with_loss_placement
from ..coherent import (
    DyadMixture,
    KetSuperposition,
    StateError,
    distinct_labels,
    fidelity,
    to_matrix,
    trace_distance,
)
from ..corpus import load_circuit
from .generators import MIN_ALPHA, OUTPUT_RAILS, RESOURCE_SIGNS, resource_state

CSV_HEADER = ("alpha", "eta", "p_success", "delta_over_2", "fidelity")
CSV_DIGITS = 10


def delta(alpha: float, eta: float) -> float:
    return math.exp(-4.0 * alpha**2 * (1.0 - eta))


def threshold_closed_form(alpha: float, target: float = 0.25) -> float:
    """eta solving delta/2 = target."""
    return 1.0 + math.log(2.0 * target) / (4.0 * alpha**2)


def _pointer(amp: float) -> DyadMixture:
    return DyadMixture.pure(KetSuperposition.coherent(amp))


def _flip_last(rho: DyadMixture) -> DyadMixture:
    def flip(labels):
        out = labels.copy()
        out[:, -1] = -out[:, -1]
        return out

    return rho.map_labels(flip)


@dataclass
class LossAnalysisResult:
    alpha: float
    eta: float
    placement: str
    p_herald: float
    branch_probabilities: dict[str, float]
    rho_branches: dict[str, DyadMixture]  # heralded, uncorrected, environment traced out
    rho_reduced: DyadMixture  # sign pointer (first mode) + three resource rails
    rho_corrected: DyadMixture  # three resource rails after feed-forward
    fidelity_corrected: float  # against the resource at sqrt(eta)*alpha
    fidelity_original: float  # against the resource at alpha
    w_ideal: float
    residual: float  # trace distance to the model at w = delta
    report: RunReport

    @property
    def delta(self) -> float:
        return delta(self.alpha, self.eta)

    @property
    def p_success(self) -> float:
        """Heralding probability times the weight of the undisturbed resource."""
        return self.p_herald * self.w_ideal

    @property
    def residual_bound(self) -> float:
        d = self.delta
        return max(2 * d**2, 5 * math.exp(-2 * self.eta * self.alpha**2))


def model_components(alpha: float, eta: float) -> dict[str, DyadMixture]:
    """Unit-trace pieces of the decoherence model on (pointer, rails 1-3).

    ideal_plus/minus: pointer at +/-a times the resource (bit-flipped on the last
    rail for minus); rho1/rho2: the same labels with the coherences removed.
    """
    a = math.sqrt(eta) * alpha
    psi = resource_state(a)
    flipped = KetSuperposition(psi.coeffs, psi.amps * np.array([1, 1, -1]))
    comps = {
        "ideal_plus": _pointer(a).tensor(DyadMixture.pure(psi)),
        "ideal_minus": _pointer(-a).tensor(DyadMixture.pure(flipped)),
    }
    for name, sign, ket in (("rho1", 1, psi), ("rho2", -1, flipped)):
        labels = np.hstack([np.full((4, 1), sign * a), ket.amps])
        rho = DyadMixture(np.full(4, 0.25), labels, labels)
        comps[name] = rho * (1.0 / rho.trace().real)
    return comps


def decoherence_model(alpha: float, eta: float, w: float) -> DyadMixture:
    c = model_components(alpha, eta)
    ideal = (c["ideal_plus"] + c["ideal_minus"]) * (0.5 * w)
    mixed = (c["rho1"] + c["rho2"]) * (0.5 * (1.0 - w))
    return (ideal + mixed).compact(0.0)


@dataclass
class Decomposition:
    w_fit: float
    residual_fit: float
    residual_delta: float
    delta: float
    bound: float


def _fit_weight(rho: DyadMixture, alpha: float, eta: float) -> tuple[float, float]:
    """Least-squares weight of the undisturbed part (Frobenius norm, orthonormal embedding)."""
    base = decoherence_model(alpha, eta, 0.0)
    full = decoherence_model(alpha, eta, 1.0)
    basis = distinct_labels(rho + base + full)
    m_rho, _ = to_matrix(rho, basis=basis)
    m_base, _ = to_matrix(base, basis=basis)
    m_full, _ = to_matrix(full, basis=basis)
    d = m_full - m_base
    w = float(np.real(np.vdot(d, m_rho - m_base)) / np.real(np.vdot(d, d)))
    return w, trace_distance(rho, decoherence_model(alpha, eta, w))


def decompose_reduced_state(result: LossAnalysisResult) -> Decomposition:
    w, res_fit = _fit_weight(result.rho_reduced, result.alpha, result.eta)
    d = result.delta
    res_delta = trace_distance(result.rho_reduced, decoherence_model(result.alpha, result.eta, d))
    return Decomposition(w, res_fit, res_delta, d, result.residual_bound)


def lossy_generator(alpha: float, eta: float, placement: str = "input") -> LossAnalysisResult:
    if not 0.0 < eta <= 1.0:
        raise StateError(f"eta must lie in (0, 1], got {eta}")
    if alpha < MIN_ALPHA:
        raise StateError(f"alpha = {alpha} is below {MIN_ALPHA}")
    if placement not in ("input", "output"):
        raise StateError(f"unknown loss placement {placement!r}")
    circuit = with_loss_placement(load_circuit("fig5_lossy"), placement)
    rep = run_circuit(circuit, {"alpha": alpha, "eta": eta})
    branches = {"plus": rep.find(D1="vac"), "minus": rep.find(D2="vac")}
    probs = {sym: b.probability for sym, b in branches.items()}
    p_herald = sum(probs.values())

    corrected = {sym: rep.reduced_state(b, OUTPUT_RAILS) for sym, b in branches.items()}
    uncorrected = {"plus": corrected["plus"], "minus": _flip_last(corrected["minus"])}
    a = math.sqrt(eta) * alpha
    rho_reduced = (
        _pointer(a).tensor(uncorrected["plus"]) * (probs["plus"] / p_herald)
        + _pointer(-a).tensor(uncorrected["minus"]) * (probs["minus"] / p_herald)
    ).compact(0.0)
    rho_corrected = (
        corrected["plus"] * (probs["plus"] / p_herald) + corrected["minus"] * (probs["minus"] / p_herald)
    ).compact(1e-14)
    w, _ = _fit_weight(rho_reduced, alpha, eta)
    residual = trace_distance(rho_reduced, decoherence_model(alpha, eta, delta(alpha, eta)))
    return LossAnalysisResult(
        alpha=alpha,
        eta=eta,
        placement=placement,
        p_herald=p_herald,
        branch_probabilities=probs,
        rho_branches=uncorrected,
        rho_reduced=rho_reduced,
        rho_corrected=rho_corrected,
        fidelity_corrected=fidelity(rho_corrected, resource_state(a)),
        fidelity_original=fidelity(rho_corrected, resource_state(alpha)),
        w_ideal=w,
        residual=residual,
        report=rep,
    )


# --- closed-form builders used to cross-check the circuit ----------------------

# environment sign pattern (rails 5-8) of each heralded term, in RESOURCE_SIGNS order
ENV_SIGNS_PLUS = ((-1, -1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1), (1, 1, -1, -1))


# minus branch before correction: system patterns are RESOURCE_SIGNS with the last rail flipped
ENV_SIGNS_MINUS = ((-1, -1, 1, 1), (-1, 1, 1, -1), (-1, 1, -1, 1), (1, 1, 1, 1))


def _lossy_branch(alpha: float, eta: float, sys_signs, env_signs) -> KetSuperposition:
    n = (2.0 * (1.0 + math.exp(-2.0 * alpha**2))) ** -0.5
    sys = math.sqrt(eta) * alpha * np.array(sys_signs, float)
    env = math.sqrt(1.0 - eta) * alpha * np.array(env_signs, float)
    return KetSuperposition(np.full(4, 2 * n**4), np.hstack([sys, env]))


def psi1_lossy(alpha: float, eta: float) -> KetSuperposition:
    """Heralded plus-branch state on rails 2-4 and environment 5-8, coefficient 2N^4."""
    return _lossy_branch(alpha, eta, RESOURCE_SIGNS, ENV_SIGNS_PLUS)


def psi2_lossy(alpha: float, eta: float) -> KetSuperposition:
    """Heralded minus-branch state (uncorrected); differs from the bit-flipped plus branch in its environment labels."""
    flipped = np.array(RESOURCE_SIGNS) * np.array([1, 1, -1])
    return _lossy_branch(alpha, eta, flipped, ENV_SIGNS_MINUS)


def decoherence_parts(alpha: float, eta: float) -> tuple[DyadMixture, DyadMixture]:
    """(ideal dyad 2N^4-weighted, rho_1 with 4N^8 weights) with the pointer |sqrt(eta) alpha>."""
    ket = psi1_lossy(alpha, eta)
    sys = KetSuperposition(ket.coeffs, ket.amps[:, :3])
    ptr = _pointer(math.sqrt(eta) * alpha)
    ideal = ptr.tensor(DyadMixture.pure(sys))
    rho1 = ptr.tensor(DyadMixture(np.abs(ket.coeffs) ** 2, sys.amps, sys.amps))
    return ideal, rho1


# --- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    eta: float
    p_success: float
    delta_over_2: float
    fidelity: float


def success_sweep(alpha: float, eta_grid: Iterable[float], placement: str = "input") -> list[SweepRow]:
    rows = []
    for eta in sorted(float(e) for e in eta_grid):
        res = lossy_generator(alpha, eta, placement)
        rows.append(SweepRow(alpha, eta, res.p_success, res.delta / 2, res.fidelity_corrected))
    return rows


def eta_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid start, start+step, ..., stop (robust to float accumulation)."""
    if step <= 0:
        raise ValueError("step must be positive")
    if not 0.0 < start <= stop <= 1.0:
        raise ValueError(f"need 0 < start <= stop <= 1, got start={start}, stop={stop}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def _fmt(x: float) -> str:
    return f"{x:.{CSV_DIGITS}g}"


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(rows, key=lambda r: (r.alpha, r.eta)):
        w.writerow([_fmt(r.alpha), _fmt(r.eta), _fmt(r.p_success), _fmt(r.delta_over_2), _fmt(r.fidelity)])
    return buf.getvalue()


def success_threshold(alpha: float = 2.0, target: float = 0.25, lo: float = 0.8, hi: float = 1.0) -> float:
    """Smallest eta with measured p_success >= target (p_success is increasing in eta)."""
    f = lambda eta: lossy_generator(alpha, eta).p_success - target  # noqa: E731
    if f(hi) < 0:
        raise StateError(f"p_success never reaches {target} at alpha = {alpha}")
    return float(brentq(f, lo, hi, xtol=1e-10))
