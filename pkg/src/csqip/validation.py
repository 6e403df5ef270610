"""Engine-vs-oracle agreement suite: fixed reference states plus random small circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .coherent import KetSuperposition, normalize
from .experiments.generators import RESOURCE_SIGNS, ghz_generator
from .experiments.xor import bit_amplitude, xor_pre_measurement
from .measurement import detect_onoff
from .optics import BeamSplitterSpec, beam_splitter, phase_modulator

DEFICIT_BOUND = 1e-8
DETECTION_BOUND = 1e-9


@dataclass(frozen=True)
class RandomCircuit:
    coeffs: np.ndarray
    amps: np.ndarray  # (terms, modes) input labels
    elements: tuple  # ("bs", a, b, angle) or ("pm", mode, theta)

    @property
    def mode_count(self) -> int:
        return self.amps.shape[1]


def random_circuit(rng: np.random.Generator, max_modes: int = 3, max_elements: int = 4,
                   max_amp: float = 2.0) -> RandomCircuit:
    m = int(rng.integers(1, max_modes + 1))
    terms = int(rng.integers(1, 3))
    r = max_amp * np.sqrt(rng.uniform(0, 1, (terms, m)))
    amps = r * np.exp(1j * rng.uniform(0, 2 * np.pi, (terms, m)))
    coeffs = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    elements = []
    for _ in range(int(rng.integers(0, max_elements + 1))):
        if m >= 2 and rng.uniform() < 0.6:
            a, b = (int(x) for x in rng.choice(m, 2, replace=False))
            elements.append(("bs", a, b, float(rng.uniform(0, np.pi / 2))))
        else:
            elements.append(("pm", int(rng.integers(m)), float(rng.uniform(-np.pi, np.pi))))
    return RandomCircuit(coeffs, amps, tuple(elements))


def run_engine(c: RandomCircuit) -> KetSuperposition:
    s = normalize(KetSuperposition(c.coeffs, c.amps))
    for el in c.elements:
        if el[0] == "bs":
            s = beam_splitter(s, BeamSplitterSpec(el[1], el[2], el[3]))
        else:
            s = phase_modulator(s, el[1], el[2])
    return s


def run_oracle(c: RandomCircuit, cutoff: int) -> fock.FockState:
    fock.check_cutoff(float(np.max(np.abs(c.amps))), cutoff)
    st = fock.embed(c.coeffs, c.amps, cutoff)
    st = st * (1.0 / math.sqrt(st.norm_squared()))
    for el in c.elements:
        if el[0] == "bs":
            st = fock.bs_unitary_fock(st, el[1], el[2], el[3])
        else:
            st = fock.phase_fock(st, el[1], el[2])
    return st


@dataclass(frozen=True)
class AgreementCase:
    name: str
    deficit: float
    detection_error: float = 0.0

    @property
    def ok(self) -> bool:
        return self.deficit <= DEFICIT_BOUND and self.detection_error <= DETECTION_BOUND


def random_case(c: RandomCircuit, cutoff: int, name: str = "random") -> AgreementCase:
    s = run_engine(c)
    st = run_oracle(c, cutoff)
    deficit = fock.cross_validate(s, st)
    err = max(abs(detect_onoff(s, k)[0].probability - fock.vacuum_probability(st, k))
              for k in range(c.mode_count))
    return AgreementCase(name, deficit, err)


def ghz_case(alpha: float, cutoff: int) -> AgreementCase:
    a0 = math.sqrt(3.0) * alpha
    st = fock.FockState.product([fock.cat_fock(a0, cutoff)] + [fock.coherent_fock(0, cutoff)] * 2)
    st = fock.bs_unitary_fock(st, 0, 1, math.asin(1 / math.sqrt(3.0)))
    st = fock.bs_unitary_fock(st, 0, 2, math.pi / 4)
    return AgreementCase(f"ghz alpha={alpha:g}", fock.cross_validate(ghz_generator(alpha), st))


def xor_case(alpha: float, K: int, R: int, cutoff: int) -> AgreementCase:
    """Five-rail pre-measurement XOR state built as a sum of product factors."""
    k, r = bit_amplitude(K, alpha), bit_amplitude(R, alpha)
    c = 0.5 / _input_norm(alpha)
    terms = []
    for sa, sb, sc in RESOURCE_SIGNS:
        rails = [sa * alpha, k, sb * alpha, r, sc * alpha]
        terms.append((c, [fock.coherent_fock(x, cutoff) for x in rails]))
    fs = fock.FockSum.from_single_mode_terms(terms)
    fs.beam_splitter(0, 1, math.pi / 4).beam_splitter(2, 3, math.pi / 4)
    return AgreementCase(f"xor K={K} R={R}", fock.cross_validate(xor_pre_measurement(alpha, K, R), fs))


def _input_norm(alpha: float) -> float:
    """Norm of the resource with coefficients 1/2 (bit rails are common to all terms)."""
    rows = alpha * np.array(RESOURCE_SIGNS, float)
    g = np.exp(-0.5 * (rows[:, None, :] - rows[None, :, :]) ** 2).prod(axis=-1)
    return math.sqrt(0.25 * g.sum())


def agreement_suite(cutoff: int = 40, alpha: float = 2.0, n_random: int = 50,
                    seed: int = 0) -> list[AgreementCase]:
    cases = [ghz_case(alpha, cutoff)]
    cases += [xor_case(alpha, K, R, cutoff) for K in (0, 1) for R in (0, 1)]
    rng = np.random.default_rng(seed)
    cases += [random_case(random_circuit(rng), cutoff, f"random {i}") for i in range(n_random)]
    return cases
