"""Brute-force truncated Fock-space oracle.

Nothing here reuses the label arithmetic of the analytic engine: states are
number-basis arrays, a beam splitter is the matrix exponential of the
two-mode coupler theta (a_a a_b^dag - a_a^dag a_b), computed block by block
in total photon number, and measurements are projectors on the arrays.

Dense states are meant for up to three modes.  ``FockSum`` covers larger
registers whose terms stay products of small factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.integrate import simpson
from scipy.stats import poisson

TAIL_BOUND = 1e-10


class CutoffError(ValueError):
    """The Poisson tail beyond the cutoff exceeds the allowed bound."""


def poisson_tail(mean: float, cutoff: int) -> float:
    """P(n > cutoff) for a Poisson(mean) photon number."""
    return float(poisson.sf(cutoff, mean))


def check_cutoff(max_amp: float, cutoff: int, bound: float = TAIL_BOUND) -> float:
    tail = poisson_tail(max_amp**2, cutoff)
    if tail >= bound:
        raise CutoffError(
            f"cutoff {cutoff} too small for |amplitude| {max_amp:.4g}: "
            f"Poisson tail {tail:.3g} exceeds {bound:g}"
        )
    return tail


def choose_cutoff(max_amp: float, bound: float = TAIL_BOUND, growth: bool = True) -> int:
    """Smallest cutoff with tail < bound; `growth` doubles the mean for sqrt(2) splitter gain."""
    mean = (2.0 if growth else 1.0) * max_amp**2
    c = 1
    while poisson_tail(mean, c) >= bound:
        c += 1
    return c


def coherent_fock(a: complex, cutoff: int) -> np.ndarray:
    """e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..cutoff."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    a = complex(a)
    out = np.empty(cutoff + 1, dtype=complex)
    out[0] = math.exp(-0.5 * abs(a) ** 2)
    for n in range(1, cutoff + 1):
        out[n] = out[n - 1] * a / math.sqrt(n)
    return out


def cat_fock(alpha: complex, cutoff: int, parity: str = "plus") -> np.ndarray:
    sign = {"plus": 1.0, "minus": -1.0}[parity]
    v = coherent_fock(-alpha, cutoff) + sign * coherent_fock(alpha, cutoff)
    # normalize with the exact (untruncated) norm so the truncation deficit stays visible
    n2 = 2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2))
    return v / math.sqrt(n2)


@dataclass
class FockState:
    """Dense amplitudes over the product basis |n_0, ..., n_{m-1}>, n_k <= cutoff."""

    cutoff: int
    amplitudes: np.ndarray

    @property
    def mode_count(self) -> int:
        return self.amplitudes.ndim

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "FockState":
        amps = factors[0]
        for f in factors[1:]:
            amps = np.multiply.outer(amps, f)
        return cls(len(factors[0]) - 1, np.asarray(amps, dtype=complex))

    @classmethod
    def coherent(cls, amps: Sequence[complex], cutoff: int) -> "FockState":
        return cls.product([coherent_fock(a, cutoff) for a in amps])

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def deficit(self) -> float:
        return 1.0 - self.norm_squared()

    def __add__(self, other: "FockState") -> "FockState":
        return FockState(self.cutoff, self.amplitudes + other.amplitudes)

    def __mul__(self, c: complex) -> "FockState":
        return FockState(self.cutoff, self.amplitudes * c)

    __rmul__ = __mul__


def inner_fock(a: FockState, b: FockState) -> complex:
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# --- two-mode coupler ----------------------------------------------------------


def _blocks(cutoff: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per total photon number N: (n_a values, flat indices into the (c+1)^2 two-mode space)."""
    d = cutoff + 1
    out = []
    for total in range(2 * cutoff + 1):
        na = np.arange(max(0, total - cutoff), min(total, cutoff) + 1)
        out.append((na, na * d + (total - na)))
    return out


def _coupler_block(na: np.ndarray, total: int) -> np.ndarray:
    """a_a a_b^dag - a_a^dag a_b on the states |n, total - n>, n in `na`."""
    k = len(na)
    g = np.zeros((k, k))
    for i, n in enumerate(na):
        nb = total - n
        if i > 0:  # a_a a_b^dag |n, nb> = sqrt(n (nb + 1)) |n - 1, nb + 1>
            g[i - 1, i] = math.sqrt(n * (nb + 1))
        if i < k - 1:  # -a_a^dag a_b |n, nb> = -sqrt((n + 1) nb) |n + 1, nb - 1>
            g[i + 1, i] = -math.sqrt((n + 1) * nb)
    return g


@lru_cache(maxsize=64)
def _bs_blocks(cutoff: int, mix_angle: float) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    out = []
    for total, (na, idx) in enumerate(_blocks(cutoff)):
        out.append((idx, expm(mix_angle * _coupler_block(na, total))))
    return tuple(out)


def _two_mode_apply(amps: np.ndarray, a: int, b: int, blocks) -> np.ndarray:
    m = amps.ndim
    for q in (a, b):
        if not 0 <= q < m:
            raise ValueError(f"mode {q} out of range for {m} modes")
    if a == b:
        raise ValueError("beam splitter needs two distinct modes")
    d = amps.shape[0]
    moved = np.moveaxis(amps, [a, b], [0, 1])
    flat = moved.reshape(d * d, -1).copy()
    for idx, u in blocks:
        flat[idx] = u @ flat[idx]
    return np.moveaxis(flat.reshape(moved.shape), [0, 1], [a, b])


def bs_unitary_fock(state: FockState, mode_a: int, mode_b: int, mix_angle: float) -> FockState:
    blocks = _bs_blocks(state.cutoff, float(mix_angle))
    return FockState(state.cutoff, _two_mode_apply(state.amplitudes, mode_a, mode_b, blocks))


def _phase_apply(amps: np.ndarray, mode: int, theta: float) -> np.ndarray:
    d = amps.shape[mode]
    shape = [1] * amps.ndim
    shape[mode] = d
    return amps * np.exp(1j * theta * np.arange(d)).reshape(shape)


def phase_fock(state: FockState, mode: int, theta: float) -> FockState:
    if not 0 <= mode < state.mode_count:
        raise ValueError(f"mode {mode} out of range")
    return FockState(state.cutoff, _phase_apply(state.amplitudes, mode, theta))


# --- measurements ----------------------------------------------------------------


def project_vacuum(state: FockState, mode: int) -> FockState:
    amps = np.zeros_like(state.amplitudes)
    sl = [slice(None)] * state.mode_count
    sl[mode] = 0
    amps[tuple(sl)] = state.amplitudes[tuple(sl)]
    return FockState(state.cutoff, amps)


def vacuum_probability(state: FockState, mode: int) -> float:
    return project_vacuum(state, mode).norm_squared()


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """phi_n(x), n = 0..nmax, of the quadrature x = (a + a^dag)/sqrt(2)."""
    phi = np.zeros((nmax + 1, x.size))
    phi[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if nmax >= 1:
        phi[1] = math.sqrt(2.0) * x * phi[0]
    for n in range(1, nmax):
        phi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * phi[n] - math.sqrt(n / (n + 1)) * phi[n - 1]
    return phi


@lru_cache(maxsize=8)
def _halfline_overlaps(cutoff: int, x_max: float, points: int) -> np.ndarray:
    x = np.linspace(0.0, x_max, points)
    phi = hermite_functions(cutoff, x)
    integrand = phi[:, None, :] * phi[None, :, :]
    return simpson(integrand, x=x, axis=-1)


def halfline_probability(state: FockState, mode: int, points: int = 4001) -> float:
    """P(x > 0) for the quadrature of `mode`, marginalized over the other modes."""
    c = state.cutoff
    x_max = math.sqrt(2.0 * c + 1.0) + 8.0  # beyond the classical turning point of phi_c
    m = _halfline_overlaps(c, x_max, points)
    amps = np.moveaxis(state.amplitudes, mode, 0).reshape(c + 1, -1)
    return float(np.real(np.einsum("nk,nm,mk->", amps.conj(), m, amps)))


# --- sums of product factors -------------------------------------------------------


@dataclass
class FockSum:
    """sum_t coeff_t prod_f factor_{t,f}; each factor is a dense array over a group of modes.

    `groups[t]` lists, per factor, the modes it covers (axis order of the array).
    """

    cutoff: int
    mode_count: int
    coeffs: list[complex]
    groups: list[list[tuple[int, ...]]]
    factors: list[list[np.ndarray]]

    @classmethod
    def from_single_mode_terms(cls, terms: Sequence[tuple[complex, Sequence[np.ndarray]]]) -> "FockSum":
        cutoff = len(terms[0][1][0]) - 1
        m = len(terms[0][1])
        return cls(
            cutoff,
            m,
            [complex(c) for c, _ in terms],
            [[(k,) for k in range(m)] for _ in terms],
            [[np.asarray(f, dtype=complex) for f in fs] for _, fs in terms],
        )

    def _merge(self, t: int, a: int, b: int) -> int:
        """Ensure modes a and b live in one factor of term t; return that factor's index."""
        groups, facs = self.groups[t], self.factors[t]
        ia = next(i for i, g in enumerate(groups) if a in g)
        ib = next(i for i, g in enumerate(groups) if b in g)
        if ia == ib:
            return ia
        merged = np.multiply.outer(facs[ia], facs[ib])
        new_group = groups[ia] + groups[ib]
        for i in sorted((ia, ib), reverse=True):
            del groups[i], facs[i]
        groups.append(new_group)
        facs.append(merged)
        return len(groups) - 1

    def beam_splitter(self, mode_a: int, mode_b: int, mix_angle: float) -> "FockSum":
        blocks = _bs_blocks(self.cutoff, float(mix_angle))
        for t in range(len(self.coeffs)):
            i = self._merge(t, mode_a, mode_b)
            g = self.groups[t][i]
            self.factors[t][i] = _two_mode_apply(self.factors[t][i], g.index(mode_a), g.index(mode_b), blocks)
        return self

    def phase(self, mode: int, theta: float) -> "FockSum":
        for t in range(len(self.coeffs)):
            i = next(i for i, g in enumerate(self.groups[t]) if mode in g)
            self.factors[t][i] = _phase_apply(self.factors[t][i], self.groups[t][i].index(mode), theta)
        return self

    def overlap_with_coherent(self, coeffs: Sequence[complex], labels: np.ndarray) -> complex:
        """<phi|self> for |phi> = sum_j coeffs_j |labels_j> embedded with coherent_fock."""
        total = 0j
        for cj, row in zip(coeffs, labels):
            vecs = [coherent_fock(a, self.cutoff) for a in row]
            for ct, groups, facs in zip(self.coeffs, self.groups, self.factors):
                prod = complex(np.conj(cj) * ct)
                for g, f in zip(groups, facs):
                    v = f
                    for k in g:  # contract axis 0 repeatedly, in group order
                        v = np.tensordot(vecs[k].conj(), v, axes=(0, 0))
                    prod *= complex(v)
                total += prod
        return total

    def to_dense(self) -> FockState:
        if self.mode_count > 3:
            raise ValueError("dense conversion is limited to three modes")
        total = None
        for ct, groups, facs in zip(self.coeffs, self.groups, self.factors):
            arr, order = facs[0], list(groups[0])
            for g, f in zip(groups[1:], facs[1:]):
                arr = np.multiply.outer(arr, f)
                order += list(g)
            arr = np.transpose(arr, np.argsort(order)) * ct
            total = arr if total is None else total + arr
        return FockState(self.cutoff, total)


# --- engine comparison -----------------------------------------------------------


def embed(coeffs: Sequence[complex], labels: np.ndarray, cutoff: int) -> FockState:
    """Dense Fock image of sum_j coeffs_j |labels_j> (at most three modes)."""
    labels = np.asarray(labels, dtype=complex)
    total = None
    for c, row in zip(coeffs, labels):
        term = FockState.coherent(row, cutoff) * c
        total = term if total is None else total + term
    return total


def cross_validate(analytic, oracle: FockState | FockSum) -> float:
    """|1 - |<analytic|oracle>|| with the analytic state embedded term by term.

    `analytic` is anything with `coeffs` and `amps` arrays (a ket superposition).
    Raises CutoffError if the cutoff cannot hold the largest amplitude.
    """
    coeffs = np.asarray(analytic.coeffs)
    labels = np.asarray(analytic.amps)
    max_amp = float(np.max(np.abs(labels))) if labels.size else 0.0
    check_cutoff(max_amp, oracle.cutoff)
    if isinstance(oracle, FockSum):
        ov = oracle.overlap_with_coherent(coeffs, labels)
    else:
        ov = inner_fock(embed(coeffs, labels, oracle.cutoff), oracle)
    return abs(1.0 - abs(ov))
