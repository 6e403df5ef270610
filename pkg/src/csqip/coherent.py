"""Exact algebra of multimode coherent-state superpositions.

States are finite sums of product coherent states (a ket is a list of complex
coefficients and a matrix of per-mode amplitudes).  Density operators are sums
of coherent dyads |u><v|.  Because coherent states are not orthogonal, every
norm, probability and trace goes through Gram sums of the closed-form overlap

    <a|b> = exp(-(|a|^2 + |b|^2)/2 + conj(a) b).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

ZERO_NORM_TOL = 1e-14
GRAM_PIVOT_TOL = 1e-12
LABEL_TOL = 1e-10


class StateError(ValueError):
    """Raised for malformed or degenerate states (mode mismatch, zero norm, ...)."""


def overlap(a: complex, b: complex) -> complex:
    """Single-mode inner product <a|b> of coherent states."""
    a = complex(a)
    b = complex(b)
    return complex(np.exp(-0.5 * (abs(a) ** 2 + abs(b) ** 2) + a.conjugate() * b))


def gram(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of multimode overlaps G[i, j] = <x_i|y_j> for label arrays of shape (n, m)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape[1] != y.shape[1]:
        raise StateError(f"mode-count mismatch: {x.shape[1]} vs {y.shape[1]}")
    nx = np.sum(np.abs(x) ** 2, axis=1)
    ny = np.sum(np.abs(y) ** 2, axis=1)
    return np.exp(-0.5 * nx[:, None] - 0.5 * ny[None, :] + x.conj() @ y.T)


@dataclass(frozen=True)
class CoherentLabel:
    """Product coherent state |a_0, a_1, ...>, one complex amplitude per mode."""

    amps: tuple[complex, ...]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amps)
        if len(amps) < 1:
            raise StateError("a coherent label needs at least one mode")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for a in amps):
            raise StateError(f"non-finite amplitude in label {amps}")
        object.__setattr__(self, "amps", amps)

    def __len__(self) -> int:
        return len(self.amps)

    def __getitem__(self, m: int) -> complex:
        return self.amps[m]


def multimode_overlap(u: CoherentLabel, v: CoherentLabel) -> complex:
    """Product of per-mode overlaps <u|v>."""
    if len(u) != len(v):
        raise StateError(f"mode-count mismatch: {len(u)} vs {len(v)}")
    return complex(gram(np.array([u.amps]), np.array([v.amps]))[0, 0])


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class KetSuperposition:
    """Weighted sum of product coherent states, sum_j c_j |label_j>."""

    __slots__ = ("coeffs", "amps")

    def __init__(self, coeffs, amps):
        coeffs = np.array(coeffs, dtype=complex).reshape(-1)
        amps = np.array(amps, dtype=complex)
        if amps.ndim == 1:
            amps = amps.reshape(coeffs.size, -1)
        if amps.ndim != 2 or amps.shape[0] != coeffs.size:
            raise StateError(f"{coeffs.size} coefficients but label array of shape {amps.shape}")
        if amps.shape[1] < 1:
            raise StateError("a ket needs at least one mode")
        if not (np.all(np.isfinite(amps)) and np.all(np.isfinite(coeffs))):
            raise StateError("non-finite coefficient or amplitude")
        self.coeffs = _frozen(coeffs)
        self.amps = _frozen(amps)

    @classmethod
    def coherent(cls, *amps: complex) -> "KetSuperposition":
        return cls([1.0], [list(amps)])

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Sequence[complex]]]) -> "KetSuperposition":
        terms = list(terms)
        if not terms:
            raise StateError("empty term list")
        return cls([c for c, _ in terms], [list(getattr(l, "amps", l)) for _, l in terms])

    @classmethod
    def cat(cls, alpha: complex, parity: str = "plus") -> "KetSuperposition":
        """Normalized N(|-alpha> +/- |alpha>)."""
        sign = {"plus": 1.0, "minus": -1.0}[parity]
        return normalize(cls([1.0, sign], [[-alpha], [alpha]]))

    @property
    def mode_count(self) -> int:
        return self.amps.shape[1]

    @property
    def n_terms(self) -> int:
        return self.coeffs.size

    @property
    def terms(self) -> Iterator[tuple[complex, CoherentLabel]]:
        for c, row in zip(self.coeffs, self.amps):
            yield complex(c), CoherentLabel(tuple(row))

    def __len__(self) -> int:
        return self.n_terms

    def __repr__(self) -> str:
        return f"KetSuperposition(modes={self.mode_count}, terms={self.n_terms})"

    def __mul__(self, scalar: complex) -> "KetSuperposition":
        return KetSuperposition(self.coeffs * scalar, self.amps)

    __rmul__ = __mul__

    def __add__(self, other: "KetSuperposition") -> "KetSuperposition":
        if other.mode_count != self.mode_count:
            raise StateError("mode-count mismatch in ket addition")
        return KetSuperposition(
            np.concatenate([self.coeffs, other.coeffs]), np.vstack([self.amps, other.amps])
        )

    def __sub__(self, other: "KetSuperposition") -> "KetSuperposition":
        return self + other * -1.0

    def tensor(self, other: "KetSuperposition") -> "KetSuperposition":
        """Tensor product; modes of `other` are appended after ours."""
        n, k = self.n_terms, other.n_terms
        coeffs = np.outer(self.coeffs, other.coeffs).reshape(-1)
        amps = np.hstack([np.repeat(self.amps, k, axis=0), np.tile(other.amps, (n, 1))])
        return KetSuperposition(coeffs, amps)

    def permute_modes(self, order: Sequence[int]) -> "KetSuperposition":
        """New ket whose mode i is our mode order[i]."""
        if sorted(order) != list(range(self.mode_count)):
            raise StateError(f"{order} is not a permutation of the modes")
        return KetSuperposition(self.coeffs, self.amps[:, list(order)])

    def with_amps(self, amps: np.ndarray) -> "KetSuperposition":
        return KetSuperposition(self.coeffs, amps)

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "modes": self.mode_count,
            "terms": [
                {
                    "coeff": [float(c.real), float(c.imag)],
                    "amps": [[float(a.real), float(a.imag)] for a in row],
                }
                for c, row in zip(self.coeffs, self.amps)
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "KetSuperposition":
        modes = int(data["modes"])
        terms = data["terms"]
        coeffs = [complex(*t["coeff"]) for t in terms]
        amps = [[complex(*a) for a in t["amps"]] for t in terms]
        if any(len(row) != modes for row in amps):
            raise StateError(f"state dump declares {modes} modes but a term disagrees")
        return cls(coeffs, np.array(amps, dtype=complex).reshape(len(terms), modes))

    @classmethod
    def from_json(cls, text: str) -> "KetSuperposition":
        return cls.from_dict(json.loads(text))


def inner(a: KetSuperposition, b: KetSuperposition) -> complex:
    """<a|b> via the Gram sum."""
    return complex(a.coeffs.conj() @ gram(a.amps, b.amps) @ b.coeffs)


def norm_squared(s: KetSuperposition) -> float:
    val = inner(s, s).real
    if -1e-12 <= val < 0.0:
        return 0.0
    return float(val)


def normalize(s: KetSuperposition) -> KetSuperposition:
    n2 = norm_squared(s)
    if n2 <= ZERO_NORM_TOL:
        raise StateError(f"cannot normalize a zero-norm state (norm^2 = {n2:.3g})")
    return s * (1.0 / np.sqrt(n2))


def _cluster(rows: np.ndarray, tol: float) -> np.ndarray:
    """Greedy clustering of label rows: rows within `tol` per amplitude share a group id."""
    groups = np.full(rows.shape[0], -1, dtype=int)
    reps: list[np.ndarray] = []
    for i, row in enumerate(rows):
        for g, rep in enumerate(reps):
            if np.all(np.abs(row - rep) <= tol):
                groups[i] = g
                break
        else:
            groups[i] = len(reps)
            reps.append(row)
    return groups


def compact(s: KetSuperposition, tol: float = 1e-12) -> KetSuperposition:
    """Merge terms with (nearly) equal labels and drop negligible coefficients.

    Labels within `tol` per amplitude are merged, keeping the first label seen.
    Terms with |c| < tol * max|c| after merging are removed; exact zeros are always removed.
    An all-zero result keeps a single zero-coefficient term so the mode count survives.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    groups = _cluster(s.amps, tol)
    n = groups.max() + 1
    coeffs = np.zeros(n, dtype=complex)
    np.add.at(coeffs, groups, s.coeffs)
    first = np.array([np.flatnonzero(groups == g)[0] for g in range(n)])
    amps = s.amps[first]
    mag = np.abs(coeffs)
    keep = (mag > 0) & (mag >= tol * mag.max()) if mag.max() > 0 else np.zeros(n, bool)
    if not keep.any():
        return KetSuperposition([0.0], amps[:1])
    return KetSuperposition(coeffs[keep], amps[keep])


def same_terms(a: KetSuperposition, b: KetSuperposition, tol: float = 1e-9) -> bool:
    """Term-for-term equality: equal labels (per amplitude) carrying equal coefficients."""
    if a.mode_count != b.mode_count:
        return False
    a, b = compact(a, 0.0), compact(b, 0.0)
    if a.n_terms != b.n_terms:
        return False
    used = np.zeros(b.n_terms, bool)
    for c, row in zip(a.coeffs, a.amps):
        hits = np.flatnonzero(~used & np.all(np.abs(b.amps - row) <= tol, axis=1))
        hits = [j for j in hits if abs(b.coeffs[j] - c) <= tol]
        if not hits:
            return False
        used[hits[0]] = True
    return True


def restrict(s: KetSuperposition, keep: Sequence[int], tol: float = LABEL_TOL) -> KetSuperposition:
    """Drop modes whose label is the same in every term (a product factor).

    Raises StateError if a dropped mode is entangled with the rest; use
    `partial_trace` on the dyad in that case.
    """
    keep = list(keep)
    drop = [m for m in range(s.mode_count) if m not in keep]
    for m in drop:
        col = s.amps[:, m]
        if np.any(np.abs(col - col[0]) > tol):
            raise StateError(f"mode {m} is not a product factor; trace it out instead")
    return KetSuperposition(s.coeffs, s.amps[:, keep])


# --- density operators -------------------------------------------------------


class DyadMixture:
    """Weighted sum of coherent dyads, sum_t c_t |ket_t><bra_t|.

    Both halves of every Hermitian pair are stored explicitly.  A mixture with
    zero modes is a scalar (the result of tracing out everything).
    """

    __slots__ = ("coeffs", "kets", "bras")

    def __init__(self, coeffs, kets, bras):
        coeffs = np.array(coeffs, dtype=complex).reshape(-1)
        kets = np.array(kets, dtype=complex).reshape(coeffs.size, -1)
        bras = np.array(bras, dtype=complex).reshape(coeffs.size, -1)
        if kets.shape != bras.shape:
            raise StateError(f"ket/bra label shapes differ: {kets.shape} vs {bras.shape}")
        self.coeffs = _frozen(coeffs)
        self.kets = _frozen(kets)
        self.bras = _frozen(bras)

    @classmethod
    def pure(cls, s: KetSuperposition) -> "DyadMixture":
        """|s><s| with all n^2 dyads."""
        n = s.n_terms
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        i, j = i.reshape(-1), j.reshape(-1)
        return cls(s.coeffs[i] * s.coeffs[j].conj(), s.amps[i], s.amps[j])

    @property
    def mode_count(self) -> int:
        return self.kets.shape[1]

    @property
    def n_terms(self) -> int:
        return self.coeffs.size

    @property
    def terms(self) -> Iterator[tuple[complex, CoherentLabel, CoherentLabel]]:
        for c, u, v in zip(self.coeffs, self.kets, self.bras):
            yield complex(c), CoherentLabel(tuple(u)), CoherentLabel(tuple(v))

    def __repr__(self) -> str:
        return f"DyadMixture(modes={self.mode_count}, terms={self.n_terms})"

    def __mul__(self, scalar: complex) -> "DyadMixture":
        return DyadMixture(self.coeffs * scalar, self.kets, self.bras)

    __rmul__ = __mul__

    def __add__(self, other: "DyadMixture") -> "DyadMixture":
        if other.mode_count != self.mode_count:
            raise StateError("mode-count mismatch in mixture addition")
        return DyadMixture(
            np.concatenate([self.coeffs, other.coeffs]),
            np.vstack([self.kets, other.kets]),
            np.vstack([self.bras, other.bras]),
        )

    def __sub__(self, other: "DyadMixture") -> "DyadMixture":
        return self + other * -1.0

    def trace(self) -> complex:
        if self.mode_count == 0:
            return complex(self.coeffs.sum())
        nk = np.sum(np.abs(self.kets) ** 2, axis=1)
        nb = np.sum(np.abs(self.bras) ** 2, axis=1)
        ov = np.exp(-0.5 * (nk + nb) + np.sum(self.bras.conj() * self.kets, axis=1))
        return complex(self.coeffs @ ov)

    def tensor(self, other: "DyadMixture") -> "DyadMixture":
        n, k = self.n_terms, other.n_terms
        return DyadMixture(
            np.outer(self.coeffs, other.coeffs).reshape(-1),
            np.hstack([np.repeat(self.kets, k, axis=0), np.tile(other.kets, (n, 1))]),
            np.hstack([np.repeat(self.bras, k, axis=0), np.tile(other.bras, (n, 1))]),
        )

    def map_labels(self, fn) -> "DyadMixture":
        """Apply the same label transformation (array -> array) to kets and bras."""
        return DyadMixture(self.coeffs, fn(self.kets), fn(self.bras))

    def compact(self, tol: float = 1e-12) -> "DyadMixture":
        if self.n_terms == 0:
            return self
        rows = np.hstack([self.kets, self.bras])
        groups = _cluster(rows, tol) if rows.shape[1] else np.zeros(self.n_terms, int)
        n = groups.max() + 1
        coeffs = np.zeros(n, dtype=complex)
        np.add.at(coeffs, groups, self.coeffs)
        first = np.array([np.flatnonzero(groups == g)[0] for g in range(n)])
        mag = np.abs(coeffs)
        keep = (mag > 0) & (mag >= tol * mag.max()) if mag.max() > 0 else mag > 0
        if not keep.any():
            keep[0] = True
        return DyadMixture(coeffs[keep], self.kets[first][keep], self.bras[first][keep])

    def as_dict(self, decimals: int = 9) -> dict:
        """{(ket, bra): coeff} with labels rounded for term-wise comparison."""
        out: dict = {}
        for c, u, v in zip(self.coeffs, self.kets, self.bras):
            key = (
                tuple(np.round(u, decimals) + 0.0),
                tuple(np.round(v, decimals) + 0.0),
            )
            out[key] = out.get(key, 0.0) + complex(c)
        return out


def fidelity(rho: DyadMixture, psi: KetSuperposition, tol: float = 1e-9) -> float:
    """<psi|rho|psi> for normalized psi and unit-trace rho, clamped to [0, 1]."""
    if rho.mode_count != psi.mode_count:
        raise StateError(f"mode-count mismatch: rho has {rho.mode_count}, psi {psi.mode_count}")
    if abs(norm_squared(psi) - 1.0) > tol:
        raise StateError(f"psi is not normalized (norm^2 = {norm_squared(psi):.12g})")
    tr = rho.trace()
    if abs(tr - 1.0) > tol:
        raise StateError(f"rho does not have unit trace (trace = {tr:.12g})")
    left = psi.coeffs.conj() @ gram(psi.amps, rho.kets)
    right = gram(rho.bras, psi.amps) @ psi.coeffs
    val = float(np.real(np.sum(left * rho.coeffs * right)))
    if val < -1e-10 or val > 1 + 1e-10:
        raise StateError(f"fidelity {val} outside [0, 1]; rho is not a valid state")
    return min(max(val, 0.0), 1.0)


def partial_trace(rho: DyadMixture, modes: Iterable[int]) -> DyadMixture:
    """Trace out `modes`: each dyad picks up prod_m <bra_m|ket_m>."""
    modes = sorted(set(modes))
    for m in modes:
        if not 0 <= m < rho.mode_count:
            raise StateError(f"mode {m} out of range for a {rho.mode_count}-mode mixture")
    keep = [m for m in range(rho.mode_count) if m not in modes]
    u = rho.kets[:, modes]
    v = rho.bras[:, modes]
    factor = np.exp(
        np.sum(-0.5 * (np.abs(u) ** 2 + np.abs(v) ** 2) + v.conj() * u, axis=1)
    )
    return DyadMixture(rho.coeffs * factor, rho.kets[:, keep], rho.bras[:, keep]).compact(0.0)


def distinct_labels(rho: DyadMixture, tol: float = LABEL_TOL) -> np.ndarray:
    rows = np.vstack([rho.kets, rho.bras])
    groups = _cluster(rows, tol)
    return np.array([rows[np.flatnonzero(groups == g)[0]] for g in range(groups.max() + 1)])


def _label_index(rows: np.ndarray, basis: np.ndarray, tol: float) -> np.ndarray:
    idx = np.empty(rows.shape[0], dtype=int)
    for i, row in enumerate(rows):
        hits = np.flatnonzero(np.all(np.abs(basis - row) <= tol, axis=1))
        if hits.size == 0:
            raise StateError(f"label {row} is not in the supplied basis")
        idx[i] = hits[0]
    return idx


def to_matrix(
    rho: DyadMixture,
    basis: np.ndarray | None = None,
    pivot_tol: float = GRAM_PIVOT_TOL,
    tol: float = LABEL_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix of `rho` in the orthonormal basis induced by its coherent labels.

    With labels L_k and Gram matrix G = V diag(w) V^H, the Loewdin vectors
    e = L G^{-1/2} are orthonormal and rho becomes G^{1/2} C G^{1/2}, where C
    is the coefficient matrix over label pairs.  Returns (matrix, labels).
    """
    if basis is None:
        basis = distinct_labels(rho, tol)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape[0] > 256:
        raise StateError(f"{basis.shape[0]} distinct labels exceeds the embedding limit of 256")
    g = gram(basis, basis)
    w, v = np.linalg.eigh(g)
    if w.min() <= pivot_tol:
        raise StateError(
            f"Gram matrix numerically singular (min eigenvalue {w.min():.3g}); merge degenerate labels"
        )
    root = (v * np.sqrt(w)) @ v.conj().T
    c = np.zeros((basis.shape[0],) * 2, dtype=complex)
    np.add.at(c, (_label_index(rho.kets, basis, tol), _label_index(rho.bras, basis, tol)), rho.coeffs)
    return root @ c @ root, basis


def spectrum(rho: DyadMixture) -> np.ndarray:
    m, _ = to_matrix(rho)
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def trace_distance(rho: DyadMixture, sigma: DyadMixture) -> float:
    """(1/2) ||rho - sigma||_1 in a common orthonormal embedding."""
    diff = (rho - sigma).compact(0.0)
    basis = distinct_labels(rho + sigma)
    m, _ = to_matrix(diff, basis=basis)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
