"""Analytic execution of a parsed circuit as a full measurement-branch tree."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from ..coherent import DyadMixture, KetSuperposition, StateError, partial_trace
from ..measurement import (
    CLICK,
    LabelMeasurement,
    MeasurementError,
    detect_onoff,
    measure_jointly,
)
from ..optics import BeamSplitterSpec, LossSpec, beam_splitter, loss_channel, phase_modulator
from .parser import BS, PM, Circuit, Detect, Element, FailWhen, Homodyne, Input, Loss, OnClick

PROB_DIGITS = 12


class ExecutionError(StateError):
    pass


@dataclass(frozen=True)
class EnvMode:
    index: int
    source: int  # circuit mode whose loss created it


@dataclass
class Branch:
    outcomes: dict[str, str]
    probability: float
    state: KetSuperposition
    failed: bool = False
    measured: dict[str, int] = field(default_factory=dict)  # detector -> mode

    @property
    def path(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.outcomes.items()) or "<root>"


@dataclass
class RunReport:
    branches: list[Branch]
    mode_count: int
    env: list[EnvMode]

    @property
    def p_success(self) -> float:
        return float(sum(b.probability for b in self.branches if not b.failed))

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))

    @property
    def env_modes(self) -> list[int]:
        return [e.index for e in self.env]

    def find(self, **outcomes: str) -> Branch:
        hits = [b for b in self.branches if all(b.outcomes.get(k) == v for k, v in outcomes.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} branches match {outcomes}")
        return hits[0]

    def reduced_state(self, branch: Branch, keep) -> DyadMixture:
        """Density operator of `branch` on the modes `keep` (everything else traced out)."""
        keep = list(keep)
        rho = DyadMixture.pure(branch.state)
        traced = [m for m in range(branch.state.mode_count) if m not in keep]
        reduced = partial_trace(rho, traced)
        # partial_trace keeps surviving modes in ascending order; honour `keep`'s order
        order = [sorted(keep).index(m) for m in keep]
        return DyadMixture(reduced.coeffs, reduced.kets[:, order], reduced.bras[:, order])

    def to_dict(self) -> dict:
        return {
            "branches": [
                {
                    "outcomes": dict(b.outcomes),
                    "prob": _sig(b.probability),
                    "failed": b.failed,
                }
                for b in self.branches
            ],
            "p_success": _sig(self.p_success),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _sig(p: float) -> float:
    return float(f"{p:.{PROB_DIGITS}g}")


def _resolve_params(c: Circuit, overrides: Mapping[str, float] | None) -> dict[str, float]:
    params = c.param_defaults
    for name, value in (overrides or {}).items():
        if name not in params:
            raise ExecutionError(f"unknown parameter {name!r} (circuit declares {sorted(params)})")
        params[name] = float(value)
    return params


def initial_state(c: Circuit, params: Mapping[str, float]) -> KetSuperposition:
    by_mode: dict[int, Input] = {i.mode: i for i in c.inputs}
    state = None
    for m in range(c.mode_count):
        inp = by_mode.get(m)
        if inp is None:
            part = KetSuperposition.coherent(0.0)
        elif inp.kind == "coherent":
            re_, im = (v.resolve(params) for v in inp.values)
            part = KetSuperposition.coherent(complex(re_, im))
        else:
            part = KetSuperposition.cat(inp.values[0].resolve(params), inp.parity)
        state = part if state is None else state.tensor(part)
    return state


def schedule(elements: tuple[Element, ...]) -> list[Element]:
    """Move placed losses: `input` ones to the front, `output` ones before the first measurement.

    Unplaced losses act where they are written.  Relative order within each group is kept.
    """
    front = [e for e in elements if isinstance(e, Loss) and e.placement == "input"]
    late = [e for e in elements if isinstance(e, Loss) and e.placement == "output"]
    rest = [e for e in elements if not (isinstance(e, Loss) and e.placement)]
    first_meas = next((i for i, e in enumerate(rest) if isinstance(e, (Detect, Homodyne))), len(rest))
    return front + rest[:first_meas] + late + rest[first_meas:]


def _bounded(x: float, what: str) -> float:
    if not 0.0 <= x <= 1.0:
        raise ExecutionError(f"{what} {x:g} outside [0, 1]")
    return x


def _measure(b: Branch, group: list[Detect | Homodyne]) -> list[Branch]:
    """Measure a group of simultaneous detectors on one branch.

    Exact on/off projectors act first, one after another (they commute with each
    other and with label readouts); the label-based detectors are then
    partitioned jointly.
    """
    parts = [(dict(b.outcomes), b.probability, b.state)]
    for el in group:
        if isinstance(el, Detect) and el.model == "exact":
            nxt = []
            for outcomes, p, state in parts:
                for res in detect_onoff(state, el.mode, el.detector):
                    if not res.is_null:
                        nxt.append(({**outcomes, **res.outcome}, p * res.probability, res.post_state))
            parts = nxt
    labels = [
        LabelMeasurement(el.mode, el.detector, "homodyne" if isinstance(el, Homodyne) else "ideal")
        for el in group
        if not (isinstance(el, Detect) and el.model == "exact")
    ]
    if labels:
        nxt = []
        for outcomes, p, state in parts:
            for res in measure_jointly(state, labels).values():
                if not res.is_null:
                    nxt.append(({**outcomes, **res.outcome}, p * res.probability, res.post_state))
        parts = nxt
    measured = {**b.measured, **{el.detector: el.mode for el in group}}
    # keep outcome keys in written order
    names = list(b.outcomes) + [el.detector for el in group]
    return [
        Branch({k: outcomes[k] for k in names}, p, state, measured=measured)
        for outcomes, p, state in parts
    ]


def _grouped(elements: list[Element]) -> list[Element | list]:
    """Collapse runs of consecutive Detect/Homodyne elements into lists."""
    out: list = []
    for el in elements:
        if isinstance(el, (Detect, Homodyne)):
            if out and isinstance(out[-1], list):
                out[-1].append(el)
            else:
                out.append([el])
        else:
            out.append(el)
    return out


def run_circuit(c: Circuit, params: Mapping[str, float] | None = None) -> RunReport:
    """Evaluate every joint measurement outcome exactly (no sampling)."""
    values = _resolve_params(c, params)
    live = [Branch({}, 1.0, initial_state(c, values))]
    done: list[Branch] = []
    env: list[EnvMode] = []
    n_modes = c.mode_count

    for el in _grouped(schedule(c.elements)):
        if isinstance(el, Loss):
            spec = LossSpec(el.mode, _bounded(el.eta.resolve(values), "eta"), el.placement or "input")
            env.append(EnvMode(n_modes, el.mode))
            n_modes += 1
            for b in live:
                b.state = loss_channel(b.state, spec)
        elif isinstance(el, BS):
            r = _bounded(el.r.resolve(values), "amplitude reflectivity")
            spec = BeamSplitterSpec.from_reflectivity(el.mode_a, el.mode_b, r)
            for b in live:
                b.state = beam_splitter(b.state, spec)
        elif isinstance(el, PM):
            theta = el.theta.resolve(values)
            for b in live:
                b.state = phase_modulator(b.state, el.mode, theta)
        elif isinstance(el, OnClick):
            theta = el.theta.resolve(values)
            for b in live:
                if b.outcomes.get(el.detector) == el.symbol:
                    b.state = phase_modulator(b.state, el.mode, theta)
        elif isinstance(el, list):
            nxt = []
            for b in live:
                try:
                    nxt.extend(_measure(b, el))
                except MeasurementError as exc:
                    raise ExecutionError(f"branch [{b.path}]: {exc}") from exc
            live = nxt
        elif isinstance(el, FailWhen):
            still = []
            for b in live:
                if b.outcomes.get(el.detector_a) == CLICK and b.outcomes.get(el.detector_b) == CLICK:
                    b.failed = True
                    done.append(b)
                else:
                    still.append(b)
            live = still
        else:  # pragma: no cover - parser guarantees the element types
            raise ExecutionError(f"unsupported element {el!r}")

    # report in depth-first order of the outcome tree, independent of halting order
    order = {k: i for i, k in enumerate(("vac", "click", "plus", "minus"))}
    branches = sorted(done + live, key=lambda b: [order[v] for v in b.outcomes.values()])
    total = sum(b.probability for b in branches)
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise ExecutionError(f"branch probabilities sum to {total:.12g}, not 1")
    return RunReport(branches, c.mode_count, env)


def with_loss_placement(c: Circuit, placement: str | None) -> Circuit:
    """Copy of `c` with every loss element moved to `placement`."""
    elements = tuple(replace(e, placement=placement) if isinstance(e, Loss) else e for e in c.elements)
    return replace(c, elements=elements)

