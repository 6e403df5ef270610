"""Heralded tripartite resource: four cats, a splitter network and two on/off detectors."""

from csqip.circuit import run_circuit
from csqip.corpus import load_circuit
from csqip.experiments.generators import tripartite_generator

rep = run_circuit(load_circuit("fig3_tripartite"), {"alpha": 2.0})
for b in rep.branches:
    tag = "discarded" if b.failed else "kept"
    print(f"{b.outcomes}  p = {b.probability:.12f}  ({tag})")
print(f"success probability {rep.p_success:.10f}")

res = tripartite_generator(2.0)
print(f"fidelity of the corrected output with the target: {res.fidelity():.15f}")
