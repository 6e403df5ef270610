"""Access to the bundled circuit files."""

from __future__ import annotations

from importlib import resources

from .circuit import Circuit, parse_circuit

NAMES = ("fig2_ghz", "fig3_tripartite", "fig4_xor", "fig5_lossy")


def circuit_text(name: str) -> str:
    name = name.removesuffix(".qc")
    path = resources.files("csqip") / "circuits" / f"{name}.qc"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled circuit named {name!r} (have {', '.join(NAMES)})")
    return path.read_text(encoding="utf-8")


def load_circuit(name: str) -> Circuit:
    return parse_circuit(circuit_text(name))
