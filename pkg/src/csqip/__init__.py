"""Analytic simulation of coherent-state qubit circuits.

States are finite superpositions of multimode coherent labels, so linear optics
acts on labels and every inner product is a Gram sum.  A truncated Fock-space
oracle (``csqip.fock``) checks the engine independently.
"""

from .coherent import (
    CoherentLabel,
    DyadMixture,
    KetSuperposition,
    StateError,
    compact,
    fidelity,
    inner,
    norm_squared,
    normalize,
    overlap,
    partial_trace,
    spectrum,
    trace_distance,
)
from .measurement import (
    AmbiguousHomodyneError,
    BranchOutcome,
    MeasurementError,
    detect_ideal,
    detect_onoff,
    feed_forward,
    homodyne_sign,
    measure_jointly,
)
from .optics import (
    BeamSplitterSpec,
    LossSpec,
    add_mode,
    beam_splitter,
    loss_channel,
    phase_modulator,
)

__version__ = "0.1.0"
