"""Non-local XOR: Alice holds K, Bob holds R, Charlie learns K xor R from the joint record."""

from csqip.experiments.qubit import qubit_reference_protocol
from csqip.experiments.xor import optical_xor_protocol

for K in (0, 1):
    for R in (0, 1):
        res = optical_xor_protocol(2.0, K, R)
        rows = ", ".join(f"{b.bits}:{b.probability:.4f}" for b in res.branches)
        ref = qubit_reference_protocol(K, R)
        print(f"K={K} R={R}  optical {rows}  qubit {sorted(ref)}  A^B^C = {sorted(set(res.xor_teleported))}")
