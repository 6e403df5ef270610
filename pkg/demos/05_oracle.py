"""Cross-check the analytic engine against a truncated Fock-space simulation."""

from csqip.validation import agreement_suite

cases = agreement_suite(cutoff=40, alpha=2.0, n_random=20, seed=3)
for c in cases[:5]:
    print(f"{c.name:14s} deficit {c.deficit:.2e}")
print(f"{len(cases)} cases, worst deficit {max(c.deficit for c in cases):.2e}, all ok: {all(c.ok for c in cases)}")
