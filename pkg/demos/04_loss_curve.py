"""Generator success probability under photon loss, compared with exp[-4 a^2 (1 - eta)] / 2."""

from csqip.experiments.loss import eta_grid, success_sweep, success_threshold

grid = eta_grid(0.85, 1.0, 0.05)
for alpha in (2.0, 3.0, 4.0):
    for row in success_sweep(alpha, grid):
        print(f"alpha={alpha:g} eta={row.eta:.2f}  p={row.p_success:.6f}  closed form={row.delta_over_2:.6f}")
print(f"eta needed for p >= 1/4 at alpha=2: {success_threshold(2.0):.6f}")
