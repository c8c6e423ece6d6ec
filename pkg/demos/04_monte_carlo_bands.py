"""Monte Carlo: do measured angles track the closed-form limits?

Replicates synthetic draws at desk scale, measures the angle between the
true and estimated canonical variables on each draw, and compares the sample
mean and an empirical 95% band with the limiting prediction.

Run:  python3 demos/04_monte_carlo_bands.py        (~15 s)
"""

import numpy as np

from hdcca import SimSpec, mc_angles, theta_degrees

REPS = 30

print("one signal, sweep of strengths, K=100 M=150 S=800:")
print(f"{'rho^2':>7} {'theory':>8} {'mean':>8} {'95% band':>18}")
for rho_sq in (0.3, 0.49, 0.7, 0.9):
    spec = SimSpec(
        K=100, M=150, S=800, signal_strengths=(np.sqrt(rho_sq),), seed=0
    )
    s = mc_angles(spec, REPS)
    theory = theta_degrees(s.theory[0].s_x)
    print(
        f"{rho_sq:7.2f} {theory:7.2f}d {s.mean_theta_x[0]:7.2f}d"
        f"   [{s.band_x[0, 0]:6.2f}, {s.band_x[1, 0]:6.2f}]"
    )
print()

print("three signals at once (r = 0.95, 0.75, 0.7), K=200 M=300 S=1600:")
spec = SimSpec(K=200, M=300, S=1600, signal_strengths=(0.95, 0.75, 0.7), seed=1)
s = mc_angles(spec, REPS)
for q, pred in enumerate(s.theory):
    print(
        f"  signal {q + 1} (rho^2={pred.rho_sq:.4f}): "
        f"theta_x theory {theta_degrees(pred.s_x):6.2f}d, "
        f"mean {s.mean_theta_x[q]:6.2f}d;  "
        f"theta_y theory {theta_degrees(pred.s_y):6.2f}d, "
        f"mean {s.mean_theta_y[q]:6.2f}d"
    )
print()
print("weaker signals sit on wider cones, in the predicted order.  signals 2")
print("and 3 are close (spike gap ~0.045), so at this sample size the two")
print("occasionally swap ranks within a replication, nudging their measured")
print("means a few degrees above theory; the effect shrinks as S grows.")
