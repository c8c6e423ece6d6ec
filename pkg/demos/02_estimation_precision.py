"""How precise are estimated canonical variables?  The cone picture.

Above the detection cutoff the estimated canonical variable is not
consistent: it lies on a cone around the true one, with squared sine of the
opening angle given in closed form.  The observed spike location lambda_1
over-estimates the true strength rho^2; inverting the spike formula recovers
rho^2, and plugging it into the angle formulas quantifies the cone width.

Run:  python3 demos/02_estimation_precision.py
"""

from hdcca import (
    regime_from_dims,
    rho2_from_z,
    sin2_angles,
    theta_degrees,
    z_from_rho2,
)

regime = regime_from_dims(1000, 1500, 8000)
print(f"tau_K = {regime.tau_K:.3f}, tau_M = {regime.tau_M:.3f}")
print(f"cutoff rho_c^2 = {regime.rho_c_sq:.4f}, edge lambda_+ = {regime.lambda_plus:.4f}")
print()

print("strength -> observed spike -> cone angles")
print(f"{'rho^2':>8} {'z_rho':>8} {'theta_x':>9} {'theta_y':>9}")
for rho_sq in (0.20, 0.30, 0.49, 0.5625, 0.75, 0.9025, 0.99):
    z = z_from_rho2(rho_sq, regime)
    s_x, s_y = sin2_angles(rho_sq, regime)
    print(
        f"{rho_sq:8.4f} {z:8.4f} {theta_degrees(s_x):8.2f}d {theta_degrees(s_y):8.2f}d"
    )
print()
print("note the spike always over-estimates the strength (z_rho > rho^2), and")
print("angles blow up to 90 degrees as the strength approaches the cutoff.")
print()

print("inverting an observed spike (round trip):")
for lam in (0.55, 0.66, 0.80, 0.95):
    rho_sq = rho2_from_z(lam, regime)
    back = z_from_rho2(rho_sq, regime)
    print(f"  lambda_1 = {lam:.4f} -> rho^2 = {rho_sq:.6f} -> back to {back:.6f}")
print()

print("consistency is restored when the sample dimension dominates:")
for scale in (1, 10, 100, 1000):
    big = regime_from_dims(1000, 1500, 8000 * scale)
    s_x, _ = sin2_angles(0.49, big)
    print(
        f"  S = {8000 * scale:>8}: z_rho = {z_from_rho2(0.49, big):.4f}, "
        f"theta_x = {theta_degrees(s_x):5.2f} deg"
    )
