"""
A bubble tower at p = 3
=======================

With f(u) = h(u) e^(u^3) and the power-law h, the scaled density
phi = p lambda r^2 u^(p-1) f(u) shows one peak per bubble. At mu = 6 the
first two bubbles are already close to their predicted heights.
"""
from bubbletower import UBeta, compute_recurrence, count_intersections, detect_bubbles, h4
from bubbletower import oscillation_report, shoot_first_zero, to_unit_disc

spec = h4(3.0)
table = compute_recurrence(3.0)
shot = shoot_first_zero(spec, 6.0)
print("lambda(6) =", shot.lambda_of_mu)
print("inner scale starts near s =", shot.solution.s[0])

bubbles = detect_bubbles(shot, table)
for b in bubbles:
    t = b.targets
    line = f"bubble {b.k}: s={b.s_k:9.3f}  u/mu={b.ratio:.4f}  phi={b.phi_k:.4f}"
    if "phi" in t:
        line += f"  (targets {t['ratio'].target:.4f}, {t['phi'].target:.4f})"
    if not b.in_asymptotic_range:
        line += "  [u below tau0: blended part of f]"
    print(line)
# the last peak sits next to r = 1 where u < tau0; f is the polynomial blend
# there, so it is a boundary layer rather than a member of the tower

# u^p / log(1/r) sits near 2 at each peak and dips to beta_k* in between
for row in oscillation_report(shot, table, bubbles):
    valley = "-" if row.valley_beta is None else f"{row.valley_beta.value:.3f} vs {row.valley_beta.target:.3f}"
    print(f"k={row.k}: top {row.top_beta.value:.3f}, valley {valley}")

# a curve between beta_0* and 2 is crossed at least three times
unit = to_unit_disc(shot)
rep = count_intersections(unit, UBeta(1.5, 3.0), (unit.s[0], -1e-9))
print("crossings of U_1.5:", rep.count, [round(z, 3) for z in rep.zeros])
