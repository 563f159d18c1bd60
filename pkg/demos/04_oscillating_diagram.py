"""
lambda(mu) winding around lambda*
=================================

The singular solution (2 log(1/r))^(1/p) continued past r = e^(-1/2) fixes a
reference value lambda*. Regular solutions cross it again and again as mu
grows, and each new crossing comes with one more intersection with the
singular profile.
"""
import numpy as np

from bubbletower import build_singular_solution, count_lambda_crossings, h4, kaplan_check, trace_diagram

spec = h4(3.0)
sing = build_singular_solution(spec)
print("lambda* =", sing.lambda_star, " zero at R* =", sing.R_bar_star)

diagram = trace_diagram(spec, np.linspace(2.0, 6.0, 17), singular=sing)
for r in diagram.ok_rows:
    side = "+" if r.lam > sing.lambda_star else "-"
    print(f"mu={r.mu:.4f}  lambda={r.lam:.6f} {side}  Z={r.Z}  bubbles={r.bubbles}")

cross = count_lambda_crossings(diagram)
print("crossings of lambda*:", cross.count, [round(m, 4) for m in cross.mus])

# every lambda sits under the bound from the first Dirichlet eigenvalue
kap = kaplan_check(spec, diagram)
print(f"inf f(t)/t = {kap.c:.4f}, bound {kap.bound:.4f}, max lambda {kap.max_lambda:.4f}")
