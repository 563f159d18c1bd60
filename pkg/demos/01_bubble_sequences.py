"""
Bubble sequences (delta_k, a_k)
===============================

Each bubble of a supercritical tower is labelled by a height ratio delta_k
and a strength a_k. They come from a two-term recurrence; this walk-through
builds the table, checks the energy identity and looks at both limits in p.
"""
import numpy as np

from bubbletower import compute_hat_recurrence, compute_recurrence, limit_convergence_report

# p = 3 has a closed form for the first ratio: (sqrt 3 - 1) / 2
table = compute_recurrence(3.0, 64)
print("k   delta_k        a_k          beta_k*")
for k in range(6):
    r = table[k]
    print(f"{k:<3d} {r.delta:.10f} {r.a:.10f} {r.beta_star:.6f}")
print("closed form delta_1:", (np.sqrt(3.0) - 1.0) / 2.0)

# the identity delta_k^(p-1) sum E_i = 2 + a_k holds row by row
print("worst identity defect:", table.identity_residuals().max())

# a_k decays like 1/k: the bubbles get weaker but never stop
a = table.column("a")
print("a_10, a_30, a_64:", a[10], a[30], a[64])

# large p: delta_k^(p-1) and a_k settle onto the hat sequences
hat = compute_hat_recurrence(4)
print("c_hat_1, a_hat_1:", hat[1].c_hat, hat[1].a_hat)
rep = limit_convergence_report(1, [2.05, 2.5, 4.0, 10.0, 50.0])
for p, ak, dp in zip(rep.p, rep.a, rep.delta_pow):
    print(f"p={p:6.2f}  a_1={ak:.6f}  delta_1^(p-1)={dp:.6f}")
# near p = 2 the first strength climbs back toward 2 and delta_1 collapses
