"""
Shooting against the exponential nonlinearity
=============================================

For f(u) = e^u on the unit disc every radial solution is known in closed
form, so lambda(mu) = 8b/(1+b)^2 with b = e^(mu/2) - 1. Shooting in
log-radius should land on it, and the Green identities should hold along
the way.
"""
import math

import numpy as np

from bubbletower import gelfand_oracle, identity_residuals, pohozaev_check, shoot_first_zero, to_unit_disc, unit_h

spec = unit_h(1.0)
for mu in (0.5, 1.0, 2 * math.log(2), 3.0, 6.0):
    shot = shoot_first_zero(spec, mu)
    exact = gelfand_oracle(mu)
    print(f"mu={mu:7.4f}  lambda={shot.lambda_of_mu:.12f}  exact={exact:.12f}  rel err={abs(shot.lambda_of_mu / exact - 1):.1e}")

# the curve turns once, at mu = 2 log 2 where lambda = 2
mus = np.linspace(0.2, 5, 49)
lam = [shoot_first_zero(spec, m).lambda_of_mu for m in mus]
i = int(np.argmax(lam))
print("grid maximum:", mus[i], lam[i])

# identities on the rescaled solution
unit = to_unit_disc(shoot_first_zero(spec, 2.0))
res0 = max(abs(identity_residuals(unit, i, i)[0]) for i in range(unit.s.size))
print("worst -u_s - A:", res0)
print("Pohozaev balance at r = 1:", pohozaev_check(unit))
