"""Mollifier profiles and kernel nets.

Build unit-radius profiles (polynomial in |z|^2 times the standard bump),
check their moments, scale them into kernel nets and run the admissibility
diagnostics: support law, unit-mass limit, derivative growth, moment order.
"""

import numpy as np

from conelab import (check_test_object, make_kernel_net, make_polynomial_profile)
from conelab.orderfit import geometric_schedule
from conelab.quadrature import annulus_points

print("=== profiles ===")
p2 = make_polynomial_profile(2, 2)
p4 = make_polynomial_profile(2, 4)
for p in (p2, p4):
    print(f"q={p.moment_order}: coeffs={np.round(p.coeffs, 6)}, "
          f"mass={p.radial_moment(0):.12f}, "
          f"second moment={p.radial_moment(2):+.2e}, "
          f"L1 norm={p.l1_norm():.6f}")
print("The q=4 profile must change sign to kill the second moment,")
print("so its L1 norm sits above 1; the q=2 profile is nonnegative.")

print()
print("=== kernel nets ===")
k2 = make_kernel_net(p2)
ks = make_kernel_net(p2, shift=[0.5, 0.0])
for k in (k2, ks):
    print(f"{k.kernel_id}: support constant C={k.support_constant}, "
          f"effective moment order={k.effective_moment_order}")

print()
print("=== admissibility diagnostics (model q=2 kernel) ===")
region = annulus_points(0.2, 0.5, 3, 8)
schedule = geometric_schedule(0.05, 0.7, 8)
for rep in check_test_object(k2, region, schedule):
    slope = "" if not np.isfinite(rep.fitted_slope) else f" slope={rep.fitted_slope:+.3f}"
    print(f"  {rep.condition_id:28s} pass={rep.pass_}{slope}")
    print(f"      {rep.detail}")

print()
print("Asking the q=2 kernel to certify order 4 fails with the true slope:")
rep = [r for r in check_test_object(k2, region, schedule, certify_order=4)
       if r.condition_id == "finite-moment-order"][0]
print(f"  finite-moment-order(4): pass={rep.pass_}, measured slope={rep.fitted_slope:.3f}")
