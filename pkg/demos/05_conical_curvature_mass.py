"""The main experiment: distributional curvature of the cone.

The conical metric is flat away from its apex, yet carries curvature: pairing
the scalar curvature of the smoothed metrics with a test function w against
the smoothed volume element converges, as the smoothing scale vanishes, to

    4 pi (1 - alpha) w(0)

- the point mass at the apex.  Two independent routes agree: the direct disc
integral and the Gauss-Bonnet boundary route 2 (2 pi - int kappa ds).
"""

import conelab.association as assoc
from conelab.orderfit import geometric_schedule

alpha = 0.8
cfg = assoc.default_config(alpha, schedule=geometric_schedule(0.08, 0.7, 8))
print(f"alpha = {alpha}, target = 4 pi (1 - alpha) = {cfg.target:.6f}")
print(f"kernel = {cfg.kernel_id}, transport = {cfg.transport_id}, "
      f"disc radius lam = {cfg.lam}")
print()

report = assoc.convergence_study(cfg)
print(f"{'eps':>10s} {'I(eps)':>12s} {'I1 (boundary)':>14s} {'GB residual':>12s} "
      f"{'I2 bound':>10s}")
for i, eps in enumerate(report.eps):
    i2 = report.i2_inner_series[i] + report.i2_outer_series[i]
    print(f"{eps:10.5f} {report.integrals[i]:12.6f} {report.i1_series[i]:14.6f} "
          f"{report.gb_residuals[i]:12.2e} {i2:10.4f}")

print()
print(f"extrapolated limit: {report.limit:.6f}")
print(f"target:             {report.target:.6f}")
print(f"relative error:     {report.relative_error:.2e}")
print(f"converged:          {report.converged}")
print()
print("The remainder bound I2 -> 0 guarantees the localization at the apex;")
print("the Gauss-Bonnet residual certifies the numerics per eps.")
