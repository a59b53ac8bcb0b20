"""Smoothing tensor fields and measuring approximation orders.

Smoothing pairs a field with a kernel net and a transport net.  On smooth
fields the smoothed family converges back to the field at the kernel's
moment order q; an order-k transport perturbation caps the rate at k.  These
measured slopes are the package's stand-in for the negligibility classes of
the underlying theory.
"""

import numpy as np

from conelab import (embed_negligibility_order, identity_transport,
                     make_kernel_net, make_polynomial_profile,
                     perturbed_transport, smooth_test_field, smoothed_jet_batch)
from conelab.orderfit import geometric_schedule
from conelab.quadrature import annulus_points

field = smooth_test_field()
k2 = make_kernel_net(make_polynomial_profile(2, 2))
k4 = make_kernel_net(make_polynomial_profile(2, 4))
region = annulus_points(0.2, 0.4, 2, 6)

print("=== smoothed jets reproduce smooth data ===")
jet = smoothed_jet_batch(field, k2, identity_transport(), 0.05,
                         np.array([[0.3, -0.1]]))
exact = field.eval(np.array([[0.3, -0.1]]))[0]
print(f"|g~ - g| at one point, eps=0.05: {np.max(np.abs(jet.g[0] - exact)):.3e}")

print()
print("=== negligibility orders: sup |smoothed - exact| ~ eps^min(q, k) ===")
runs = [
    ("q=2 kernel, identity transport", k2, identity_transport(), geometric_schedule(0.2, 0.75, 8)),
    ("q=4 kernel, identity transport", k4, identity_transport(), geometric_schedule(0.24, 0.78, 8)),
    ("q=2 kernel, order-1 perturbed transport",
     k2, perturbed_transport(np.array([[0.3, 0.1], [-0.2, 0.25]]), 1),
     geometric_schedule(0.2, 0.75, 8)),
]
for label, kernel, transport, schedule in runs:
    rep = embed_negligibility_order(field, kernel, transport, region, schedule)
    print(f"  {label:44s} slope={rep.slope:5.3f}  claimed={rep.claimed_order:g}  "
          f"pass={rep.pass_}")
