"""Two delta nets, same distributional limit, very different products.

The nets rho_eps(y) = phi((y + eps)/eps)/eps and its mirror both converge to
the delta distribution, but their supports are disjoint for every eps: the
pointwise product vanishes identically, while the self-product diverges like
1/eps.  Nets of smooth functions carry more information than the
distributions they represent; products must be formed before taking limits.
"""

from conelab import delta_product_demo, make_polynomial_profile
from conelab.orderfit import geometric_schedule

profile = make_polynomial_profile(1, 2)
demo = delta_product_demo(profile, geometric_schedule(0.05, 0.7, 9))

print(f"{'eps':>12s} {'int rho rho~ w':>18s} {'int rho^2 w':>14s}")
for eps, cross, self_ in zip(demo.eps, demo.cross_products, demo.self_products):
    print(f"{eps:12.6f} {cross:18.6e} {self_:14.4f}")

print()
print(f"cross products identically zero: {demo.cross_all_zero}")
print(f"self-product divergence: fitted slope {demo.self_fit.slope:+.4f} "
      f"(the 1-D delta-squared rate is exactly -1)")
