"""Smoothing-kernel nets: compactly supported mollifier families.

A kernel net is the scaled family ``phi_eps(x)(y) = eps^{-n} rho((y - x)/eps
- shift)`` built from a unit-radius profile ``rho``.  Profiles are
polynomials in ``|z|^2`` times the standard bump, with the polynomial solved
so that the integral is 1 and all moments below a requested order vanish.
The admissibility diagnostics certify, per scheduled eps, the support law,
the L1 limits, the derivative growth rates and the finite moment order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._smoothfn import bump, bump_d1, bump_d2, bump_jet
from .orderfit import OrderFitReport, ScheduleError, fit_loglog_slope, order_report
from .quadrature import ball_polar_grid, gauss_legendre_panel


class ProfileError(ValueError):
    """Raised for invalid mollifier-profile requests."""


def _polyval(coeffs, u):
    out = np.zeros_like(u)
    for c in coeffs[::-1]:
        out = out * u + c
    return out


def _polyder(coeffs):
    return np.array([i * c for i, c in enumerate(coeffs)][1:] or [0.0])


@dataclass(frozen=True)
class MollifierProfile:
    """Unit-support mollifier profile ``rho(z) = p(|z|^2) bump(|z|^2)``.

    ``coeffs`` are the ascending coefficients of the polynomial ``p``.  The
    profile integrates to 1 and its moments of order 1 .. moment_order-1
    vanish (odd ones by symmetry, even ones by construction of ``p``).
    """

    dim: int
    moment_order: int
    coeffs: np.ndarray
    radius: float = 1.0

    def eval(self, z):
        """Profile value at points ``z`` of shape (..., dim)."""
        u = np.sum(np.square(z), axis=-1) / self.radius ** 2
        return _polyval(self.coeffs, u) * bump(u)

    def _g1(self, u):
        # derivative of p(u) bump(u)
        d = _polyder(self.coeffs)
        return _polyval(d, u) * bump(u) + _polyval(self.coeffs, u) * bump_d1(u)

    def _g2(self, u):
        d = _polyder(self.coeffs)
        dd = _polyder(d)
        return (_polyval(dd, u) * bump(u) + 2.0 * _polyval(d, u) * bump_d1(u)
                + _polyval(self.coeffs, u) * bump_d2(u))

    def grad_eval(self, z):
        """Gradient of the profile, shape (..., dim)."""
        u = np.sum(np.square(z), axis=-1) / self.radius ** 2
        return (2.0 / self.radius ** 2) * self._g1(u)[..., None] * z

    def hess_eval(self, z):
        """Hessian of the profile, shape (..., dim, dim)."""
        u = np.sum(np.square(z), axis=-1) / self.radius ** 2
        eye = np.eye(self.dim)
        s2 = self.radius ** 2
        return (4.0 / s2 ** 2) * self._g2(u)[..., None, None] * z[..., :, None] * z[..., None, :] \
            + (2.0 / s2) * self._g1(u)[..., None, None] * eye

    def jet_eval(self, z, max_deriv=2):
        """(value, gradient, hessian) sharing one bump evaluation.

        Equivalent to (eval, grad_eval, hess_eval) but several times faster
        on large node batches; entries beyond ``max_deriv`` are None.
        """
        u = np.sum(np.square(z), axis=-1) / self.radius ** 2
        b0, b1, b2 = bump_jet(u, max_deriv)
        p0 = _polyval(self.coeffs, u)
        val = p0 * b0
        if max_deriv == 0:
            return val, None, None
        d = _polyder(self.coeffs)
        p1 = _polyval(d, u)
        g1 = p1 * b0 + p0 * b1
        s2 = self.radius ** 2
        grad = (2.0 / s2) * g1[..., None] * z
        if max_deriv == 1:
            return val, grad, None
        p2 = _polyval(_polyder(d), u)
        g2 = p2 * b0 + 2.0 * p1 * b1 + p0 * b2
        hess = (4.0 / s2 ** 2) * g2[..., None, None] * z[..., :, None] * z[..., None, :] \
            + (2.0 / s2) * g1[..., None, None] * np.eye(self.dim)
        return val, grad, hess

    def radial_sign_breaks(self):
        """Radii in (0, radius) where the profile changes sign."""
        if len(self.coeffs) < 2:
            return []
        roots = np.roots(np.asarray(self.coeffs)[::-1])
        out = [float(np.sqrt(r.real)) * self.radius for r in roots
               if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0]
        return sorted(out)

    def radial_moment(self, order_2j, nodes=200):
        """``int |z|^{2j} rho(z) dz`` over R^dim by panelled Gauss-Legendre."""
        return _radial_integral(self, lambda p: p, order_2j, nodes)

    def l1_norm(self, nodes=200):
        """``int |rho|``; panels split at the sign breaks so GL stays smooth."""
        return _radial_integral(self, np.abs, 0, nodes)


def _radial_integral(profile, transform, order_2j, nodes):
    breaks = [0.0] + profile.radial_sign_breaks() + [profile.radius]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        r, w = gauss_legendre_panel(a, b, nodes)
        u = (r / profile.radius) ** 2
        vals = transform(_polyval(profile.coeffs, u) * bump(u))
        if profile.dim == 2:
            total += 2.0 * np.pi * np.sum(w * r ** (order_2j + 1) * vals)
        else:
            total += 2.0 * np.sum(w * r ** order_2j * vals)
    return float(total)


def make_polynomial_profile(dim, q, quad_nodes=200):
    """Solve the moment system for a profile of vanishing-moment order ``q``.

    The polynomial degree in ``u = |z|^2`` is ``q/2 - 1``; the linear system
    forces ``int rho = 1`` and ``int |z|^{2j} rho = 0`` for ``j < q/2``.  Odd
    moments vanish by symmetry, so the profile reproduces all polynomials of
    degree below ``q``.
    """
    if dim not in (1, 2):
        raise ProfileError("dim must be 1 or 2")
    if q < 2 or q % 2 != 0:
        raise ProfileError("moment order q must be an even integer >= 2")
    n = q // 2
    base = MollifierProfile(dim, 2, np.array([1.0]))
    moments = np.empty(2 * n)
    for j in range(2 * n):
        moments[j] = base.radial_moment(2 * j, nodes=quad_nodes)
    system = np.array([[moments[i + j] for i in range(n)] for j in range(n)])
    rhs = np.zeros(n)
    rhs[0] = 1.0
    # Hankel matrix of bump moments; positive definite for this basis.
    assert np.linalg.cond(system) < 1e12, "moment system unexpectedly singular"
    coeffs = np.linalg.solve(system, rhs)
    return MollifierProfile(dim, q, coeffs)


@dataclass(frozen=True)
class SmoothingKernelNet:
    """Scaled kernel family ``phi_eps(x)(y) = eps^{-n} rho((y-x)/eps - shift)``.

    ``support_constant`` is the C with ``supp phi_eps(x) <= B_{C eps}(x)``;
    the actual support is the ball of radius ``radius * eps`` around
    ``x + eps * shift``.
    """

    profile: MollifierProfile
    center_shift: np.ndarray
    support_constant: float
    kernel_id: str = "model"

    @property
    def dim(self):
        return self.profile.dim

    @property
    def effective_moment_order(self):
        """Order of polynomial reproduction: the profile's q, or 1 if shifted."""
        return self.profile.moment_order if np.allclose(self.center_shift, 0.0) else 1

    def support_center(self, eps, x):
        return np.asarray(x, dtype=float) + eps * self.center_shift

    def support_radius(self, eps):
        return self.profile.radius * eps

    def _z(self, eps, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim < y.ndim:
            x = x[..., None, :]
        return (y - x) / eps - self.center_shift

    def eval(self, eps, x, y):
        """Kernel value phi_eps(x)(y); broadcasts x against leading axes of y."""
        return self.profile.eval(self._z(eps, x, y)) / eps ** self.dim

    def dx_eval(self, eps, x, y):
        """Gradient in the base point x, shape (..., dim)."""
        return -self.profile.grad_eval(self._z(eps, x, y)) / eps ** (self.dim + 1)

    def dxx_eval(self, eps, x, y):
        """Hessian in the base point x, shape (..., dim, dim)."""
        return self.profile.hess_eval(self._z(eps, x, y)) / eps ** (self.dim + 2)

    def eval_jets(self, eps, x, y, max_deriv=2):
        """(phi, dx phi, dxx phi) in one pass over the nodes."""
        val, grad, hess = self.profile.jet_eval(self._z(eps, x, y), max_deriv)
        n = self.dim
        return (val / eps ** n,
                None if grad is None else -grad / eps ** (n + 1),
                None if hess is None else hess / eps ** (n + 2))


def make_kernel_net(profile, shift=0.0, kernel_id=None):
    """Model (shift 0) or shifted kernel net from a profile."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.size == 1 and profile.dim > 1:
        shift = np.repeat(shift, profile.dim)
    if shift.shape != (profile.dim,):
        raise ProfileError(f"shift must have {profile.dim} components")
    if not np.all(np.isfinite(shift)):
        raise ProfileError("shift must be finite")
    c = profile.radius + float(np.linalg.norm(shift))
    if kernel_id is None:
        kernel_id = f"model-q{profile.moment_order}" if not shift.any() \
            else f"shifted-q{profile.moment_order}"
    return SmoothingKernelNet(profile, shift, c, kernel_id)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of one admissibility condition over an eps schedule."""

    condition_id: str
    measured: list = field(repr=False)  # list of (eps, value)
    fitted_slope: float
    pass_: bool
    tolerance_used: float
    detail: str = ""

    def rows(self):
        for eps, value in self.measured:
            yield (self.condition_id, eps, value, self.fitted_slope, self.pass_)


def _validate_schedule(schedule):
    schedule = np.asarray(schedule, dtype=float)
    if schedule.ndim != 1 or schedule.size < 4:
        raise ScheduleError("schedule needs at least 4 points to fit slopes")
    if np.any(np.diff(schedule) >= 0) or np.any(schedule <= 0):
        raise ScheduleError("schedule must be positive and strictly decreasing")
    return schedule


def _l1_on_support(net, eps, x, fn, nr=48, nt=32):
    """Integral of |fn| over the support ball at (eps, x), fn from the net."""
    centers = np.atleast_2d(x)
    nodes, wts = ball_polar_grid(centers, net.support_center(eps, centers),
                                 net.support_radius(eps), nr, nt)
    vals = np.abs(fn(eps, centers, nodes))
    return np.max(np.sum(wts * vals, axis=-1))


def check_test_object(net, region, schedule, max_deriv=2, certify_order=None):
    """Admissibility reports for a kernel net over a sampled compact region.

    Conditions, in report order:

    - ``support``: the kernel is exactly 0 outside ``B_{C eps}(x)``.
    - ``unit-mass-limit``: ``sup_x int |phi_eps(x)|`` stays within 1e-6 of 1
      (signed higher-order profiles honestly fail this; their L1 limit is
      recorded in the measurements).
    - ``derivative-L1-growth``: ``sup_x || d^a_x phi_eps(x) ||_L1`` fits a
      slope of at least ``-|a| - 0.2`` for ``|a| <= max_deriv``.
    - ``finite-moment-order``: smoothing the monomial ``y1^q`` reproduces it
      up to a term of fitted order at least ``q - 0.3``, where q is the net's
      effective moment order (or ``certify_order``, to probe a claimed order
      the net may not have).
    """
    schedule = _validate_schedule(schedule)
    region = np.atleast_2d(np.asarray(region, dtype=float))
    sample = region[:: max(1, len(region) // 8)]
    reports = []

    # support exactness
    sup_vals = []
    for eps in schedule:
        c = net.support_center(eps, sample)
        r = net.support_radius(eps)
        worst = 0.0
        for fac in (1.0 + 1e-9, 1.5, 3.0):
            for ang in (0.0, 1.1, 2.9, 4.4):
                direction = np.array([np.cos(ang), np.sin(ang)])[: net.dim]
                pts = c + fac * r * direction
                worst = max(worst, float(np.max(np.abs(net.eval(eps, sample, pts[:, None, :])))))
        sup_vals.append(worst)
    reports.append(AdmissibilityReport(
        "support", list(zip(schedule.tolist(), sup_vals)), float("nan"),
        all(v == 0.0 for v in sup_vals), 0.0,
        detail="kernel values sampled outside B_{C eps}(x); must vanish exactly"))

    # unit-mass limit
    masses = [_l1_on_support(net, eps, sample, net.eval) for eps in schedule]
    tol_mass = 1e-6
    reports.append(AdmissibilityReport(
        "unit-mass-limit", list(zip(schedule.tolist(), masses)), float("nan"),
        abs(masses[-1] - 1.0) <= tol_mass, tol_mass,
        detail="sup_x of the kernel L1 norm; limit must be 1"))

    # derivative L1 growth
    for order in range(1, max_deriv + 1):
        if order == 1:
            fn = lambda e, xs, ys: np.linalg.norm(net.dx_eval(e, xs, ys), axis=-1)
        else:
            fn = lambda e, xs, ys: np.linalg.norm(
                net.dxx_eval(e, xs, ys).reshape(ys.shape[:-1] + (-1,)), axis=-1)
        vals = [_l1_on_support(net, eps, sample, fn) for eps in schedule]
        fit = fit_loglog_slope(schedule, vals)
        reports.append(AdmissibilityReport(
            f"derivative-L1-growth-{order}", list(zip(schedule.tolist(), vals)),
            fit.slope, fit.slope >= -order - 0.2 and fit.reliable, 0.2,
            detail=f"L1 norm of order-{order} x-derivatives; slope >= -{order} - 0.2"))

    # finite moment order, certified with the degree-q monomial
    q = net.effective_moment_order if certify_order is None else int(certify_order)
    errs = []
    for eps in schedule:
        centers = sample
        nodes, wts = ball_polar_grid(centers, net.support_center(eps, centers),
                                     net.support_radius(eps), 48, 32)
        smoothed = np.sum(wts * nodes[..., 0] ** q * net.eval(eps, centers, nodes), axis=-1)
        errs.append(float(np.max(np.abs(smoothed - centers[:, 0] ** q))))
    rep = order_report(f"finite-moment-order-{q}", schedule, errs, q, 0.3,
                       zero_floor=1e-13)
    reports.append(AdmissibilityReport(
        f"finite-moment-order", rep.samples, rep.slope, rep.pass_, 0.3,
        detail=f"smoothing error on the degree-{q} monomial; slope >= {q} - 0.3"))
    return reports


@dataclass(frozen=True)
class DemoReport:
    """Per-eps table for the disjoint-support delta-net demonstration."""

    eps: list
    cross_products: list      # int rho_eps rho~_eps omega dx, exactly 0
    self_products: list       # int rho_eps^2 omega dx, diverges like 1/eps
    self_fit: OrderFitReport
    cross_all_zero: bool


def delta_product_demo(profile, schedule, omega=None):
    """The two shifted delta nets with disjoint supports, and their products.

    ``rho_eps(y) = phi((y + eps)/eps)/eps`` lives on [-2 eps, 0] and its
    mirror on [0, 2 eps]; the pointwise product vanishes identically while
    each one squared integrates to ``~ omega(0) ||rho||^2 / eps``.
    """
    if profile.dim != 1:
        raise ProfileError("delta_product_demo needs a 1-D profile")
    if profile.radius > 1.0:
        raise ProfileError("profile radius must be <= 1 so shifted supports are disjoint")
    schedule = _validate_schedule(schedule)
    if omega is None:
        omega = lambda y: np.ones_like(y)
    left = make_kernel_net(profile, shift=[-1.0])
    right = make_kernel_net(profile, shift=[+1.0])
    cross, self_ = [], []
    for eps in schedule:
        y, w = gauss_legendre_panel(-2.0 * eps, 2.0 * eps, 192)
        y2 = y[:, None]
        x0 = np.zeros((1,))
        lv = left.eval(eps, x0, y2)
        rv = right.eval(eps, x0, y2)
        cross.append(float(np.sum(w * lv * rv * omega(y))))
        self_.append(float(np.sum(w * lv * lv * omega(y))))
    fit = order_report("self-product-divergence", schedule, self_, -1.0, 0.05,
                       direction="==")
    return DemoReport(schedule.tolist(), cross, self_, fit,
                      all(v == 0.0 for v in cross))
