import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelab import (check_test_object, delta_product_demo, make_kernel_net,
                     make_polynomial_profile)
from conelab.kernels import ProfileError
from conelab.orderfit import ScheduleError, geometric_schedule
from conelab.quadrature import annulus_points


def oracle_radial_moment(profile, order_2j, n=20001):
    """Independent trapezoid oracle for int |z|^{2j} rho(z) dz."""
    r = np.linspace(0.0, profile.radius, n)
    z = np.stack([r, np.zeros_like(r)], -1) if profile.dim == 2 else r[:, None]
    vals = profile.eval(z)
    if profile.dim == 2:
        return 2.0 * np.pi * np.trapezoid(r ** (order_2j + 1) * vals, r)
    return 2.0 * np.trapezoid(r ** order_2j * vals, r)


def test_profile_1d_q2_mass_and_odd_moment(profile_1d):
    assert abs(oracle_radial_moment(profile_1d, 0) - 1.0) < 5e-9
    # odd moments vanish by symmetry: integrate z * rho over the support
    z = np.linspace(-1, 1, 4001)[:, None]
    assert abs(np.trapezoid(z[:, 0] * profile_1d.eval(z), z[:, 0])) < 1e-12


def test_profile_2d_q2_radial_mass_first_moments(profile_q2):
    assert abs(oracle_radial_moment(profile_q2, 0) - 1.0) < 5e-9
    # first moments vanish by radial symmetry
    pts, wts = np.random.default_rng(0).uniform(-1, 1, (4000, 2)), None
    th = np.linspace(0, 2 * np.pi, 721)[:-1]
    ring = 0.37 * np.stack([np.cos(th), np.sin(th)], -1)
    v = profile_q2.eval(ring)
    assert np.ptp(v) < 1e-12  # radially symmetric


def test_profile_2d_q4_vanishing_second_moment(profile_q4):
    # oracle: high-resolution trapezoid, independent of the moment solver
    assert abs(oracle_radial_moment(profile_q4, 2)) < 1e-8
    assert abs(oracle_radial_moment(profile_q4, 0) - 1.0) < 1e-8


def test_profile_rejects_bad_requests():
    with pytest.raises(ProfileError):
        make_polynomial_profile(3, 2)
    with pytest.raises(ProfileError):
        make_polynomial_profile(2, 3)
    with pytest.raises(ProfileError):
        make_polynomial_profile(2, 0)


def test_profile_gradient_hessian_match_finite_differences(profile_q4, rng):
    z = rng.uniform(-0.9, 0.9, (40, 2))
    z = z[np.hypot(z[:, 0], z[:, 1]) < 0.95]
    h = 1e-6
    for c in range(2):
        e = np.zeros(2)
        e[c] = h
        fd = (profile_q4.eval(z + e) - profile_q4.eval(z - e)) / (2 * h)
        assert np.max(np.abs(fd - profile_q4.grad_eval(z)[:, c])) < 1e-6
    for c in range(2):
        for d in range(2):
            e1 = np.zeros(2); e1[c] = h
            e2 = np.zeros(2); e2[d] = h
            fd = (profile_q4.eval(z + e1 + e2) - profile_q4.eval(z + e1 - e2)
                  - profile_q4.eval(z - e1 + e2) + profile_q4.eval(z - e1 - e2)) / (4 * h * h)
            assert np.max(np.abs(fd - profile_q4.hess_eval(z)[:, c, d])) < 2e-4


def test_jet_eval_consistent_with_individual_evaluators(profile_q4, rng):
    z = rng.uniform(-1.2, 1.2, (300, 2))
    val, grad, hess = profile_q4.jet_eval(z, 2)
    assert np.array_equal(val, profile_q4.eval(z))
    assert np.allclose(grad, profile_q4.grad_eval(z), atol=1e-14)
    assert np.allclose(hess, profile_q4.hess_eval(z), atol=1e-14)


def test_kernel_support_scaling(kernel_q2):
    # supp phi_eps(0) inside the closed ball of radius C*eps = 0.1
    eps = 0.1
    x = np.zeros((1, 2))
    th = np.linspace(0, 2 * np.pi, 17)[:-1]
    for fac in (1.0 + 1e-12, 1.3, 5.0):
        y = fac * eps * np.stack([np.cos(th), np.sin(th)], -1)[None]
        assert np.all(kernel_q2.eval(eps, x, y) == 0.0)
    inside = 0.5 * eps * np.stack([np.cos(th), np.sin(th)], -1)[None]
    assert np.all(kernel_q2.eval(eps, x, inside) > 0.0)


def test_shifted_nets_have_disjoint_supports(profile_1d):
    left = make_kernel_net(profile_1d, shift=[-1.0])
    right = make_kernel_net(profile_1d, shift=[+1.0])
    for eps in (0.3, 0.05, 0.007):
        y = np.linspace(-3 * eps, 3 * eps, 1001)[:, None]
        x = np.zeros(1)
        prod = left.eval(eps, x, y) * right.eval(eps, x, y)
        assert np.all(prod == 0.0)


def fd4_central(f, x, h, direction):
    """Fourth-order central difference of f along a coordinate direction."""
    e = np.zeros(2)
    e[direction] = h
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)


def test_kernel_dx_matches_finite_difference(kernel_q2):
    eps = 0.05
    x = np.array([0.02, -0.01])
    y = x + eps * np.array([[0.3, 0.2], [-0.5, 0.1], [0.0, 0.6]])
    h = eps / 100.0
    for c in range(2):
        fd = fd4_central(lambda xx: kernel_q2.eval(eps, xx, y), x, h, c)
        ana = kernel_q2.dx_eval(eps, x, y)[:, c]
        scale = np.max(np.abs(ana))
        assert np.max(np.abs(fd - ana)) < 1e-6 * scale


def test_kernel_dxx_matches_finite_difference(kernel_q2):
    eps = 0.05
    x = np.array([0.0, 0.0])
    y = eps * np.array([[0.25, -0.3], [0.5, 0.4]])
    h = eps / 100.0
    for c in range(2):
        fd = fd4_central(lambda xx: kernel_q2.dx_eval(eps, xx, y)[:, c], x, h, c)
        ana = kernel_q2.dxx_eval(eps, x, y)[:, c, c]
        assert np.max(np.abs(fd - ana)) < 1e-5 * np.max(np.abs(ana))


@settings(max_examples=15, deadline=None)
@given(eps=st.floats(0.01, 0.1), xr=st.floats(0.0, 0.5), ang=st.floats(0.0, 6.28))
def test_unit_mass_property(eps, xr, ang):
    kernel = _MODEL_KERNEL
    x = np.array([[xr * np.cos(ang), xr * np.sin(ang)]])
    from conelab.quadrature import ball_polar_grid
    nodes, wts = ball_polar_grid(x, kernel.support_center(eps, x),
                                 kernel.support_radius(eps), 32, 32)
    mass = np.sum(wts * kernel.eval(eps, x, nodes))
    assert abs(mass - 1.0) < 1e-9


_MODEL_KERNEL = make_kernel_net(make_polynomial_profile(2, 2))
_Q4_KERNEL = make_kernel_net(make_polynomial_profile(2, 4))


@settings(max_examples=10, deadline=None)
@given(c0=st.floats(-2, 2), c1=st.floats(-2, 2), c2=st.floats(-2, 2),
       c3=st.floats(-1, 1), q4=st.booleans())
def test_moment_reproduction_of_low_degree_polynomials(c0, c1, c2, c3, q4):
    # Phi_eps f = f exactly (up to quadrature) for deg f < q
    kernel = _Q4_KERNEL if q4 else _MODEL_KERNEL
    q = kernel.effective_moment_order

    def f(y):
        out = c0 + c1 * y[..., 0] + c2 * y[..., 1]
        if q > 2:
            out = out + c3 * (y[..., 0] ** 2 - 0.5 * y[..., 0] * y[..., 1] + 2 * y[..., 1] ** 2
                              + y[..., 0] ** 2 * y[..., 1])
        return out

    eps = 0.07
    x = np.array([[0.3, -0.2]])
    from conelab.quadrature import ball_polar_grid
    nodes, wts = ball_polar_grid(x, kernel.support_center(eps, x),
                                 kernel.support_radius(eps), 40, 40)
    smoothed = np.sum(wts * f(nodes) * kernel.eval(eps, x, nodes))
    assert abs(smoothed - f(x[0])) < 1e-9 * max(1.0, abs(f(x[0])))


def test_check_test_object_model_q2_all_pass(kernel_q2):
    region = annulus_points(0.2, 0.5, 3, 8)
    reports = check_test_object(kernel_q2, region, geometric_schedule(0.05, 0.7, 8))
    assert {r.condition_id for r in reports} == {
        "support", "unit-mass-limit", "derivative-L1-growth-1",
        "derivative-L1-growth-2", "finite-moment-order"}
    for rep in reports:
        assert rep.pass_, f"{rep.condition_id} failed: {rep.detail}"
    slope1 = next(r for r in reports if r.condition_id == "derivative-L1-growth-1")
    assert abs(slope1.fitted_slope + 1.0) < 0.05
    moment = next(r for r in reports if r.condition_id == "finite-moment-order")
    assert abs(moment.fitted_slope - 2.0) < 0.3


def test_check_test_object_q4_certifies_order_four(kernel_q4):
    region = annulus_points(0.25, 0.45, 2, 6)
    reports = check_test_object(kernel_q4, region, geometric_schedule(0.06, 0.7, 8))
    moment = next(r for r in reports if r.condition_id == "finite-moment-order")
    assert moment.pass_ and abs(moment.fitted_slope - 4.0) < 0.3
    # signed profile: the L1 limit honestly sits above 1
    mass = next(r for r in reports if r.condition_id == "unit-mass-limit")
    assert not mass.pass_
    assert mass.measured[-1][1] > 1.4


def test_check_test_object_overclaimed_order_fails(kernel_q2):
    region = annulus_points(0.25, 0.45, 2, 6)
    reports = check_test_object(kernel_q2, region, geometric_schedule(0.05, 0.7, 8),
                                certify_order=4)
    moment = next(r for r in reports if r.condition_id == "finite-moment-order")
    assert not moment.pass_
    assert moment.fitted_slope < 3.0  # slope report shows the actual order ~2


def test_check_test_object_needs_enough_points(kernel_q2):
    with pytest.raises(ScheduleError):
        check_test_object(kernel_q2, annulus_points(0.2, 0.4), [0.1, 0.07, 0.05])


def test_delta_product_demo(profile_1d):
    schedule = geometric_schedule(0.05, 0.7, 8)
    demo = delta_product_demo(profile_1d, schedule)
    assert demo.cross_all_zero
    assert all(v == 0.0 for v in demo.cross_products)
    # omega == 1: int rho_eps^2 = ||rho||_2^2 / eps exactly (substitution)
    z = np.linspace(-1, 1, 8001)[:, None]
    l2sq = np.trapezoid(profile_1d.eval(z) ** 2, z[:, 0])
    for eps, val in zip(demo.eps, demo.self_products):
        assert abs(val - l2sq / eps) < 1e-6 * l2sq / eps
    assert abs(demo.self_fit.slope + 1.0) < 0.05
    assert demo.self_fit.pass_
