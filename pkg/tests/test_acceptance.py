"""Acceptance suite: every top-level claim at its stated tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them all).
The convergence studies are shared through the session-scoped ``studies``
fixture, so the expensive runs happen once.
"""

import numpy as np
import pytest

import conelab.association as assoc
from conelab import (conical_metric, delta_product_demo,
                     embed_negligibility_order, geodesic_curvature_circle,
                     identity_transport, jet_from_field,
                     make_polynomial_profile, metric_jet, christoffel, riemann,
                     riemann_components, pullback_commutation_check, rotation_map,
                     scalar_curvature, scaling_map, smooth_test_field,
                     sphere_chart_metric, gauss_bonnet_residual, conical_h)
from conelab.orderfit import geometric_schedule
from conelab.quadrature import annulus_points
from conftest import random_spd_jet_arrays


def _verdict(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# -- 1. conical association ----------------------------------------------------

@pytest.mark.parametrize("alpha", [0.5, 0.8])
def test_criterion_1_conical_association(studies, alpha):
    import time
    t0 = time.time()
    rep = studies(alpha)
    wall = time.time() - t0
    ok = rep.converged and rep.relative_error < 0.02 and wall < 300.0
    _verdict(f"criterion 1 (alpha={alpha})", ok,
             f"limit={rep.limit:.6f} target={rep.target:.6f} "
             f"rel.err={rep.relative_error:.2e} wall={wall:.0f}s")


# -- 2. regularization independence ---------------------------------------------

def test_criterion_2_regularization_independence(studies):
    limits = {}
    for kernel in ("model-q2", "model-q4", "shifted-q2"):
        for transport in ("identity", "perturbed-k3"):
            limits[(kernel, transport)] = studies(0.8, kernel, transport).limit
    vals = np.array(list(limits.values()))
    spread = float(np.max(np.abs(vals[:, None] - vals[None, :]))) / float(np.min(np.abs(vals)))
    target = 4 * np.pi * 0.2
    worst = float(np.max(np.abs(vals - target))) / target
    ok = spread < 0.02 and worst < 0.02
    _verdict("criterion 2 (regularization independence)", ok,
             f"pairwise spread={spread:.2e}, worst vs target={worst:.2e}, "
             f"limits={[f'{v:.5f}' for v in vals]}")


# -- 3. geodesic curvature -------------------------------------------------------

@pytest.mark.parametrize("lam", [0.3, 0.5])
def test_criterion_3_geodesic_curvature(lam):
    alpha = 0.8
    field = conical_metric(alpha)
    total = geodesic_curvature_circle(lambda p: jet_from_field(field, p), lam)
    err = abs(total - 2 * np.pi * alpha)
    _verdict(f"criterion 3 (lam={lam})", err < 1e-8, f"|integral - 2 pi alpha|={err:.2e}")


# -- 4. Gauss-Bonnet closure ------------------------------------------------------

def test_criterion_4_gauss_bonnet_smoothed(studies):
    rep = studies(0.8)
    worst = max(r for r, c in zip(rep.gb_residuals, rep.clamp_series) if not c)
    ok = not any(rep.clamp_series) and worst < 1e-3
    _verdict("criterion 4a (smoothed conical)", ok,
             f"max |GB residual| over schedule = {worst:.2e}")


def test_criterion_4_gauss_bonnet_sphere():
    field = sphere_chart_metric()
    _, _, resid = gauss_bonnet_residual(lambda p: jet_from_field(field, p), 0.7)
    _verdict("criterion 4b (sphere chart)", abs(resid) < 1e-6, f"residual={resid:.2e}")


# -- 5. determinant bounds --------------------------------------------------------

def test_criterion_5_det_bounds():
    cfg = assoc.default_config(0.8)
    rep = assoc.det_bounds_check(cfg, kappa=0.3, disc_radius=0.5)
    ok = rep.pass_ and rep.eps0 > 0
    dmin = min(r[1] for r in rep.rows)
    dmax = max(r[2] for r in rep.rows)
    _verdict("criterion 5 (det bounds)", ok,
             f"eps0={rep.eps0:.3g}, det range [{dmin:.3f}, {dmax:.3f}] "
             f"within [{rep.lower}, {rep.upper}]")


# -- 6. negligibility order --------------------------------------------------------

def test_criterion_6_negligibility_orders(kernel_q2, kernel_q4):
    region = annulus_points(0.2, 0.4, 2, 6)
    field = smooth_test_field()
    rep2 = embed_negligibility_order(field, kernel_q2, identity_transport(), region,
                                     geometric_schedule(0.2, 0.75, 8))
    rep4 = embed_negligibility_order(field, kernel_q4, identity_transport(), region,
                                     geometric_schedule(0.24, 0.78, 8))
    ok = abs(rep2.slope - 2.0) <= 0.3 and abs(rep4.slope - 4.0) <= 0.4
    _verdict("criterion 6 (negligibility)", ok,
             f"q=2 slope={rep2.slope:.3f} (want 2 +- 0.3), "
             f"q=4 slope={rep4.slope:.3f} (want 4 +- 0.4)")


# -- 7 and 8. moderateness and annulus decay ----------------------------------------

@pytest.fixture(scope="module")
def annulus_result():
    return assoc.annulus_decay_check(assoc.default_config(0.8), r0=0.3)


def test_criterion_7_moderateness_near_origin(annulus_result):
    slope = annulus_result.origin_fit.slope
    _verdict("criterion 7 (origin moderateness)", slope >= -2.2,
             f"sup_{{|x|<2Ceps}} |R~| slope={slope:.3f} (want >= -2.2)")


def test_criterion_8_annulus_decay(studies, annulus_result):
    eps_slope = annulus_result.eps_fit.slope
    rad_slope = annulus_result.radial_fit.slope
    rep = studies(0.8)
    inner, outer = rep.i2_inner_series, rep.i2_outer_series
    from conelab.orderfit import fit_loglog_slope
    fit_in = fit_loglog_slope(np.asarray(rep.eps), np.asarray(inner))
    fit_out = fit_loglog_slope(np.asarray(rep.eps), np.asarray(outer))
    ok = (eps_slope >= 1.8 and fit_in.slope > 0 and fit_out.slope > 0
          and inner[-1] < inner[0] and outer[-1] < outer[0])
    _verdict("criterion 8 (annulus decay + remainder)", ok,
             f"eps-slope={eps_slope:.3f} (>=1.8), radial slope={rad_slope:.2f}, "
             f"I2 orders inner={fit_in.slope:.2f} outer={fit_out.slope:.2f}")


# -- 9. Taylor estimate ----------------------------------------------------------

def test_criterion_9_taylor_ratio():
    cfg = assoc.default_config(0.8)
    rep = assoc.taylor_estimate_check(cfg, alpha_idx=(0, 0), rings=(0.3,))
    ok = np.isfinite(rep.max_ratio) and rep.lower_half_spread < 2.0
    _verdict("criterion 9 (Taylor ratio)", ok,
             f"max ratio={rep.max_ratio:.3f}, lower-half spread={rep.lower_half_spread:.2f}")


# -- 10. pullback commutation ------------------------------------------------------

def test_criterion_10_pullback_commutation(kernel_q2):
    pts = annulus_points(0.25, 0.4, 2, 4)
    worst = 0.0
    for mu in (rotation_map(np.pi / 4), scaling_map(2.0)):
        worst = max(worst, pullback_commutation_check(
            mu, conical_h(), kernel_q2, identity_transport(), 0.05, pts))
    _verdict("criterion 10 (pullback commutation)", worst < 1e-8,
             f"max discrepancy={worst:.2e}")


# -- 11. curvature engine oracles ---------------------------------------------------

def test_criterion_11_curvature_oracles(rng):
    jet = metric_jet(np.eye(2), np.zeros((2, 2, 2)), np.zeros((2, 2, 2, 2)))
    res = riemann(jet, christoffel(jet))
    euclid_zero = res.scalar == 0.0 and res.r1212 == 0.0

    field = conical_metric(0.8)
    pts = rng.uniform(-0.8, 0.8, (60, 2))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 0.05]
    conical_dev = float(np.max(np.abs(scalar_curvature(jet_from_field(field, pts)))))

    sp = sphere_chart_metric()
    sphere_dev = float(np.max(np.abs(
        scalar_curvature(jet_from_field(sp, rng.uniform(-1, 1, (40, 2)))) - 2.0)))

    g, dg, ddg = random_spd_jet_arrays(rng, 100)
    r = riemann_components(metric_jet(g, dg, ddg), christoffel(metric_jet(g, dg, ddg)))
    sym_dev = max(float(np.max(np.abs(r + np.einsum('...iklm->...kilm', r)))),
                  float(np.max(np.abs(r + np.einsum('...iklm->...ikml', r)))),
                  float(np.max(np.abs(r - np.einsum('...iklm->...lmik', r)))))

    ok = euclid_zero and conical_dev < 1e-10 and sphere_dev < 1e-8 and sym_dev < 1e-10
    _verdict("criterion 11 (curvature oracles)", ok,
             f"euclid exact={euclid_zero}, conical={conical_dev:.1e}, "
             f"sphere={sphere_dev:.1e}, symmetries={sym_dev:.1e}")


# -- 12. delta-product demo ----------------------------------------------------------

def test_criterion_12_delta_product():
    demo = delta_product_demo(make_polynomial_profile(1, 2),
                              geometric_schedule(0.05, 0.7, 8))
    ok = demo.cross_all_zero and abs(demo.self_fit.slope + 1.0) <= 0.05
    _verdict("criterion 12 (delta products)", ok,
             f"cross all zero={demo.cross_all_zero}, "
             f"self slope={demo.self_fit.slope:.4f} (want -1 +- 0.05)")
