"""Pointwise semi-Riemannian computations on 2-D metric jets.

A jet bundles the metric, its first and second coordinate derivatives, the
determinant and a guarded inverse at one point (or a batch of points; all
functions treat leading axes as batch axes).  The guarded inverse replaces
``1/det`` by a smooth total function that equals the true reciprocal
wherever the determinant is safely above a floor, so curvature formulas
never divide by values near zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._smoothfn import smoothstep
from .quadrature import circle_points, disc_polar_grid


class JetError(ValueError):
    """Raised for inconsistent metric-jet inputs."""


def safe_inverse_det(det_value, floor):
    """Guarded reciprocal of the metric determinant.

    Returns ``(s, clamp_active)``.  For ``det >= floor`` the result is the
    exact reciprocal and the clamp is inactive; below ``floor/2`` the result
    is the neutral value 1; in between the two branches are blended with a
    fixed C-infinity transition.  Total function: no poles, no branches that
    raise.
    """
    if floor <= 0:
        raise JetError("determinant floor must be positive")
    det_value = np.asarray(det_value, dtype=float)
    t = det_value / floor
    chi = smoothstep(2.0 * t - 1.0)
    safe = np.where(det_value > floor / 4.0, det_value, 1.0)  # keep the division finite
    s = np.where(t >= 1.0, 1.0 / safe, chi / safe + (1.0 - chi))
    clamp = t < 1.0
    if np.ndim(det_value) == 0:
        return float(s), bool(clamp)
    return s, clamp


@dataclass(frozen=True)
class MetricJet:
    """Metric with derivatives at a point; leading axes are batch axes.

    Index conventions: ``dg[..., c, a, b] = d_c g_ab`` and
    ``ddg[..., c, d, a, b] = d_c d_d g_ab``.  ``inv`` is the cofactor inverse
    scaled by the guarded reciprocal ``inv_det``.
    """

    g: np.ndarray
    dg: np.ndarray | None
    ddg: np.ndarray | None
    det: np.ndarray
    inv: np.ndarray
    inv_det: np.ndarray
    clamp_active: np.ndarray


def metric_jet(g, dg=None, ddg=None, det_floor=1e-9):
    """Assemble a :class:`MetricJet`, validating shapes and symmetry."""
    g = np.asarray(g, dtype=float)
    if g.shape[-2:] != (2, 2):
        raise JetError("metric must have trailing shape (2, 2)")
    if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-12):
        raise JetError("metric must be symmetric")
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    s, clamp = safe_inverse_det(det, det_floor)
    cof = np.empty_like(g)
    cof[..., 0, 0] = g[..., 1, 1]
    cof[..., 1, 1] = g[..., 0, 0]
    cof[..., 0, 1] = -g[..., 0, 1]
    cof[..., 1, 0] = -g[..., 1, 0]
    inv = np.asarray(s)[..., None, None] * cof
    return MetricJet(g, None if dg is None else np.asarray(dg, dtype=float),
                     None if ddg is None else np.asarray(ddg, dtype=float),
                     det, inv, np.asarray(s), np.asarray(clamp))


def christoffel(jet):
    """Christoffel symbols ``Gamma[..., i, k, l]`` from a first-order jet."""
    if jet.dg is None:
        raise JetError("jet carries no first derivatives")
    dg = jet.dg
    # Gamma^i_kl = 1/2 g^im (g_mk,l + g_ml,k - g_kl,m)
    bracket = (np.einsum('...lmk->...mkl', dg)
               + np.einsum('...kml->...mkl', dg)
               - dg)
    return 0.5 * np.einsum('...im,...mkl->...ikl', jet.inv, bracket)


@dataclass(frozen=True)
class CurvatureResult:
    gamma: np.ndarray
    r1212: np.ndarray
    scalar: np.ndarray


def riemann_components(jet, gamma):
    """Full lowered curvature tensor ``R[..., i, k, l, m]``."""
    if jet.ddg is None:
        raise JetError("jet carries no second derivatives")
    ddg = jet.ddg
    # R_iklm = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il)
    #          + g_np (Gam^n_kl Gam^p_im - Gam^n_km Gam^p_il)
    quad = 0.5 * (np.einsum('...klim->...iklm', ddg)
                  + np.einsum('...imkl->...iklm', ddg)
                  - np.einsum('...kmil->...iklm', ddg)
                  - np.einsum('...ilkm->...iklm', ddg))
    gg = np.einsum('...np,...nkl,...pim->...iklm', jet.g, gamma, gamma)
    gg -= np.einsum('...np,...nkm,...pil->...iklm', jet.g, gamma, gamma)
    return quad + gg


def riemann(jet, gamma):
    """Curvature of a second-order jet; ``scalar = 2 * r1212 * inv_det``."""
    r = riemann_components(jet, gamma)
    r1212 = r[..., 0, 1, 0, 1]
    return CurvatureResult(gamma, r1212, 2.0 * jet.inv_det * r1212)


def scalar_curvature(jet):
    return riemann(jet, christoffel(jet)).scalar


def jet_from_field(field, points, det_floor=1e-9):
    """Exact :class:`MetricJet` batch from a field with analytic derivatives."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    g = field.eval(points)
    dg = field.d1(points) if field.d1 is not None else None
    ddg = field.d2(points) if field.d2 is not None else None
    return metric_jet(g, dg, ddg, det_floor)


def geodesic_curvature_circle(jet_provider, lam, angular_nodes=64):
    """``int_{|x| = lam} kappa_g ds`` for the coordinate circle.

    ``jet_provider`` maps an (n, 2) array of points to a batched
    :class:`MetricJet` with first derivatives.  The tangent is the
    g-normalized velocity of the circle, the normal is the g-unit vector
    completing it to a coordinate-oriented frame (it points inward for the
    counterclockwise circle, the orientation under which a Euclidean circle
    has total geodesic curvature +2 pi), and the arc element comes from g.
    The angular rule is the periodic trapezoid, spectrally accurate.
    """
    if lam <= 0:
        raise JetError("circle radius must be positive")
    n = int(angular_nodes)
    th = 2.0 * np.pi * np.arange(n) / n
    pts = circle_points(lam, n)
    jet = jet_provider(pts)
    if jet.dg is None:
        raise JetError("geodesic curvature needs first-order jets")
    g = jet.g
    gamma = christoffel(jet)
    cp = lam * np.stack([-np.sin(th), np.cos(th)], -1)
    cpp = -lam * np.stack([np.cos(th), np.sin(th)], -1)
    speed_sq = np.einsum('...a,...ab,...b->...', cp, g, cp)
    if not (np.all(np.isfinite(speed_sq)) and np.all(speed_sq > 0)
            and np.all(jet.det > 0)):
        raise JetError("metric jet is singular on the circle")
    speed = np.sqrt(speed_sq)
    tangent = cp / speed[..., None]
    dg_along = np.einsum('...cab,...c->...ab', jet.dg, cp)
    speed_dot = (np.einsum('...a,...ab,...b->...', cpp, g, cp)
                 + 0.5 * np.einsum('...a,...ab,...b->...', cp, dg_along, cp)) / speed
    dtangent = cpp / speed[..., None] - cp * (speed_dot / speed ** 2)[..., None]
    cov = dtangent + np.einsum('...ijk,...j,...k->...i', gamma, cp, tangent)
    normal = np.stack([-tangent[..., 1], tangent[..., 0]], -1)
    normal = normal - np.einsum('...a,...ab,...b->...', tangent, g, normal)[..., None] * tangent
    normal = normal / np.sqrt(np.einsum('...a,...ab,...b->...', normal, g, normal))[..., None]
    orient = np.sign(tangent[..., 0] * normal[..., 1] - tangent[..., 1] * normal[..., 0])
    normal = normal * orient[..., None]
    kappa = np.einsum('...a,...ab,...b->...', cov, g, normal) / speed
    return float(np.sum(kappa * speed) * 2.0 * np.pi / n)


def gauss_bonnet_residual(jet_provider, lam, radial_nodes=40, angular_nodes=32,
                          radial_breakpoints=None):
    """``int_B K dV + int_dB kappa ds - 2 pi`` for the disc of radius lam.

    ``jet_provider`` must return second-order jets.  Returns the triple
    (area term, boundary term, residual).
    """
    if radial_breakpoints is None:
        radial_breakpoints = np.array([0.0, 0.5 * lam, lam])
    pts, wts = disc_polar_grid(radial_breakpoints, radial_nodes, angular_nodes)
    jet = jet_provider(pts)
    scal = scalar_curvature(jet)
    area = float(np.sum(wts * 0.5 * scal * np.sqrt(np.abs(jet.det))))
    boundary = geodesic_curvature_circle(jet_provider, lam, max(64, angular_nodes))
    return area, boundary, area + boundary - 2.0 * np.pi
