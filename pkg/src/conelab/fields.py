"""Tensor fields on the chart, the smoothing integral and its jets.

The smoothing of a locally integrable symmetric (0,2) field ``f`` by a
kernel net and a transport net is

    g~_ab(x) = int f_ij(y) A(y,x)^i_a A(y,x)^j_b phi_eps(x)(y) dy

and its x-derivatives are obtained by differentiating the kernel and the
transport inside the integral (never the field, which may be singular).
Everything here is vectorized over batches of evaluation points; the
quadrature grids adapt to the kernel support ball and, near a singular
point of the field, recentre the polar layout on the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ._smoothfn import bump, bump_d1
from .geometry import MetricJet, metric_jet
from .orderfit import order_report
from .quadrature import QuadratureError, QuadratureSpec, ball_polar_grid, tensor_gauss_grid
from .transport import TensorTransport, TransportNet, tensor_action

#: max allowed deviation of the quadrature unit-mass self check
MASS_CHECK_TOL = 1e-4


class FieldError(ValueError):
    """Raised for invalid tensor-field constructions."""


@dataclass(frozen=True)
class TensorField:
    """Symmetric (0,2) tensor field on the chart, smooth off singular points.

    ``eval`` maps points (..., 2) to matrices (..., 2, 2).  ``d1``/``d2``
    are optional analytic derivatives with the jet index conventions
    ``d1[..., c, a, b] = d_c f_ab`` and ``d2[..., c, d, a, b]``.
    """

    name: str
    eval: callable
    d1: callable | None = None
    d2: callable | None = None
    singular_points: tuple = ()
    homogeneity_degree: int | None = None


def conical_h():
    """The direction-dependent part of the conical metric (degree-0 homogeneous).

    ``h(x) = [[x1^2 - x2^2, 2 x1 x2], [2 x1 x2, x2^2 - x1^2]] / |x|^2``; its
    eigenvalues are +-1 everywhere and it has no radial dependence.
    """

    def ev(x):
        u, v = x[..., 0], x[..., 1]
        s = u * u + v * v
        out = np.empty(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = (u * u - v * v) / s
        out[..., 0, 1] = 2.0 * u * v / s
        out[..., 1, 0] = out[..., 0, 1]
        out[..., 1, 1] = -out[..., 0, 0]
        return out

    def d1(x):
        u, v = x[..., 0], x[..., 1]
        s2 = (u * u + v * v) ** 2
        d = np.empty(x.shape[:-1] + (2, 2, 2))
        d[..., 0, 0, 0] = 4.0 * u * v * v / s2
        d[..., 1, 0, 0] = -4.0 * u * u * v / s2
        d[..., 0, 0, 1] = 2.0 * v * (v * v - u * u) / s2
        d[..., 1, 0, 1] = 2.0 * u * (u * u - v * v) / s2
        d[..., :, 1, 0] = d[..., :, 0, 1]
        d[..., :, 1, 1] = -d[..., :, 0, 0]
        return d

    def d2(x):
        u, v = x[..., 0], x[..., 1]
        s = u * u + v * v
        s3 = s ** 3
        dd = np.empty(x.shape[:-1] + (2, 2, 2, 2))
        dd[..., 0, 0, 0, 0] = 4.0 * v * v * (s - 4.0 * u * u) / s3
        dd[..., 0, 1, 0, 0] = 8.0 * u * v * (u * u - v * v) / s3
        dd[..., 1, 0, 0, 0] = dd[..., 0, 1, 0, 0]
        dd[..., 1, 1, 0, 0] = -4.0 * u * u * (s - 4.0 * v * v) / s3
        dd[..., 0, 0, 0, 1] = -4.0 * u * v * (3.0 * v * v - u * u) / s3
        dd[..., 0, 1, 0, 1] = 2.0 * (6.0 * u * u * v * v - u ** 4 - v ** 4) / s3
        dd[..., 1, 0, 0, 1] = dd[..., 0, 1, 0, 1]
        dd[..., 1, 1, 0, 1] = -4.0 * u * v * (3.0 * u * u - v * v) / s3
        dd[..., :, :, 1, 0] = dd[..., :, :, 0, 1]
        dd[..., :, :, 1, 1] = -dd[..., :, :, 0, 0]
        return dd

    return TensorField("conical-h", ev, d1, d2, singular_points=((0.0, 0.0),),
                       homogeneity_degree=0)


def conical_metric(alpha):
    """Euclidean-coordinate conical metric ``(1+a^2)/2 I + (1-a^2)/2 h``.

    Flat off the origin with eigenvalues {1, alpha^2}; alpha = 1 is the
    Euclidean plane.
    """
    if not 0.0 < alpha <= 1.0:
        raise FieldError("alpha must lie in (0, 1]")
    h = conical_h()
    c0 = 0.5 * (1.0 + alpha ** 2)
    c1 = 0.5 * (1.0 - alpha ** 2)

    def ev(x):
        return c0 * np.eye(2) + c1 * h.eval(x)

    def d1(x):
        return c1 * h.d1(x)

    def d2(x):
        return c1 * h.d2(x)

    return TensorField(f"conical-alpha{alpha:g}", ev, d1, d2,
                       singular_points=((0.0, 0.0),))


def constant_field(matrix, name="constant"):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (2, 2) or not np.allclose(matrix, matrix.T):
        raise FieldError("constant field needs a symmetric 2x2 matrix")

    def ev(x):
        return np.broadcast_to(matrix, x.shape[:-1] + (2, 2))

    def d1(x):
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    def d2(x):
        return np.zeros(x.shape[:-1] + (2, 2, 2, 2))

    return TensorField(name, ev, d1, d2)


def smooth_test_field(base=((1.0, 0.2), (0.2, 1.5)), amplitude=((0.4, 0.1), (0.1, -0.3)),
                      wave=(2.0, 1.0), phase=0.4):
    """Everywhere-smooth field ``base + sin(wave . x + phase) amplitude``."""
    base = np.asarray(base, dtype=float)
    amp = np.asarray(amplitude, dtype=float)
    wave = np.asarray(wave, dtype=float)
    if not (np.allclose(base, base.T) and np.allclose(amp, amp.T)):
        raise FieldError("base and amplitude must be symmetric")

    def u(x):
        return x @ wave + phase

    def ev(x):
        return base + np.sin(u(x))[..., None, None] * amp

    def d1(x):
        return np.cos(u(x))[..., None, None, None] * np.multiply.outer(wave, amp)

    def d2(x):
        return -np.sin(u(x))[..., None, None, None, None] * np.multiply.outer(np.outer(wave, wave), amp)

    return TensorField("smooth-test", ev, d1, d2)


FIELD_KINDS = ("conical", "constant", "smooth-test")


def named_field(kind, alpha=0.8, constant=((1.0, 0.0), (0.0, 1.0))):
    """Field registry used by configuration files."""
    if kind == "conical":
        return conical_metric(alpha)
    if kind == "constant":
        return constant_field(np.asarray(constant, dtype=float))
    if kind == "smooth-test":
        return smooth_test_field()
    raise FieldError(f"unknown field kind {kind!r}; choose from {FIELD_KINDS}")


def sphere_chart_metric():
    """Stereographic round-sphere metric ``4/(1+|x|^2)^2 I`` (scalar curvature 2)."""

    def ev(x):
        s = np.sum(np.square(x), axis=-1)
        return (4.0 / (1.0 + s) ** 2)[..., None, None] * np.eye(2)

    def d1(x):
        s = np.sum(np.square(x), axis=-1)
        df = -16.0 * x / ((1.0 + s) ** 3)[..., None]
        return df[..., :, None, None] * np.eye(2)

    def d2(x):
        s = np.sum(np.square(x), axis=-1)
        ddf = (-16.0 * np.eye(2) / ((1.0 + s) ** 3)[..., None, None]
               + 96.0 * x[..., :, None] * x[..., None, :] / ((1.0 + s) ** 4)[..., None, None])
        return ddf[..., :, :, None, None] * np.eye(2)

    return TensorField("sphere-chart", ev, d1, d2)


@dataclass(frozen=True)
class ScalarTestFunction:
    """Compactly supported radial test function with analytic gradient."""

    support_radius: float
    height: float = 1.0

    def eval(self, x):
        u = np.sum(np.square(x), axis=-1) / self.support_radius ** 2
        return self.height * np.e * bump(u)

    def grad(self, x):
        u = np.sum(np.square(x), axis=-1) / self.support_radius ** 2
        return (self.height * np.e * bump_d1(u))[..., None] * (2.0 * x / self.support_radius ** 2)

    @property
    def value_at_zero(self):
        return self.height

    def sup_grad_norm(self, r_min=0.0, r_max=None, samples=4000):
        return _radial_sup_grad(self, r_min, r_max, samples)


@dataclass(frozen=True)
class FlatTopTestFunction:
    """Test function equal to 1 on ``B_{flat_radius}``, 0 outside ``B_{support_radius}``."""

    flat_radius: float
    support_radius: float

    def _arg(self, r):
        return (self.support_radius - r) / (self.support_radius - self.flat_radius)

    def eval(self, x):
        from ._smoothfn import smoothstep
        r = np.sqrt(np.sum(np.square(x), axis=-1))
        return smoothstep(self._arg(r))

    def grad(self, x):
        from ._smoothfn import smoothstep_d1
        r = np.sqrt(np.sum(np.square(x), axis=-1))
        mag = -smoothstep_d1(self._arg(r)) / (self.support_radius - self.flat_radius)
        safe_r = np.where(r > 1e-300, r, 1.0)
        return (mag / safe_r)[..., None] * x

    @property
    def value_at_zero(self):
        return 1.0

    def sup_grad_norm(self, r_min=0.0, r_max=None, samples=4000):
        return _radial_sup_grad(self, r_min, r_max, samples)


def _radial_sup_grad(fn, r_min, r_max, samples):
    hi = fn.support_radius if r_max is None else min(r_max, fn.support_radius)
    r = np.linspace(r_min, hi * (1 - 1e-12), samples)
    pts = np.stack([r, np.zeros_like(r)], -1)
    return float(np.max(np.linalg.norm(fn.grad(pts), axis=-1)))


def bump_test_function(support_radius, height=1.0):
    """Radial bump with value ``height`` at the origin, support ``B_radius``."""
    if support_radius <= 0:
        raise FieldError("support radius must be positive")
    return ScalarTestFunction(float(support_radius), float(height))


def flat_top_test_function(flat_radius, support_radius):
    """Test function constant near the origin (vanishing gradient there)."""
    if not 0 < flat_radius < support_radius:
        raise FieldError("need 0 < flat_radius < support_radius")
    return FlatTopTestFunction(float(flat_radius), float(support_radius))


# ---------------------------------------------------------------------------
# the smoothing integral
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothedJetRequest:
    """Single-point smoothing request (see :func:`smooth_jet`)."""

    field: TensorField
    transport: TensorTransport
    kernel: object
    eps: float
    point: np.ndarray
    max_deriv: int = 2
    quadrature: QuadratureSpec = dc_field(default_factory=QuadratureSpec)
    det_floor: float = 1e-9


def smooth_jet(req):
    """Smoothed metric jet at one point; see :func:`smoothed_jet_batch`."""
    return smoothed_jet_batch(req.field, req.kernel, req.transport, req.eps,
                              np.atleast_2d(np.asarray(req.point, dtype=float)),
                              max_deriv=req.max_deriv, quad=req.quadrature,
                              det_floor=req.det_floor)


def smoothed_jet_batch(field, kernel, transport, eps, points, max_deriv=2,
                       quad=None, det_floor=1e-9, self_check=True):
    """Smoothed jets ``(g~, dg~, ddg~)`` at a batch of points, as a MetricJet.

    Parameters
    ----------
    field : TensorField
    kernel : SmoothingKernelNet or pushforward wrapper
        Must expose ``eval``/``support_center``/``support_radius`` and, for
        ``max_deriv >= 1``, ``dx_eval``/``dxx_eval``.
    transport : TensorTransport or TransportNet
    eps : float
    points : (m, 2) array
    max_deriv : 0, 1 or 2
        How many x-derivative levels to assemble.
    quad : QuadratureSpec
    self_check : bool
        Verify the quadrature reproduces the kernel's unit mass to 1e-4
        (raises :class:`QuadratureError` otherwise).

    Notes
    -----
    The x-derivatives act on the kernel and on the second slot of the
    transport only; the field is never differentiated, so singular fields
    are handled as long as they stay locally integrable.
    """
    if isinstance(transport, TransportNet):
        transport = tensor_action(transport)
    if quad is None:
        quad = QuadratureSpec()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]
    if max_deriv not in (0, 1, 2):
        raise FieldError("max_deriv must be 0, 1 or 2")

    g = np.empty((m, 2, 2))
    dg = np.empty((m, 2, 2, 2)) if max_deriv >= 1 else None
    ddg = np.empty((m, 2, 2, 2, 2)) if max_deriv >= 2 else None

    n_per_point = 2 * quad.radial_nodes * quad.angular_nodes
    chunk = max(1, 400_000 // n_per_point)
    for lo in range(0, m, chunk):
        sl = slice(lo, min(lo + chunk, m))
        res = _jet_chunk(field, kernel, transport, eps, points[sl], max_deriv, quad, self_check)
        g[sl] = res[0]
        if max_deriv >= 1:
            dg[sl] = res[1]
        if max_deriv >= 2:
            ddg[sl] = res[2]
    return metric_jet(g, dg, ddg, det_floor)


def _grid_for(field, kernel, eps, pts, quad):
    """Quadrature nodes/weights over the kernel support balls at ``pts``."""
    centers = kernel.support_center(eps, pts)
    radius = kernel.support_radius(eps)
    if quad.scheme == "tensor-gauss":
        nodes = np.empty((pts.shape[0], quad.radial_nodes ** 2, 2))
        wts = np.empty((pts.shape[0], quad.radial_nodes ** 2))
        for i, c in enumerate(centers):
            nodes[i], wts[i] = tensor_gauss_grid(c - radius, c + radius, quad.radial_nodes)
        return nodes, wts
    polar_centers = pts
    if quad.scheme in ("auto", "polar-centered-at-origin") and field.singular_points:
        sing = np.asarray(field.singular_points, dtype=float)
        d2 = np.sum((centers[:, None, :] - sing[None, :, :]) ** 2, axis=-1)
        nearest = sing[np.argmin(d2, axis=1)]
        near = np.sqrt(np.min(d2, axis=1)) <= quad.origin_threshold * (radius + np.linalg.norm(centers - pts, axis=-1))
        if quad.scheme == "polar-centered-at-origin":
            near = np.ones(pts.shape[0], dtype=bool)
        polar_centers = np.where(near[:, None], nearest, pts)
    return ball_polar_grid(polar_centers, centers, radius, quad.radial_nodes, quad.angular_nodes)


def _jet_chunk(field, kernel, transport, eps, pts, max_deriv, quad, self_check):
    k = pts.shape[0]
    nodes, w = _grid_for(field, kernel, eps, pts, quad)
    if hasattr(kernel, "eval_jets"):
        phi, dphi, ddphi = kernel.eval_jets(eps, pts, nodes, max_deriv)
    else:
        phi = kernel.eval(eps, pts, nodes)
        dphi = kernel.dx_eval(eps, pts, nodes) if max_deriv >= 1 else None
        ddphi = kernel.dxx_eval(eps, pts, nodes) if max_deriv >= 2 else None
    if self_check:
        mass = np.sum(w * phi, axis=-1)
        dev = float(np.max(np.abs(mass - 1.0)))
        if dev > MASS_CHECK_TOL:
            raise QuadratureError(
                f"quadrature too coarse: kernel mass off by {dev:.2e} (> {MASS_CHECK_TOL})")
    h = field.eval(nodes)
    const_w = transport.constant_action_matrix(eps)

    rows = [phi]
    if max_deriv >= 1:
        rows += [dphi[..., 0], dphi[..., 1]]
    if max_deriv >= 2:
        rows += [ddphi[..., 0, 0], ddphi[..., 0, 1], ddphi[..., 1, 1]]

    if const_w is None:
        return _jet_chunk_varying(transport, eps, pts, nodes, w, phi, h, rows, max_deriv)

    weights = np.stack(rows, axis=1) * w[:, None, :]          # (k, nw, n)
    raw = weights @ h.reshape(k, -1, 4)                        # (k, nw, 4)
    raw = raw.reshape(k, -1, 2, 2)
    if not np.allclose(const_w, np.eye(2)):
        raw = np.einsum('ia,kwij,jb->kwab', const_w, raw, const_w)
        # the transported integrand is symmetric pointwise; restore exactly
        raw = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    g = raw[:, 0]
    dgp = ddgp = None
    if max_deriv >= 1:
        dgp = raw[:, 1:3]
    if max_deriv >= 2:
        ddgp = np.empty((k, 2, 2, 2, 2))
        ddgp[:, 0, 0] = raw[:, 3]
        ddgp[:, 0, 1] = raw[:, 4]
        ddgp[:, 1, 0] = raw[:, 4]
        ddgp[:, 1, 1] = raw[:, 5]
    return g, dgp, ddgp


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _jet_chunk_varying(transport, eps, pts, nodes, w, phi, h, rows, max_deriv):
    """General path: transport action matrices vary over (x, y)."""
    k = pts.shape[0]
    x = pts[:, None, :]
    W = transport.action_matrix(eps, x, nodes)                       # (k, n, 2, 2)
    hW = _sym(np.einsum('knia,knij,knjb->knab', W, h, W))
    g = np.einsum('kn,knab->kab', w * phi, hW)
    if max_deriv == 0:
        return g, None, None
    dW = transport.dx_action_matrix(eps, x, nodes)                   # (k, n, 2, 2, c)
    hW1 = (np.einsum('kniac,knij,knjb->knabc', dW, h, W)
           + np.einsum('knia,knij,knjbc->knabc', W, h, dW))
    hW1 = 0.5 * (hW1 + hW1.swapaxes(2, 3))
    dphi = np.stack(rows[1:3], axis=-1)                              # (k, n, c)
    dg = (np.einsum('knc,knab->kcab', w[..., None] * dphi, hW)
          + np.einsum('kn,knabc->kcab', w * phi, hW1))
    if max_deriv == 1:
        return g, dg, None
    ddW = transport.dxx_action_matrix(eps, x, nodes)                 # (k, n, 2, 2, c, d)
    hW2 = (np.einsum('kniacd,knij,knjb->knabcd', ddW, h, W)
           + np.einsum('kniac,knij,knjbd->knabcd', dW, h, dW)
           + np.einsum('kniad,knij,knjbc->knabcd', dW, h, dW)
           + np.einsum('knia,knij,knjbcd->knabcd', W, h, ddW))
    hW2 = 0.5 * (hW2 + hW2.swapaxes(2, 3))
    ddphi = np.empty(phi.shape + (2, 2))
    ddphi[..., 0, 0] = rows[3]
    ddphi[..., 0, 1] = rows[4]
    ddphi[..., 1, 0] = rows[4]
    ddphi[..., 1, 1] = rows[5]
    ddg = (np.einsum('kncd,knab->kcdab', w[..., None, None] * ddphi, hW)
           + np.einsum('knc,knabd->kcdab', w[..., None] * dphi, hW1)
           + np.einsum('knd,knabc->kcdab', w[..., None] * dphi, hW1)
           + np.einsum('kn,knabcd->kcdab', w * phi, hW2))
    return g, dg, ddg


# ---------------------------------------------------------------------------
# embedding order and diffeomorphism invariance
# ---------------------------------------------------------------------------

def embed_negligibility_order(t, kernel, transport, region, schedule, quad=None):
    """Fitted order of ``sup_region |smoothed(t) - t|`` over the schedule.

    For a smooth field the difference is negligible in the idealized theory;
    at finite kernel order q (and transport order k) the measured slope is
    ``min(q, k)``, which is the claimed order of the returned report.
    """
    if isinstance(transport, TransportNet):
        transport = tensor_action(transport)
    region = np.atleast_2d(np.asarray(region, dtype=float))
    exact = t.eval(region)
    claimed = float(min(kernel.effective_moment_order, transport.base.diagonal_order))
    sups = []
    for eps in schedule:
        jet = smoothed_jet_batch(t, kernel, transport, eps, region, max_deriv=0, quad=quad)
        sups.append(float(np.max(np.abs(jet.g - exact))))
    return order_report(f"embed-negligibility-{t.name}", np.asarray(schedule, float),
                        sups, claimed, 0.3, zero_floor=1e-13)


@dataclass(frozen=True)
class AffineMap:
    """Affine diffeomorphism ``x -> Q x + b`` of the chart."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.det(self.matrix)) < 1e-14:
            raise FieldError("affine map must be invertible")

    def apply(self, x):
        return x @ self.matrix.T + self.shift

    def inverse(self):
        qinv = np.linalg.inv(self.matrix)
        return AffineMap(qinv, -qinv @ self.shift)


def rotation_map(angle):
    c, s = np.cos(angle), np.sin(angle)
    return AffineMap(np.array([[c, -s], [s, c]]), np.zeros(2))


def scaling_map(factor, shift=(0.0, 0.0)):
    return AffineMap(np.diag([float(factor)] * 2), np.asarray(shift, dtype=float))


def pullback_field(mu, u):
    """``(mu^* u)(x) = Dmu^T u(mu x) Dmu`` for the affine map mu."""
    q = mu.matrix
    inv = mu.inverse()

    def ev(x):
        return np.einsum('ia,...ij,jb->...ab', q, u.eval(mu.apply(x)), q)

    sing = tuple(tuple(inv.apply(np.asarray(p, dtype=float))) for p in u.singular_points)
    return TensorField(f"pullback-{u.name}", ev, singular_points=sing)


class PushforwardKernel:
    """``mu_* phi``: the kernel net transported by an affine diffeomorphism.

    The kernel picks up the density factor ``|det Dmu|^{-1}``; the support
    ball maps to an ellipse, enclosed here by the ball of the largest
    singular value (the kernel vanishes identically on the excess region).
    Only order-0 evaluation is provided.
    """

    def __init__(self, mu, base):
        self.mu = mu
        self.inv = mu.inverse()
        self.base = base
        self._scale = float(np.linalg.svd(mu.matrix, compute_uv=False)[0])
        self._jac = abs(float(np.linalg.det(mu.matrix)))

    @property
    def dim(self):
        return self.base.dim

    @property
    def effective_moment_order(self):
        return self.base.effective_moment_order

    def support_center(self, eps, x):
        return self.mu.apply(self.base.support_center(eps, self.inv.apply(np.asarray(x, dtype=float))))

    def support_radius(self, eps):
        return self._scale * self.base.support_radius(eps)

    def eval(self, eps, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.base.eval(eps, self.inv.apply(x), self.inv.apply(y)) / self._jac


class PushforwardTransport(TransportNet):
    """``mu_* A``: conjugation of a transport net by an affine map."""

    def __init__(self, mu, base):
        object.__setattr__(self, "family_id", f"pushforward-{base.family_id}")
        object.__setattr__(self, "order", base.order)
        object.__setattr__(self, "perturbation", base.perturbation)
        object.__setattr__(self, "_mu", mu)
        object.__setattr__(self, "_inv", mu.inverse())
        object.__setattr__(self, "_base", base)

    def eval(self, eps, x, y):
        q = self._mu.matrix
        qinv = self._inv.matrix
        a = self._base.eval(eps, self._inv.apply(np.asarray(x, dtype=float)),
                            self._inv.apply(np.asarray(y, dtype=float)))
        return np.einsum('ij,...jk,kl->...il', q, a, qinv)

    def _deriv(self, eps, x, y, which):  # pragma: no cover - guarded interface
        raise FieldError("pushforward transports support order-0 evaluation only")

    @property
    def is_constant(self):
        return self._base.is_constant


def pushforward_kernel(mu, kernel):
    return PushforwardKernel(mu, kernel)


def pushforward_transport(mu, net):
    return PushforwardTransport(mu, net)


def pullback_commutation_check(mu, u, kernel, transport, eps, points, quad=None):
    """Max discrepancy of pullback-then-smooth against smooth-then-pullback.

    The left side smooths ``mu^* u`` with ``(A, phi)`` at the sample points;
    the right side smooths ``u`` with the pushed-forward nets
    ``(mu_* A, mu_* phi)`` at the image points and pulls the result back.
    Both are change-of-variable images of the same integral, so any
    discrepancy is pure quadrature error; the contract is < 1e-8 for affine
    maps and smooth sample neighborhoods.
    """
    if isinstance(transport, TensorTransport):
        transport = transport.base
    points = np.atleast_2d(np.asarray(points, dtype=float))
    left = smoothed_jet_batch(pullback_field(mu, u), kernel, transport, eps,
                              points, max_deriv=0, quad=quad).g
    pushed_kernel = pushforward_kernel(mu, kernel)
    pushed_transport = pushforward_transport(mu, transport)
    right_raw = smoothed_jet_batch(u, pushed_kernel, pushed_transport, eps,
                                   mu.apply(points), max_deriv=0, quad=quad).g
    q = mu.matrix
    right = np.einsum('ia,...ij,jb->...ab', q, right_raw, q)
    return float(np.max(np.abs(left - right)))
