"""Transport-operator nets on a 2-D chart and their action on tensor fibers.

A transport net is a family ``A_eps(x, y)`` of 2x2 matrices moving fibers at
``y`` to fibers at ``x``.  Admissible families flatten to the identity on the
diagonal as ``eps -> 0``; the package works with the identity family and with
``I + eps^k B`` perturbations, whose diagonal deviation has exact order k.
Covariant (0,2) slots act through ``A(y, x)``, so a symmetric matrix ``v`` at
``y`` is carried to ``A(y,x)^T v A(y,x)`` at ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import AdmissibilityReport, _validate_schedule
from .orderfit import fit_loglog_slope


class TransportError(ValueError):
    """Raised for invalid transport-net configurations."""


@dataclass(frozen=True)
class MatrixField:
    """2x2 matrix field on Omega x Omega with closed-form slot derivatives.

    ``eval(x, y) -> (..., 2, 2)``; ``d1``/``d2`` append one derivative axis
    for the first/second slot, ``d11``/``d12``/``d22`` append two.
    """

    eval: callable
    d1: callable
    d2: callable
    d11: callable
    d12: callable
    d22: callable
    sup_norm: float
    is_constant: bool = False


def constant_matrix_field(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (2, 2):
        raise TransportError("perturbation matrix must be 2x2")

    def ev(x, y):
        return np.broadcast_to(matrix, np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (2, 2))

    def zeros(n):
        def d(x, y):
            shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (2, 2) + (2,) * n
            return np.zeros(shape)
        return d

    return MatrixField(ev, zeros(1), zeros(1), zeros(2), zeros(2), zeros(2),
                       float(np.linalg.norm(matrix, 2)), is_constant=True)


def sine_matrix_field(base, amplitude, px, qy, phase=0.0):
    """``B(x, y) = base + sin(px . x + qy . y + phase) * amplitude``."""
    base = np.asarray(base, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    px = np.asarray(px, dtype=float)
    qy = np.asarray(qy, dtype=float)

    def u(x, y):
        return x @ px + y @ qy + phase

    def ev(x, y):
        return base + np.sin(u(x, y))[..., None, None] * amplitude

    def d_first(x, y):
        return np.cos(u(x, y))[..., None, None, None] * amplitude[..., :, :, None] * px

    def d_second(x, y):
        return np.cos(u(x, y))[..., None, None, None] * amplitude[..., :, :, None] * qy

    def dd(v1, v2):
        def d(x, y):
            return (-np.sin(u(x, y))[..., None, None, None, None]
                    * amplitude[..., :, :, None, None] * np.multiply.outer(v1, v2))
        return d

    sup = float(np.linalg.norm(base, 2) + np.linalg.norm(amplitude, 2))
    return MatrixField(ev, d_first, d_second, dd(px, px), dd(px, qy), dd(qy, qy), sup)


def rotation_generator():
    """The so(2) generator [[0, -1], [1, 0]]; commutes with rotations."""
    return np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class TransportNet:
    """Family ``eps -> A_eps(x, y)`` with analytic slot derivatives.

    ``family_id`` is ``identity`` or ``perturbed``; perturbed families are
    ``A_eps = I + eps^order B(x, y)``.
    """

    family_id: str
    order: int | None = None
    perturbation: MatrixField | None = None

    @property
    def diagonal_order(self):
        """Exact order of ``A_eps(x,x) - I``; inf for the identity family."""
        return float("inf") if self.perturbation is None else float(self.order)

    def _guard(self, eps):
        if self.perturbation is not None and eps ** self.order * self.perturbation.sup_norm >= 1.0:
            raise TransportError(
                f"eps={eps} too large: eps^{self.order} * |B| >= 1 breaks invertibility")

    def eval(self, eps, x, y):
        """``A_eps(x, y)``, shape (..., 2, 2); x, y broadcastable (..., 2)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.perturbation is None:
            return np.broadcast_to(np.eye(2), np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (2, 2))
        self._guard(eps)
        return np.eye(2) + eps ** self.order * self.perturbation.eval(x, y)

    def _deriv(self, eps, x, y, which):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n_axes = 1 if which in ("d1", "d2") else 2
        if self.perturbation is None:
            shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (2, 2) + (2,) * n_axes
            return np.zeros(shape)
        self._guard(eps)
        return eps ** self.order * getattr(self.perturbation, which)(x, y)

    def d1_eval(self, eps, x, y):
        return self._deriv(eps, x, y, "d1")

    def d2_eval(self, eps, x, y):
        return self._deriv(eps, x, y, "d2")

    def d11_eval(self, eps, x, y):
        return self._deriv(eps, x, y, "d11")

    def d12_eval(self, eps, x, y):
        return self._deriv(eps, x, y, "d12")

    def d22_eval(self, eps, x, y):
        return self._deriv(eps, x, y, "d22")

    # spec-facing aliases: derivatives "in x" are first-slot derivatives
    dx_eval = d1_eval
    dxx_eval = d11_eval

    @property
    def is_constant(self):
        return self.perturbation is None or self.perturbation.is_constant


def identity_transport():
    """The admissible net ``A_eps(x, y) = I`` (flat at every order)."""
    return TransportNet("identity")


def perturbed_transport(B, k):
    """``A_eps = I + eps^k B``; B a 2x2 array or a :class:`MatrixField`."""
    if k < 1:
        raise TransportError("perturbation order k must be a positive integer")
    field = B if isinstance(B, MatrixField) else constant_matrix_field(B)
    return TransportNet("perturbed", int(k), field)


@dataclass(frozen=True)
class TensorTransport:
    """Functorial action of a transport net on the Sym(2) fiber.

    For valence (0,2) the action matrix at base point ``x`` and source ``y``
    is ``W = A(y, x)``, acting on symmetric matrices by ``v -> W^T v W``.
    Its x-derivatives are second-slot derivatives of the base net.
    """

    base: TransportNet
    valence: tuple = (0, 2)

    def action_matrix(self, eps, x, y):
        return self.base.eval(eps, y, x)

    def dx_action_matrix(self, eps, x, y):
        return self.base.d2_eval(eps, y, x)

    def dxx_action_matrix(self, eps, x, y):
        return self.base.d22_eval(eps, y, x)

    def act(self, eps, x, y, v):
        """Transport the symmetric matrix field v(y) to the fiber at x."""
        w = self.action_matrix(eps, x, y)
        return np.einsum('...ia,...ij,...jb->...ab', w, v, w)

    def constant_action_matrix(self, eps):
        """The (x, y)-independent action matrix, or None for varying families."""
        if not self.base.is_constant:
            return None
        probe = np.zeros((1, 2))
        return self.base.eval(eps, probe, probe)[0]


def tensor_action(net, valence=(0, 2)):
    """Tensor-fiber action of a transport net; only valence (0,2) is needed."""
    if tuple(valence) != (0, 2):
        raise TransportError(f"unsupported valence {valence}; only (0, 2) is implemented")
    return TensorTransport(net, (0, 2))


def check_admissible(net, region, schedule, orders=(1, 2, 3), support_constant=1.0):
    """Admissibility diagnostics for a transport net.

    Reports: operator boundedness along the schedule (no growth trend),
    per-order diagonal flatness ``sup_x |A_eps(x,x) - I| = O(eps^m)``, the
    first-derivative variant, and the near-diagonal sup of Lemma-style
    ``sup_{|y-x| <= C eps} |A_eps(x,y) - I| -> 0``.
    """
    schedule = _validate_schedule(schedule)
    region = np.atleast_2d(np.asarray(region, dtype=float))
    sample = region[:: max(1, len(region) // 12)]
    pairs_y = np.roll(sample, 1, axis=0)
    reports = []

    bound_vals = []
    for eps in schedule:
        v = float(np.max(np.abs(net.eval(eps, sample, pairs_y))))
        v = max(v, float(np.max(np.abs(net.d1_eval(eps, sample, pairs_y)))))
        bound_vals.append(v)
    slope, ok = _decay_slope(schedule, bound_vals)
    reports.append(AdmissibilityReport(
        "operator-boundedness", list(zip(schedule.tolist(), bound_vals)), slope,
        ok if slope is None else slope >= -0.05, 0.05,
        detail="sup of |A| and |D_x A| over region pairs; no growth allowed"))

    diag_vals, diag_d1_vals = [], []
    for eps in schedule:
        dev = net.eval(eps, sample, sample) - np.eye(2)
        diag_vals.append(float(np.max(np.abs(dev))))
        ddev = net.d1_eval(eps, sample, sample) + net.d2_eval(eps, sample, sample)
        diag_d1_vals.append(float(np.max(np.abs(ddev))))
    for m in orders:
        slope, all_zero = _decay_slope(schedule, diag_vals)
        passed = all_zero or (slope is not None and slope >= m - 0.05)
        reports.append(AdmissibilityReport(
            f"diagonal-flatness-{m}", list(zip(schedule.tolist(), diag_vals)),
            float("nan") if slope is None else slope, passed, 0.05,
            detail=f"sup_x |A_eps(x,x) - I| must decay at order >= {m}"))
    slope, all_zero = _decay_slope(schedule, diag_d1_vals)
    reports.append(AdmissibilityReport(
        "diagonal-derivative-flatness", list(zip(schedule.tolist(), diag_d1_vals)),
        float("nan") if slope is None else slope,
        all_zero or (slope is not None and slope >= min(orders) - 0.05), 0.05,
        detail="sup_x |D_x(A_eps(x,x) - I)|, first-derivative variant"))

    near_vals = []
    dirs = np.stack([np.cos([0.0, 1.3, 2.7, 4.1]), np.sin([0.0, 1.3, 2.7, 4.1])], -1)
    for eps in schedule:
        worst = 0.0
        for fac in (0.3, 0.7, 1.0):
            y = sample[:, None, :] + fac * support_constant * eps * dirs[None, :, :]
            dev = net.eval(eps, sample[:, None, :], y) - np.eye(2)
            worst = max(worst, float(np.max(np.abs(dev))))
        near_vals.append(worst)
    slope, all_zero = _decay_slope(schedule, near_vals)
    reports.append(AdmissibilityReport(
        "near-diagonal-sup", list(zip(schedule.tolist(), near_vals)),
        float("nan") if slope is None else slope,
        all_zero or (slope is not None and slope > 0.05), 0.05,
        detail="sup over |y-x| <= C eps of |A_eps(x,y) - I| must tend to 0"))
    return reports


def _decay_slope(schedule, values):
    """(slope, all_zero) with slope None when every value vanishes."""
    if all(v == 0.0 for v in values):
        return None, True
    fit = fit_loglog_slope(np.asarray(schedule), np.asarray(values), zero_floor=1e-300)
    return fit.slope, False
