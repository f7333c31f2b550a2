"""Closed-form engine for warped products over an Einstein fiber.

For a product of an interval with an Einstein fiber, warped by phi and
carrying a density f that depends only on the base coordinate, curvature
and Hessian come in closed form.  This module evaluates those expressions,
the three-equation residual system that characterizes weighted Einstein
spaces with weighted harmonic Weyl tensor, and the dichotomy probe that
separates the Einstein branch from the exceptional power-law branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor_core as tc
from . import weighted as wt
from .errors import (
    DomainError,
    NonPositiveWarp,
    UnrealizableFiber,
)
from .tensor_core import Box, ChartMetric, ScalarField

# 7-point centered stencils for the 1-D fallback derivatives.
_W1_7 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_W2_7 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_OFF_7 = np.arange(-3, 4)


class ScalarCurve:
    """Function of one variable with optional exact derivatives.

    Closed-form first and second derivatives should be attached whenever the
    family provides them; otherwise 7-point centered differences with step
    1e-4 * max(1, |t|) are used.
    """

    def __init__(self, fn, d1=None, d2=None, name="curve", fd_rel_step=1e-4):
        self._fn = fn
        self._d1 = d1
        self._d2 = d2
        self.name = name
        self.fd_rel_step = fd_rel_step

    def __call__(self, t):
        return np.asarray(self._fn(np.asarray(t, dtype=float)), dtype=float)

    def _fd(self, t, weights):
        t = np.asarray(t, dtype=float)
        h = self.fd_rel_step * np.maximum(1.0, np.abs(t))
        pts = t[..., None] + h[..., None] * _OFF_7
        vals = self(pts)
        return np.einsum("k,...k->...", weights, vals), h

    def d1(self, t):
        if self._d1 is not None:
            return np.asarray(self._d1(np.asarray(t, dtype=float)), dtype=float)
        s, h = self._fd(t, _W1_7)
        return s / h

    def d2(self, t):
        if self._d2 is not None:
            return np.asarray(self._d2(np.asarray(t, dtype=float)), dtype=float)
        s, h = self._fd(t, _W2_7)
        return s / h**2


_REALIZATIONS = ("space_form", "flat", "product_of_surfaces")


@dataclass(frozen=True)
class FiberSpec:
    """Einstein fiber: dimension, Einstein constant beta, realization.

    Realizations and their consistency constraints:
      * ``space_form``: conformal chart of sectional curvature beta/(dim-1);
      * ``flat``: requires beta = 0;
      * ``product_of_surfaces``: two surfaces of Gauss curvature ``gauss``,
        requires dim = 4 and beta = gauss.
    """

    dim: int
    beta: float
    realization: str = "space_form"
    gauss: float | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise UnrealizableFiber("fiber dimension must be at least 2")
        if self.realization not in _REALIZATIONS:
            raise UnrealizableFiber(f"unknown fiber realization {self.realization!r}")
        if self.realization == "flat" and self.beta != 0.0:
            raise UnrealizableFiber("flat realization requires beta = 0")
        if self.realization == "product_of_surfaces":
            if self.dim != 4:
                raise UnrealizableFiber("product-of-surfaces fiber requires dimension 4")
            if self.gauss is None or self.gauss != self.beta:
                raise UnrealizableFiber("product of surfaces requires beta = gauss")

    @property
    def sectional(self):
        """Sectional curvature of the space-form realization."""
        return self.beta / (self.dim - 1)

    def metric_parts(self):
        """Batched fiber metric h(y) and its domain box."""
        d = self.dim
        if self.realization == "flat":
            def h(y):
                out = np.zeros(y.shape[:-1] + (d, d))
                idx = np.arange(d)
                out[..., idx, idx] = 1.0
                return out
            return h, Box.unbounded(d)
        if self.realization == "space_form":
            c = self.sectional
            dom = wt.space_form_fiber_domain(d, c, shrink=0.45)

            def h(y):
                q = 1.0 + (c / 4.0) * np.sum(y * y, axis=-1)
                out = np.zeros(y.shape[:-1] + (d, d))
                idx = np.arange(d)
                out[..., idx, idx] = (1.0 / q**2)[..., None]
                return out
            return h, dom
        k = self.gauss
        if k < 0:
            half = 0.45 * math.sqrt(-4.0 / k) / math.sqrt(2.0)
            dom = Box([-half] * 4, [half] * 4)
        else:
            dom = Box.unbounded(4)

        def h(y):
            q1 = 1.0 + (k / 4.0) * (y[..., 0] ** 2 + y[..., 1] ** 2)
            q2 = 1.0 + (k / 4.0) * (y[..., 2] ** 2 + y[..., 3] ** 2)
            out = np.zeros(y.shape[:-1] + (4, 4))
            out[..., 0, 0] = out[..., 1, 1] = (1.0 / q1**2)
            out[..., 2, 2] = out[..., 3, 3] = (1.0 / q2**2)
            return out
        return h, dom


@dataclass
class WarpedSMMS:
    """Warped product of an interval with an Einstein fiber, plus density.

    The density depends on the base coordinate only; charts where the
    density varies along the fiber are out of contract here.
    """

    n: int
    interval: tuple
    phi: ScalarCurve
    f: ScalarCurve
    fiber: FiberSpec
    m: float
    mu: float | None = None
    lambda_target: float | None = None
    sample_window: tuple | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("total dimension must be at least 3")
        if self.fiber.dim != self.n - 1:
            raise ValueError("fiber dimension must be n - 1")
        if not (self.m > 0):
            raise ValueError("dimensional parameter m must be positive")
        t0, t1 = self.interval
        if not (t0 < t1):
            raise ValueError("interval must be nonempty")
        ts = self.sample_grid(9)
        ph = self.phi(ts)
        if np.any(ph <= 0):
            raise NonPositiveWarp(f"warping function not positive on {self.interval}")

    def sample_grid(self, k, margin=1e-3, edge=0.08, cap=4.0):
        """Interior sample grid: open endpoints shrunk, edges padded for FD.

        When the family sets an explicit sample window the grid spans it
        directly (windows are already interior).
        """
        if self.sample_window is not None:
            return np.linspace(self.sample_window[0], self.sample_window[1], k)
        t0, t1 = self.interval
        if not math.isfinite(t0):
            t0 = -cap
        if not math.isfinite(t1):
            t1 = cap
        t0 += margin
        t1 -= margin
        span = t1 - t0
        return np.linspace(t0 + edge * span, t1 - edge * span, k)


def warped_chart(w):
    """Realize the warped product as an SMMS chart.

    g = dt^2 + phi(t)^2 h on (interval) x (fiber domain), with the density
    lifted to depend on t only.
    """
    h_fn, h_dom = w.fiber.metric_parts()
    n = w.n
    lower = np.concatenate([[w.interval[0]], h_dom.lower])
    upper = np.concatenate([[w.interval[1]], h_dom.upper])

    def g(pts):
        t = pts[..., 0]
        y = pts[..., 1:]
        ph = w.phi(t)
        out = np.zeros(pts.shape[:-1] + (n, n))
        out[..., 0, 0] = 1.0
        out[..., 1:, 1:] = (ph**2)[..., None, None] * h_fn(y)
        return out

    names = ("t",) + tuple(f"x{i}" for i in range(1, n))
    chart = ChartMetric(n, g, domain=Box(lower, upper), coord_names=names,
                        name=f"warped(n={n}, {w.fiber.realization})")
    density = ScalarField(lambda pts: w.f(pts[..., 0]), name="density")
    return wt.SMMSChart(chart, density, m=w.m, mu=w.mu)


@dataclass
class WarpedClosedValues:
    """Orthonormal-frame curvature/Hessian coefficients on the warped product."""

    ricci_tt: float
    ricci_fiber_coeff: float
    hess_tt: float
    hess_fiber_coeff: float
    J_closed: float


def _closed_arrays(w, t):
    t = np.asarray(t, dtype=float)
    n, m, beta = w.n, w.m, w.fiber.beta
    ph, ph1, ph2 = w.phi(t), w.phi.d1(t), w.phi.d2(t)
    f1, f2 = w.f.d1(t), w.f.d2(t)
    if np.any(ph <= 0):
        raise NonPositiveWarp("warping function not positive at requested points")
    ricci_tt = -(n - 1) * ph2 / ph
    ricci_fiber = beta / ph**2 - ph2 / ph - (n - 2) * ph1**2 / ph**2
    hess_tt = f2
    hess_fiber = ph1 * f1 / ph
    twoJ = (
        (n - 1) * (beta - (n - 2) * ph1**2) / ph**2
        + 2.0 * (n - 1) * (ph1 * f1 - ph2) / ph
        + 2.0 * f2
        - ((1.0 + m) / m) * f1**2
    )
    if m != 1.0 and w.mu is not None:
        twoJ = twoJ + m * (m - 1.0) * np.exp(2.0 * w.f(t) / m) * w.mu
    J = twoJ / (2.0 * (n + m - 1.0))
    return {
        "phi": ph, "phi1": ph1, "phi2": ph2, "f1": f1, "f2": f2,
        "ricci_tt": ricci_tt, "ricci_fiber": ricci_fiber,
        "hess_tt": hess_tt, "hess_fiber": hess_fiber, "J": J,
    }


def warped_curvature_closed(w, t):
    """Closed-form curvature/Hessian coefficients at a base point."""
    t0, t1 = w.interval
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= t0) or np.any(ts >= t1):
        raise DomainError(f"base coordinate {t} outside {w.interval}")
    a = _closed_arrays(w, float(np.asarray(t)))
    return WarpedClosedValues(
        ricci_tt=float(a["ricci_tt"]),
        ricci_fiber_coeff=float(a["ricci_fiber"]),
        hess_tt=float(a["hess_tt"]),
        hess_fiber_coeff=float(a["hess_fiber"]),
        J_closed=float(a["J"]),
    )


@dataclass
class OdeResiduals:
    r1: float | np.ndarray
    r2: float | np.ndarray
    r3: float | np.ndarray

    def max_abs(self):
        return float(max(np.max(np.abs(self.r1)), np.max(np.abs(self.r2)),
                         np.max(np.abs(self.r3))))


def ode_residuals(w, lam, t):
    """Residuals of the characterizing ODE system at base points.

    r1:  beta - phi'' phi - (n-2) phi'^2 - 2(n-1) lambda phi^2
    r2:  f'' - (n-1) phi''/phi - f'^2/m - phi' f'/phi - 2(n-1) lambda
    r3:  phi' f'/phi + (n-m) lambda - J

    The space is weighted Einstein with weighted harmonic Weyl tensor at
    ``lam`` exactly when all three vanish identically.
    """
    t_arr = np.asarray(t, dtype=float)
    t0, t1 = w.interval
    if np.any(t_arr <= t0) or np.any(t_arr >= t1):
        raise DomainError(f"base coordinate outside {w.interval}")
    a = _closed_arrays(w, t_arr)
    n, m, beta = w.n, w.m, w.fiber.beta
    r1 = beta - a["phi2"] * a["phi"] - (n - 2) * a["phi1"] ** 2 - 2 * (n - 1) * lam * a["phi"] ** 2
    r2 = (a["f2"] - (n - 1) * a["phi2"] / a["phi"] - a["f1"] ** 2 / m
          - a["phi1"] * a["f1"] / a["phi"] - 2 * (n - 1) * lam)
    r3 = a["phi1"] * a["f1"] / a["phi"] + (n - m) * lam - a["J"]
    if t_arr.ndim == 0:
        return OdeResiduals(float(r1), float(r2), float(r3))
    return OdeResiduals(r1, r2, r3)


@dataclass
class BranchDefects:
    einstein_defect: float
    branch2_defect: float
    fprime_sq_defect: float


def branch_probe(w, lam, ts):
    """Dichotomy probe for weighted Einstein + weighted harmonic inputs.

    einstein_defect measures phi'' + 2 lambda phi; branch2_defect measures
    phi f' + (n-1) phi' (the exceptional branch forces phi proportional to
    e^{-f/(n-1)}); fprime_sq_defect measures f'^2 - 2m(f'' - (n-1) lambda),
    which only the exceptional branch must satisfy.  Defects are normalized
    by the scale of the functions over the window, so verdicts are
    dilation invariant.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size < 3:
        raise DomainError("branch_probe needs at least 3 sample points")
    a = _closed_arrays(w, ts)
    n, m = w.n, w.m
    e_num = np.max(np.abs(a["phi2"] + 2.0 * lam * a["phi"]))
    e_den = max(np.max(np.abs(a["phi"])), 1e-300)
    b_num = np.max(np.abs(a["phi"] * a["f1"] + (n - 1) * a["phi1"]))
    b_den = max(np.max(np.abs(a["phi"] * a["f1"]) + (n - 1) * np.abs(a["phi1"])), 1e-300)
    fp = np.max(np.abs(a["f1"] ** 2 - 2.0 * m * (a["f2"] - (n - 1) * lam)))
    return BranchDefects(
        einstein_defect=float(e_num / e_den),
        branch2_defect=float(b_num / b_den),
        fprime_sq_defect=float(fp),
    )
