"""Weighted curvature tensors of a smooth metric measure space on a chart.

A chart plus a density and the parameters (m, mu) determines the weighted
analogues of Ricci, scalar, Schouten, Weyl and Cotton, together with the
weighted divergence.  ``condition_report`` bundles the residuals that decide
whether a space is weighted Einstein and whether its weighted Weyl tensor is
weighted harmonic, and estimates the scale constant from the Schouten
scalar.

Conventions: ``m = 1`` makes the auxiliary curvature parameter irrelevant;
in that case ``mu`` is never read, so outputs are bitwise independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import tensor_core as tc
from .errors import DomainError, InsufficientSamples, NonIntegerM
from .tensor_core import (
    Box,
    ChartMetric,
    DEFAULT_FD,
    ScalarField,
    TensorField,
    TensorValue,
    kulkarni_nomizu_components,
)


def _probe_points(domain, k=7):
    """Deterministic probe points in a finite sub-box of the domain."""
    lo = np.where(np.isfinite(domain.lower), domain.lower, -2.0)
    hi = np.where(np.isfinite(domain.upper), domain.upper, 2.0)
    bad = lo >= hi
    lo = np.where(bad, domain.lower + 0.1, lo)
    hi = np.where(bad, domain.lower + 1.1, hi)
    span = hi - lo
    lo = lo + 0.05 * span
    hi = hi - 0.05 * span
    u = (np.arange(1, k + 1) / (k + 1.0))[:, None] * np.ones((1, domain.dim))
    u[1::2] = u[1::2, ::-1]
    return lo + u * (hi - lo)


@dataclass
class SMMSChart:
    """Chart + density + parameters (m, mu).

    ``mu`` may be None when ``m == 1`` (it never enters any formula then).
    A constant density is rejected unless ``allow_constant_density`` is set;
    the only legitimate use of that escape hatch is direct-product plumbing
    tests of ``formal_warped_product``.
    """

    chart: ChartMetric
    f: ScalarField
    m: float
    mu: float | None = None
    allow_constant_density: bool = False

    def __post_init__(self):
        n = self.chart.dim
        if not (self.m > 0):
            raise ValueError("dimensional parameter m must be positive")
        if n + self.m - 2 <= 0 or n + self.m - 1 <= 0:
            raise ValueError("need n + m - 2 > 0 and n + m - 1 > 0")
        if self.mu is None and self.m != 1.0:
            raise ValueError("mu is required when m != 1")
        if not self.allow_constant_density:
            vals = self.f(_probe_points(self.chart.domain))
            if np.max(vals) - np.min(vals) <= 1e-13 * (1.0 + np.max(np.abs(vals))):
                raise ValueError("density looks constant on the chart; not a proper SMMS")

    @property
    def n(self):
        return self.chart.dim


@dataclass
class WeightedScalars:
    """Pointwise weighted scalar quantities.

    ``schouten`` is the weighted Schouten scalar tau / (2(n+m-1)).
    ``trace_gap`` is the Schouten scalar minus the trace of the weighted
    Schouten tensor (zero in the unweighted theory, not here).
    ``alpha`` is the proportionality factor of the Bakry-Emery Ricci tensor
    once a constant ``lambda`` is attached: alpha = (n+m-2) lambda + schouten.
    """

    tau: float
    schouten: float
    trace_gap: float
    alpha: float | None = None


class Branch(str, Enum):
    EINSTEIN = "einstein"
    NON_EINSTEIN_EXAMPLE_1_2 = "non-einstein-example-1-2"
    INDETERMINATE = "indeterminate"


@dataclass
class ConditionReport:
    """Residual summary over a sample set."""

    lambda_fit: float
    einstein_residual: float
    harmonic_residual: float
    cotton_residual: float
    kappa: float
    kappa_spread: float
    branch: Branch
    sample_points: np.ndarray
    ricci_einstein_residual: float
    main_expression_residual: float | None = None
    weyl_sup: float = 0.0
    schouten_samples: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kappa_samples: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def max_residual(self):
        return max(self.einstein_residual, self.harmonic_residual, self.cotton_residual)


# ---------------------------------------------------------------------------
# Batched pipeline
# ---------------------------------------------------------------------------


def _mu_term(s, f_vals):
    """m(m-1) mu e^{2f/m}; identically zero for m = 1 without reading mu."""
    if s.m == 1.0 or s.mu is None:
        return np.zeros_like(f_vals)
    return s.m * (s.m - 1.0) * s.mu * np.exp(2.0 * f_vals / s.m)


def weighted_state(s, P, cfg=DEFAULT_FD):
    """All weighted tensors at a batch of points, as plain arrays."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    n, m = s.n, s.m
    jet = tc.metric_jet(s.chart, P, cfg)
    riem, ricci, scalar, asym = tc.riemann_from_jet(jet)
    sc = tc.scalar_calculus_batch(s.chart, s.f, P, cfg, jet=jet)
    f0, df, hess = sc["value"], sc["df"], sc["hess"]

    rho_w = ricci + hess - np.einsum("bi,bj->bij", df, df) / m
    tau_w = (
        scalar
        + 2.0 * sc["laplacian"]
        - ((m + 1.0) / m) * sc["grad_norm_sq"]
        + _mu_term(s, f0)
    )
    J = tau_w / (2.0 * (n + m - 1.0))
    P_w = (rho_w - J[:, None, None] * jet.g) / (n + m - 2.0)
    trP = np.einsum("bij,bij->b", jet.ginv, P_w)
    Y = J - trP
    W_w = riem - kulkarni_nomizu_components(P_w, jet.g)
    return {
        "jet": jet,
        "riemann": riem,
        "ricci": ricci,
        "scalar": scalar,
        "asymmetry": asym,
        "f": f0,
        "df": df,
        "grad_f": sc["grad"],
        "hess_f": hess,
        "laplacian_f": sc["laplacian"],
        "grad_norm_sq_f": sc["grad_norm_sq"],
        "rho_w": rho_w,
        "tau_w": tau_w,
        "schouten_scalar": J,
        "schouten": P_w,
        "trace_gap": Y,
        "weyl_w": W_w,
    }


def _inner_cfg(cfg):
    """Noise-optimized settings for field values that get re-differenced.

    Richardson extrapolation lowers truncation but amplifies roundoff; for
    values feeding an outer difference quotient the roundoff floor is what
    matters, so it is switched off and the inner step widened slightly.
    """
    return replace(cfg, richardson=False, rel_step=max(cfg.rel_step, 3e-3))


def _schouten_field(s, cfg):
    inner = _inner_cfg(cfg)
    return TensorField(2, lambda P: weighted_state(s, P, inner)["schouten"],
                       name="weighted Schouten")


def _weyl_w_field(s, cfg):
    inner = _inner_cfg(cfg)
    return TensorField(4, lambda P: weighted_state(s, P, inner)["weyl_w"],
                       name="weighted Weyl")


# ---------------------------------------------------------------------------
# Public pointwise operations
# ---------------------------------------------------------------------------


def bakry_emery_ricci(s, p, cfg=DEFAULT_FD):
    """rho + Hess f - (1/m) df (x) df at a point."""
    st = weighted_state(s, tc._single(p), cfg)
    return TensorValue(2, st["rho_w"][0], "sym2")


def weighted_scalar_curvature(s, p, cfg=DEFAULT_FD):
    st = weighted_state(s, tc._single(p), cfg)
    return float(st["tau_w"][0])


def weighted_schouten(s, p, cfg=DEFAULT_FD, lambda_fit=None):
    """Weighted Schouten tensor plus the associated scalar quantities."""
    st = weighted_state(s, tc._single(p), cfg)
    alpha = None
    if lambda_fit is not None:
        alpha = (s.n + s.m - 2.0) * lambda_fit + float(st["schouten_scalar"][0])
    scalars = WeightedScalars(
        tau=float(st["tau_w"][0]),
        schouten=float(st["schouten_scalar"][0]),
        trace_gap=float(st["trace_gap"][0]),
        alpha=alpha,
    )
    return TensorValue(2, st["schouten"][0], "sym2"), scalars


def weighted_weyl(s, p, cfg=DEFAULT_FD):
    st = weighted_state(s, tc._single(p), cfg)
    return TensorValue(4, st["weyl_w"][0], "riemann-like")


def weighted_cotton_batch(s, P, cfg=DEFAULT_FD, state=None):
    P = np.atleast_2d(np.asarray(P, dtype=float))
    jet = state["jet"] if state is not None else None
    nP = tc.covariant_derivative_batch(s.chart, _schouten_field(s, cfg), P, cfg, jet=jet)
    return nP - np.swapaxes(nP, 1, 2)


def weighted_cotton(s, p, cfg=DEFAULT_FD):
    """dP(X,Y,Z) = (D_X P)(Y,Z) - (D_Y P)(X,Z); antisymmetric in (X, Y)."""
    out = weighted_cotton_batch(s, tc._single(p), cfg)
    return TensorValue(3, out[0])


def weighted_divergence_batch(s, fld, P, cfg=DEFAULT_FD, state=None):
    """delta_f T = delta T - i_{grad f} T over a batch of base points."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if state is None:
        jet = tc.metric_jet(s.chart, P, cfg)
        sc = tc.scalar_calculus_batch(s.chart, s.f, P, cfg, jet=jet)
        grad_f = sc["grad"]
    else:
        jet = state["jet"]
        grad_f = state["grad_f"]
    div = tc.divergence_batch(s.chart, fld, P, cfg, jet=jet)
    T0 = fld(P)
    iota = np.einsum("ba,ba...->b...", grad_f, T0)
    return div - iota


def weighted_divergence(s, T, p, cfg=DEFAULT_FD, rank=None):
    fld = tc.as_tensor_field(T, rank=rank)
    out = weighted_divergence_batch(s, fld, tc._single(p), cfg)
    return TensorValue(fld.rank - 1, out[0])


def weighted_weyl_divergence_batch(s, P, cfg=DEFAULT_FD, state=None):
    """delta_f of the weighted Weyl tensor (rank-3 output, batched)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if state is None:
        state = weighted_state(s, P, cfg)
    return weighted_divergence_batch(s, _weyl_w_field(s, cfg), P, cfg, state=state)


def weighted_weyl_divergence(s, p, cfg=DEFAULT_FD):
    out = weighted_weyl_divergence_batch(s, tc._single(p), cfg)
    return TensorValue(3, out[0])


# ---------------------------------------------------------------------------
# Condition report
# ---------------------------------------------------------------------------


def _sup_orthonormal(batch_components, g_batch):
    """Max over the batch of the orthonormal-frame sup norm."""
    out = 0.0
    for comp, g in zip(batch_components, g_batch):
        out = max(out, tc.sup_norm_orthonormal(comp, g))
    return out


def main_expression_rhs(state, lam, m):
    """Closed form of delta_f W for a weighted Einstein space.

    rhs(X,Y,Z) = (trace_gap/m + lam){df(Y) g(X,Z) - df(Z) g(X,Y)}
                 - (1/m){df(Y) Hess_f(X,Z) - df(Z) Hess_f(X,Y)}.
    """
    g = state["jet"].g
    df = state["df"]
    H = state["hess_f"]
    Y = state["trace_gap"]
    c = (Y / m + lam)[:, None, None, None]
    t1 = np.einsum("by,bxz->bxyz", df, g) - np.einsum("bz,bxy->bxyz", df, g)
    t2 = np.einsum("by,bxz->bxyz", df, H) - np.einsum("bz,bxy->bxyz", df, H)
    return c * t1 - t2 / m


def condition_report(
    s,
    samples,
    cfg=DEFAULT_FD,
    lambda_override=None,
    branch_tol=1e-4,
    include_cotton=True,
):
    """Weighted Einstein / weighted harmonic residuals over a sample set.

    lambda is fitted as the sample mean of tr(P)/n unless overridden; the
    scale kappa is recovered pointwise from the Schouten scalar and its
    spread doubles as a falsifier of the weighted Einstein hypothesis.
    """
    P = np.atleast_2d(np.asarray(samples, dtype=float))
    if P.shape[0] < 3:
        raise InsufficientSamples("condition_report needs at least 3 sample points")
    n, m = s.n, s.m
    st = weighted_state(s, P, cfg)
    g = st["jet"].g

    trP = np.einsum("bij,bij->b", st["jet"].ginv, st["schouten"])
    lam = float(lambda_override) if lambda_override is not None else float(np.mean(trP / n))

    dev = st["schouten"] - lam * g
    einstein = _sup_orthonormal(dev, g)

    kappa_samples = ((m + n) * lam - st["schouten_scalar"]) * np.exp(-st["f"] / m) / m
    kappa = float(np.mean(kappa_samples))
    kappa_spread = float(np.max(np.abs(kappa_samples - kappa))) if len(kappa_samples) else 0.0

    dfw = weighted_weyl_divergence_batch(s, P, cfg, state=st)
    harmonic = _sup_orthonormal(dfw, g)

    cotton = 0.0
    if include_cotton:
        dPw = weighted_cotton_batch(s, P, cfg, state=st)
        cotton = _sup_orthonormal(dPw, g)

    weyl_sup = _sup_orthonormal(st["weyl_w"], g)

    ric_dev = st["ricci"] - 2.0 * (n - 1) * lam * g
    ricci_resid = _sup_orthonormal(ric_dev, g)

    main_resid = None
    if einstein <= branch_tol:
        rhs = main_expression_rhs(st, lam, m)
        main_resid = _sup_orthonormal(dfw - rhs, g)

    if einstein <= branch_tol and harmonic <= branch_tol:
        branch = Branch.EINSTEIN if ricci_resid <= branch_tol else Branch.NON_EINSTEIN_EXAMPLE_1_2
    else:
        branch = Branch.INDETERMINATE

    return ConditionReport(
        lambda_fit=lam,
        einstein_residual=einstein,
        harmonic_residual=harmonic,
        cotton_residual=cotton,
        kappa=kappa,
        kappa_spread=kappa_spread,
        branch=branch,
        sample_points=P,
        ricci_einstein_residual=ricci_resid,
        main_expression_residual=main_resid,
        weyl_sup=weyl_sup,
        schouten_samples=st["schouten_scalar"],
        kappa_samples=kappa_samples,
    )


# ---------------------------------------------------------------------------
# Formal warped product over a space-form fiber
# ---------------------------------------------------------------------------


def space_form_fiber_domain(dim, curvature, shrink=0.45):
    """Axis-aligned box inside the conformal chart of curvature ``curvature``."""
    if curvature < 0:
        half = shrink * math.sqrt(-4.0 / curvature) / math.sqrt(dim)
        return Box([-half] * dim, [half] * dim)
    return Box.unbounded(dim)


def formal_warped_product(s, fiber_dim):
    """Chart of (M x F, g + v^2 h(mu)) with v = e^{-f/m} and F a space form.

    Requires the dimensional parameter to be the positive integer
    ``fiber_dim``; at fiber-origin points the scalar curvature of the
    product equals the weighted scalar curvature of ``s`` and its Ricci
    tensor restricted to M-directions equals the Bakry-Emery Ricci tensor.
    """
    mi = int(fiber_dim)
    if mi < 1 or s.m != mi:
        raise NonIntegerM(f"dimensional parameter m={s.m} is not the positive integer {fiber_dim}")
    mu = 0.0 if (s.mu is None or mi == 1) else float(s.mu)
    n = s.n
    base = s.chart
    fdom = space_form_fiber_domain(mi, mu)
    lower = np.concatenate([base.domain.lower, fdom.lower])
    upper = np.concatenate([base.domain.upper, fdom.upper])

    def g_prod(pts):
        x = pts[..., :n]
        y = pts[..., n:]
        Gx = base(x, check=False)
        v = np.exp(-s.f(x) / s.m)
        q = 1.0 + (mu / 4.0) * np.sum(y * y, axis=-1)
        if np.any(q <= 0):
            raise DomainError("fiber point outside the conformal space-form chart")
        out = np.zeros(pts.shape[:-1] + (n + mi, n + mi))
        out[..., :n, :n] = Gx
        idx = np.arange(n, n + mi)
        out[..., idx, idx] = ((v / q) ** 2)[..., None]
        return out

    names = base.coord_names + tuple(f"y{i + 1}" for i in range(mi))
    return ChartMetric(
        n + mi, g_prod, domain=Box(lower, upper), coord_names=names,
        name=f"{base.name} x fiber({mi})",
    )
