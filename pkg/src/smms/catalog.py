"""Constructors and expected values for every explicit model family.

Each family installs its forced parameters (the auxiliary curvature
parameter, the fiber Einstein constant, the scale) and validates its
parameter constraints, raising ``ParamConstraintViolation`` with the
violated clause named.  Golden component records carry the closed-form
values used by the verification suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import tensor_core as tc
from . import weighted as wt
from .errors import ParamConstraintViolation
from .tensor_core import Box, ChartMetric, ScalarField
from .warped_closed import FiberSpec, ScalarCurve, WarpedSMMS


class FamilyId(str, Enum):
    EXAMPLE_1_2 = "example-1-2"
    WEIGHTED_SPHERE = "weighted-sphere"
    WEIGHTED_EUCLIDEAN = "weighted-euclidean"
    WEIGHTED_HYPERBOLIC = "weighted-hyperbolic"
    COUNTEREXAMPLE_3_1 = "counterexample-3-1"
    COUNTEREXAMPLE_3_2 = "counterexample-3-2"
    THM_4_1_POSITIVE = "thm-4-1-positive"
    THM_4_1_ZERO = "thm-4-1-zero"
    THM_4_1_NEGATIVE = "thm-4-1-negative"
    EXAMPLE_4_3 = "example-4-3"
    THM_1_4_3B = "thm-1-4-3b"


@dataclass(frozen=True)
class FamilyParams:
    """Parameter record; unused entries stay None."""

    n: int | None = None
    m: float | None = None
    lambda_: float | None = None
    A: float | None = None
    B: float | None = None
    C: float | None = None
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    xi: float | None = None
    mu: float | None = None


@dataclass(frozen=True)
class GoldenComponent:
    """One expected value: a named tensor component at a chart point."""

    name: str
    kind: str            # weyl_w | dfw | tau | rho_w_coeff | kappa | mu | weyl
    indices: tuple
    point: tuple
    value: float
    formula: str


@dataclass
class FamilyExpected:
    kappa: float | None = None
    mu_forced: float | None = None
    beta_forced: float | None = None
    golden_components: list = field(default_factory=list)
    notes: tuple = ()


def _require(cond, clause):
    if not cond:
        raise ParamConstraintViolation(clause)


def _need(p, names, fid):
    for nm in names:
        if getattr(p, nm) is None:
            raise ParamConstraintViolation(f"{nm} required for {fid.value}")


def _mu_for(p, forced):
    """Forced auxiliary parameter for m != 1; free (user-supplied) for m = 1."""
    if p.m == 1.0:
        return p.mu
    if p.mu is not None and not math.isclose(p.mu, forced, rel_tol=0, abs_tol=0):
        raise ParamConstraintViolation("mu is determined by the family when m != 1")
    return forced


# ---------------------------------------------------------------------------
# Curve helpers
# ---------------------------------------------------------------------------


def _log_density_curve(v_fn, v1_fn, v2_fn, m, name="density"):
    """f = -m log(v) with exact first/second derivatives from v's."""

    def f(t):
        return -m * np.log(v_fn(t))

    def f1(t):
        return -m * v1_fn(t) / v_fn(t)

    def f2(t):
        v, v1, v2 = v_fn(t), v1_fn(t), v2_fn(t)
        return -m * (v2 * v - v1 * v1) / (v * v)

    return ScalarCurve(f, d1=f1, d2=f2, name=name)


# ---------------------------------------------------------------------------
# Family builders
# ---------------------------------------------------------------------------


def _build_example_1_2(p):
    _need(p, ("n", "A", "B"), FamilyId.EXAMPLE_1_2)
    n, A, B = p.n, p.A, p.B
    _require(n >= 3, "n>=3")
    _require(A > 0, "A in R+")
    _require(B > 0, "B in R+")
    if p.m is not None:
        _require(p.m == 0.5, "m=1/2")
    if p.lambda_ is not None:
        _require(p.lambda_ == 0.0, "lambda=0")
    if p.mu is not None:
        _require(p.mu == 0.0, "mu=0")
    q = 1.0 / (n - 1)
    phi = ScalarCurve(
        lambda t: A * (B * t) ** q,
        d1=lambda t: A * B * q * (B * t) ** (q - 1),
        d2=lambda t: A * B * B * q * (q - 1) * (B * t) ** (q - 2),
        name="warp",
    )
    f = ScalarCurve(
        lambda t: -np.log(B * t),
        d1=lambda t: -1.0 / t,
        d2=lambda t: 1.0 / t**2,
        name="density",
    )
    return WarpedSMMS(
        n=n, interval=(0.0, math.inf), phi=phi, f=f,
        fiber=FiberSpec(dim=n - 1, beta=0.0, realization="flat"),
        m=0.5, mu=0.0, lambda_target=0.0, sample_window=(0.8, 3.2),
    )


def _sphere_special_case(A, B):
    """Incomplete sub-cases admitted alongside the complete family."""
    if A == 1.0 and B == 1.0:
        return "standard"        # punctured sphere
    if A == 0.0 and B == 1.0:
        return "gaussian"        # upper hemisphere, scale zero
    return None


def _build_weighted_sphere(p):
    _need(p, ("n", "m", "lambda_", "A", "B"), FamilyId.WEIGHTED_SPHERE)
    n, m, lam, A, B = p.n, p.m, p.lambda_, p.A, p.B
    _require(lam > 0, "lambda>0")
    special = _sphere_special_case(A, B)
    if special is None:
        _require(A > 0, "A in R+")
        _require(B != 0, "B != 0")
        _require(A > abs(B), "A>|B|")
    s = math.sqrt(2.0 * lam)
    phi = ScalarCurve(
        lambda t: np.sin(s * t) / s,
        d1=lambda t: np.cos(s * t),
        d2=lambda t: -s * np.sin(s * t),
        name="warp",
    )
    f = _log_density_curve(
        lambda t: A + B * np.cos(s * t),
        lambda t: -B * s * np.sin(s * t),
        lambda t: -B * s * s * np.cos(s * t),
        m,
    )
    mu = _mu_for(p, 2.0 * lam * (B * B - A * A))
    # Upper-hemisphere sub-case: the density is defined only where v > 0.
    t_hi = (math.pi / (2.0 * s)) if special == "gaussian" else (math.pi / s)
    return WarpedSMMS(
        n=n, interval=(0.0, t_hi), phi=phi, f=f,
        fiber=FiberSpec(dim=n - 1, beta=float(n - 2), realization="space_form"),
        m=m, mu=mu, lambda_target=lam,
    )


def _build_weighted_euclidean(p):
    _need(p, ("n", "m", "A", "B"), FamilyId.WEIGHTED_EUCLIDEAN)
    n, m, A, B = p.n, p.m, p.A, p.B
    if p.lambda_ is not None:
        _require(p.lambda_ == 0.0, "lambda=0")
    _require(A > 0, "A in R+")
    _require(B > 0, "B in R+")
    phi = ScalarCurve(lambda t: np.asarray(t, dtype=float) + 0.0,
                      d1=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                      d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                      name="warp")
    f = _log_density_curve(
        lambda t: A + B * np.asarray(t, dtype=float) ** 2,
        lambda t: 2.0 * B * np.asarray(t, dtype=float),
        lambda t: 2.0 * B * np.ones_like(np.asarray(t, dtype=float)),
        m,
    )
    mu = _mu_for(p, -4.0 * A * B)
    return WarpedSMMS(
        n=n, interval=(0.0, math.inf), phi=phi, f=f,
        fiber=FiberSpec(dim=n - 1, beta=float(n - 2), realization="space_form"),
        m=m, mu=mu, lambda_target=0.0,
    )


def _build_weighted_hyperbolic(p):
    _need(p, ("n", "m", "lambda_", "A", "B"), FamilyId.WEIGHTED_HYPERBOLIC)
    n, m, lam, A, B = p.n, p.m, p.lambda_, p.A, p.B
    _require(lam < 0, "lambda<0")
    _require(B > 0, "B in R+")
    _require(A > -B, "A>-B")
    s = math.sqrt(-2.0 * lam)
    phi = ScalarCurve(
        lambda t: np.sinh(s * t) / s,
        d1=lambda t: np.cosh(s * t),
        d2=lambda t: s * np.sinh(s * t),
        name="warp",
    )
    f = _log_density_curve(
        lambda t: A + B * np.cosh(s * t),
        lambda t: B * s * np.sinh(s * t),
        lambda t: B * s * s * np.cosh(s * t),
        m,
    )
    mu = _mu_for(p, 2.0 * lam * (B * B - A * A))
    return WarpedSMMS(
        n=n, interval=(0.0, math.inf), phi=phi, f=f,
        fiber=FiberSpec(dim=n - 1, beta=float(n - 2), realization="space_form"),
        m=m, mu=mu, lambda_target=lam,
    )


def _conformal_power_chart(n, exponent):
    """Chart with g_ii = x1^exponent on R+ x R^{n-1}."""

    def g(pts):
        x1 = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (n, n))
        idx = np.arange(n)
        out[..., idx, idx] = (x1**exponent)[..., None]
        return out

    lower = [0.0] + [-math.inf] * (n - 1)
    return ChartMetric(n, g, domain=Box(lower, [math.inf] * n),
                       name=f"conformal-power({exponent:g})")


def _build_counterexample_3_1(p):
    _need(p, ("m",), FamilyId.COUNTEREXAMPLE_3_1)
    m = p.m
    _require(m > 0, "m in R+")
    if p.n is not None:
        _require(p.n == 4, "n=4")
    if p.mu is not None:
        _require(p.mu == 0.0, "mu=0")
    chart = _conformal_power_chart(4, 2.0 * m)
    f = ScalarField(lambda pts: -2.0 * m * (m + 1.0) * np.log(pts[..., 0]), name="density")
    return wt.SMMSChart(chart, f, m=m, mu=0.0)


def _build_counterexample_3_2(p):
    if p.n is not None:
        _require(p.n == 3, "n=3")
    if p.m is not None:
        _require(p.m == 0.5, "m=1/2")
    if p.mu is not None:
        _require(p.mu == 0.0, "mu=0")
    expo = (2.0 / 3.0) * (3.0 - math.sqrt(6.0))
    chart = _conformal_power_chart(3, expo)
    f = ScalarField(lambda pts: -math.sqrt(2.0 / 3.0) * np.log(pts[..., 0]), name="density")
    return wt.SMMSChart(chart, f, m=0.5, mu=0.0)


def _fiber_for_beta(n, beta, realization=None):
    if realization == "product_of_surfaces":
        return FiberSpec(dim=n - 1, beta=beta, realization="product_of_surfaces", gauss=beta)
    if abs(beta) < 1e-15 or realization == "flat":
        return FiberSpec(dim=n - 1, beta=0.0, realization="flat")
    return FiberSpec(dim=n - 1, beta=beta, realization="space_form")


def _thm41_curves(sign, p, m):
    """phi, v-curve data and forced (beta, mu) factors for each sign of lambda."""
    n, lam = p.n, p.lambda_
    c1, c2, c3, c4 = p.c1, p.c2, p.c3, p.c4
    if sign > 0:
        s = math.sqrt(2.0 * lam)
        phi = ScalarCurve(
            lambda t: c1 * np.cos(s * t) + c2 * np.sin(s * t),
            d1=lambda t: s * (-c1 * np.sin(s * t) + c2 * np.cos(s * t)),
            d2=lambda t: -s * s * (c1 * np.cos(s * t) + c2 * np.sin(s * t)),
            name="warp",
        )
        v = (
            lambda t: c3 + c2 * c4 * (np.cos(s * t) - 1.0) - c1 * c4 * np.sin(s * t),
            lambda t: s * (-c2 * c4 * np.sin(s * t) - c1 * c4 * np.cos(s * t)),
            lambda t: s * s * (-c2 * c4 * np.cos(s * t) + c1 * c4 * np.sin(s * t)),
        )
        beta = 2.0 * (c1 * c1 + c2 * c2) * (n - 2) * lam
        mu = 2.0 * (c1**2 * c4**2 + 2.0 * c2 * c3 * c4 - c3**2) * lam
        window = 0.35 / s
    elif sign == 0:
        phi = ScalarCurve(
            lambda t: c1 * np.asarray(t, dtype=float) + c2,
            d1=lambda t: c1 * np.ones_like(np.asarray(t, dtype=float)),
            d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            name="warp",
        )
        v = (
            lambda t: c3 - c4 * (c1 * np.asarray(t, dtype=float) ** 2 + 2.0 * c2 * np.asarray(t, dtype=float)),
            lambda t: -c4 * (2.0 * c1 * np.asarray(t, dtype=float) + 2.0 * c2),
            lambda t: -2.0 * c1 * c4 * np.ones_like(np.asarray(t, dtype=float)),
        )
        beta = c1 * c1 * (n - 2)
        mu = 4.0 * c4 * (c1 * c3 + c2 * c2 * c4)
        window = 0.3
    else:
        s = math.sqrt(-2.0 * lam)
        phi = ScalarCurve(
            lambda t: c1 * np.exp(s * t) + c2 * np.exp(-s * t),
            d1=lambda t: s * (c1 * np.exp(s * t) - c2 * np.exp(-s * t)),
            d2=lambda t: s * s * (c1 * np.exp(s * t) + c2 * np.exp(-s * t)),
            name="warp",
        )
        v = (
            lambda t: c3 + c2 * c4 * (np.exp(-s * t) - 1.0) - c1 * c4 * (np.exp(s * t) - 1.0),
            lambda t: s * (-c2 * c4 * np.exp(-s * t) - c1 * c4 * np.exp(s * t)),
            lambda t: s * s * (c2 * c4 * np.exp(-s * t) - c1 * c4 * np.exp(s * t)),
        )
        beta = 8.0 * c1 * c2 * (n - 2) * lam
        mu = -2.0 * (2.0 * (c1 - c2) * c3 * c4 + (c1 + c2) ** 2 * c4**2 + c3**2) * lam
        window = 0.35 / s
    f = _log_density_curve(*v, m)
    return phi, f, beta, mu, window


def _build_thm41(fid, p, realization=None):
    _need(p, ("n", "m", "lambda_", "c3", "c4"), fid)
    n, m, lam = p.n, p.m, p.lambda_
    _require(n >= 3, "n>=3")
    _require(m > 0, "m in R+")
    _require(p.c3 > 0, "c3 in R+")
    _require(p.c4 != 0, "c4 != 0")
    if fid is FamilyId.THM_4_1_POSITIVE:
        _require(lam > 0, "lambda>0")
        _need(p, ("c1",), fid)
        p = replace(p, c2=p.c2 if p.c2 is not None else 0.0)
        _require(p.c1 > 0, "c1 in R+")
        sign = 1
    elif fid is FamilyId.THM_4_1_ZERO:
        _require(lam == 0, "lambda=0")
        _need(p, ("c2",), fid)
        p = replace(p, c1=p.c1 if p.c1 is not None else 0.0)
        _require(p.c2 > 0, "c2 in R+")
        sign = 0
    else:
        _require(lam < 0, "lambda<0")
        p = replace(
            p,
            c1=p.c1 if p.c1 is not None else 0.0,
            c2=p.c2 if p.c2 is not None else 0.0,
        )
        _require(p.c1 + p.c2 > 0, "c1+c2 in R+")
        sign = -1
    phi, f, beta, mu_forced, window = _thm41_curves(sign, p, m)
    mu = _mu_for(p, mu_forced)
    return WarpedSMMS(
        n=n, interval=(-window, window), phi=phi, f=f,
        fiber=_fiber_for_beta(n, beta, realization=realization),
        m=m, mu=mu, lambda_target=lam,
    )


def _build_example_4_3(p):
    if p.n is not None:
        _require(p.n == 5, "n=5")
    p = replace(p, n=5)
    lam = p.lambda_
    if lam is None:
        raise ParamConstraintViolation("lambda_ required for example-4-3")
    if lam > 0:
        fid = FamilyId.THM_4_1_POSITIVE
    elif lam == 0:
        fid = FamilyId.THM_4_1_ZERO
    else:
        fid = FamilyId.THM_4_1_NEGATIVE
    w = _build_thm41(fid, p, realization="product_of_surfaces")
    _require(w.fiber.beta != 0, "beta != 0")
    return w


def _build_thm14_3b(p):
    _need(p, ("n", "m", "lambda_", "A", "B", "C"), FamilyId.THM_1_4_3B)
    n, m, lam, A, B, C = p.n, p.m, p.lambda_, p.A, p.B, p.C
    _require(lam < 0, "lambda<0")
    _require(A > 0, "A in R+")
    _require(B > 0, "B in R+")
    _require(C > 0, "C in R+")
    _require(A * C <= B, "AC<=B")
    s = math.sqrt(-2.0 * lam)
    phi = ScalarCurve(
        lambda t: A * np.exp(s * t),
        d1=lambda t: A * s * np.exp(s * t),
        d2=lambda t: A * s * s * np.exp(s * t),
        name="warp",
    )
    f = _log_density_curve(
        lambda t: B + A * C * (np.exp(s * t) - 1.0),
        lambda t: A * C * s * np.exp(s * t),
        lambda t: A * C * s * s * np.exp(s * t),
        m,
    )
    mu = _mu_for(p, -2.0 * (B - A * C) ** 2 * lam)
    return WarpedSMMS(
        n=n, interval=(-math.inf, math.inf), phi=phi, f=f,
        fiber=FiberSpec(dim=n - 1, beta=0.0, realization="flat"),
        m=m, mu=mu, lambda_target=lam,
    )


_BUILDERS = {
    FamilyId.EXAMPLE_1_2: _build_example_1_2,
    FamilyId.WEIGHTED_SPHERE: _build_weighted_sphere,
    FamilyId.WEIGHTED_EUCLIDEAN: _build_weighted_euclidean,
    FamilyId.WEIGHTED_HYPERBOLIC: _build_weighted_hyperbolic,
    FamilyId.COUNTEREXAMPLE_3_1: _build_counterexample_3_1,
    FamilyId.COUNTEREXAMPLE_3_2: _build_counterexample_3_2,
    FamilyId.THM_4_1_POSITIVE: lambda p: _build_thm41(FamilyId.THM_4_1_POSITIVE, p),
    FamilyId.THM_4_1_ZERO: lambda p: _build_thm41(FamilyId.THM_4_1_ZERO, p),
    FamilyId.THM_4_1_NEGATIVE: lambda p: _build_thm41(FamilyId.THM_4_1_NEGATIVE, p),
    FamilyId.EXAMPLE_4_3: _build_example_4_3,
    FamilyId.THM_1_4_3B: _build_thm14_3b,
}


def build_family(fid, params):
    """Construct the model object for a family; validates all constraints."""
    fid = FamilyId(fid)
    return _BUILDERS[fid](params)


# ---------------------------------------------------------------------------
# Expected values
# ---------------------------------------------------------------------------


def family_expected(fid, params):
    """Forced parameters and golden components for a family."""
    fid = FamilyId(fid)
    p = params
    obj = build_family(fid, p)  # re-validates constraints

    if fid is FamilyId.EXAMPLE_1_2:
        n = p.n
        phi1 = p.A * p.B ** (1.0 / (n - 1))
        golden = [
            GoldenComponent(
                "weyl_w(t,x1,t,x1) at t=1", "weyl_w", (0, 1, 0, 1),
                _warped_point(obj, 1.0), (n - 2) * phi1**2 / (n - 1) ** 2,
                "power-warp display",
            ),
            GoldenComponent(
                "weyl_w(x1,x2,x1,x2) at t=1", "weyl_w", (1, 2, 1, 2),
                _warped_point(obj, 1.0), -(phi1**4) / (n - 1) ** 2,
                "power-warp display",
            ),
            GoldenComponent(
                "tau at t=1", "tau", (), _warped_point(obj, 1.0),
                (n - 2) / (n - 1), "power-warp scalar curvature",
            ),
        ]
        return FamilyExpected(
            kappa=None, mu_forced=0.0, beta_forced=0.0, golden_components=golden,
            notes=("lambda=0", "m=1/2"),
        )

    if fid is FamilyId.WEIGHTED_SPHERE:
        notes = []
        special = _sphere_special_case(p.A, p.B)
        if special == "standard":
            notes.append("standard weighted sphere (punctured)")
        elif special == "gaussian":
            notes.append("positive elliptic Gaussian (incomplete domain, scale zero)")
        return FamilyExpected(
            kappa=2.0 * p.lambda_ * p.A,
            mu_forced=None if p.m == 1.0 else 2.0 * p.lambda_ * (p.B**2 - p.A**2),
            beta_forced=float(p.n - 2),
            notes=tuple(notes),
        )

    if fid is FamilyId.WEIGHTED_EUCLIDEAN:
        return FamilyExpected(
            kappa=2.0 * p.B,
            mu_forced=None if p.m == 1.0 else -4.0 * p.A * p.B,
            beta_forced=float(p.n - 2),
        )

    if fid is FamilyId.WEIGHTED_HYPERBOLIC:
        notes = []
        if p.A == 0.0:
            notes.append("quasi-Einstein (scale zero)")
        return FamilyExpected(
            kappa=2.0 * p.lambda_ * p.A,
            mu_forced=None if p.m == 1.0 else 2.0 * p.lambda_ * (p.B**2 - p.A**2),
            beta_forced=float(p.n - 2),
            notes=tuple(notes),
        )

    if fid is FamilyId.COUNTEREXAMPLE_3_1:
        m = p.m
        val = 2.0 * m * (2.0 * m * m + m - 1.0)
        golden = [
            GoldenComponent(
                "delta_f W (x2,x1,x2) at x1=1", "dfw", (1, 0, 1),
                (1.0, 0.15, -0.1, 0.2), val, "conformal-power divergence display",
            ),
        ]
        notes = ("m=1/2 special value",) if m == 0.5 else ()
        return FamilyExpected(kappa=None, mu_forced=0.0, beta_forced=None,
                              golden_components=golden, notes=notes)

    if fid is FamilyId.COUNTEREXAMPLE_3_2:
        val = 4.0 * (math.sqrt(6.0) - 3.0) / 9.0
        golden = [
            GoldenComponent(
                "delta_f W (x2,x1,x2) at x1=1", "dfw", (1, 0, 1),
                (1.0, 0.15, -0.1), val, "three-dim divergence display",
            ),
        ]
        return FamilyExpected(kappa=None, mu_forced=0.0, beta_forced=None,
                              golden_components=golden)

    if fid in (FamilyId.THM_4_1_POSITIVE, FamilyId.THM_4_1_ZERO,
               FamilyId.THM_4_1_NEGATIVE, FamilyId.EXAMPLE_4_3):
        exp = FamilyExpected(
            kappa=None,
            mu_forced=obj.mu if p.m != 1.0 else None,
            beta_forced=obj.fiber.beta,
        )
        if fid is FamilyId.EXAMPLE_4_3:
            beta = obj.fiber.beta
            t_star = float(obj.sample_grid(3)[1])
            phi2 = float(obj.phi(t_star)) ** 2
            y = (0.12, 0.07, -0.09, 0.15)
            q1 = 4.0 + beta * (y[0] ** 2 + y[1] ** 2)
            q2 = 4.0 + beta * (y[2] ** 2 + y[3] ** 2)
            pt = (t_star,) + y
            exp.golden_components = [
                GoldenComponent("W(x1,x2,x1,x2)", "weyl", (1, 2, 1, 2), pt,
                                512.0 * beta * phi2 / (3.0 * q1**4),
                                "surface-product Weyl display"),
                GoldenComponent("W(x3,x4,x3,x4)", "weyl", (3, 4, 3, 4), pt,
                                512.0 * beta * phi2 / (3.0 * q2**4),
                                "surface-product Weyl display"),
                GoldenComponent("W(x1,x3,x1,x3)", "weyl", (1, 3, 1, 3), pt,
                                -256.0 * beta * phi2 / (3.0 * q1**2 * q2**2),
                                "surface-product Weyl display"),
                GoldenComponent("W(x2,x4,x2,x4)", "weyl", (2, 4, 2, 4), pt,
                                -256.0 * beta * phi2 / (3.0 * q1**2 * q2**2),
                                "surface-product Weyl display"),
            ]
        return exp

    if fid is FamilyId.THM_1_4_3B:
        return FamilyExpected(
            kappa=None,
            mu_forced=obj.mu if p.m != 1.0 else None,
            beta_forced=0.0,
        )

    raise ParamConstraintViolation(f"unknown family {fid}")


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------


def _warped_point(w, t):
    """Chart point over base coordinate t with the fiber at its origin."""
    return (float(t),) + (0.0,) * (w.n - 1)


def default_samples(obj, k=7):
    """Interior chart points for residual evaluation.

    Warped inputs vary the base coordinate and sprinkle small fiber offsets;
    chart inputs vary the first coordinate over a window near 1.
    """
    if isinstance(obj, WarpedSMMS):
        ts = obj.sample_grid(k)
        n = obj.n
        pts = np.zeros((k, n))
        pts[:, 0] = ts
        for i in range(k):
            for j in range(1, n):
                pts[i, j] = 0.02 * (((i + j) % 3) - 1)
        return pts
    s = obj
    n = s.chart.dim
    pts = np.zeros((k, n))
    pts[:, 0] = np.linspace(0.8, 1.6, k)
    for i in range(k):
        for j in range(1, n):
            pts[i, j] = 0.05 * (((i + j) % 3) - 1)
    return pts


# CLI-facing registry: flag names each family accepts.
FAMILY_FLAGS = {
    FamilyId.EXAMPLE_1_2: ("n", "A", "B"),
    FamilyId.WEIGHTED_SPHERE: ("n", "m", "lambda_", "A", "B", "mu"),
    FamilyId.WEIGHTED_EUCLIDEAN: ("n", "m", "A", "B", "mu"),
    FamilyId.WEIGHTED_HYPERBOLIC: ("n", "m", "lambda_", "A", "B", "mu"),
    FamilyId.COUNTEREXAMPLE_3_1: ("m",),
    FamilyId.COUNTEREXAMPLE_3_2: (),
    FamilyId.THM_4_1_POSITIVE: ("n", "m", "lambda_", "c1", "c2", "c3", "c4", "mu"),
    FamilyId.THM_4_1_ZERO: ("n", "m", "lambda_", "c1", "c2", "c3", "c4", "mu"),
    FamilyId.THM_4_1_NEGATIVE: ("n", "m", "lambda_", "c1", "c2", "c3", "c4", "mu"),
    FamilyId.EXAMPLE_4_3: ("m", "lambda_", "c1", "c2", "c3", "c4"),
    FamilyId.THM_1_4_3B: ("n", "m", "lambda_", "A", "B", "C"),
}
