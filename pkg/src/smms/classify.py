"""Branch classification, the generalized Obata machinery and global matching.

For a warped-product input that passes the characterizing ODE system, the
dichotomy probe decides between the Einstein branch and the exceptional
power-law branch.  On the Einstein branch, v = e^{-f/m} satisfies a second
order linear equation (the generalized Obata equation), whose initial value
problem is integrated here to reconstruct the model metric; completeness is
then decided by critical-point counts of v and a Ricci blowup probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from . import tensor_core as tc
from . import weighted as wt
from .catalog import FamilyParams
from .errors import (
    DomainError,
    InvalidProblem,
    NonFiniteState,
    PreconditionError,
    StepSizeUnderflow,
)
from .tensor_core import Box, ChartMetric, ScalarField, DEFAULT_FD
from .warped_closed import (
    BranchDefects,
    FiberSpec,
    ScalarCurve,
    WarpedSMMS,
    ode_residuals,
    branch_probe,
)
from .weighted import Branch, SMMSChart


# ---------------------------------------------------------------------------
# Generic adaptive integration
# ---------------------------------------------------------------------------


def integrate_ode(rhs, y0, t_span, rtol=1e-12, atol=1e-14, events=None, max_step=np.inf):
    """Adaptive explicit integration with dense output and event detection."""
    def guarded(t, y):
        dy = np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(dy)):
            raise NonFiniteState(f"right-hand side not finite at t={t}")
        return dy

    sol = solve_ivp(
        guarded, t_span, np.asarray(y0, dtype=float), method="DOP853",
        rtol=rtol, atol=atol, dense_output=True, events=events, max_step=max_step,
    )
    if not sol.success:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise NonFiniteState(msg)
    return sol


# ---------------------------------------------------------------------------
# Generalized Obata initial value problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObataProblem:
    """u'' + (2 lambda u - kappa) = 0, u(0) = xi, u'(0) = 0.

    ``xi`` is the initial value of v = e^{-f/m}; the problem is well posed
    only when 2 lambda xi - kappa != 0 (otherwise u is constant).
    """

    lambda_: float
    kappa: float
    xi: float

    def forcing_at_start(self):
        return 2.0 * self.lambda_ * self.xi - self.kappa

    def __post_init__(self):
        if self.forcing_at_start() == 0.0:
            raise InvalidProblem("2*lambda*xi - kappa must be nonzero")


@dataclass
class ObataSolution:
    T: float                      # closure time; math.inf when unbounded
    t: np.ndarray
    u: np.ndarray
    uprime: np.ndarray
    chart: ChartMetric            # dt^2 + (u'/forcing)^2 g_{S^{n-1}} on (0, T)
    warp: object                  # callable t -> u'(t)/forcing
    dense: object                 # callable t -> (u, u')

    def residual(self, prob):
        """Sup residual of the IVP along the accepted trajectory."""
        upp = -(2.0 * prob.lambda_ * self.u - prob.kappa)
        h = np.gradient(self.uprime, self.t)
        return float(np.max(np.abs(h - upp)))


def solve_obata_ivp(prob, n, t_max=None, rtol=1e-12, atol=1e-14, samples=400):
    """Integrate the Obata problem and realize the induced warped chart.

    For lambda > 0 the trajectory closes up when u' returns to zero
    (T = pi / sqrt(2 lambda)); for lambda <= 0 integration runs to ``t_max``
    and T is reported as infinity.
    """
    lam, kap, xi = prob.lambda_, prob.kappa, prob.xi
    forcing = prob.forcing_at_start()

    def rhs(t, y):
        return [y[1], -(2.0 * lam * y[0] - kap)]

    closes = lam > 0
    if t_max is None:
        t_max = (1.5 * math.pi / math.sqrt(2.0 * lam)) if closes else 8.0

    events = None
    if closes:
        direction = 1.0 if forcing > 0 else -1.0

        def uprime_zero(t, y):
            return y[1]

        uprime_zero.terminal = True
        uprime_zero.direction = direction
        events = [uprime_zero]

    sol = integrate_ode(rhs, [xi, 0.0], (0.0, t_max), rtol=rtol, atol=atol, events=events)

    if closes:
        if sol.t_events is None or len(sol.t_events[0]) == 0:
            raise InvalidProblem("expected the trajectory to close up for lambda > 0")
        T = float(sol.t_events[0][0])
    else:
        T = math.inf
    t_end = T if closes else t_max
    ts = np.linspace(0.0, t_end, samples)
    dense = sol.sol
    Y = dense(ts)

    def warp(t):
        return dense(np.asarray(t, dtype=float))[1] / forcing

    eps = 1e-3 * t_end
    chart_dom_hi = [t_end - (eps if closes else 0.0)] + [math.inf] * (n - 1)

    def g(pts):
        t = pts[..., 0]
        y = pts[..., 1:]
        ph = dense(np.clip(t, 0.0, t_end))[1] / forcing
        q = 1.0 + 0.25 * np.sum(y * y, axis=-1)
        out = np.zeros(pts.shape[:-1] + (n, n))
        out[..., 0, 0] = 1.0
        idx = np.arange(1, n)
        out[..., idx, idx] = ((ph / q) ** 2)[..., None]
        return out

    chart = ChartMetric(
        n, g, domain=Box([0.0] + [-math.inf] * (n - 1), chart_dom_hi),
        coord_names=("t",) + tuple(f"x{i}" for i in range(1, n)),
        name="obata-reconstruction",
    )
    return ObataSolution(T=T, t=ts, u=Y[0], uprime=Y[1], chart=chart, warp=warp, dense=dense)


def obata_residual(s, lambda_, kappa, samples, cfg=DEFAULT_FD, einstein_tol=1e-4):
    """Sup norm of Hess v + (2 lambda v - kappa) g for v = e^{-f/m}.

    Precondition: the input is weighted Einstein at ``lambda_`` to within
    ``einstein_tol`` (checked; violations raise ``PreconditionError``).
    """
    P = np.atleast_2d(np.asarray(samples, dtype=float))
    st = wt.weighted_state(s, P, cfg)
    g = st["jet"].g
    dev = st["schouten"] - lambda_ * g
    eins = wt._sup_orthonormal(dev, g)
    if eins > einstein_tol:
        raise PreconditionError(
            f"input is not weighted Einstein at lambda={lambda_} "
            f"(residual {eins:.3e} > {einstein_tol:.1e})"
        )
    m = s.m
    v_field = ScalarField(lambda pts: np.exp(-s.f(pts) / m), name="v")
    out = 0.0
    sc = tc.scalar_calculus_batch(s.chart, v_field, P, cfg, jet=st["jet"])
    for hv, vv, gg in zip(sc["hess"], sc["value"], g):
        resid = hv + (2.0 * lambda_ * vv - kappa) * gg
        out = max(out, tc.sup_norm_orthonormal(resid, gg))
    return float(out)


# ---------------------------------------------------------------------------
# Branch classification (local dichotomy)
# ---------------------------------------------------------------------------


@dataclass
class BranchVerdict:
    branch: Branch
    lambda_fit: float
    ode_residual: float
    defects: BranchDefects
    fitted: dict = field(default_factory=dict)
    forced: dict = field(default_factory=dict)


def _fit_lambda(w, ts):
    """Estimate lambda by inverting the warp equation, averaged over samples."""
    if w.lambda_target is not None:
        return float(w.lambda_target)
    ph = w.phi(ts)
    ph1 = w.phi.d1(ts)
    ph2 = w.phi.d2(ts)
    vals = (w.fiber.beta - ph2 * ph - (w.n - 2) * ph1**2) / (2.0 * (w.n - 1) * ph**2)
    return float(np.mean(vals))


def classify_branch(w, ts=None, tol=1e-8, defect_tol=1e-6):
    """Dichotomy verdict for a warped SMMS passing the residual system.

    Einstein branch: the warp satisfies phi'' = -2 lambda phi, and the
    underlying metric has Ricci tensor 2(n-1) lambda g.  Exceptional branch:
    phi is proportional to e^{-f/(n-1)} and the data are forced to
    m = 1/2, mu = 0, beta = 0, lambda = 0 with phi = A (B t)^{1/(n-1)},
    f = -log(B t); the constants (A, B) are fitted from samples.
    """
    if ts is None:
        ts = w.sample_grid(9)
    ts = np.asarray(ts, dtype=float)
    lam = _fit_lambda(w, ts)
    res = ode_residuals(w, lam, ts).max_abs()
    defects = branch_probe(w, lam, ts)
    if res > tol:
        return BranchVerdict(Branch.INDETERMINATE, lam, res, defects)

    if defects.einstein_defect <= defect_tol:
        return BranchVerdict(
            Branch.EINSTEIN, lam, res, defects,
            fitted={"ricci_fiber": 2.0 * (w.n - 1) * lam},
        )
    if defects.branch2_defect <= defect_tol:
        forced = {"m": 0.5, "mu": 0.0, "beta": 0.0, "lambda": 0.0}
        consistent = (
            w.m == 0.5
            and (w.mu in (None, 0.0))
            and w.fiber.beta == 0.0
            and abs(lam) <= tol
            and defects.fprime_sq_defect <= defect_tol
        )
        if not consistent:
            return BranchVerdict(Branch.INDETERMINATE, lam, res, defects, forced=forced)
        B_fit = float(np.mean(np.exp(-w.f(ts)) / ts))
        A_fit = float(np.mean(w.phi(ts) * (B_fit * ts) ** (-1.0 / (w.n - 1))))
        phi_err = np.max(np.abs(w.phi(ts) - A_fit * (B_fit * ts) ** (1.0 / (w.n - 1))))
        f_err = np.max(np.abs(w.f(ts) + np.log(B_fit * ts)))
        return BranchVerdict(
            Branch.NON_EINSTEIN_EXAMPLE_1_2, 0.0, res, defects,
            fitted={"A": A_fit, "B": B_fit, "fit_residual": float(max(phi_err, f_err))},
            forced=forced,
        )
    return BranchVerdict(Branch.INDETERMINATE, lam, res, defects)


# ---------------------------------------------------------------------------
# Completeness obstruction: Ricci blowup probe
# ---------------------------------------------------------------------------


@dataclass
class BlowupReport:
    diverges: bool
    rate_exponent: float
    coefficient: float
    max_value: float


def blowup_probe(w, endpoint="left", samples=None, tol=1e-6):
    """Fit ric(d_t, d_t) ~ c * d^{-k} against the distance d to an endpoint.

    ``diverges`` is set when the fitted exponent reaches 1 and the values
    exceed 1/tol along the approach.
    """
    t0, t1 = w.interval
    edge = t0 if endpoint == "left" else t1
    if not math.isfinite(edge):
        grid = w.sample_grid(9)
        vals = -(w.n - 1) * w.phi.d2(grid) / w.phi(grid)
        return BlowupReport(False, 0.0, 0.0, float(np.max(np.abs(vals))))
    if samples is None:
        d = np.geomspace(1e-5, 0.2, 12)
    else:
        d = np.abs(np.asarray(samples, dtype=float) - edge)
    ts = edge + d if endpoint == "left" else edge - d
    if np.any(ts <= t0) or np.any(ts >= t1):
        raise DomainError("blowup samples must be strictly interior")
    vals = -(w.n - 1) * w.phi.d2(ts) / w.phi(ts)
    mx = float(np.max(np.abs(vals)))
    if np.any(np.abs(vals) < 1e-300) or mx < 10.0:
        return BlowupReport(False, 0.0, 0.0, mx)
    k, logc = np.polyfit(np.log(d), np.log(np.abs(vals)), 1)
    k = -float(k)
    c = float(math.exp(logc)) * float(np.sign(vals[0]))
    return BlowupReport(bool(k >= 1.0 and mx > 1.0 / tol), k, c, mx)


# ---------------------------------------------------------------------------
# Critical points of v and global matching
# ---------------------------------------------------------------------------


def v_critical_points(w, window=None, grid=512, deadband=1e-9):
    """Count zeros of v' = (e^{-f/m})' over the closure of the window.

    Endpoint zeros (detected through a dead band) count once each; interior
    zeros are counted as strict sign changes, which avoids double counting
    tangential zeros.
    """
    t0, t1 = w.interval if window is None else window
    if not math.isfinite(t0):
        t0 = -4.0
    if not math.isfinite(t1):
        t1 = 4.0
    ts = np.linspace(t0, t1, grid)
    vprime = -(w.f.d1(ts) / w.m) * np.exp(-w.f(ts) / w.m)
    scale = max(float(np.max(np.abs(vprime))), 1e-300)
    db = deadband * scale
    count = 0
    if abs(vprime[0]) <= db:
        count += 1
    if abs(vprime[-1]) <= db:
        count += 1
    inner = vprime[np.abs(vprime) > db]
    count += int(np.sum(np.sign(inner[1:]) != np.sign(inner[:-1])))
    return count


class GlobalCase(str, Enum):
    SPHERE = "sphere"
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"
    WARPED_RICCI_FLAT = "warped-ricci-flat"
    INCOMPLETE = "incomplete"
    UNMATCHED = "unmatched"


@dataclass
class GlobalVerdict:
    case: GlobalCase
    fitted_params: FamilyParams
    fit_residual: float
    reason: str = ""
    quasi_einstein: bool = False


def _lstsq_fit(design, target):
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = float(np.max(np.abs(design @ coef - target)))
    return coef, resid


def match_global(w, report, tol=1e-4, cfg=DEFAULT_FD):
    """Match a residual-verified input against the complete model spaces.

    Dispatch: exceptional-branch inputs are incomplete by Ricci blowup;
    Einstein-branch inputs are matched by the sign of the fitted lambda and
    the critical points of v = e^{-f/m} (sphere / euclidean / hyperbolic
    when v has critical points, the exponential-warp family otherwise).
    """
    if not isinstance(w, WarpedSMMS):
        if report.max_residual() > tol:
            return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(),
                                 math.inf, reason="residuals above tolerance")
        return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(), math.inf,
                             reason="no warped structure available for matching")
    if report.max_residual() > tol:
        return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(), math.inf,
                             reason="residuals above tolerance")

    lam = report.lambda_fit
    quasi = abs(report.kappa) <= 10.0 * max(report.kappa_spread, tol)

    if report.branch is Branch.NON_EINSTEIN_EXAMPLE_1_2:
        probe = blowup_probe(w, "left")
        if probe.diverges:
            return GlobalVerdict(
                GlobalCase.INCOMPLETE, FamilyParams(n=w.n, m=w.m),
                0.0, reason="ricci-blowup", quasi_einstein=False,
            )
        return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(), math.inf,
                             reason="exceptional branch without blowup evidence")

    ts = w.sample_grid(257)
    v = np.exp(-w.f(ts) / w.m)
    ncrit = v_critical_points(w)

    if ncrit >= 1:
        if lam > tol:
            s = math.sqrt(2.0 * lam)
            design = np.stack([np.ones_like(ts), np.cos(s * ts), np.sin(s * ts)], axis=1)
            coef, resid = _lstsq_fit(design, v)
            A = float(coef[0])
            B = float(math.hypot(coef[1], coef[2]))
            return GlobalVerdict(
                GlobalCase.SPHERE, FamilyParams(n=w.n, m=w.m, lambda_=lam, A=A, B=B),
                resid, quasi_einstein=quasi,
            )
        if abs(lam) <= tol:
            design = np.stack([np.ones_like(ts), ts, ts * ts], axis=1)
            coef, resid = _lstsq_fit(design, v)
            Bq = float(coef[2])
            t_c = -float(coef[1]) / (2.0 * Bq) if Bq != 0 else 0.0
            A = float(coef[0]) - Bq * t_c**2
            return GlobalVerdict(
                GlobalCase.EUCLIDEAN, FamilyParams(n=w.n, m=w.m, lambda_=0.0, A=A, B=Bq),
                resid, quasi_einstein=quasi,
            )
        s = math.sqrt(-2.0 * lam)
        design = np.stack([np.ones_like(ts), np.cosh(s * ts), np.sinh(s * ts)], axis=1)
        coef, resid = _lstsq_fit(design, v)
        c, sh = float(coef[1]), float(coef[2])
        if abs(c) <= abs(sh):
            return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(), math.inf,
                                 reason="v is not of hyperbolic-cosine type")
        A = float(coef[0])
        B = float(math.sqrt(c * c - sh * sh))
        return GlobalVerdict(
            GlobalCase.HYPERBOLIC, FamilyParams(n=w.n, m=w.m, lambda_=lam, A=A, B=B),
            resid, quasi_einstein=quasi,
        )

    # No critical points: only the exponential-warp family with lambda < 0 remains.
    if lam < -tol:
        s = math.sqrt(-2.0 * lam)
        A = float(np.mean(w.phi(ts) * np.exp(-s * ts)))
        design = np.stack([np.ones_like(ts), np.exp(s * ts)], axis=1)
        coef, resid = _lstsq_fit(design, v)
        AC = float(coef[1])
        B = float(coef[0]) + AC
        C = AC / A if A != 0 else math.inf
        phi_resid = float(np.max(np.abs(w.phi(ts) - A * np.exp(s * ts))))
        resid = max(resid, phi_resid)
        ok_constraints = A > 0 and B > 0 and C > 0 and A * C <= B * (1.0 + 1e-9)
        mu_ok = (w.m == 1.0) or (
            w.mu is not None and abs(w.mu - (-2.0 * (B - A * C) ** 2 * lam)) <= 1e-6 * (1 + abs(w.mu))
        )
        if resid <= max(tol, 1e-6) and ok_constraints and mu_ok:
            return GlobalVerdict(
                GlobalCase.WARPED_RICCI_FLAT,
                FamilyParams(n=w.n, m=w.m, lambda_=lam, A=A, B=B, C=C),
                resid, quasi_einstein=quasi,
            )
        return GlobalVerdict(GlobalCase.UNMATCHED,
                             FamilyParams(n=w.n, m=w.m, lambda_=lam, A=A, B=B, C=C),
                             resid, reason="exponential-warp fit failed")
    return GlobalVerdict(GlobalCase.UNMATCHED, FamilyParams(), math.inf,
                         reason="no critical points and lambda >= 0")
