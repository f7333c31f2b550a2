"""Dichotomy verdicts, Obata machinery, blowup probe, global matching."""

import dataclasses
import math

import numpy as np
import pytest

from smms import catalog as cat
from smms import classify as cl
from smms import tensor_core as tc
from smms import warped_closed as wc
from smms import weighted as wt
from smms.catalog import FamilyId, FamilyParams
from smms.errors import InvalidProblem, PreconditionError


def _sphere(n=3, m=2.0, lam=0.5, A=2.0, B=1.0):
    return cat.build_family(FamilyId.WEIGHTED_SPHERE,
                            FamilyParams(n=n, m=m, lambda_=lam, A=A, B=B))


def _example12(n=4, A=1.0, B=1.0):
    return cat.build_family(FamilyId.EXAMPLE_1_2, FamilyParams(n=n, A=A, B=B))


# ---------------------------------------------------------------------------
# Generic integrator
# ---------------------------------------------------------------------------


class TestIntegrateOde:
    def test_harmonic_oscillator(self):
        sol = cl.integrate_ode(lambda t, y: [y[1], -y[0]], [1.0, 0.0], (0.0, 2 * math.pi))
        y_end = sol.sol(2 * math.pi)
        assert y_end[0] == pytest.approx(1.0, abs=1e-8)

    def test_exponential(self):
        sol = cl.integrate_ode(lambda t, y: [y[0]], [1.0], (0.0, 1.0))
        assert sol.sol(1.0)[0] == pytest.approx(math.e, abs=1e-9)

    def test_event_location(self):
        def ev(t, y):
            return y[1]

        ev.terminal = True
        ev.direction = 1.0
        sol = cl.integrate_ode(lambda t, y: [y[1], -y[0]], [1.0, 0.0],
                               (0.0, 10.0), events=[ev])
        assert sol.t_events[0][0] == pytest.approx(math.pi, abs=1e-10)


# ---------------------------------------------------------------------------
# Obata initial value problem
# ---------------------------------------------------------------------------


class TestObataIvp:
    def test_positive_lambda_closed_form(self):
        # u = kappa/(2 lam) + (xi - kappa/(2 lam)) cos(sqrt(2 lam) t)
        prob = cl.ObataProblem(lambda_=0.5, kappa=2.0, xi=3.0)
        sol = cl.solve_obata_ivp(prob, n=3)
        assert sol.T == pytest.approx(math.pi, abs=1e-8)
        ts = np.linspace(0.0, 3.0, 9)
        assert np.max(np.abs(sol.dense(ts)[0] - (2.0 + np.cos(ts)))) < 1e-8

    def test_zero_lambda_polynomial(self):
        prob = cl.ObataProblem(lambda_=0.0, kappa=2.0, xi=1.0)
        sol = cl.solve_obata_ivp(prob, n=3, t_max=3.0)
        assert sol.T == math.inf
        ts = np.linspace(0.0, 3.0, 7)
        assert np.max(np.abs(sol.dense(ts)[0] - (1.0 + ts**2))) < 1e-8

    def test_negative_lambda_cosh(self):
        lam, kap, xi = -0.5, 1.0, 2.0
        prob = cl.ObataProblem(lambda_=lam, kappa=kap, xi=xi)
        sol = cl.solve_obata_ivp(prob, n=3, t_max=3.0)
        c = kap / (2 * lam)
        ts = np.linspace(0.0, 3.0, 7)
        expect = c + (xi - c) * np.cosh(ts)
        assert np.max(np.abs(sol.dense(ts)[0] - expect)) < 1e-8

    def test_invalid_problem(self):
        with pytest.raises(InvalidProblem):
            cl.ObataProblem(lambda_=0.5, kappa=2.0, xi=2.0)

    def test_sphere_reconstruction(self):
        # The reconstructed chart agrees pointwise with the catalog sphere
        # chart, with v = u(t).
        lam, A, B = 0.5, 2.0, 1.0
        w = _sphere(lam=lam, A=A, B=B)
        s_cat = wc.warped_chart(w)
        kappa = 2.0 * lam * A
        prob = cl.ObataProblem(lambda_=lam, kappa=kappa, xi=A + B)
        sol = cl.solve_obata_ivp(prob, n=3)
        assert sol.T == pytest.approx(math.pi / math.sqrt(2 * lam), abs=1e-8)
        for t in (0.4, 1.1, 2.0):
            for y in (np.zeros(2), np.array([0.1, -0.05])):
                pt = np.concatenate([[t], y])
                g_obata = sol.chart(pt)
                g_cat = s_cat.chart(pt)
                assert np.max(np.abs(g_obata - g_cat)) < 1e-6
            u_t = float(sol.dense(t)[0])
            v_t = A + B * math.cos(math.sqrt(2 * lam) * t)
            assert u_t == pytest.approx(v_t, abs=1e-8)


class TestObataResidual:
    @pytest.mark.parametrize("fid,params,kappa", [
        (FamilyId.WEIGHTED_SPHERE,
         FamilyParams(n=3, m=2.0, lambda_=0.5, A=2.0, B=1.0), 2.0),
        (FamilyId.WEIGHTED_EUCLIDEAN,
         FamilyParams(n=3, m=2.0, A=1.0, B=1.0), 2.0),
        (FamilyId.WEIGHTED_HYPERBOLIC,
         FamilyParams(n=3, m=2.0, lambda_=-0.5, A=0.5, B=1.0), -0.5),
    ], ids=["sphere", "euclidean", "hyperbolic"])
    def test_space_forms(self, fid, params, kappa):
        w = cat.build_family(fid, params)
        s = wc.warped_chart(w)
        lam = w.lambda_target
        resid = cl.obata_residual(s, lam, kappa, cat.default_samples(w, 5))
        assert resid <= 1e-5

    def test_precondition_failure(self):
        s = cat.build_family(FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=1.0))
        with pytest.raises(PreconditionError):
            # lambda = 1 is wrong: the chart has P = 0.
            cl.obata_residual(s, 1.0, 0.0, cat.default_samples(s, 4))


# ---------------------------------------------------------------------------
# Branch classification
# ---------------------------------------------------------------------------


class TestClassifyBranch:
    def test_einstein_on_all_signs(self):
        cases = [
            FamilyParams(n=4, m=2.0, lambda_=0.5, c1=1.0, c2=0.0, c3=2.0, c4=1.0),
            FamilyParams(n=4, m=2.0, lambda_=0.0, c1=0.4, c2=1.0, c3=1.5, c4=0.3),
            FamilyParams(n=4, m=2.0, lambda_=-0.5, c1=0.5, c2=0.3, c3=1.5, c4=0.2),
        ]
        fids = [FamilyId.THM_4_1_POSITIVE, FamilyId.THM_4_1_ZERO, FamilyId.THM_4_1_NEGATIVE]
        for fid, p in zip(fids, cases):
            w = cat.build_family(fid, p)
            v = cl.classify_branch(w)
            assert v.branch is wt.Branch.EINSTEIN, fid
            assert v.lambda_fit == pytest.approx(p.lambda_, abs=1e-9)

    def test_exceptional_branch_with_fit(self):
        w = _example12(A=1.3, B=0.7)
        v = cl.classify_branch(w)
        assert v.branch is wt.Branch.NON_EINSTEIN_EXAMPLE_1_2
        assert v.fitted["A"] == pytest.approx(1.3, abs=1e-6)
        assert v.fitted["B"] == pytest.approx(0.7, abs=1e-6)
        assert v.forced == {"m": 0.5, "mu": 0.0, "beta": 0.0, "lambda": 0.0}

    def test_invalid_m_is_indeterminate(self):
        # The power-law warp with m = 3/4 fails the residual system.
        w = _example12()
        w_bad = dataclasses.replace(w, m=0.75)
        v = cl.classify_branch(w_bad)
        assert v.branch is wt.Branch.INDETERMINATE
        assert v.ode_residual > 1e-3

    def test_defect_separation(self):
        # A verdict never has both defects small: they are separated by
        # orders of magnitude on every catalog family.
        for w in (_example12(), _sphere(),
                  cat.build_family(FamilyId.THM_1_4_3B,
                                   FamilyParams(n=5, m=2.0, lambda_=-0.5, A=1.0, B=2.0, C=1.0))):
            v = cl.classify_branch(w)
            small = min(v.defects.einstein_defect, v.defects.branch2_defect)
            large = max(v.defects.einstein_defect, v.defects.branch2_defect)
            assert small <= 1e-6
            assert large >= 1e-3 * 1e3 * small + 1e-2


# ---------------------------------------------------------------------------
# Blowup probe
# ---------------------------------------------------------------------------


class TestBlowupProbe:
    def test_power_warp_blows_up(self):
        w = _example12()
        rep = cl.blowup_probe(w, "left")
        assert rep.diverges
        assert rep.rate_exponent == pytest.approx(2.0, abs=0.02)
        assert rep.coefficient == pytest.approx(2.0 / 3.0, abs=1e-2)

    def test_ricci_value_near_edge(self):
        w = _example12()
        cv = wc.warped_curvature_closed(w, 0.1)
        assert cv.ricci_tt == pytest.approx((2.0 / 3.0) / 0.01, rel=1e-9)

    def test_einstein_family_bounded(self):
        p = FamilyParams(n=4, m=2.0, lambda_=-0.5, c1=0.5, c2=0.3, c3=1.5, c4=0.2)
        w = cat.build_family(FamilyId.THM_4_1_NEGATIVE, p)
        rep = cl.blowup_probe(w, "left")
        assert not rep.diverges

    def test_flat_product_bounded(self):
        phi = wc.ScalarCurve(lambda t: np.ones_like(np.asarray(t, dtype=float)),
                             d1=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                             d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
        f = wc.ScalarCurve(lambda t: np.asarray(t, dtype=float),
                           d1=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                           d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
        w = wc.WarpedSMMS(n=3, interval=(0.0, 5.0), phi=phi, f=f,
                          fiber=wc.FiberSpec(dim=2, beta=0.0, realization="flat"), m=1.0)
        rep = cl.blowup_probe(w, "left")
        assert not rep.diverges
        assert abs(rep.coefficient) < 1e-9


# ---------------------------------------------------------------------------
# Critical points and global matching
# ---------------------------------------------------------------------------


class TestCriticalPoints:
    def test_counts_on_catalog_families(self):
        wsp = _sphere()
        weu = cat.build_family(FamilyId.WEIGHTED_EUCLIDEAN,
                               FamilyParams(n=3, m=2.0, A=1.0, B=1.0))
        why = cat.build_family(FamilyId.WEIGHTED_HYPERBOLIC,
                               FamilyParams(n=3, m=2.0, lambda_=-0.5, A=0.5, B=1.0))
        w3b = cat.build_family(FamilyId.THM_1_4_3B,
                               FamilyParams(n=5, m=2.0, lambda_=-0.5, A=1.0, B=2.0, C=1.0))
        assert cl.v_critical_points(wsp) == 2          # both poles
        assert cl.v_critical_points(weu) == 1          # t = 0
        assert cl.v_critical_points(why) == 1          # t = 0
        assert cl.v_critical_points(w3b) == 0


class TestMatchGlobal:
    def _report(self, w, k=5):
        s = wc.warped_chart(w)
        return wt.condition_report(s, cat.default_samples(w, k))

    def test_sphere_case(self):
        w = _sphere()
        gv = cl.match_global(w, self._report(w))
        assert gv.case is cl.GlobalCase.SPHERE
        assert gv.fitted_params.A == pytest.approx(2.0, abs=1e-6)
        assert gv.fitted_params.B == pytest.approx(1.0, abs=1e-6)
        assert gv.fit_residual < 1e-6

    def test_euclidean_case(self):
        w = cat.build_family(FamilyId.WEIGHTED_EUCLIDEAN,
                             FamilyParams(n=3, m=2.0, A=1.0, B=1.0))
        gv = cl.match_global(w, self._report(w))
        assert gv.case is cl.GlobalCase.EUCLIDEAN
        assert gv.fitted_params.A == pytest.approx(1.0, abs=1e-6)
        assert gv.fitted_params.B == pytest.approx(1.0, abs=1e-6)

    def test_hyperbolic_case_with_quasi_flag(self):
        w = cat.build_family(FamilyId.WEIGHTED_HYPERBOLIC,
                             FamilyParams(n=3, m=2.0, lambda_=-0.5, A=0.0, B=1.0))
        gv = cl.match_global(w, self._report(w))
        assert gv.case is cl.GlobalCase.HYPERBOLIC
        assert gv.quasi_einstein
        assert gv.fitted_params.A == pytest.approx(0.0, abs=1e-6)

    def test_warped_ricci_flat_case(self):
        w = cat.build_family(FamilyId.THM_1_4_3B,
                             FamilyParams(n=5, m=2.0, lambda_=-0.5, A=1.0, B=2.0, C=1.0))
        gv = cl.match_global(w, self._report(w))
        assert gv.case is cl.GlobalCase.WARPED_RICCI_FLAT
        assert gv.fitted_params.A == pytest.approx(1.0, abs=1e-5)
        assert gv.fitted_params.B == pytest.approx(2.0, abs=1e-5)
        assert gv.fitted_params.C == pytest.approx(1.0, abs=1e-5)

    def test_incomplete_case(self):
        w = _example12()
        gv = cl.match_global(w, self._report(w))
        assert gv.case is cl.GlobalCase.INCOMPLETE
        assert gv.reason == "ricci-blowup"

    def test_unmatched_on_bad_residuals(self):
        s = cat.build_family(FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=1.0))
        rep = wt.condition_report(s, cat.default_samples(s, 4))
        gv = cl.match_global(s, rep)
        assert gv.case is cl.GlobalCase.UNMATCHED


def test_einstein_branch_weyl_split():
    # On the Einstein branch the two halves of the weighted harmonicity
    # vanish separately: delta W = 0 and iota_{grad f} W = 0.
    p = FamilyParams(n=5, m=2.0, lambda_=0.4, c1=1.0, c2=0.2, c3=1.5, c4=0.5)
    w = cat.build_family(FamilyId.EXAMPLE_4_3, p)
    s = wc.warped_chart(w)
    cfg = tc.DEFAULT_FD
    for t in w.sample_grid(3):
        pt = np.zeros(5)
        pt[0] = t
        st = wt.weighted_state(s, pt[None, :], cfg)
        fld = wt._weyl_w_field(s, cfg)
        div = tc.divergence_batch(s.chart, fld, pt[None, :], cfg, jet=st["jet"])[0]
        iota = np.einsum("a,a...->...", st["grad_f"][0], fld(pt[None, :])[0])
        g = st["jet"].g[0]
        assert tc.sup_norm_orthonormal(div, g) <= 1e-4
        assert tc.sup_norm_orthonormal(iota, g) <= 1e-4
