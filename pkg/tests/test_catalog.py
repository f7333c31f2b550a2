"""Family constructors: constraints, forced parameters, golden round-trips."""

import math

import numpy as np
import pytest

from smms import catalog as cat
from smms import tensor_core as tc
from smms import warped_closed as wc
from smms import weighted as wt
from smms.catalog import FamilyId, FamilyParams
from smms.errors import ParamConstraintViolation


# ---------------------------------------------------------------------------
# Constraint validation (clause strings are part of the contract)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("fid,params,clause", [
    (FamilyId.WEIGHTED_SPHERE,
     FamilyParams(n=3, m=2.0, lambda_=0.5, A=1.0, B=2.0), "A>|B|"),
    (FamilyId.WEIGHTED_SPHERE,
     FamilyParams(n=3, m=2.0, lambda_=-0.5, A=2.0, B=1.0), "lambda>0"),
    (FamilyId.WEIGHTED_SPHERE,
     FamilyParams(n=3, m=2.0, lambda_=0.5, A=2.0, B=0.0), "B != 0"),
    (FamilyId.WEIGHTED_EUCLIDEAN,
     FamilyParams(n=3, m=2.0, A=-1.0, B=1.0), "A in R+"),
    (FamilyId.WEIGHTED_HYPERBOLIC,
     FamilyParams(n=3, m=2.0, lambda_=-0.5, A=-2.0, B=1.0), "A>-B"),
    (FamilyId.WEIGHTED_HYPERBOLIC,
     FamilyParams(n=3, m=2.0, lambda_=0.5, A=0.0, B=1.0), "lambda<0"),
    (FamilyId.EXAMPLE_1_2, FamilyParams(n=4, A=-1.0, B=1.0), "A in R+"),
    (FamilyId.EXAMPLE_1_2, FamilyParams(n=4, A=1.0, B=1.0, m=0.75), "m=1/2"),
    (FamilyId.THM_4_1_POSITIVE,
     FamilyParams(n=4, m=2.0, lambda_=0.5, c1=-1.0, c2=0.0, c3=2.0, c4=1.0), "c1 in R+"),
    (FamilyId.THM_4_1_POSITIVE,
     FamilyParams(n=4, m=2.0, lambda_=0.5, c1=1.0, c2=0.0, c3=2.0, c4=0.0), "c4 != 0"),
    (FamilyId.THM_4_1_ZERO,
     FamilyParams(n=4, m=2.0, lambda_=0.0, c1=0.4, c2=-1.0, c3=1.5, c4=0.3), "c2 in R+"),
    (FamilyId.THM_4_1_NEGATIVE,
     FamilyParams(n=4, m=2.0, lambda_=-0.5, c1=-0.5, c2=0.2, c3=1.5, c4=0.2), "c1+c2 in R+"),
    (FamilyId.THM_1_4_3B,
     FamilyParams(n=5, m=2.0, lambda_=-0.5, A=2.0, B=1.0, C=1.0), "AC<=B"),
    (FamilyId.THM_1_4_3B,
     FamilyParams(n=5, m=2.0, lambda_=0.5, A=1.0, B=2.0, C=1.0), "lambda<0"),
    (FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=-1.0), "m in R+"),
    (FamilyId.EXAMPLE_4_3,
     FamilyParams(m=2.0, lambda_=0.4, c1=1.0, c2=0.2, c3=1.5, c4=0.5, n=4), "n=5"),
])
def test_constraint_violations(fid, params, clause):
    with pytest.raises(ParamConstraintViolation) as err:
        cat.build_family(fid, params)
    assert err.value.clause == clause


def test_mu_forced_for_m_not_one():
    p = FamilyParams(n=3, m=2.0, lambda_=0.5, A=2.0, B=1.0, mu=0.123)
    with pytest.raises(ParamConstraintViolation):
        cat.build_family(FamilyId.WEIGHTED_SPHERE, p)


def test_mu_free_for_m_one():
    p = FamilyParams(n=3, m=1.0, lambda_=0.5, A=2.0, B=1.0, mu=0.123)
    w = cat.build_family(FamilyId.WEIGHTED_SPHERE, p)
    assert w.mu == 0.123
    # outputs do not depend on it
    s1 = wc.warped_chart(w)
    s2 = wc.warped_chart(cat.build_family(
        FamilyId.WEIGHTED_SPHERE, FamilyParams(n=3, m=1.0, lambda_=0.5, A=2.0, B=1.0)))
    pt = np.array([1.0, 0.05, -0.05])
    st1 = wt.weighted_state(s1, pt[None, :])
    st2 = wt.weighted_state(s2, pt[None, :])
    assert np.array_equal(st1["schouten"], st2["schouten"])


# ---------------------------------------------------------------------------
# Forced parameters
# ---------------------------------------------------------------------------


class TestForcedParameters:
    def test_sphere(self):
        p = FamilyParams(n=3, m=2.0, lambda_=0.5, A=2.0, B=1.0)
        w = cat.build_family(FamilyId.WEIGHTED_SPHERE, p)
        assert w.mu == pytest.approx(2.0 * 0.5 * (1.0 - 4.0))  # -3
        assert w.fiber.beta == 1.0
        assert w.interval[1] == pytest.approx(math.pi / math.sqrt(1.0))

    def test_euclidean(self):
        w = cat.build_family(FamilyId.WEIGHTED_EUCLIDEAN,
                             FamilyParams(n=3, m=2.0, A=1.0, B=1.0))
        assert w.mu == -4.0

    def test_thm41_negative_mu(self):
        c1, c2, c3, c4, lam = 0.5, 0.3, 1.5, 0.2, -0.5
        p = FamilyParams(n=4, m=2.0, lambda_=lam, c1=c1, c2=c2, c3=c3, c4=c4)
        w = cat.build_family(FamilyId.THM_4_1_NEGATIVE, p)
        expect = -2.0 * (2.0 * (c1 - c2) * c3 * c4 + (c1 + c2) ** 2 * c4**2 + c3**2) * lam
        assert w.mu == pytest.approx(expect)
        assert w.fiber.beta == pytest.approx(8.0 * c1 * c2 * 2 * lam)

    def test_thm14_3b_density_form(self):
        p = FamilyParams(n=5, m=2.0, lambda_=-0.5, A=1.0, B=2.0, C=1.0)
        w = cat.build_family(FamilyId.THM_1_4_3B, p)
        assert w.mu == pytest.approx(-2.0 * (2.0 - 1.0) ** 2 * (-0.5))  # = 1
        t = 0.7
        s = math.sqrt(1.0)
        expect_f = -2.0 * math.log(2.0 + 1.0 * (math.exp(s * t) - 1.0))
        assert float(w.f(t)) == pytest.approx(expect_f, rel=1e-12)
        assert float(w.phi(t)) == pytest.approx(math.exp(s * t), rel=1e-12)


# ---------------------------------------------------------------------------
# The conformal counterexample chart is the power warp in disguise
# ---------------------------------------------------------------------------


def test_counterexample_to_power_warp_correspondence():
    # With t = (2/3) x1^{3/2}, A=1, B=3/2, the m=1/2 conformal chart matches
    # the exceptional warped family: phi(t(x1)) = sqrt(x1) and
    # f(t(x1)) = -(3/2) log(x1).
    w = cat.build_family(FamilyId.EXAMPLE_1_2, FamilyParams(n=4, A=1.0, B=1.5))
    for x1 in (0.8, 1.0, 1.4):
        t = (2.0 / 3.0) * x1**1.5
        assert float(w.phi(t)) == pytest.approx(math.sqrt(x1), rel=1e-12)
        assert float(w.f(t)) == pytest.approx(-1.5 * math.log(x1), rel=1e-12, abs=1e-12)
    # both presentations are weighted Einstein with weighted harmonic Weyl
    s_chart = cat.build_family(FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=0.5))
    rep_c = wt.condition_report(s_chart, cat.default_samples(s_chart, 4))
    assert rep_c.einstein_residual < 1e-6
    assert rep_c.harmonic_residual < 1e-5
    s_warp = wc.warped_chart(w)
    rep_w = wt.condition_report(s_warp, cat.default_samples(w, 4))
    assert rep_w.einstein_residual < 1e-6
    assert rep_w.harmonic_residual < 1e-5


# ---------------------------------------------------------------------------
# Expected records and golden round-trips
# ---------------------------------------------------------------------------


class TestFamilyExpected:
    def test_euclidean_expected(self):
        exp = cat.family_expected(FamilyId.WEIGHTED_EUCLIDEAN,
                                  FamilyParams(n=3, m=2.0, A=1.0, B=1.0))
        assert exp.kappa == 2.0
        assert exp.mu_forced == -4.0

    def test_sphere_expected_standard_note(self):
        exp = cat.family_expected(FamilyId.WEIGHTED_SPHERE,
                                  FamilyParams(n=4, m=2.0, lambda_=0.5, A=1.0, B=1.0))
        assert exp.kappa == pytest.approx(1.0)
        assert any("standard" in note for note in exp.notes)

    def test_hyperbolic_quasi_note(self):
        exp = cat.family_expected(FamilyId.WEIGHTED_HYPERBOLIC,
                                  FamilyParams(n=3, m=2.0, lambda_=-0.5, A=0.0, B=1.0))
        assert exp.kappa == 0.0
        assert any("quasi" in note for note in exp.notes)

    def test_power_warp_goldens(self):
        exp = cat.family_expected(FamilyId.EXAMPLE_1_2, FamilyParams(n=4, A=1.0, B=1.0))
        vals = {g.name: g.value for g in exp.golden_components}
        assert vals["weyl_w(t,x1,t,x1) at t=1"] == pytest.approx(2.0 / 9.0)
        assert vals["weyl_w(x1,x2,x1,x2) at t=1"] == pytest.approx(-1.0 / 9.0)
        assert vals["tau at t=1"] == pytest.approx(2.0 / 3.0)

    def test_counterexample_goldens(self):
        exp1 = cat.family_expected(FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=1.0))
        assert exp1.golden_components[0].value == pytest.approx(4.0)
        exp2 = cat.family_expected(FamilyId.COUNTEREXAMPLE_3_2, FamilyParams())
        assert exp2.golden_components[0].value == pytest.approx(4.0 * (math.sqrt(6) - 3) / 9.0)


def _eval_golden(gc, obj):
    s = wc.warped_chart(obj) if isinstance(obj, wc.WarpedSMMS) else obj
    pt = np.asarray(gc.point, dtype=float)
    if gc.kind == "weyl_w":
        return float(wt.weighted_weyl(s, pt)[gc.indices])
    if gc.kind == "dfw":
        return float(wt.weighted_weyl_divergence(s, pt)[gc.indices])
    if gc.kind == "tau":
        return tc.curvature_bundle(s.chart, pt).scalar
    if gc.kind == "weyl":
        return float(tc.weyl(s.chart, pt)[gc.indices])
    raise AssertionError(gc.kind)


@pytest.mark.parametrize("fid,params", [
    (FamilyId.EXAMPLE_1_2, FamilyParams(n=4, A=1.0, B=1.0)),
    (FamilyId.EXAMPLE_1_2, FamilyParams(n=5, A=1.2, B=0.8)),
    (FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=1.0)),
    (FamilyId.COUNTEREXAMPLE_3_1, FamilyParams(m=3.0)),
    (FamilyId.COUNTEREXAMPLE_3_2, FamilyParams()),
    (FamilyId.EXAMPLE_4_3, FamilyParams(m=2.0, lambda_=0.4, c1=1.0, c2=0.2, c3=1.5, c4=0.5)),
    (FamilyId.EXAMPLE_4_3, FamilyParams(m=1.5, lambda_=-0.3, c1=0.6, c2=0.4, c3=1.4, c4=-0.4)),
], ids=str)
def test_golden_round_trips(fid, params):
    obj = cat.build_family(fid, params)
    exp = cat.family_expected(fid, params)
    assert exp.golden_components, "family should carry golden components"
    for gc in exp.golden_components:
        actual = _eval_golden(gc, obj)
        assert actual == pytest.approx(gc.value, rel=1e-4, abs=1e-6), gc.name


def test_quasi_einstein_alpha_constant():
    # Scale zero: rho_w = alpha g with alpha = 2(n+m-1) lambda, constant.
    p = FamilyParams(n=3, m=2.0, lambda_=-0.5, A=0.0, B=1.0)
    w = cat.build_family(FamilyId.WEIGHTED_HYPERBOLIC, p)
    s = wc.warped_chart(w)
    pts = cat.default_samples(w, 5)
    st = wt.weighted_state(s, pts)
    alpha = 2.0 * (3 + 2 - 1) * (-0.5)
    for rho, g in zip(st["rho_w"], st["jet"].g):
        assert tc.sup_norm_orthonormal(rho - alpha * g, g) < 1e-6


def test_default_samples_interior():
    w = cat.build_family(FamilyId.WEIGHTED_SPHERE,
                         FamilyParams(n=3, m=2.0, lambda_=0.5, A=2.0, B=1.0))
    pts = cat.default_samples(w, 9)
    assert pts.shape == (9, 3)
    assert np.all(pts[:, 0] > 0) and np.all(pts[:, 0] < math.pi)
