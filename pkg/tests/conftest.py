"""Shared chart builders for the test suite."""

import numpy as np
import pytest

from smms import tensor_core as tc
from smms import weighted as wt


def power_warp_chart(n=4, A=1.0, B=1.0):
    """dt^2 + phi^2 delta with phi = A (B t)^{1/(n-1)} on t > 0."""
    q = 1.0 / (n - 1)

    def g(pts):
        t = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (n, n))
        out[..., 0, 0] = 1.0
        idx = np.arange(1, n)
        out[..., idx, idx] = ((A * (B * t) ** q) ** 2)[..., None]
        return out

    lower = [0.0] + [-np.inf] * (n - 1)
    return tc.ChartMetric(n, g, domain=tc.Box(lower, [np.inf] * n), name="power-warp")


def power_warp_smms(n=4, A=1.0, B=1.0):
    chart = power_warp_chart(n, A, B)
    f = tc.ScalarField(lambda pts: -np.log(B * pts[..., 0]), name="density")
    return wt.SMMSChart(chart, f, m=0.5, mu=0.0)


def conformal_power_smms(n=4, m=1.0):
    """g_ii = x1^{2m} with f = -2m(m+1) log x1 (4-dim counterexample chart)."""

    def g(pts):
        x1 = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (n, n))
        idx = np.arange(n)
        out[..., idx, idx] = (x1 ** (2.0 * m))[..., None]
        return out

    lower = [0.0] + [-np.inf] * (n - 1)
    chart = tc.ChartMetric(n, g, domain=tc.Box(lower, [np.inf] * n), name="conformal-power")
    f = tc.ScalarField(lambda pts: -2.0 * m * (m + 1.0) * np.log(pts[..., 0]), name="density")
    return wt.SMMSChart(chart, f, m=m, mu=0.0)


def sphere_block_chart():
    """diag(1, sin^2 theta, 1): unit 2-sphere times a line."""

    def g(pts):
        th = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (3, 3))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = np.sin(th) ** 2
        out[..., 2, 2] = 1.0
        return out

    return tc.ChartMetric(
        3, g, domain=tc.Box([0.05, -10.0, -10.0], [np.pi - 0.05, 10.0, 10.0]),
        coord_names=("theta", "phi", "z"), name="sphere-block",
    )


@pytest.fixture(scope="session")
def flat3():
    return tc.constant_metric(3)


@pytest.fixture(scope="session")
def flat4():
    return tc.constant_metric(4)


@pytest.fixture(scope="session")
def round_s3():
    return tc.conformal_space_form_metric(3, 1.0)
