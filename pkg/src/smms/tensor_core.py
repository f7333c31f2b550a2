"""Finite-difference Riemannian calculus on coordinate charts.

A metric is a batched callable returning symmetric positive-definite
matrices.  Christoffel symbols and curvature are assembled from central
difference jets of the metric (5-point by default, optional Richardson
extrapolation), so every quantity here acts as an independent numerical
oracle against closed-form expressions.

Sign conventions, fixed once and validated by the space-form tests:

* ``riemann`` is the (0,4) tensor with slot order (X, Y, Z, U) such that a
  space form of sectional curvature c satisfies R = (c/2) g (kn) g, i.e.
  R(X, Y, X, Y) > 0 on round spheres.
* ``ricci`` is the first-third trace of ``riemann`` with the inverse metric,
  positive on spheres.
* ``divergence`` contracts the first slot against an orthonormal frame
  obtained by Gram-Schmidt on the coordinate frame, under which
  dR(X,Y,Z) = (D_Y ric)(X,Z) - (D_Z ric)(X,Y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, RankMismatch, SingularMetric

EIG_FLOOR = 1e-12

# Central stencils: offsets and weights for first/second derivatives.
_D1 = {
    3: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    5: (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
}
_D2 = {
    3: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    5: (np.array([-2, -1, 0, 1, 2]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
}
# Richardson combination (16 f - c)/15 for 4th-order stencils, (4 f - c)/3 for 2nd.
_RICH = {3: (4.0, 3.0), 5: (16.0, 15.0)}


@dataclass(frozen=True)
class FDConfig:
    """Step-size and stencil policy for all finite-difference evaluations.

    ``rel_step`` drives the metric/scalar jets.  ``field_rel_step`` drives
    the outer differencing of tensor fields whose values are themselves
    finite-difference results (curvature, Schouten-type tensors); it is
    larger because the optimal step grows with the noise of the inner
    evaluation.
    """

    rel_step: float = 1e-3
    stencil: int = 5
    richardson: bool = True
    field_rel_step: float = 1e-2

    def __post_init__(self):
        if self.rel_step <= 0 or self.field_rel_step <= 0:
            raise ValueError("steps must be positive")
        if self.stencil not in (3, 5):
            raise ValueError("stencil must be 3 or 5")


DEFAULT_FD = FDConfig()


class Box:
    """Open axis-aligned box, bounds possibly infinite."""

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower/upper bound shapes differ")
        if np.any(self.lower >= self.upper):
            raise ValueError("box must have nonempty open interior")

    @classmethod
    def unbounded(cls, dim):
        return cls([-np.inf] * dim, [np.inf] * dim)

    @property
    def dim(self):
        return self.lower.size

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        return np.all(pts > self.lower, axis=-1) & np.all(pts < self.upper, axis=-1)

    def require_inside(self, points, what="point"):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = self.contains(pts)
        if not np.all(ok):
            bad = pts[~ok][0]
            raise DomainError(f"{what} {bad.tolist()} leaves the open domain")


class ChartMetric:
    """Coordinate chart with a batched metric callable.

    ``g`` maps points of shape (..., n) to symmetric matrices of shape
    (..., n, n).  Symmetry is enforced on evaluation; positive definiteness
    is checked against an eigenvalue floor wherever the metric is evaluated,
    and a violation raises ``SingularMetric`` carrying the offending point.
    """

    def __init__(self, dim, g, domain=None, coord_names=None, name="chart"):
        if dim < 3:
            raise ValueError("chart dimension must be at least 3")
        self.dim = int(dim)
        self._g = g
        self.domain = domain if domain is not None else Box.unbounded(dim)
        if self.domain.dim != dim:
            raise ValueError("domain dimension mismatch")
        self.coord_names = tuple(coord_names) if coord_names else tuple(
            f"x{i + 1}" for i in range(dim)
        )
        if len(self.coord_names) != dim:
            raise ValueError("need one coordinate name per dimension")
        self.name = name

    def __call__(self, points, check=True):
        pts = np.asarray(points, dtype=float)
        G = np.asarray(self._g(pts), dtype=float)
        if G.shape[-2:] != (self.dim, self.dim):
            raise ValueError(f"metric callable returned shape {G.shape}")
        G = 0.5 * (G + np.swapaxes(G, -1, -2))
        if check:
            if not np.all(np.isfinite(G)):
                flat = G.reshape(-1, self.dim, self.dim)
                bad = int(np.argwhere(~np.isfinite(flat).all(axis=(1, 2)))[0, 0])
                p = pts.reshape(-1, self.dim)[bad]
                raise DomainError(f"metric not finite at {p.tolist()}")
            eig = np.linalg.eigvalsh(G)
            low = eig[..., 0].reshape(-1)
            if np.any(low <= EIG_FLOOR):
                bad = int(np.argmin(low))
                p = pts.reshape(-1, self.dim)[bad]
                raise SingularMetric(
                    f"metric not positive definite at {p.tolist()} "
                    f"(min eigenvalue {low[bad]:.3e})",
                    point=p.copy(),
                    min_eigenvalue=float(low[bad]),
                )
        return G


class ScalarField:
    """Scalar function on a chart domain, batched over points."""

    def __init__(self, fn, domain=None, name="scalar"):
        self._fn = fn
        self.domain = domain
        self.name = name

    def __call__(self, points):
        vals = np.asarray(self._fn(np.asarray(points, dtype=float)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DomainError(f"scalar field '{self.name}' not finite on evaluated points")
        return vals


def constant_metric(dim, matrix=None):
    """Chart with a constant-coefficient metric, identity by default."""
    M = np.eye(dim) if matrix is None else np.asarray(matrix, dtype=float)

    def g(pts):
        return np.broadcast_to(M, pts.shape[:-1] + (dim, dim)).copy()

    return ChartMetric(dim, g, name="flat" if matrix is None else "constant")


def conformal_space_form_metric(dim, curvature, name=None, shrink=0.9):
    """Space form of sectional curvature c in conformal coordinates.

    h_ij = delta_ij / (1 + (c/4)|x|^2)^2 on the region where the conformal
    factor stays positive; for c >= 0 that is all of R^dim.
    """
    c = float(curvature)
    if c < 0:
        half = shrink * math.sqrt(-4.0 / c) / math.sqrt(dim)
        domain = Box([-half] * dim, [half] * dim)
    else:
        domain = Box.unbounded(dim)

    def g(pts):
        q = 1.0 + (c / 4.0) * np.sum(pts * pts, axis=-1)
        out = np.zeros(pts.shape[:-1] + (dim, dim))
        idx = np.arange(dim)
        out[..., idx, idx] = (1.0 / q**2)[..., None]
        return out

    return ChartMetric(dim, g, domain=domain, name=name or f"space-form(c={c})")


# ---------------------------------------------------------------------------
# Tensor values
# ---------------------------------------------------------------------------

_TAGS = ("none", "sym2", "riemann-like")


def riemann_symmetrize(T):
    """Project onto the subspace with the full algebraic curvature symmetries."""
    T = 0.5 * (T - np.swapaxes(T, -4, -3))
    T = 0.5 * (T - np.swapaxes(T, -2, -1))
    return 0.5 * (T + np.moveaxis(T, (-4, -3, -2, -1), (-2, -1, -4, -3)))


def riemann_asymmetry(T):
    """Largest relative violation of the curvature symmetries."""
    scale = max(float(np.max(np.abs(T))), 1e-300)
    d1 = np.max(np.abs(T + np.swapaxes(T, -4, -3)))
    d2 = np.max(np.abs(T + np.swapaxes(T, -2, -1)))
    d3 = np.max(np.abs(T - np.moveaxis(T, (-4, -3, -2, -1), (-2, -1, -4, -3))))
    return float(max(d1, d2, d3) / scale)


class TensorValue:
    """Dense pointwise tensor of rank 0..4 with an optional symmetry tag.

    sym2 and riemann-like values are stored symmetrized, so the tagged
    identities hold exactly on the stored components.
    """

    def __init__(self, rank, components, symmetry_tag="none"):
        if rank not in (0, 1, 2, 3, 4):
            raise ValueError("rank must be in 0..4")
        if symmetry_tag not in _TAGS:
            raise ValueError(f"unknown symmetry tag {symmetry_tag!r}")
        comp = np.asarray(components, dtype=float)
        if rank == 0:
            comp = comp.reshape(())
        elif comp.ndim != rank:
            raise ValueError(f"rank {rank} tensor needs {rank}-d components")
        if rank >= 2 and len(set(comp.shape)) > 1:
            raise ValueError("all axes must share the chart dimension")
        if not np.all(np.isfinite(comp)):
            raise ValueError("tensor components must be finite")
        if symmetry_tag == "sym2":
            if rank != 2:
                raise ValueError("sym2 tag requires rank 2")
            comp = 0.5 * (comp + comp.T)
        elif symmetry_tag == "riemann-like":
            if rank != 4:
                raise ValueError("riemann-like tag requires rank 4")
            comp = riemann_symmetrize(comp)
        self.rank = rank
        self.components = comp
        self.symmetry_tag = symmetry_tag

    @property
    def dim(self):
        return self.components.shape[0] if self.rank else 0

    def __getitem__(self, idx):
        return self.components[idx]

    def __repr__(self):
        return f"TensorValue(rank={self.rank}, tag={self.symmetry_tag})"


# ---------------------------------------------------------------------------
# Stencil plans and jets
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _stencil_plan(n, stencil):
    """Offset table (in units of the per-axis step) plus extraction maps."""
    d1_off, d1_w = _D1[stencil]
    d2_off, _ = _D2[stencil]
    index = {}
    offsets = []

    def idx_of(off):
        key = tuple(off)
        if key not in index:
            index[key] = len(offsets)
            offsets.append(key)
        return index[key]

    center = idx_of((0,) * n)
    first_idx = np.empty((n, d1_off.size), dtype=int)
    second_idx = np.empty((n, d2_off.size), dtype=int)
    for a in range(n):
        for k, o in enumerate(d1_off):
            off = [0] * n
            off[a] = int(o)
            first_idx[a, k] = idx_of(off)
        for k, o in enumerate(d2_off):
            off = [0] * n
            off[a] = int(o)
            second_idx[a, k] = idx_of(off)
    pair_cnt = d1_off.size ** 2
    mixed_w = np.empty(pair_cnt)
    k = 0
    for wi in d1_w:
        for wj in d1_w:
            mixed_w[k] = wi * wj
            k += 1
    mixed_idx = np.zeros((n, n, pair_cnt), dtype=int)
    for a in range(n):
        for b in range(a + 1, n):
            k = 0
            for oi in d1_off:
                for oj in d1_off:
                    off = [0] * n
                    off[a] = int(oi)
                    off[b] = int(oj)
                    mixed_idx[a, b, k] = idx_of(off)
                    k += 1
    return {
        "offsets": np.array(offsets, dtype=float),
        "center": center,
        "first_idx": first_idx,
        "first_w": d1_w,
        "second_idx": second_idx,
        "second_w": _D2[stencil][1],
        "mixed_idx": mixed_idx,
        "mixed_w": mixed_w,
    }


def steps_at(P, cfg):
    """Per-coordinate steps h_i = rel_step * max(1, |p_i|)."""
    P = np.asarray(P, dtype=float)
    return cfg.rel_step * np.maximum(1.0, np.abs(P))


def _stencil_points(P, H, plan):
    return P[:, None, :] + H[:, None, :] * plan["offsets"][None, :, :]


def _extract_jet(V, H, plan):
    """First/second partials from stencil values V of shape (B, S, ...)."""
    B = V.shape[0]
    tail = V.shape[2:]
    pad = (Ellipsis,) + (None,) * len(tail)
    n = H.shape[1]

    v0 = V[:, plan["center"]]
    dV = np.einsum("k,bak...->ba...", plan["first_w"], V[:, plan["first_idx"]])
    dV = dV / H[pad]

    d2V = np.zeros((B, n, n) + tail)
    pure = np.einsum("k,bak...->ba...", plan["second_w"], V[:, plan["second_idx"]])
    idx = np.arange(n)
    d2V[:, idx, idx] = pure / (H**2)[pad]
    for a in range(n):
        for b in range(a + 1, n):
            mixed = np.einsum("k,bk...->b...", plan["mixed_w"], V[:, plan["mixed_idx"][a, b]])
            mixed = mixed / (H[:, a] * H[:, b])[(Ellipsis,) + (None,) * len(tail)]
            d2V[:, a, b] = mixed
            d2V[:, b, a] = mixed
    return v0, dV, d2V


def _jet(eval_fn, domain, P, cfg, what):
    """Value, gradient and second derivatives of a batched point function."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    B, n = P.shape
    plan = _stencil_plan(n, cfg.stencil)
    H = steps_at(P, cfg)
    pts = _stencil_points(P, H, plan)
    S = pts.shape[1]
    if cfg.richardson:
        pts = np.concatenate([pts, _stencil_points(P, 0.5 * H, plan)], axis=1)
    if domain is not None:
        domain.require_inside(pts.reshape(-1, n), what=f"stencil point for {what}")
    vals = eval_fn(pts.reshape(-1, n))
    vals = vals.reshape((B, pts.shape[1]) + vals.shape[1:])
    v0, dV, d2V = _extract_jet(vals[:, :S], H, plan)
    if cfg.richardson:
        v0, dVf, d2Vf = _extract_jet(vals[:, S:], 0.5 * H, plan)
        p, q = _RICH[cfg.stencil]
        dV = (p * dVf - dV) / q
        d2V = (p * d2Vf - d2V) / q
    return v0, dV, d2V


@dataclass
class MetricJet:
    """Metric value and partial derivatives at a batch of points."""

    g: np.ndarray      # (B, n, n)
    ginv: np.ndarray   # (B, n, n)
    dg: np.ndarray     # (B, a, i, j) = d_a g_ij
    d2g: np.ndarray    # (B, a, b, i, j) = d_a d_b g_ij


def metric_jet(chart, P, cfg=DEFAULT_FD):
    g0, dg, d2g = _jet(lambda q: chart(q), chart.domain, P, cfg, "metric")
    return MetricJet(g=g0, ginv=np.linalg.inv(g0), dg=dg, d2g=d2g)


def scalar_jet(field, P, cfg=DEFAULT_FD, domain=None):
    dom = domain if domain is not None else field.domain
    return _jet(lambda q: field(q), dom, P, cfg, f"scalar '{field.name}'")


# ---------------------------------------------------------------------------
# Christoffel symbols and curvature
# ---------------------------------------------------------------------------


def christoffel_from_jet(jet):
    """Gamma^k_ij of the Levi-Civita connection; shape (B, k, i, j)."""
    dg = jet.dg
    # d_i g_jl + d_j g_il - d_l g_ij, laid out as [b, i, j, l]
    bracket = dg + np.swapaxes(dg, 1, 2) - np.moveaxis(dg, 1, 3)
    return 0.5 * np.einsum("bkl,bijl->bkij", jet.ginv, bracket)


def _christoffel_derivative(jet):
    """d_m Gamma^k_ij from the metric jet; shape (B, m, k, i, j)."""
    dg, d2g = jet.dg, jet.d2g
    dginv = -np.einsum("bka,bmac,bcl->bmkl", jet.ginv, dg, jet.ginv, optimize=True)
    bracket = dg + np.swapaxes(dg, 1, 2) - np.moveaxis(dg, 1, 3)
    # d_m applied to the bracket, laid out as [b, m, i, j, l]
    dbracket = d2g + np.swapaxes(d2g, 2, 3) - np.moveaxis(d2g, 2, 4)
    return 0.5 * (
        np.einsum("bmkl,bijl->bmkij", dginv, bracket, optimize=True)
        + np.einsum("bkl,bmijl->bmkij", jet.ginv, dbracket, optimize=True)
    )


def riemann_from_jet(jet):
    """(0,4) curvature (symmetrized), Ricci, scalar and the raw asymmetry.

    Normalized so a space form of sectional curvature c gives R = (c/2) g (kn) g.
    """
    gamma = christoffel_from_jet(jet)
    dgamma = _christoffel_derivative(jet)
    # R^a_{jkl} = d_k G^a_{lj} - d_l G^a_{kj} + G^a_{kc} G^c_{lj} - G^a_{lc} G^c_{kj}
    dk = np.einsum("bkalj->bajkl", dgamma)
    dl = np.einsum("blakj->bajkl", dgamma)
    gg1 = np.einsum("bakc,bclj->bajkl", gamma, gamma, optimize=True)
    gg2 = np.einsum("balc,bckj->bajkl", gamma, gamma, optimize=True)
    R13 = dk - dl + gg1 - gg2
    riem_raw = np.einsum("bia,bajkl->bijkl", jet.g, R13)
    asym = riemann_asymmetry(riem_raw)
    riem = riemann_symmetrize(riem_raw)
    ricci = np.einsum("bik,bijkl->bjl", jet.ginv, riem)
    ricci = 0.5 * (ricci + np.swapaxes(ricci, -1, -2))
    scalar = np.einsum("bjl,bjl->b", jet.ginv, ricci)
    return riem, ricci, scalar, asym


@dataclass
class CurvatureBundle:
    riemann: TensorValue
    ricci: TensorValue
    scalar: float
    raw_asymmetry: float


def _single(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError("expected a single point of shape (n,)")
    return p[None, :]


def christoffel(chart, p, cfg=DEFAULT_FD):
    """Christoffel symbols Gamma^k_ij at a point, symmetric in (i, j)."""
    jet = metric_jet(chart, _single(p), cfg)
    gamma = christoffel_from_jet(jet)[0]
    gamma = 0.5 * (gamma + np.swapaxes(gamma, -1, -2))
    return TensorValue(3, gamma)


def curvature_bundle(chart, p, cfg=DEFAULT_FD):
    """Riemann (0,4), Ricci and scalar curvature at a point."""
    jet = metric_jet(chart, _single(p), cfg)
    riem, ricci, scalar, asym = riemann_from_jet(jet)
    return CurvatureBundle(
        riemann=TensorValue(4, riem[0], "riemann-like"),
        ricci=TensorValue(2, ricci[0], "sym2"),
        scalar=float(scalar[0]),
        raw_asymmetry=asym,
    )


@dataclass
class ScalarCalculus:
    grad: TensorValue        # contravariant gradient vector
    hess: TensorValue
    laplacian: float
    grad_norm_sq: float


def scalar_calculus_batch(chart, field, P, cfg=DEFAULT_FD, jet=None):
    """Batched covariant calculus of a scalar field; returns plain arrays."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if jet is None:
        jet = metric_jet(chart, P, cfg)
    f0, df, d2f = scalar_jet(field, P, cfg, domain=chart.domain)
    gamma = christoffel_from_jet(jet)
    hess = d2f - np.einsum("bcij,bc->bij", gamma, df)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    grad = np.einsum("bac,bc->ba", jet.ginv, df)
    lap = np.einsum("bij,bij->b", jet.ginv, hess)
    gradsq = np.einsum("bac,ba,bc->b", jet.ginv, df, df)
    return {
        "value": f0,
        "df": df,
        "grad": grad,
        "hess": hess,
        "laplacian": lap,
        "grad_norm_sq": gradsq,
        "jet": jet,
    }


def scalar_calculus(chart, s, p, cfg=DEFAULT_FD):
    out = scalar_calculus_batch(chart, s, _single(p), cfg)
    return ScalarCalculus(
        grad=TensorValue(1, out["grad"][0]),
        hess=TensorValue(2, out["hess"][0], "sym2"),
        laplacian=float(out["laplacian"][0]),
        grad_norm_sq=float(out["grad_norm_sq"][0]),
    )


# ---------------------------------------------------------------------------
# Algebraic tensor operations
# ---------------------------------------------------------------------------


def kulkarni_nomizu_components(S, T):
    """Array form of the Kulkarni-Nomizu product, batched over leading axes."""
    t1 = np.einsum("...ik,...jl->...ijkl", T, S)
    t2 = np.einsum("...jl,...ik->...ijkl", T, S)
    t3 = np.einsum("...il,...jk->...ijkl", T, S)
    t4 = np.einsum("...jk,...il->...ijkl", T, S)
    return t1 + t2 - t3 - t4


def kulkarni_nomizu(S, T):
    """Kulkarni-Nomizu product of two symmetric 2-tensors (rank-4 output)."""
    Sc = S.components if isinstance(S, TensorValue) else np.asarray(S, dtype=float)
    Tc = T.components if isinstance(T, TensorValue) else np.asarray(T, dtype=float)
    if Sc.ndim != 2 or Tc.ndim != 2 or Sc.shape != Tc.shape:
        raise RankMismatch("kulkarni_nomizu needs two symmetric 2-tensors of equal dimension")
    return TensorValue(4, kulkarni_nomizu_components(Sc, Tc), "riemann-like")


def interior_product(X, T):
    """Contract a vector into the first slot of a covariant tensor."""
    Xc = X.components if isinstance(X, TensorValue) else np.asarray(X, dtype=float)
    if isinstance(T, TensorValue):
        Tc, rank = T.components, T.rank
    else:
        Tc = np.asarray(T, dtype=float)
        rank = Tc.ndim
    if rank < 1:
        raise RankMismatch("interior product needs a tensor of rank >= 1")
    if Xc.ndim != 1 or Tc.shape[0] != Xc.shape[0]:
        raise RankMismatch("vector and tensor dimensions do not match")
    return TensorValue(rank - 1, np.tensordot(Xc, Tc, axes=(0, 0)))


def orthonormal_frame(g):
    """Gram-Schmidt frame on the coordinate basis; columns are frame vectors.

    Computed via the Cholesky factorization, whose inverse transpose is the
    Gram-Schmidt result in index order: F^T g F = I.
    """
    L = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def to_orthonormal(components, frame):
    """Express a covariant tensor (unbatched) in the orthonormal frame."""
    out = np.asarray(components, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(out, frame, axes=(axis, 0)), -1, axis)
    return out


def sup_norm_orthonormal(components, g):
    """Max-abs component in the g-orthonormal frame (dilation invariant)."""
    comp = np.asarray(components, dtype=float)
    if comp.ndim == 0:
        return float(abs(comp))
    return float(np.max(np.abs(to_orthonormal(comp, orthonormal_frame(g)))))


# ---------------------------------------------------------------------------
# Tensor fields: covariant derivative and divergence
# ---------------------------------------------------------------------------


class TensorField:
    """Batched covariant tensor field: points (B, n) -> components (B, n^rank)."""

    def __init__(self, rank, fn, name="tensor field"):
        self.rank = int(rank)
        self._fn = fn
        self.name = name

    def __call__(self, points):
        return np.asarray(self._fn(np.asarray(points, dtype=float)), dtype=float)


def as_tensor_field(obj, rank=None):
    """Adapt a point -> TensorValue callable to the batched field protocol."""
    if isinstance(obj, TensorField):
        return obj
    if rank is None:
        raise ValueError("rank is required when wrapping a pointwise callable")

    def fn(pts):
        vals = []
        for p in np.atleast_2d(pts):
            tv = obj(p)
            vals.append(tv.components if isinstance(tv, TensorValue) else np.asarray(tv))
        return np.stack(vals)

    return TensorField(rank, fn)


def metric_field(chart):
    return TensorField(2, lambda pts: chart(pts), name="metric")


def _field_partials(field, P, H, cfg, domain):
    """Plain central-difference partials of a tensor field at base points."""
    B, n = P.shape
    offs, w = _D1[cfg.stencil]
    K = offs.size
    pts = np.repeat(P[:, None, None, :], n, axis=1)
    pts = np.repeat(pts, K, axis=2)
    for a in range(n):
        for k, o in enumerate(offs):
            pts[:, a, k, a] = P[:, a] + o * H[:, a]
    if domain is not None:
        domain.require_inside(pts.reshape(-1, n), what=f"stencil point for {field.name}")
    vals = field(pts.reshape(-1, n))
    tail = vals.shape[1:]
    vals = vals.reshape((B, n, K) + tail)
    dT = np.einsum("k,bak...->ba...", w, vals)
    return dT / H[(Ellipsis,) + (None,) * len(tail)]


def field_steps_at(P, cfg, domain=None):
    """Outer differencing steps for tensor fields.

    Clamped by the distance to the domain boundary: near a singular edge the
    field varies on the scale of that distance, so the step must shrink with
    it to keep the truncation error in range.
    """
    P = np.asarray(P, dtype=float)
    h = cfg.field_rel_step * np.maximum(1.0, np.abs(P))
    if domain is not None:
        dist = np.minimum(P - domain.lower, domain.upper - P)
        clamp = 0.02 * dist
        h = np.minimum(h, np.where(np.isfinite(clamp), clamp, np.inf))
    return h


def covariant_derivative_batch(chart, field, P, cfg=DEFAULT_FD, jet=None):
    """Covariant derivative of a covariant tensor field; new slot first."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if jet is None:
        jet = metric_jet(chart, P, cfg)
    H = field_steps_at(P, cfg, domain=chart.domain)
    grad = _field_partials(field, P, H, cfg, chart.domain)
    if field.rank == 0:
        return grad
    gamma = christoffel_from_jet(jet)
    T0 = field(P)
    letters = "ijkl"[: field.rank]
    for slot in range(field.rank):
        dst = letters[:slot] + "c" + letters[slot + 1:]
        grad = grad - np.einsum(f"bca{letters[slot]},b{dst}->ba{letters}", gamma, T0)
    return grad


def covariant_derivative(chart, T, p, cfg=DEFAULT_FD, rank=None):
    """Covariant derivative at a point; accepts TensorField or pointwise callable."""
    field = as_tensor_field(T, rank=rank)
    out = covariant_derivative_batch(chart, field, _single(p), cfg)
    return TensorValue(field.rank + 1, out[0])


def divergence_batch(chart, field, P, cfg=DEFAULT_FD, jet=None):
    """Divergence over the first slot in the Gram-Schmidt orthonormal frame."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if jet is None:
        jet = metric_jet(chart, P, cfg)
    grad = covariant_derivative_batch(chart, field, P, cfg, jet=jet)
    F = orthonormal_frame(jet.g)
    return np.einsum("bap,bcp,bac...->b...", F, F, grad)


def divergence(chart, T, p, cfg=DEFAULT_FD, rank=None):
    field = as_tensor_field(T, rank=rank)
    if field.rank not in (2, 3, 4):
        raise RankMismatch("divergence is defined for rank 2..4 fields")
    out = divergence_batch(chart, field, _single(p), cfg)
    return TensorValue(field.rank - 1, out[0])


# ---------------------------------------------------------------------------
# Unweighted Weyl tensor (standard Schouten decomposition)
# ---------------------------------------------------------------------------


def weyl_components(g, riem, ricci, scalar):
    """W = R - P (kn) g with the usual Schouten tensor P, batched."""
    n = g.shape[-1]
    J = np.asarray(scalar) / (2.0 * (n - 1))
    P = (ricci - J[..., None, None] * g) / (n - 2)
    return riem - kulkarni_nomizu_components(P, g)


def weyl(chart, p, cfg=DEFAULT_FD):
    jet = metric_jet(chart, _single(p), cfg)
    riem, ricci, scalar, _ = riemann_from_jet(jet)
    W = weyl_components(jet.g, riem, ricci, scalar)
    return TensorValue(4, W[0], "riemann-like")
