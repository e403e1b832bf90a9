"""Metric-dependent geometry of the smoothed boundary.

Per-point data on the level hypersurface: the metric unit normal, the
normalised face-normal average N, mean curvature H, the differential dN
over a metric-orthonormal tangent frame, its trace norm, and the explicit
four-term lower bound V for H - ||dN||_tr.  Finite-difference oracles for
H and dN live here too, so the closed forms can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import MetricField, christoffel, inverse
from .polytope import Polytope, edge_pairs, sample_edge_points
from .smoothing import SmoothedSurface, SurfaceMesh, mesh_sigma, project_rays, smooth_surface

DENOMINATOR_GUARD = 1e-6

REGIME_FACE = 0
REGIME_EDGE = 1
REGIME_CORNER = 2
REGIME_NAMES = {REGIME_FACE: "face", REGIME_EDGE: "edge", REGIME_CORNER: "corner"}


class NearDegenerateNormalError(RuntimeError):
    """A normalisation denominator fell below the safe guard."""


@dataclass
class SurfaceGeometry:
    """Batched per-point boundary data; arrays share the leading point axis."""

    x: np.ndarray
    nu: np.ndarray             # metric unit outward normal, coordinates
    N: np.ndarray              # unit vector built from face normals
    H: np.ndarray
    dN: np.ndarray             # (P, n, n-1) columns over the tangent frame
    dN_trace_norm: np.ndarray
    V: np.ndarray
    frame: np.ndarray          # (P, n, n-1) metric-orthonormal tangent frame
    regime: np.ndarray | None = None

    @property
    def deficit(self) -> np.ndarray:
        return self.H - self.dN_trace_norm


def level_set_data(metric: MetricField, halfspace, x) -> dict:
    """Metric gradient data of one linear constraint at points x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a = halfspace.a
    g = metric(x)
    ginv = inverse(g)
    grad = ginv @ a
    norm = np.sqrt(np.einsum("pj,j->p", grad, a))
    gamma = christoffel(metric, x)
    hess = -np.einsum("plij,l->pij", gamma, a)
    lap = np.einsum("pij,pij->p", ginv, hess)
    return {
        "grad_u": grad,
        "norm": norm,
        "nu": grad / norm[:, None],
        "hess": hess,
        "lap": lap,
    }


def tangent_frame(g, nu) -> np.ndarray:
    """Metric-orthonormal tangent columns orthogonal (in g) to the unit normal nu.

    Uses the Cholesky isometry v -> L^T v to reduce to a Euclidean
    Householder completion; fully batched and deterministic.
    """
    L = np.linalg.cholesky(g)
    q = np.einsum("...ji,...j->...i", L, nu)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    n = q.shape[-1]
    sign = np.where(q[..., 0] >= 0, 1.0, -1.0)
    v = q.copy()
    v[..., 0] += sign
    vv = np.einsum("...i,...i->...", v, v)
    H = np.broadcast_to(np.eye(n), g.shape).copy()
    H -= 2.0 * v[..., :, None] * v[..., None, :] / vv[..., None, None]
    qtan = H[..., :, 1:]
    frame = np.linalg.solve(np.swapaxes(L, -1, -2), qtan)
    return frame


def sigma_geometry(
    metric: MetricField,
    surf: SmoothedSurface,
    x,
    guard: float = DENOMINATOR_GUARD,
    regime_r: float | None = None,
) -> SurfaceGeometry:
    """All per-point boundary quantities at points x on the level surface.

    Raises NearDegenerateNormalError when either normalisation denominator
    drops below ``guard``; those near-degenerate points fall outside the
    regime where the deficit formulas are meaningful.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = surf.polytope
    lam = surf.lam
    A = p.A                       # (I, n)
    Neuc = p.unit_normals         # (I, n)

    u = p.values(x)               # (P, I)
    w = np.exp(lam * u)
    g = metric(x)
    ginv = inverse(g)
    grad = np.einsum("pjk,ik->pij", ginv, A)          # metric gradients of each u_i
    hsq = np.einsum("pij,ij->pi", grad, A)
    h = np.sqrt(hsq)

    nu_raw = np.einsum("pi,pij->pj", w, grad)
    Dnu = np.sqrt(np.einsum("pj,pjk,pk->p", nu_raw, g, nu_raw))
    N_raw = np.einsum("pi,ij->pj", w * h, Neuc)
    DN = np.linalg.norm(N_raw, axis=1)
    if np.any(Dnu <= guard) or np.any(DN <= guard):
        raise NearDegenerateNormalError(
            f"normal denominators fell to {min(Dnu.min(), DN.min()):.3g} <= {guard:.3g}"
        )
    nu = nu_raw / Dnu[:, None]
    Nhat = N_raw / DN[:, None]

    gamma = christoffel(metric, x)
    hess = -np.einsum("plij,ml->pmij", gamma, A)       # (P, I, n, n)
    lap = np.einsum("pij,pmij->pm", ginv, hess)
    hess_nn = np.einsum("pmij,pi,pj->pm", hess, nu, nu)

    # differential of |grad u_i|: dh[p,i,k] = -(a g^-1 (d_k g) g^-1 a) / (2 h)
    dg = metric.derivatives(x)
    mid = np.einsum("pab,pbck,pcd->padk", ginv, dg, ginv)
    quad = np.einsum("ia,padk,id->pik", A, mid, A)
    dh = -quad / (2.0 * h[..., None])
    dh_norm = np.sqrt(np.maximum(np.einsum("pik,pkl,pil->pi", dh, ginv, dh), 0.0))

    dots_nu = np.einsum("ik,pk->pi", A, nu) / h        # <nu_i, nu>_g
    pi_sq = np.maximum(1.0 - dots_nu**2, 0.0)
    dots_N = np.einsum("ik,pk->pi", Neuc, Nhat)
    P_sq = np.maximum(1.0 - dots_N**2, 0.0)

    T1 = np.einsum("pi,pi->p", w * hsq, pi_sq) / Dnu
    T2 = np.einsum("pi,pi->p", w * hsq, np.sqrt(pi_sq) * np.sqrt(P_sq)) / DN
    T3 = np.einsum("pi,pi->p", w, lap - hess_nn) / Dnu
    T4 = np.einsum("pi,pi->p", w * dh_norm, np.sqrt(P_sq)) / DN

    H = lam * T1 + T3
    V = lam * T1 - lam * T2 + T3 - T4

    frame = tangent_frame(g, nu)
    ae = np.einsum("ij,pjk->pik", A, frame)
    dhe = np.einsum("pij,pjk->pik", dh, frame)
    coef = w[..., None] * (lam * h[..., None] * ae + dhe)
    PN = Neuc[None, :, :] - dots_N[..., None] * Nhat[:, None, :]
    dN = np.einsum("pik,pij->pjk", coef, PN) / DN[:, None, None]
    sv = np.linalg.svd(dN, compute_uv=False)
    dn_tr = sv.sum(axis=-1)

    regime = None
    if regime_r is not None:
        regime = partition_labels(p, x, lam, regime_r)[1]

    return SurfaceGeometry(x, nu, Nhat, H, dN, dn_tr, V, frame, regime)


def face_mean_curvature(metric: MetricField, p: Polytope, i: int, x) -> np.ndarray:
    """Mean curvature of the flat face {u_i = 0} under the metric.

    Sign convention: the mean curvature vector is -H times the outward
    normal, so convex-side bending is positive.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    vals = p.values(x)
    if np.any(np.abs(vals[:, i]) > 1e-10):
        raise ValueError("points must lie on the face")
    others = np.delete(vals, i, axis=1)
    if np.any(others > 1e-9):
        raise ValueError("points must lie inside the polytope")
    data = level_set_data(metric, p.halfspaces[i], x)
    hess_nn = np.einsum("pij,pi,pj->p", data["hess"], data["nu"], data["nu"])
    return (data["lap"] - hess_nn) / data["norm"]


def _sqrt_det_g(metric, x):
    return np.sqrt(np.linalg.det(metric(x)))


def mean_curvature_fd(metric: MetricField, surf: SmoothedSurface, x, h: float = 1e-5) -> np.ndarray:
    """Independent oracle: H as the metric divergence of the ambient normal field.

    Central differences of sqrt(det g) * nu^j; never uses the closed-form
    curvature expansion.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = surf.polytope

    def nu_field(pts):
        g = metric(pts)
        ginv = inverse(g)
        w = np.exp(surf.lam * p.values(pts))
        grad = np.einsum("pjk,ik->pij", ginv, p.A)
        raw = np.einsum("pi,pij->pj", w, grad)
        norm = np.sqrt(np.einsum("pj,pjk,pk->p", raw, g, raw))
        return raw / norm[:, None]

    n = p.n
    div = np.zeros(len(x))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fp = _sqrt_det_g(metric, x + e) * nu_field(x + e)[:, j]
        fm = _sqrt_det_g(metric, x - e) * nu_field(x - e)[:, j]
        div += (fp - fm) / (2.0 * h)
    return div / _sqrt_det_g(metric, x)


def face_mean_curvature_fd(metric: MetricField, p: Polytope, i: int, x, h: float = 1e-5) -> np.ndarray:
    """FD divergence oracle for the face normal field."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a = p.halfspaces[i].a

    def nu_field(pts):
        g = metric(pts)
        ginv = inverse(g)
        grad = ginv @ a
        norm = np.sqrt(np.einsum("pj,j->p", grad, a))
        return grad / norm[:, None]

    n = p.n
    div = np.zeros(len(x))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fp = _sqrt_det_g(metric, x + e) * nu_field(x + e)[:, j]
        fm = _sqrt_det_g(metric, x - e) * nu_field(x - e)[:, j]
        div += (fp - fm) / (2.0 * h)
    return div / _sqrt_det_g(metric, x)


def N_field(metric: MetricField, surf: SmoothedSurface, x) -> np.ndarray:
    """The face-normal average map, ambiently extended."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = surf.polytope
    g = metric(x)
    ginv = inverse(g)
    w = np.exp(surf.lam * p.values(x))
    grad = np.einsum("pjk,ik->pij", ginv, p.A)
    h = np.sqrt(np.einsum("pij,ij->pi", grad, p.A))
    raw = np.einsum("pi,ij->pj", w * h, p.unit_normals)
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def dN_fd(metric: MetricField, surf: SmoothedSurface, x, frame, h: float = 1e-5) -> np.ndarray:
    """FD oracle for dN over a given tangent frame, projected orthogonal to N."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    Nx = N_field(metric, surf, x)
    out = np.empty((len(x), x.shape[1], frame.shape[2]))
    for k in range(frame.shape[2]):
        step = h * frame[:, :, k]
        d = (N_field(metric, surf, x + step) - N_field(metric, surf, x - step)) / (2.0 * h)
        d -= np.einsum("pj,pj->p", d, Nx)[:, None] * Nx
        out[:, :, k] = d
    return out


def min_face_mean_curvature(metric: MetricField, p: Polytope, rng=None, samples_per_face: int = 200) -> float:
    """Min over faces and sampled face points of the face mean curvature.

    Nonnegativity is the second hypothesis (with matching angles) behind
    the deficit decay; the asymptotic suites gate their assertions on it.
    """
    from .polytope import sample_face_points

    rng = np.random.default_rng(0) if rng is None else rng
    worst = np.inf
    for i in range(p.nfaces):
        pts = sample_face_points(p, i, samples_per_face, rng)
        worst = min(worst, float(face_mean_curvature(metric, p, i, pts).min()))
    return worst


def matching_angle_deficit(
    metric: MetricField, p: Polytope, rng=None, samples_per_edge: int = 1000
) -> float:
    """Max over edges/samples of |<nu_i1, nu_i2>_g - <N_i1, N_i2>|.

    Zero (to rounding) means the dihedral angles under the metric match
    the Euclidean ones on every sampled edge point.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for i1, i2, x0 in edge_pairs(p):
        pts = sample_edge_points(p, i1, i2, x0, samples_per_edge, rng)
        g = metric(pts)
        ginv = inverse(g)
        a1, a2 = p.halfspaces[i1].a, p.halfspaces[i2].a
        dot = np.einsum("j,pjk,k->p", a1, ginv, a2)
        n1 = np.sqrt(np.einsum("j,pjk,k->p", a1, ginv, a1))
        n2 = np.sqrt(np.einsum("j,pjk,k->p", a2, ginv, a2))
        cos_g = dot / (n1 * n2)
        cos_e = float(p.halfspaces[i1].unit_normal @ p.halfspaces[i2].unit_normal)
        worst = max(worst, float(np.abs(cos_g - cos_e).max()))
    return worst


def partition_labels(p: Polytope, x, lam: float, r: float):
    """Sorted closest-face triple and the face/edge/corner regime label.

    Ties in the constraint values break toward the smaller face index.
    The thresholds use the exponents 7/8, 1/8 and 3/4, 1/4 on the rate
    and the reference radius.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = p.values(x)
    order = np.argsort(-u, axis=1, kind="stable")
    top3 = order[:, :3]
    u_sorted = np.take_along_axis(u, top3, axis=1)
    face_thr = -lam ** (-7.0 / 8.0) * r ** (1.0 / 8.0)
    edge_thr = -lam ** (-3.0 / 4.0) * r ** (1.0 / 4.0)
    regime = np.full(len(x), REGIME_CORNER, dtype=int)
    regime[u_sorted[:, 2] <= edge_thr] = REGIME_EDGE
    regime[u_sorted[:, 1] <= face_thr] = REGIME_FACE
    return top3, regime


def edge_band_points(surf: SmoothedSurface, per_edge: int = 200, seed: int = 0) -> np.ndarray:
    """Boundary points radially beneath the polytope edges.

    The negative part of V concentrates in bands of width ~1/rate around
    the edges; a quasi-uniform mesh undersamples them at large rates, so
    the sup diagnostics add these targeted rays.
    """
    p = surf.polytope
    rng = np.random.default_rng(seed)
    pts = []
    for i1, i2, x0 in edge_pairs(p):
        ys = sample_edge_points(p, i1, i2, x0, per_edge, rng)
        dirs = ys - surf.anchor
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = dirs / norms
        t = project_rays(surf, dirs)
        pts.append(surf.anchor + t[:, None] * dirs)
    if not pts:
        return np.empty((0, p.n))
    return np.vstack(pts)


def v_deficit_sup(
    metric: MetricField,
    p: Polytope,
    lam: float,
    resolution: int = 64,
    per_edge: int = 200,
) -> dict:
    """Sup of max(-V, 0) over mesh plus edge-band points, and its ratio to the rate."""
    surf = smooth_surface(p, lam)
    mesh = mesh_sigma(surf, resolution)
    extra = edge_band_points(surf, per_edge)
    pts = np.vstack([mesh.points, extra]) if len(extra) else mesh.points
    geo = sigma_geometry(metric, surf, pts)
    neg = np.maximum(-geo.V, 0.0)
    sup = float(neg.max())
    return {"sup": sup, "ratio": sup / lam, "lam": lam, "points": len(pts)}


def default_ball_family(p: Polytope, grid: int = 4, radii_levels: int = 8):
    lo, hi = p.bbox
    axes = [np.linspace(lo[j], hi[j], grid) for j in range(p.n)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.n)
    radii = 2.0 ** (-np.arange(radii_levels, dtype=float))[::-1]  # 2^-7 .. 1
    return centers, radii


def morrey_deficit(
    metric: MetricField,
    p: Polytope,
    lam: float,
    sigma: float,
    resolution: int = 64,
    centers=None,
    radii=None,
) -> float:
    """Discrete scale-weighted L^sigma norm of the negative part of V.

    Sup over the supplied ball family of
    (r^(sigma+1-n) * integral over the boundary piece in the ball)^(1/sigma).
    """
    if not 1.0 <= sigma < 1.5:
        raise ValueError("sigma must lie in [1, 3/2)")
    surf = smooth_surface(p, lam)
    mesh = mesh_sigma(surf, resolution)
    geo = sigma_geometry(metric, surf, mesh.points)
    negs = np.maximum(-geo.V, 0.0) ** sigma * mesh.weights
    if centers is None or radii is None:
        centers, radii = default_ball_family(p)
    dists = np.linalg.norm(mesh.points[None, :, :] - centers[:, None, :], axis=2)
    best = 0.0
    for r in radii:
        mass = (negs[None, :] * (dists < r)).sum(axis=1)
        val = (r ** (sigma + 1.0 - p.n) * mass) ** (1.0 / sigma)
        best = max(best, float(val.max()))
    return best


def blend_metric(metric: MetricField, t: float) -> MetricField:
    """Straight-line interpolation (1-t) * euclid + t * metric."""
    base_g, base_dg = metric.g, metric.dg

    def g(x):
        out = t * base_g(x)
        idx = np.arange(out.shape[-1])
        out[..., idx, idx] += 1.0 - t
        return out

    def dg(x):
        return t * base_dg(x)

    return MetricField(metric.n, f"blend{t:g}", g, dg)


def gauss_map_pairing(metric: MetricField, surf: SmoothedSurface, mesh: SurfaceMesh,
                      ts=(0.0, 0.25, 0.5, 0.75, 1.0)) -> float:
    """Degree proxy along the straight-line metric homotopy to Euclid.

    Returns the minimum over blend parameters and mesh points of
    <N_t, Euclidean Gauss map>; positivity certifies no antipodal crossing.
    """
    worst = np.inf
    for t in ts:
        if t == 0.0:
            N = mesh.euclid_normals
        else:
            N = N_field(blend_metric(metric, t), surf, mesh.points)
        pair = np.einsum("pj,pj->p", N, mesh.euclid_normals)
        worst = min(worst, float(pair.min()))
    return worst
