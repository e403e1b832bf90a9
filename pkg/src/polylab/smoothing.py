"""Exponential smoothing of a polytope and quadrature meshes on its boundary.

The smoothed domain is the sublevel set {sum_i exp(rate * u_i) <= 1}; its
boundary is a smooth strictly convex hypersurface written as a radial graph
over directions from an interior anchor.  All level-set evaluations go
through log-sum-exp so points far outside the polytope stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polytope import Polytope, lambda0


@dataclass(frozen=True)
class SmoothedSurface:
    polytope: Polytope
    lam: float
    anchor: np.ndarray

    @property
    def n(self) -> int:
        return self.polytope.n


@dataclass(frozen=True)
class SurfaceMesh:
    surface: SmoothedSurface
    directions: np.ndarray   # (P, n) unit vectors from the anchor
    radii: np.ndarray        # (P,)
    points: np.ndarray       # (P, n) on the boundary
    weights: np.ndarray      # (P,) positive area weights
    euclid_normals: np.ndarray  # (P, n) outward Euclidean unit normals

    @property
    def total_area(self) -> float:
        return float(self.weights.sum())


def log_phi(surf: SmoothedSurface, x) -> np.ndarray:
    """log of the exponential-sum level function, stable for points far outside."""
    u = surf.polytope.values(x)
    z = surf.lam * u
    zmax = z.max(axis=-1)
    return zmax + np.log(np.exp(z - zmax[..., None]).sum(axis=-1))


def _log_phi_softmax(surf: SmoothedSurface, x):
    """(log phi, softmax weights) without overflow for far-outside points."""
    u = surf.polytope.values(x)
    z = surf.lam * u
    zmax = z.max(axis=-1)
    e = np.exp(z - zmax[..., None])
    total = e.sum(axis=-1)
    return zmax + np.log(total), e / total[..., None]

def phi(surf: SmoothedSurface, x) -> np.ndarray:
    return np.exp(log_phi(surf, x))


def grad_phi(surf: SmoothedSurface, x) -> np.ndarray:
    u = surf.polytope.values(x)
    w = np.exp(surf.lam * u)
    return surf.lam * (w @ surf.polytope.A)


def hess_phi(surf: SmoothedSurface, x) -> np.ndarray:
    u = surf.polytope.values(x)
    w = np.exp(surf.lam * u)
    A = surf.polytope.A
    return surf.lam ** 2 * np.einsum("...i,ij,ik->...jk", w, A, A)


def euclid_normal(surf: SmoothedSurface, x) -> np.ndarray:
    gp = grad_phi(surf, x)
    return gp / np.linalg.norm(gp, axis=-1, keepdims=True)


def smooth_surface(p: Polytope, lam: float) -> SmoothedSurface:
    """Anchor the surface at the minimiser of the level function (damped Newton)."""
    lam0 = lambda0(p)
    if lam <= lam0:
        raise ValueError(f"rate {lam} must exceed the threshold {lam0:.6g}")
    surf = SmoothedSurface(p, float(lam), p.chebyshev_point.copy())
    x = p.chebyshev_point.copy()
    for _ in range(100):
        g = grad_phi(surf, x)
        if np.linalg.norm(g) < 1e-12:
            break
        H = hess_phi(surf, x)
        step = np.linalg.solve(H, g)
        t = 1.0
        base = log_phi(surf, x)
        while t > 1e-12 and log_phi(surf, x - t * step) > base:
            t /= 2.0
        x = x - t * step
    anchor = SmoothedSurface(p, float(lam), x)
    assert log_phi(anchor, x) < 0.0, "anchor must lie strictly inside the level set"
    return anchor


def project_rays(surf: SmoothedSurface, directions) -> np.ndarray:
    """Radial crossing distances: t with level(anchor + t*dir) = 1, per direction.

    Bracketed vectorised Newton on the log level function; final residual
    |phi - 1| < 1e-12.
    """
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    P = D.shape[0]
    lo_t = np.zeros(P)
    hi_t = np.full(P, max(surf.polytope.chebyshev_margin, 1e-3))
    for _ in range(80):
        vals = log_phi(surf, surf.anchor + hi_t[:, None] * D)
        need = vals < 0.0
        if not need.any():
            break
        lo_t[need] = hi_t[need]
        hi_t[need] *= 2.0
    t = 0.5 * (lo_t + hi_t)
    for _ in range(100):
        x = surf.anchor + t[:, None] * D
        h, soft = _log_phi_softmax(surf, x)
        if np.all(np.abs(h) < 1e-14):
            break
        lo_t = np.where(h < 0, t, lo_t)
        hi_t = np.where(h > 0, t, hi_t)
        # d/dt log phi via softmax weights: stable far outside the domain
        dh = surf.lam * np.einsum("pi,ij,pj->p", soft, surf.polytope.A, D)
        tn = t - h / dh
        bad = ~((tn > lo_t) & (tn < hi_t))
        tn[bad] = 0.5 * (lo_t[bad] + hi_t[bad])
        t = tn
    return t


def project_ray(surf: SmoothedSurface, direction) -> np.ndarray:
    """The unique boundary point along one ray from the anchor."""
    t = project_rays(surf, np.asarray(direction, dtype=float)[None, :])[0]
    return surf.anchor + t * np.asarray(direction, dtype=float)


def sphere_grid(n: int, resolution: int):
    """Quadrature directions and solid-angle weights on S^(n-1).

    Recursive polar product: Gauss-Legendre in each polar angle (with the
    sin-power measure folded into the weights) and a uniform equatorial
    circle.  Returns (directions (P, n), weights (P,)) with sum(weights)
    equal to the sphere area up to quadrature error.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if n == 2:
        k = 2 * resolution
        ang = 2.0 * np.pi * (np.arange(k) + 0.5) / k
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return dirs, np.full(k, 2.0 * np.pi / k)
    sub_dirs, sub_w = sphere_grid(n - 1, resolution)
    nodes, wts = np.polynomial.legendre.leggauss(resolution)
    theta = 0.5 * np.pi * (nodes + 1.0)
    wts = wts * (0.5 * np.pi) * np.sin(theta) ** (n - 2)
    dirs = np.concatenate(
        [
            np.repeat(np.cos(theta), len(sub_dirs))[:, None],
            np.einsum("t,ps->tps", np.sin(theta), sub_dirs).reshape(-1, n - 1),
        ],
        axis=1,
    )
    weights = np.repeat(wts, len(sub_w)) * np.tile(sub_w, resolution)
    return dirs, weights


def mesh_sigma(surf: SmoothedSurface, resolution: int) -> SurfaceMesh:
    """Boundary quadrature mesh via radial projection of a sphere grid.

    The area weight per direction is the solid-angle weight times the
    radial-graph factor r^(n-1) / <normal, direction>, using the exact
    Euclidean normal of the level set.
    """
    dirs, sw = sphere_grid(surf.n, resolution)
    radii = project_rays(surf, dirs)
    points = surf.anchor + radii[:, None] * dirs
    normals = euclid_normal(surf, points)
    cosine = np.einsum("pj,pj->p", normals, dirs)
    assert np.all(cosine > 0), "anchor must see the whole boundary"
    weights = sw * radii ** (surf.n - 1) / cosine
    return SurfaceMesh(surf, dirs, radii, points, weights, normals)


def area_in_ball(mesh: SurfaceMesh, center, radius: float) -> float:
    """Quadrature area of the boundary piece inside a Euclidean ball."""
    d = np.linalg.norm(mesh.points - np.asarray(center, dtype=float), axis=1)
    return float(mesh.weights[d < radius].sum())
