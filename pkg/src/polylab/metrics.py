"""Riemannian metric fields on R^n with batched evaluation.

A metric field supplies g(x) and the coordinate derivatives dg(x) either in
closed form (builtin families, parsed expression entries) or by central
differences.  Shapes: points (..., n) -> g (..., n, n), dg (..., n, n, n)
with dg[..., i, j, k] = d g_ij / d x_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expressions as ex

FD_STEP = 1e-5


class MetricError(Exception):
    """Non-SPD or otherwise unusable metric data."""


@dataclass
class MetricField:
    n: int
    name: str
    g: object
    dg: object
    closed_form: bool = True
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.g(np.asarray(x, dtype=float))

    def derivatives(self, x):
        return self.dg(np.asarray(x, dtype=float))


def euclidean(n: int) -> MetricField:
    eye = np.eye(n)

    def g(x):
        return np.broadcast_to(eye, x.shape[:-1] + (n, n)).copy()

    def dg(x):
        return np.zeros(x.shape[:-1] + (n, n, n))

    return MetricField(n, "euclid", g, dg)


def constant(mat) -> MetricField:
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if not np.allclose(mat, mat.T):
        raise MetricError("constant metric must be symmetric")
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise MetricError("constant metric must be positive definite") from None

    def g(x):
        return np.broadcast_to(mat, x.shape[:-1] + (n, n)).copy()

    def dg(x):
        return np.zeros(x.shape[:-1] + (n, n, n))

    return MetricField(n, "constant", g, dg, params={"matrix": mat})


def conformal(phi, n: int) -> MetricField:
    """g = exp(2 phi) * delta for a scalar expression phi."""
    node = ex.parse_expression(phi, n) if isinstance(phi, str) else phi
    dnode = [ex.differentiate(node, k) for k in range(n)]
    eye = np.eye(n)

    def g(x):
        f = np.exp(2.0 * ex.evaluate(node, x))
        return f[..., None, None] * eye

    def dg(x):
        f = np.exp(2.0 * ex.evaluate(node, x))
        dphi = np.stack([ex.evaluate(d, x) for d in dnode], axis=-1)
        return (2.0 * f[..., None] * dphi)[..., None, None, :] * eye[..., :, :, None]

    return MetricField(n, "conformal", g, dg, params={"phi": node})


def from_entries(entries, n: int) -> MetricField:
    """Metric with expression entries; give the upper triangle, symmetry is filled in."""
    nodes = [[None] * n for _ in range(n)]
    for (i, j), e in entries.items():
        node = ex.parse_expression(e, n) if isinstance(e, str) else e
        nodes[i][j] = node
        nodes[j][i] = node
    for i in range(n):
        for j in range(n):
            if nodes[i][j] is None:
                nodes[i][j] = ex.Num(1.0 if i == j else 0.0)
    dnodes = [[[ex.differentiate(nodes[i][j], k) for k in range(n)] for j in range(n)] for i in range(n)]

    def g(x):
        out = np.empty(x.shape[:-1] + (n, n))
        for i in range(n):
            for j in range(n):
                out[..., i, j] = ex.evaluate(nodes[i][j], x)
        return out

    def dg(x):
        out = np.empty(x.shape[:-1] + (n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    out[..., i, j, k] = ex.evaluate(dnodes[i][j][k], x)
        return out

    return MetricField(n, "entries", g, dg, params={"entries": nodes})


def from_callable(fn, n: int, h: float = FD_STEP) -> MetricField:
    """Wrap a plain g(x) callable; derivatives by central differences with step h."""

    def g(x):
        return np.asarray(fn(x), dtype=float)

    def dg(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            out[..., k] = (g(x + e) - g(x - e)) / (2.0 * h)
        return out

    return MetricField(n, "callable", g, dg, closed_form=False)


def inverse(gmat) -> np.ndarray:
    try:
        return np.linalg.inv(gmat)
    except np.linalg.LinAlgError:
        raise MetricError("metric is singular") from None


def sym_sqrt(gmat) -> np.ndarray:
    """Symmetric square root via eigendecomposition; raises on non-SPD input."""
    w, v = np.linalg.eigh(gmat)
    if np.any(w <= 0):
        raise MetricError("metric is not positive definite")
    return (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2)


def christoffel(metric: MetricField, x) -> np.ndarray:
    """Connection coefficients, indexed [..., k, i, j] and symmetric in (i, j)."""
    x = np.asarray(x, dtype=float)
    g = metric(x)
    dg = metric.derivatives(x)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise MetricError("metric is not positive definite") from None
    ginv = np.linalg.inv(g)
    # dg[..., i, j, k] = d_k g_ij; Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    di_gjl = np.einsum("...jli->...ijl", dg)   # d_i g_jl
    dj_gil = np.einsum("...ilj->...ijl", dg)   # d_j g_il
    dl_gij = np.einsum("...ijl->...ijl", dg)   # d_l g_ij
    bracket = di_gjl + dj_gil - dl_gij
    return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, bracket)


def validate_metric(metric: MetricField, bbox, rng, samples: int = 32, fd_tol: float = 1e-6) -> dict:
    """Sampled invariant checks: symmetry, positive definiteness, derivative consistency."""
    lo, hi = np.asarray(bbox[0], dtype=float), np.asarray(bbox[1], dtype=float)
    pts = lo + (hi - lo) * rng.uniform(size=(samples, metric.n))
    g = metric(pts)
    sym = float(np.abs(g - np.swapaxes(g, -1, -2)).max())
    eigmin = float(np.linalg.eigvalsh(g).min())
    if eigmin <= 0:
        raise MetricError("metric not positive definite on sampled box")
    fd_err = 0.0
    if metric.closed_form:
        dg = metric.derivatives(pts)
        fd = np.empty_like(dg)
        for k in range(metric.n):
            e = np.zeros(metric.n)
            e[k] = FD_STEP
            fd[..., k] = (metric(pts + e) - metric(pts - e)) / (2.0 * FD_STEP)
        fd_err = float(np.abs(dg - fd).max())
        if fd_err >= fd_tol:
            raise MetricError(f"closed-form metric derivatives disagree with FD: {fd_err:.3g}")
    return {"symmetry": sym, "min_eigenvalue": eigmin, "fd_error": fd_err}
