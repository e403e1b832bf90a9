"""Flat-metric spinor tuple fields on the smoothed domain in R^3.

Fields are m-tuples of spinors with polynomial entries, stored as a
coefficient tensor over a monomial basis: coeffs[M, alpha, beta] is the
coefficient of monomial M in the beta-coordinate of the alpha-th spinor.
With the flat trivialisation, Clifford multiplication by a direction v is
right multiplication by the generator combination of v, the connection is
the coordinate derivative, and the Dirac operator maps coefficient tensors
linearly.  Volume integrals over the smoothed domain are exact per grid
cell (cells selected by their centers), boundary integrals use the surface
mesh weights.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .geometry import sigma_geometry, tangent_frame
from .metrics import euclidean
from .polytope import Polytope, sample_face_points
from .smoothing import (
    SmoothedSurface,
    SurfaceMesh,
    grad_phi,
    hess_phi,
    log_phi,
    sphere_grid,
)


def monomial_basis(n: int, degree: int):
    """Exponent tuples of total degree <= degree, graded lexicographic."""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for j in combo:
                e[j] += 1
            out.append(tuple(e))
    seen = sorted(set(out), key=lambda e: (sum(e), e))
    return tuple(seen)


def vandermonde(basis, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    cols = [np.prod([x[:, j] ** e[j] for j in range(x.shape[1])], axis=0) for e in basis]
    return np.stack(cols, axis=1)


def partial_matrix(basis, axis: int) -> np.ndarray:
    """Matrix of d/dx_axis on the monomial basis (degree-closed)."""
    index = {e: i for i, e in enumerate(basis)}
    D = np.zeros((len(basis), len(basis)))
    for i, e in enumerate(basis):
        if e[axis] > 0:
            low = list(e)
            low[axis] -= 1
            D[index[tuple(low)], i] = e[axis]
    return D


@dataclass(frozen=True)
class PolyField:
    """m-tuple spinor field with polynomial entries (row = tuple slot)."""

    rep: object
    basis: tuple
    coeffs: np.ndarray   # (M, m, m) complex

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def m(self) -> int:
        return self.rep.m

    def __call__(self, x) -> np.ndarray:
        return np.einsum("pM,Mab->pab", vandermonde(self.basis, x), self.coeffs)

    def partial(self, axis: int) -> "PolyField":
        D = partial_matrix(self.basis, axis)
        return PolyField(self.rep, self.basis, np.einsum("NM,Mab->Nab", D, self.coeffs))

    def clifford(self, v) -> "PolyField":
        """Pointwise Clifford multiplication by a constant direction."""
        return PolyField(self.rep, self.basis, self.coeffs @ self.rep.direction_matrix(v))

    def gram(self, x) -> np.ndarray:
        """Pointwise tuple Gram matrix <s_a, s_b> at points x."""
        vals = self(x)
        return np.einsum("paj,pbj->pab", vals, np.conj(vals))


def constant_field(rep, z=None) -> PolyField:
    """The constant tuple with coefficient matrix z (default: the basis tuple)."""
    basis = monomial_basis(rep.n, 0)
    z = np.eye(rep.m, dtype=complex) if z is None else np.asarray(z, dtype=complex)
    return PolyField(rep, basis, z[None, :, :].copy())


def random_field(rep, degree: int, rng) -> PolyField:
    basis = monomial_basis(rep.n, degree)
    c = rng.normal(size=(len(basis), rep.m, rep.m)) + 1j * rng.normal(size=(len(basis), rep.m, rep.m))
    return PolyField(rep, basis, c)


def dirac(field: PolyField) -> PolyField:
    """sum_k (d_k field) . omega_k in the flat trivialisation."""
    out = np.zeros_like(field.coeffs)
    for k in range(field.n):
        out += field.partial(k).coeffs @ field.rep.omega[k]
    return PolyField(field.rep, field.basis, out)


def dirac_apply(rep, field: PolyField, x) -> np.ndarray:
    return dirac(field)(x)


def laplacian(field: PolyField) -> PolyField:
    out = np.zeros_like(field.coeffs)
    for k in range(field.n):
        out += field.partial(k).partial(k).coeffs
    return PolyField(field.rep, field.basis, out)


# ---------------------------------------------------------------------------
# volume quadrature: exact monomial integrals over inside cells


def _axis_integrals(edges: np.ndarray, max_exp: int) -> np.ndarray:
    """I[e, i] = integral of t^e over cell i with the given edge coordinates."""
    powers = np.arange(max_exp + 2)
    anti = edges[None, :] ** powers[:, None]  # (max_exp+2, cells+1)
    return np.stack([(anti[e + 1, 1:] - anti[e + 1, :-1]) / (e + 1) for e in range(max_exp + 1)])


def volume_monomial_integrals(surf: SmoothedSurface, resolution: int, max_degree: int) -> dict:
    """Exact integrals of monomials over the union of inside grid cells.

    Returns {exponent tuple: integral} for all per-axis exponents up to
    max_degree; the boundary error is one cell layer, O(1/resolution).
    """
    lo, hi = surf.polytope.bbox
    pad = 0.01 * (hi - lo)
    lo = lo - pad
    hi = hi + pad
    n = surf.n
    edges = [np.linspace(lo[j], hi[j], resolution + 1) for j in range(n)]
    centers = [0.5 * (e[:-1] + e[1:]) for e in edges]
    grid = np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1)
    mask = (log_phi(surf, grid.reshape(-1, n)) <= 0.0).reshape(grid.shape[:-1]).astype(float)
    axis_ints = [_axis_integrals(edges[j], max_degree) for j in range(n)]
    if n != 3:
        raise NotImplementedError("volume quadrature is implemented for n = 3")
    tmp = np.einsum("xyz,ax->ayz", mask, axis_ints[0])
    tmp = np.einsum("ayz,by->abz", tmp, axis_ints[1])
    table = np.einsum("abz,cz->abc", tmp, axis_ints[2])
    return {e: float(table[e]) for e in itertools.product(range(max_degree + 1), repeat=n)}


def monomial_gram(basis, integrals: dict) -> np.ndarray:
    """G[i, j] = integral of mono_i * mono_j over the domain."""
    M = len(basis)
    G = np.empty((M, M))
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            G[i, j] = integrals[tuple(a + b for a, b in zip(ei, ej))]
    return G


def field_l2(field: PolyField, G: np.ndarray) -> float:
    """Integral of the squared tuple norm with the supplied monomial Gram."""
    return float(np.einsum("Mab,MN,Nab->", np.conj(field.coeffs), G, field.coeffs).real)


def gradient_l2(field: PolyField, G: np.ndarray) -> float:
    return sum(field_l2(field.partial(k), G) for k in range(field.n))


# ---------------------------------------------------------------------------
# boundary operators on fields (flat metric)


def gauss_map_jacobian(surf: SmoothedSurface, x):
    """Gauss map and its ambient Jacobian for the level surface."""
    gp = grad_phi(surf, x)
    norm = np.linalg.norm(gp, axis=-1, keepdims=True)
    nhat = gp / norm
    Hp = hess_phi(surf, x)
    proj = np.eye(x.shape[-1]) - np.einsum("pi,pj->pij", nhat, nhat)
    return nhat, np.einsum("pij,pjk->pik", proj, Hp) / norm[..., None]


def direction_matrices(rep, vecs) -> np.ndarray:
    omega = np.stack(rep.omega)
    return np.einsum("...n,nab->...ab", vecs, omega)


def _mean_curvature_flat(surf: SmoothedSurface, x) -> np.ndarray:
    geo = sigma_geometry(euclidean(surf.n), surf, x)
    return geo.H


def boundary_dirac_apply(rep, surf: SmoothedSurface, field: PolyField, x, H=None) -> np.ndarray:
    """The boundary Dirac operator at surface points (ambient derivatives).

    sum_k nu . e_k . d_{e_k} s + H/2 s over a tangent frame; the frame
    choice drops out of the sum.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nhat, _ = gauss_map_jacobian(surf, x)
    g = np.broadcast_to(np.eye(surf.n), (len(x), surf.n, surf.n))
    frame = tangent_frame(g, nhat)
    if H is None:
        H = _mean_curvature_flat(surf, x)
    parts = np.stack([field.partial(j)(x) for j in range(surf.n)])  # (n, P, m, m)
    dS = np.einsum("jpab,pjk->pkab", parts, frame)
    A_t = direction_matrices(rep, np.swapaxes(frame, 1, 2))        # (P, n-1, m, m)
    A_nu = direction_matrices(rep, nhat)
    out = np.einsum("pkab,pkbc,pcd->pad", dS, A_t, A_nu)
    return out + 0.5 * H[:, None, None] * field(x)


def chi_field(rep, surf: SmoothedSurface, field: PolyField, x) -> np.ndarray:
    """Pointwise chirality of the field along the boundary (flat: N = nu = Gauss map)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nhat, _ = gauss_map_jacobian(surf, x)
    A = direction_matrices(rep, nhat)
    return -np.einsum("pab,pbc,pcd->pad", A, field(x), A)


def B_field(rep, surf: SmoothedSurface, field: PolyField, x, values=None) -> np.ndarray:
    """Pointwise first-order companion using the Gauss-map differential."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nhat, dn = gauss_map_jacobian(surf, x)
    g = np.broadcast_to(np.eye(surf.n), (len(x), surf.n, surf.n))
    frame = tangent_frame(g, nhat)
    dN_cols = np.einsum("pij,pjk->pik", dn, frame)        # dN(e_k), ambient columns
    om_dN = direction_matrices(rep, np.swapaxes(dN_cols, 1, 2))   # (P, n-1, m, m)
    A_t = direction_matrices(rep, np.swapaxes(frame, 1, 2))
    vals = field(x) if values is None else values
    return np.einsum("pkab,pbc,pkcd->pad", om_dN, vals, A_t)


def boundary_dirac_of_chi(rep, surf: SmoothedSurface, field: PolyField, x) -> np.ndarray:
    """Boundary Dirac applied to the composite field chi(s), by the product rule."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nhat, dn = gauss_map_jacobian(surf, x)
    g = np.broadcast_to(np.eye(surf.n), (len(x), surf.n, surf.n))
    frame = tangent_frame(g, nhat)
    A_nu = direction_matrices(rep, nhat)
    S = field(x)
    parts = np.stack([field.partial(j)(x) for j in range(surf.n)])
    dS = np.einsum("jpab,pjk->pkab", parts, frame)                  # (P, n-1, m, m)
    dn_cols = np.einsum("pij,pjk->pik", dn, frame)
    A_dn = direction_matrices(rep, np.swapaxes(dn_cols, 1, 2))     # (P, n-1, m, m)
    # d_{e_k} (chi s) = -(dA) S A - A (dS) A - A S (dA)
    d_chi = -(
        np.einsum("pkab,pbc,pcd->pkad", A_dn, S, A_nu)
        + np.einsum("pab,pkbc,pcd->pkad", A_nu, dS, A_nu)
        + np.einsum("pab,pbc,pkcd->pkad", A_nu, S, A_dn)
    )
    A_t = direction_matrices(rep, np.swapaxes(frame, 1, 2))
    H = _mean_curvature_flat(surf, x)
    chi_vals = -np.einsum("pab,pbc,pcd->pad", A_nu, S, A_nu)
    out = np.einsum("pkab,pkbc,pcd->pad", d_chi, A_t, A_nu)
    return out + 0.5 * H[:, None, None] * chi_vals


def tuple_pairing(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise sum over the tuple of spinor inner products <a_alpha, b_alpha>."""
    return np.einsum("pab,pab->p", a, np.conj(b))


def weitzenboeck_residual(rep, surf: SmoothedSurface, field: PolyField, mesh: SurfaceMesh, resolution: int) -> dict:
    """Relative defect of the flat integrated square identity.

    Volume side: -|D s|^2 + |grad s|^2 integrated exactly per inside cell;
    boundary side: <nu . D s, s> + <d_nu s, s> with mesh weights.  Returns
    both sides and |lhs - rhs| / (|lhs| + |rhs| + 1).
    """
    degree = max(sum(e) for e in field.basis)
    ints = volume_monomial_integrals(surf, resolution, max(1, 2 * degree))
    G = monomial_gram(field.basis, ints)
    ds = dirac(field)
    lhs = -field_l2(ds, G) + gradient_l2(field, G)

    pts = mesh.points
    nus = mesh.euclid_normals
    A_nu = direction_matrices(rep, nus)
    Sval = field(pts)
    Dval = ds(pts)
    term1 = tuple_pairing(np.einsum("pab,pbc->pac", Dval, A_nu), Sval)
    parts = np.stack([field.partial(j)(pts) for j in range(surf.n)])
    dnu_s = np.einsum("jpab,pj->pab", parts, nus)
    term2 = tuple_pairing(dnu_s, Sval)
    rhs = complex(np.sum(mesh.weights * (term1 + term2)))
    lhs = complex(lhs)
    return {
        "lhs": lhs.real,
        "rhs": rhs.real,
        "rhs_imag": rhs.imag,
        "residual": abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0),
    }


# ---------------------------------------------------------------------------
# kernel recovery


def _ball_gram(basis, center, radius: float, n: int) -> np.ndarray:
    nodes, wts = np.polynomial.legendre.leggauss(12)
    rho = 0.5 * radius * (nodes + 1.0)
    wr = 0.5 * radius * wts * rho ** (n - 1)
    dirs, sw = sphere_grid(n, 12)
    pts = (rho[:, None, None] * dirs[None, :, :] + np.asarray(center)).reshape(-1, n)
    V = vandermonde(basis, pts).reshape(len(rho), len(dirs), len(basis))
    return np.einsum("r,p,rpM,rpN->MN", wr, sw, V, V)


def ball_volume(n: int, radius: float) -> float:
    from math import gamma, pi

    return pi ** (n / 2.0) * radius ** n / gamma(n / 2.0 + 1.0)


def kernel_least_squares(
    rep,
    surf: SmoothedSurface,
    degree: int,
    mesh_resolution: int = 32,
    volume_resolution: int = 48,
    penalty: float | None = None,
) -> dict:
    """Minimise the Dirac energy plus a boundary-condition penalty.

    Quadratic objective over m-tuples with polynomial entries of the given
    degree, normalised to fixed mass on the interior ball U (Chebyshev
    center, half margin).  Solved as a generalised Hermitian eigenproblem;
    the penalty doubles until the boundary part is a small fraction of the
    residual (or the residual is at machine floor).
    """
    from .smoothing import mesh_sigma

    p = surf.polytope
    n, m = rep.n, rep.m
    basis = monomial_basis(n, degree)
    M = len(basis)
    unknowns = M * m * m

    ints = volume_monomial_integrals(surf, volume_resolution, max(1, 2 * degree))
    G = monomial_gram(basis, ints)
    # Dirac operator as a matrix on flattened (M, a, b) coefficients
    L = np.zeros((unknowns, unknowns), dtype=complex)
    eye_m = np.eye(m)
    for k in range(n):
        Dk = partial_matrix(basis, k)
        L += np.kron(Dk, np.kron(eye_m, rep.omega[k].T))
    big_G = np.kron(G, np.eye(m * m))
    M_dirac = L.conj().T @ big_G @ L

    mesh = mesh_sigma(surf, mesh_resolution)
    pts, wts, nus = mesh.points, mesh.weights, mesh.euclid_normals
    V = vandermonde(basis, pts)
    A_nu = direction_matrices(rep, nus)
    eye2 = np.eye(m * m)
    chi_mats = -np.einsum("pab,pcd->pacbd", A_nu, np.swapaxes(A_nu, 1, 2)).reshape(-1, m * m, m * m)
    R = eye2[None] - chi_mats
    S = np.einsum("pji,pjk->pik", np.conj(R), R)
    M_bd = np.einsum("p,pM,pN,pst->MsNt", wts, np.conj(V), V, S).reshape(unknowns, unknowns)

    center = p.chebyshev_point
    radius = 0.5 * p.chebyshev_margin
    GU = _ball_gram(basis, center, radius, n)
    B = np.kron(GU, np.eye(m * m))
    target = m * ball_volume(n, radius)

    if penalty is None:
        h = np.sqrt(mesh.total_area / len(pts))
        penalty = 1e3 / h
    Bh = 0.5 * (B + B.conj().T)
    cond = float(np.linalg.cond(Bh))
    ridge = 0.0
    for _ in range(8):
        Mtot = M_dirac + penalty * M_bd
        Mtot = 0.5 * (Mtot + Mtot.conj().T)
        try:
            vals, vecs = scipy.linalg.eigh(Mtot, Bh + ridge * np.eye(unknowns))
        except np.linalg.LinAlgError:
            # near-singular mass matrix: regularise and retry
            ridge = max(10.0 * ridge, 1e-12 * np.abs(Bh).max())
            vals, vecs = scipy.linalg.eigh(Mtot, Bh + ridge * np.eye(unknowns))
        v = vecs[:, 0]
        scale = np.sqrt(target / float((v.conj() @ B @ v).real))
        c = v * scale
        residual = float((c.conj() @ Mtot @ c).real)
        bd_part = penalty * float((c.conj() @ M_bd @ c).real)
        if residual < 1e-12 or bd_part <= 1e-2 * residual:
            break
        penalty *= 2.0
    field = PolyField(rep, basis, c.reshape(M, m, m))
    nonconstant = float(np.abs(field.coeffs[1:]).max()) if M > 1 else 0.0
    return {
        "field": field,
        "residual": residual,
        "boundary_part": bd_part,
        "dirichlet_part": float((c.conj() @ M_dirac @ c).real),
        "penalty": penalty,
        "conditioning": cond,
        "ridge": ridge,
        "nonconstant_max": nonconstant,
        "gram": field.gram(center[None])[0],
    }


def gram_commutators(rep, z: np.ndarray, p: Polytope) -> float:
    """Max commutator norm of the Gram matrix with each face-normal generator."""
    worst = 0.0
    for h in p.halfspaces:
        A = rep.direction_matrix(h.unit_normal)
        worst = max(worst, float(np.abs(A @ z - z @ A).max()))
    return worst


def second_fundamental_form_check(rep, field: PolyField, p: Polytope, i0: int, count: int = 64, seed: int = 0) -> float:
    """Max defect of the face identity nu_i . s_alpha = sum <N_i, E_a> omega_a s.

    In the flat case both sides are generator contractions; the defect is
    the commutator of the field values with the face-normal combination.
    """
    rng = np.random.default_rng(seed)
    pts = sample_face_points(p, i0, count, rng)
    A = rep.direction_matrix(p.halfspaces[i0].unit_normal)
    vals = field(pts)
    lhs = np.einsum("pab,bc->pac", vals, A)
    rhs = np.einsum("ab,pbc->pac", A, vals)
    return float(np.abs(lhs - rhs).max())
