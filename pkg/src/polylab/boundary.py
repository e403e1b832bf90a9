"""Pointwise boundary operator algebra on m-tuples of spinors.

An m-tuple s = (s_1, ..., s_m) is stored as an m x m complex array whose
row alpha holds the coordinates of s_alpha in the fixed spinor basis.  The
Clifford action of a direction with coefficient matrix A is then right
multiplication S -> S @ A, and the chirality and its companion map are

    chi(S) = -Omega_N @ S @ A_nu,       B(S) = sum_k Omega_dN(e_k) @ S @ A_ek,

where Omega_v is the real combination of the generators with coefficient
vector v.  The involution, self-adjointness, commutation, and trace-norm
bound are all consequences of the generator relations and are exercised
numerically in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import MetricError, sym_sqrt
from .spin import SpinRep

SpinorMTuple = np.ndarray


def trace_norm(L) -> float:
    """Sum of the singular values of a real or complex rectangular matrix."""
    return float(np.linalg.svd(np.asarray(L), compute_uv=False).sum())


@dataclass(frozen=True)
class BoundaryPointFrame:
    """Clifford data of one boundary point.

    nu_action and tangent_actions are coefficient matrices of an
    orthonormal frame under the metric (normal first), so they pairwise
    anticommute and square to -id.  dN stores the differential of the
    unit-vector map N over the tangent frame as ambient columns
    orthogonal to N.
    """

    rep: SpinRep
    nu_action: np.ndarray
    tangent_actions: tuple
    N: np.ndarray
    dN: np.ndarray

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def m(self) -> int:
        return self.rep.m

    def N_action(self) -> np.ndarray:
        return self.rep.direction_matrix(self.N)


def frame_residuals(frame: BoundaryPointFrame) -> dict:
    """Invariant residuals: skewness, squares, anticommutation, unit N, dN orthogonality."""
    acts = (frame.nu_action,) + tuple(frame.tangent_actions)
    m = frame.m
    eye = np.eye(m)
    skew = max(np.abs(a + a.conj().T).max() for a in acts)
    sq = max(np.abs(a @ a + eye).max() for a in acts)
    anti = 0.0
    for i in range(len(acts)):
        for j in range(i + 1, len(acts)):
            anti = max(anti, np.abs(acts[i] @ acts[j] + acts[j] @ acts[i]).max())
    unit = abs(np.linalg.norm(frame.N) - 1.0)
    orth = np.abs(frame.dN.T @ frame.N).max() if frame.dN.size else 0.0
    return {"skew": skew, "square": sq, "anticommute": anti, "unit_N": unit, "dN_orth": orth}


def frame_from_metric(g_at_x, rep: SpinRep, normal_direction, N, dN) -> BoundaryPointFrame:
    """Build the frame from the metric value at the point.

    The spin gauge is the inverse symmetric square root of g: a metric
    vector xi acts through the coefficient vector sqrt(g) @ xi, which is
    Euclidean-unit exactly when xi is metric-unit.
    """
    g = np.asarray(g_at_x, dtype=float)
    n = rep.n
    if g.shape != (n, n) or not np.allclose(g, g.T):
        raise MetricError("metric value must be a symmetric n x n matrix")
    root = sym_sqrt(g)
    v = np.asarray(normal_direction, dtype=float)
    nv = np.sqrt(v @ g @ v)
    if nv <= 0:
        raise ValueError("normal direction must be nonzero")
    nu = v / nv
    # Householder completion of sqrt(g) nu into a Euclidean orthonormal basis
    q = root @ nu
    sign = 1.0 if q[0] >= 0 else -1.0
    w = q.copy()
    w[0] += sign
    Hh = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    coeffs = [q] + [Hh[:, k] for k in range(1, n)]
    acts = [rep.direction_matrix(c) for c in coeffs]
    N = np.asarray(N, dtype=float)
    N = N / np.linalg.norm(N)
    dN = np.asarray(dN, dtype=float)
    dN = dN - np.outer(N, N @ dN)
    return BoundaryPointFrame(rep, acts[0], tuple(acts[1:]), N, dN)


def chi_apply(frame: BoundaryPointFrame, s: SpinorMTuple) -> SpinorMTuple:
    """The chirality involution at the point."""
    return -frame.N_action() @ np.asarray(s, dtype=complex) @ frame.nu_action


def B_apply(frame: BoundaryPointFrame, s: SpinorMTuple) -> SpinorMTuple:
    """The first-order companion built from the differential of N."""
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    for k, tk in enumerate(frame.tangent_actions):
        out += frame.rep.direction_matrix(frame.dN[:, k]) @ s @ tk
    return out


def tuple_inner(s: SpinorMTuple, t: SpinorMTuple) -> complex:
    """Sum over the tuple of the spinor inner products <s_alpha, t_alpha>."""
    return complex(np.sum(np.asarray(s) * np.conj(np.asarray(t))))


def chi_matrix(frame: BoundaryPointFrame) -> np.ndarray:
    """chi as an m^2 x m^2 matrix on row-major flattened tuples."""
    return -np.kron(frame.N_action(), frame.nu_action.T)


def B_matrix(frame: BoundaryPointFrame) -> np.ndarray:
    out = np.zeros((frame.m ** 2, frame.m ** 2), dtype=complex)
    for k, tk in enumerate(frame.tangent_actions):
        out += np.kron(frame.rep.direction_matrix(frame.dN[:, k]), tk.T)
    return out


def chi_eigenspace_dims(frame: BoundaryPointFrame) -> tuple:
    """Dimensions of the +1 and -1 eigenspaces of the chirality."""
    vals = np.linalg.eigvalsh(chi_matrix(frame))
    plus = int(np.sum(np.abs(vals - 1.0) < 1e-8))
    minus = int(np.sum(np.abs(vals + 1.0) < 1e-8))
    return plus, minus


def tangent_clifford_exchange(frame: BoundaryPointFrame, xi_coeffs) -> dict:
    """Spectral facts of L s = i nu . xi . s for a tangent direction xi.

    xi_coeffs are the components of xi over the frame's tangent actions.
    Returns the anticommutator residual with chi, the residual of
    L^2 = |xi|^2 id, and the dimension of the overlap between the top
    eigenspace of L and the fixed space of chi (zero by ellipticity).
    """
    xi_coeffs = np.asarray(xi_coeffs, dtype=float)
    xi_act = sum(c * t for c, t in zip(xi_coeffs, frame.tangent_actions))
    m = frame.m
    L = 1j * np.kron(np.eye(m), (xi_act @ frame.nu_action).T)
    C = chi_matrix(frame)
    norm2 = float(xi_coeffs @ xi_coeffs)
    anti = np.abs(L @ C + C @ L).max()
    sq = np.abs(L @ L - norm2 * np.eye(m * m)).max()
    norm = np.sqrt(norm2)
    proj_plus_chi = 0.5 * (np.eye(m * m) + C)
    proj_plus_L = 0.5 * (np.eye(m * m) + L / norm)
    stack = np.vstack([np.eye(m * m) - proj_plus_chi, np.eye(m * m) - proj_plus_L])
    overlap = m * m - np.linalg.matrix_rank(stack, tol=1e-8)
    return {"anticommute": float(anti), "square": float(sq), "overlap_dim": int(overlap)}


def random_frame(rep: SpinRep, rng) -> BoundaryPointFrame:
    """Random valid frame: SPD metric value, normal direction, unit N, projected dN."""
    n = rep.n
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    g = Q @ np.diag(np.exp(rng.uniform(-1.0, 1.0, size=n))) @ Q.T
    v = rng.normal(size=n)
    N = rng.normal(size=n)
    N /= np.linalg.norm(N)
    dN = rng.normal(size=(n, n - 1))
    return frame_from_metric(g, rep, v, N, dN)
