"""Halfspace representation of compact convex polytopes.

A polytope is the intersection of halfspaces ``u_i(x) = <a_i, x> + b_i <= 0``.
Construction eliminates redundant faces, certifies that every surviving face
is exposed (a strictly positive witness point outside that face alone),
and certifies boundedness and a nonempty interior via small LPs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import solve_lp

REDUNDANCY_TOL = 1e-9


class PolytopeError(Exception):
    pass


class DegeneratePolytopeError(PolytopeError):
    """Empty interior."""


class UnboundedPolytopeError(PolytopeError):
    pass


@dataclass(frozen=True)
class Halfspace:
    """One inequality u(x) = <a, x> + b <= 0 with a != 0."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if np.linalg.norm(a) <= 0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    def value(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.a + self.b

    @property
    def unit_normal(self) -> np.ndarray:
        return self.a / np.linalg.norm(self.a)


@dataclass(frozen=True)
class Polytope:
    n: int
    halfspaces: tuple
    interior_point: np.ndarray
    witnesses: tuple           # per face: point with u_i0 > 0, all other u_i <= 0
    chebyshev_point: np.ndarray
    chebyshev_margin: float    # Euclidean inradius
    func_margin: float         # max over x of min_i(-u_i(x))
    bbox: tuple                # (lo, hi) coordinate bounds

    @property
    def nfaces(self) -> int:
        return len(self.halfspaces)

    @property
    def A(self) -> np.ndarray:
        return np.array([h.a for h in self.halfspaces])

    @property
    def b(self) -> np.ndarray:
        return np.array([h.b for h in self.halfspaces])

    @property
    def unit_normals(self) -> np.ndarray:
        return np.array([h.unit_normal for h in self.halfspaces])

    def values(self, x) -> np.ndarray:
        """u_i at one point (shape (|I|,)) or a batch (shape (P, |I|))."""
        return np.asarray(x, dtype=float) @ self.A.T + self.b

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return np.all(self.values(x) <= tol, axis=-1)


def _witness_lp(A, b, i0):
    """Maximise u_i0 subject to the other faces and the cap u_i0 <= 1.

    The cap keeps the LP bounded when dropping face i0 unbounds the set;
    the cap direction equals a_i0, so the capped region stays compact.
    Returns the result with ``value`` equal to the attained u_i0.
    """
    rows = [A[i] for i in range(len(b)) if i != i0] + [A[i0]]
    rhs = [-b[i] for i in range(len(b)) if i != i0] + [1.0 - b[i0]]
    res = solve_lp(A[i0], np.array(rows), np.array(rhs), maximize=True)
    if res.optimal:
        res.value = res.value + b[i0]
    return res


def make_polytope(halfspaces, n: int) -> Polytope:
    """Build a validated polytope, dropping redundant halfspaces.

    Raises DegeneratePolytopeError for an empty interior and
    UnboundedPolytopeError when the normals fail to span positively.
    """
    hs = [h if isinstance(h, Halfspace) else Halfspace(np.asarray(h[0]), h[1]) for h in halfspaces]
    if any(h.a.shape != (n,) for h in hs):
        raise ValueError("halfspace dimension mismatch")
    if len(hs) < n + 1:
        raise DegeneratePolytopeError("need at least n+1 halfspaces for a compact polytope")

    A = np.array([h.a for h in hs])
    b = np.array([h.b for h in hs])

    # interior: Chebyshev LP, max t with <a_i,x> + b_i + t|a_i| <= 0
    norms = np.linalg.norm(A, axis=1)
    ext = np.hstack([A, norms[:, None]])
    res = solve_lp(np.append(np.zeros(n), -1.0), ext, -b)
    if res.status == "infeasible" or (res.optimal and res.x[-1] <= REDUNDANCY_TOL):
        raise DegeneratePolytopeError("polytope has empty interior")
    if res.status == "unbounded":
        raise UnboundedPolytopeError("positive span condition fails")
    cheb = res.x[:n].copy()
    margin = float(res.x[-1])

    # boundedness plus coordinate bounding box: 2n LPs
    lo = np.empty(n)
    hi = np.empty(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        up = solve_lp(e, A, -b, maximize=True)
        dn = solve_lp(e, A, -b, maximize=False)
        if not (up.optimal and dn.optimal):
            raise UnboundedPolytopeError(f"polytope unbounded along coordinate {j}")
        hi[j] = up.value
        lo[j] = dn.value

    # greedy redundancy elimination, first-to-last; keeps one copy of duplicates
    kept = list(range(len(hs)))
    i = 0
    while i < len(kept):
        idx = kept[i]
        others = [k for k in kept if k != idx]
        res = _witness_lp(A[others + [idx]], b[others + [idx]], len(others))
        if res.optimal and res.value <= REDUNDANCY_TOL:
            kept.pop(i)
        else:
            i += 1
    hs = [hs[k] for k in kept]
    A = A[kept]
    b = b[kept]

    witnesses = []
    for i0 in range(len(hs)):
        res = _witness_lp(A, b, i0)
        assert res.optimal and res.value > REDUNDANCY_TOL
        witnesses.append(res.x.copy())

    rank = np.linalg.matrix_rank(A, tol=1e-10)
    assert rank == n, "bounded polytope must have normals spanning R^n"

    # function margin for the smoothing threshold
    ext = np.hstack([A, np.ones((len(hs), 1))])
    res = solve_lp(np.append(np.zeros(n), -1.0), ext, -b)
    assert res.optimal
    fmargin = float(res.x[-1])

    return Polytope(
        n=n,
        halfspaces=tuple(hs),
        interior_point=cheb,
        witnesses=tuple(witnesses),
        chebyshev_point=cheb,
        chebyshev_margin=margin,
        func_margin=fmargin,
        bbox=(lo, hi),
    )


def lambda0(p: Polytope) -> float:
    """Smallest smoothing rate for which the shrunk polytope is nonempty.

    Returns log|I| / t* with t* the function margin: for every rate above
    this the sublevel set of the exponential sum is nonempty.
    """
    return float(np.log(p.nfaces) / p.func_margin)


def face_interior_point(p: Polytope, i0: int) -> np.ndarray:
    """A point on face i0 with every other constraint strictly negative.

    Convex combination of the face witness z0 and the interior point z1,
    placed where the face function crosses zero.
    """
    z0 = p.witnesses[i0]
    z1 = p.interior_point
    u0 = p.halfspaces[i0].value(z0)
    u1 = p.halfspaces[i0].value(z1)
    tau = u0 / (u0 - u1)
    return (1.0 - tau) * z0 + tau * z1


def normals_span_rank(p: Polytope) -> int:
    return int(np.linalg.matrix_rank(p.unit_normals, tol=1e-10))


def edge_pairs(p: Polytope, tol: float = 1e-9):
    """Index pairs (i1, i2) whose faces meet inside the polytope.

    Feasibility LP per pair: maximise the slack of the remaining faces on
    the affine set {u_i1 = 0, u_i2 = 0}; a positive optimum certifies a
    relatively open piece of the edge.
    """
    A, b = p.A, p.b
    n = p.n
    pairs = []
    for i1 in range(p.nfaces):
        for i2 in range(i1 + 1, p.nfaces):
            rows, rhs = [], []
            for i in (i1, i2):
                rows += [np.append(A[i], 0.0), np.append(-A[i], 0.0)]
                rhs += [-b[i], b[i]]
            for i in range(p.nfaces):
                if i not in (i1, i2):
                    rows.append(np.append(A[i], 1.0))
                    rhs.append(-b[i])
            rows.append(np.append(np.zeros(n), 1.0))
            rhs.append(1.0)
            res = solve_lp(np.append(np.zeros(n), -1.0), np.array(rows), np.array(rhs))
            if res.optimal and res.x[-1] > tol:
                pairs.append((i1, i2, res.x[:n].copy()))
    return pairs


def sample_edge_points(p: Polytope, i1: int, i2: int, x0: np.ndarray, count: int, rng) -> np.ndarray:
    """Points on the (n-2)-dimensional edge face, spread from the interior point x0."""
    A, b = p.A, p.b
    pair = np.array([A[i1], A[i2]])
    _, _, vt = np.linalg.svd(pair)
    Z = vt[2:].T  # null space of the two face normals
    if Z.shape[1] == 0:
        return np.array([x0])
    others = [i for i in range(p.nfaces) if i not in (i1, i2)]
    pts = np.empty((count, p.n))
    u0 = p.values(x0)
    for k in range(count):
        y = rng.normal(size=Z.shape[1])
        v = Z @ (y / np.linalg.norm(y))
        av = A[others] @ v
        thi = np.inf
        tlo = -np.inf
        for u, s in zip(u0[others], av):
            if s > 1e-14:
                thi = min(thi, -u / s)
            elif s < -1e-14:
                tlo = max(tlo, -u / s)
        t = rng.uniform(0.98 * tlo, 0.98 * thi)
        pts[k] = x0 + t * v
    return pts


def sample_face_points(p: Polytope, i0: int, count: int, rng) -> np.ndarray:
    """Points spread over the open face i0 (strictly inside the other constraints)."""
    x0 = face_interior_point(p, i0)
    a = p.halfspaces[i0].a
    _, _, vt = np.linalg.svd(a[None, :])
    Z = vt[1:].T
    others = [i for i in range(p.nfaces) if i != i0]
    A = p.A
    u0 = p.values(x0)
    pts = np.empty((count, p.n))
    for k in range(count):
        y = rng.normal(size=Z.shape[1])
        v = Z @ (y / np.linalg.norm(y))
        av = A[others] @ v
        thi, tlo = np.inf, -np.inf
        for u, s in zip(u0[others], av):
            if s > 1e-14:
                thi = min(thi, -u / s)
            elif s < -1e-14:
                tlo = max(tlo, -u / s)
        pts[k] = x0 + rng.uniform(0.95 * tlo, 0.95 * thi) * v
    return pts


def cube(n: int = 3, side: float = 1.0) -> list:
    """Axis-aligned [0, side]^n as 2n unit-normal halfspaces."""
    hs = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        hs.append(Halfspace(e.copy(), -side))
        hs.append(Halfspace(-e.copy(), 0.0))
    return hs


def simplex_polytope(n: int = 3) -> list:
    """Standard simplex {x_i >= 0, sum x_i <= 1} with unit normals."""
    hs = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = -1.0
        hs.append(Halfspace(e, 0.0))
    hs.append(Halfspace(np.ones(n) / np.sqrt(n), -1.0 / np.sqrt(n)))
    return hs


def sheared_prism(alpha: float = 0.5) -> list:
    """Unit box with the top face tilted: x3 + alpha*x1 <= 1 + alpha/2."""
    hs = cube(3)
    a = np.array([alpha, 0.0, 1.0])
    a = a / np.linalg.norm(a)
    offset = (1.0 + alpha / 2.0) / np.linalg.norm([alpha, 0.0, 1.0])
    return hs[:-2] + [hs[-1], Halfspace(a, -offset)]
