"""Dense two-phase simplex for the tiny LPs used by the polytope machinery.

Problems have at most a few dozen constraints and variables, so a plain
tableau with Bland's anti-cycling rule is plenty: deterministic, no
external solver, exact enough at 1e-9 tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: list, leave: int, enter: int) -> None:
    T[leave] = T[leave] / T[leave, enter]
    col = T[:, enter].copy()
    col[leave] = 0.0
    T -= np.outer(col, T[leave])
    basis[leave] = enter


def _run(T: np.ndarray, basis: list, ncols: int) -> str:
    nrows = T.shape[0] - 1
    while True:
        enter = -1
        for j in range(ncols):
            if T[-1, j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        ratios = np.full(nrows, np.inf)
        for i in range(nrows):
            if T[i, enter] > _TOL:
                ratios[i] = T[i, -1] / T[i, enter]
        best = ratios.min()
        if not np.isfinite(best):
            return "unbounded"
        # Bland: among minimal ratios, leave with the smallest basis index
        leave = min(
            (i for i in range(nrows) if ratios[i] <= best + 1e-12),
            key=lambda i: basis[i],
        )
        _pivot(T, basis, leave, enter)


def solve_lp(c, A, b, maximize: bool = False) -> LPResult:
    """min (or max) c.x subject to A x <= b, x free."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if maximize:
        res = solve_lp(-c, A, b)
        if res.optimal:
            res.value = -res.value
        return res

    nc, nv = A.shape
    # free x -> x = xp - xm, add slacks; flip rows so the rhs is nonnegative
    M = np.hstack([A, -A, np.eye(nc)])
    d = b.copy()
    neg = d < 0
    M[neg] *= -1.0
    d[neg] *= -1.0
    ncols = M.shape[1]

    # phase I
    T = np.zeros((nc + 1, ncols + nc + 1))
    T[:nc, :ncols] = M
    T[:nc, ncols:ncols + nc] = np.eye(nc)
    T[:nc, -1] = d
    basis = [ncols + i for i in range(nc)]
    T[-1, :ncols] = -M.sum(axis=0)
    T[-1, -1] = -d.sum()
    status = _run(T, basis, ncols + nc)
    if status != "optimal" or T[-1, -1] < -1e-7:
        return LPResult("infeasible")
    # drive leftover artificials out of the basis (degenerate rows)
    rows = []
    for i in range(nc):
        if basis[i] >= ncols:
            j = next((j for j in range(ncols) if abs(T[i, j]) > _TOL), None)
            if j is None:
                continue  # redundant row
            _pivot(T, basis, i, j)
        rows.append(i)

    # phase II
    T2 = np.zeros((len(rows) + 1, ncols + 1))
    for k, i in enumerate(rows):
        T2[k, :ncols] = T[i, :ncols]
        T2[k, -1] = T[i, -1]
    basis2 = [basis[i] for i in rows]
    cost = np.concatenate([c, -c, np.zeros(nc)])
    T2[-1, :ncols] = cost
    for k, j in enumerate(basis2):
        if cost[j] != 0.0:
            T2[-1] -= cost[j] * T2[k]
    status = _run(T2, basis2, ncols)
    if status != "optimal":
        return LPResult("unbounded")

    y = np.zeros(ncols)
    for k, j in enumerate(basis2):
        y[j] = T2[k, -1]
    x = y[:nv] - y[nv:2 * nv]
    return LPResult("optimal", x=x, value=float(c @ x))
