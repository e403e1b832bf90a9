"""Dyadic cube machinery on grids: maximal weights, oscillation, trace ratios.

Functions live on a base cube [0, side]^d sampled at cell centers with
2^L cells per axis, so cells align with the dyadic tree.  Every per-cube
aggregate goes through the same contiguous block-sum primitives in both
the fast level-by-level paths and the O(cells^2) brute-force oracles, so
the two agree bitwise, not just to tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class HypothesisViolatedError(RuntimeError):
    """The scale-weighted integral condition fails for the supplied weight."""


@dataclass(frozen=True)
class DyadicCube:
    """Subcube of the base cube: depth 0 is the root, side halves per level."""

    dim: int
    level: int
    index: tuple

    def __post_init__(self):
        if len(self.index) != self.dim:
            raise ValueError("index length must equal dim")
        if any(not 0 <= j < 2 ** self.level for j in self.index):
            raise ValueError("index out of range for level")

    def side(self, root_side: float = 1.0) -> float:
        return root_side * 2.0 ** (-self.level)

    def diam(self, root_side: float = 1.0) -> float:
        return self.side(root_side) * np.sqrt(self.dim)

    def volume(self, root_side: float = 1.0) -> float:
        return self.side(root_side) ** self.dim

    def bounds(self, root_side: float = 1.0):
        s = self.side(root_side)
        lo = np.array(self.index, dtype=float) * s
        return lo, lo + s

    def children(self):
        return [
            DyadicCube(self.dim, self.level + 1, tuple(2 * j + o for j, o in zip(self.index, off)))
            for off in itertools.product((0, 1), repeat=self.dim)
        ]

    def cell_slice(self, grid_level: int):
        s = 2 ** (grid_level - self.level)
        return tuple(slice(j * s, (j + 1) * s) for j in self.index)


def all_cubes(dim: int, max_level: int):
    for level in range(max_level + 1):
        for index in itertools.product(range(2 ** level), repeat=dim):
            yield DyadicCube(dim, level, index)


@dataclass
class GridFunction:
    """Cell-centered samples on the base cube; resolution is a power of two."""

    values: np.ndarray
    side: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        r = self.values.shape[0]
        if any(s != r for s in self.values.shape):
            raise ValueError("grid must be square")
        if r & (r - 1):
            raise ValueError("resolution must be a power of two")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def level(self) -> int:
        return int(np.log2(self.values.shape[0]))

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def cell_volume(self) -> float:
        return (self.side / self.resolution) ** self.dim

    def cell_centers(self) -> np.ndarray:
        ax = (np.arange(self.resolution) + 0.5) * (self.side / self.resolution)
        grids = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack(grids, axis=-1)

    def integrate(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def diam(self) -> float:
        return self.side * np.sqrt(self.dim)


def _block_rows(values: np.ndarray, depth: int) -> np.ndarray:
    """Rows of per-cube cells at the given depth, contiguous C order."""
    d = values.ndim
    nb = 2 ** depth
    s = values.shape[0] // nb
    shape = ()
    for _ in range(d):
        shape += (nb, s)
    v = values.reshape(shape)
    order = tuple(range(0, 2 * d, 2)) + tuple(range(1, 2 * d, 2))
    return np.ascontiguousarray(v.transpose(order)).reshape((nb,) * d + (s ** d,))


def _avg_pow(total, count, sigma):
    """(total/count)^(1/sigma) routed through a contiguous array.

    numpy's pow takes a SIMD path on contiguous data and a scalar path
    otherwise, and the two can differ in the last ulp; forcing one path
    keeps the fast aggregations and the brute-force oracles bitwise equal.
    """
    scalar = np.ndim(total) == 0
    avg = np.ascontiguousarray(np.atleast_1d(total / count), dtype=float)
    out = avg ** (1.0 / sigma)
    return float(out[0]) if scalar else out


def _morrey_value(diam, total, count, sigma):
    return diam * _avg_pow(total, count, sigma)


def _ancestor_max(level_values) -> np.ndarray:
    """Pointwise max over the ancestor chain of per-level cube arrays."""
    cur = level_values[0]
    for nxt in level_values[1:]:
        for ax in range(cur.ndim):
            cur = np.repeat(cur, 2, axis=ax)
        cur = np.maximum(cur, nxt)
    return cur


def morrey_norm(V: GridFunction, sigma: float) -> float:
    """Sup over dyadic subcubes of diam(Q) * (mean of V^sigma over Q)^(1/sigma)."""
    if np.any(V.values < 0):
        raise ValueError("V must be nonnegative")
    vs = V.values ** sigma
    best = -np.inf
    for depth in range(V.level + 1):
        rows = _block_rows(vs, depth)
        count = rows.shape[-1]
        sums = rows.sum(axis=-1)
        diam = V.side * 2.0 ** (-depth) * np.sqrt(V.dim)
        best = max(best, float(_morrey_value(diam, sums, count, sigma).max()))
    return best


def morrey_norm_brute(V: GridFunction, sigma: float) -> float:
    vs = V.values ** sigma
    best = -np.inf
    for cube in all_cubes(V.dim, V.level):
        block = np.ascontiguousarray(vs[cube.cell_slice(V.level)]).ravel()
        val = _morrey_value(cube.diam(V.side), np.sum(block), block.size, sigma)
        best = max(best, float(val))
    return best


def _level_averages(V: GridFunction, sigma: float):
    vs = V.values ** sigma
    out = []
    for depth in range(V.level + 1):
        rows = _block_rows(vs, depth)
        out.append(_avg_pow(rows.sum(axis=-1), rows.shape[-1], sigma))
    return out


def weight_W(V: GridFunction, sigma: float, lam: float = 0.0) -> GridFunction:
    """Dyadic maximal weight max(lam, sup over containing subcubes of the L^sigma mean).

    ``lam`` stands in for the supremum over cubes strictly containing the
    base cube, which the grid cannot see.
    """
    w0 = _ancestor_max(_level_averages(V, sigma))
    return GridFunction(np.maximum(lam, w0), V.side)


def weight_W_brute(V: GridFunction, sigma: float, lam: float = 0.0) -> GridFunction:
    vs = V.values ** sigma
    out = np.full_like(V.values, lam)
    for cube in all_cubes(V.dim, V.level):
        block = np.ascontiguousarray(vs[cube.cell_slice(V.level)]).ravel()
        val = _avg_pow(np.sum(block), block.size, sigma)
        sl = cube.cell_slice(V.level)
        out[sl] = np.maximum(out[sl], val)
    return GridFunction(out, V.side)


def oscillation_g(f: GridFunction) -> GridFunction:
    """Dyadic maximal mean oscillation sup over containing subcubes of mean |f - f_Q|."""
    levels = []
    for depth in range(f.level + 1):
        rows = _block_rows(f.values, depth)
        count = rows.shape[-1]
        means = rows.sum(axis=-1) / count
        osc = np.abs(rows - means[..., None]).sum(axis=-1) / count
        levels.append(osc)
    return GridFunction(_ancestor_max(levels), f.side)


def oscillation_g_brute(f: GridFunction) -> GridFunction:
    out = np.zeros_like(f.values)
    for cube in all_cubes(f.dim, f.level):
        block = np.ascontiguousarray(f.values[cube.cell_slice(f.level)]).ravel()
        mean = np.sum(block) / block.size
        osc = np.sum(np.abs(block - mean)) / block.size
        sl = cube.cell_slice(f.level)
        out[sl] = np.maximum(out[sl], osc)
    return GridFunction(out, f.side)


@dataclass(frozen=True)
class TrigField:
    """Finite cosine sum with analytic gradient, defined on all of R^n."""

    amps: tuple
    wavevecs: tuple   # tuples of floats
    phases: tuple

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for a, k, p in zip(self.amps, self.wavevecs, self.phases):
            out += a * np.cos(x @ np.asarray(k) + p)
        return out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, k, p in zip(self.amps, self.wavevecs, self.phases):
            k = np.asarray(k)
            out += (-a * np.sin(x @ k + p))[..., None] * k
        return out


def constant_field(c: float, dim: int) -> TrigField:
    return TrigField((float(c),), (tuple([0.0] * dim),), (0.0,))


def random_trig_field(dim: int, rng, nterms: int = 4, kmax: float = 6.0) -> TrigField:
    amps = tuple(rng.uniform(-1.0, 1.0, size=nterms))
    waves = tuple(tuple(rng.uniform(-kmax, kmax, size=dim)) for _ in range(nterms))
    phases = tuple(rng.uniform(0.0, 2.0 * np.pi, size=nterms))
    return TrigField(amps, waves, phases)


@dataclass(frozen=True)
class SpikeWeight:
    """Piecewise-constant nonnegative weight: base level plus dyadic cube spikes.

    Resolution-independent description, so the same weight can be sampled
    on grids of different levels for refinement studies.
    """

    base: float
    spikes: tuple   # (DyadicCube, amplitude)
    side: float = 1.0
    scale: float = 1.0

    def sample(self, level: int) -> GridFunction:
        dim = self.spikes[0][0].dim if self.spikes else 2
        vals = np.full((2 ** level,) * dim, self.base)
        for cube, amp in self.spikes:
            vals[cube.cell_slice(level)] += amp
        return GridFunction(self.scale * vals, self.side)

    def normalized(self, sigma: float, level: int) -> "SpikeWeight":
        norm = morrey_norm(self.sample(level), sigma)
        return SpikeWeight(self.base, self.spikes, self.side, self.scale / norm)


def random_spike_weight(dim: int, rng, max_depth: int = 4, nspikes: int = 3) -> SpikeWeight:
    spikes = []
    for _ in range(rng.integers(1, nspikes + 1)):
        depth = int(rng.integers(1, max_depth + 1))
        index = tuple(int(rng.integers(0, 2 ** depth)) for _ in range(dim))
        spikes.append((DyadicCube(dim, depth, index), float(rng.uniform(0.5, 4.0) * 2.0 ** depth)))
    return SpikeWeight(float(rng.uniform(0.0, 0.3)), tuple(spikes))


def _volume_grid(side: float, dim: int, level: int, height: float):
    """Cell centers and cell volume of the box base x [0, height]."""
    res = 2 ** level
    h = side / res
    nz = max(1, int(np.ceil(height / h)))
    hz = height / nz
    ax = (np.arange(res) + 0.5) * h
    az = (np.arange(nz) + 0.5) * hz
    grids = np.meshgrid(*([ax] * dim + [az]), indexing="ij")
    pts = np.stack(grids, axis=-1)
    return pts.reshape(-1, dim + 1), h ** dim * hz


def halfspace_trace_ratio(V: GridFunction, F: TrigField, sigma: float, check: bool = True) -> dict:
    """Empirical constant of the weighted boundary estimate on the base cube.

    LHS integrates V f^2 over the base cube (f the boundary restriction of
    F); RHS is the gradient energy over base x [0, diam] plus diam^-1 times
    the boundary L^2 mass.  Returns the pieces and LHS / RHS.
    """
    if check and morrey_norm(V, sigma) > 1.0 + 1e-9:
        raise HypothesisViolatedError("weight violates the scale-weighted integral condition")
    dim = V.dim
    centers = V.cell_centers().reshape(-1, dim)
    bpts = np.hstack([centers, np.zeros((len(centers), 1))])
    f = F(bpts)
    cell_area = (V.side / V.resolution) ** dim
    lhs = float((V.values.ravel() * f ** 2).sum() * cell_area)
    f_term = float(f.dot(f) * cell_area / V.diam())
    vol_pts, vol_cell = _volume_grid(V.side, dim, V.level, V.diam())
    grad = F.gradient(vol_pts)
    grad_term = float((grad ** 2).sum() * vol_cell)
    rhs = grad_term + f_term
    if rhs == 0.0:
        if lhs == 0.0:
            return {"lhs": 0.0, "grad_term": 0.0, "f_term": 0.0, "ratio": 0.0}
        raise HypothesisViolatedError("zero right-hand side with nonzero left-hand side")
    return {"lhs": lhs, "grad_term": grad_term, "f_term": f_term, "ratio": lhs / rhs}


def weight_estimate_ratios(
    V: GridFunction,
    F: TrigField,
    sigma: float,
    tau: float,
    lam: float = 0.0,
    rng=None,
    a3_fracs=(1.0 / 16, 1.0 / 32, 1.0 / 64),
    a3_trials: int = 100,
) -> dict:
    """Empirical constants for the four auxiliary weight estimates.

    Keys: tau_mean (weight L^tau mean vs super-cube sup), small_sets (the
    epsilon absorption data), oscillation (V-weighted deviation vs W g^2),
    gradient (W g^2 vs gradient energy).
    """
    if not 1.0 < tau < sigma:
        raise ValueError("tau must lie in (1, sigma)")
    rng = np.random.default_rng(0) if rng is None else rng
    dim = V.dim
    n_ambient = dim + 1
    W = weight_W(V, sigma, lam)
    centers = V.cell_centers().reshape(-1, dim)
    bpts = np.hstack([centers, np.zeros((len(centers), 1))])
    fvals = F(bpts)
    fgrid = GridFunction(fvals.reshape(V.values.shape), V.side)
    g = oscillation_g(fgrid)
    cell = V.cell_volume

    # weight L^tau mean against the sup over cubes containing the root
    root_avg = _avg_pow(np.sum(V.values ** sigma), V.values.size, sigma)
    rhs_root = max(lam, float(root_avg))
    lhs_tau = _avg_pow(np.sum(W.values ** tau), W.values.size, tau)
    tau_ratio = float(lhs_tau / rhs_root) if rhs_root > 0 else 0.0

    # small-set absorption at epsilon = 2^(-2n-1)
    eps = 2.0 ** (-2 * n_ambient - 1)
    total_W = W.values.sum()
    ncells = W.values.size
    frac_results = {}
    passing = None
    for frac in sorted(a3_fracs, reverse=True):
        k = max(1, int(round(frac * ncells)))
        worst = 0.0
        flat = W.values.ravel()
        for _ in range(a3_trials):
            idx = rng.choice(ncells, size=k, replace=False)
            worst = max(worst, float(flat[idx].sum() / total_W))
        frac_results[frac] = worst
        if worst <= eps:
            passing = frac
    # f-mean deviation against the weighted oscillation
    f_mean = fvals.sum() / fvals.size
    lhs_osc = float((V.values.ravel() * np.abs(fvals - f_mean) ** 2).sum() * cell)
    rhs_osc = float((W.values * g.values ** 2).sum() * cell)
    osc_ratio = 0.0 if rhs_osc == 0.0 and lhs_osc == 0.0 else lhs_osc / rhs_osc

    vol_pts, vol_cell = _volume_grid(V.side, dim, V.level, V.diam())
    grad_energy = float((F.gradient(vol_pts) ** 2).sum() * vol_cell)
    grad_ratio = 0.0 if grad_energy == 0.0 and rhs_osc == 0.0 else rhs_osc / grad_energy

    return {
        "tau_mean": tau_ratio,
        "small_sets": {"epsilon": eps, "per_fraction": frac_results, "smallest_passing": passing},
        "oscillation": osc_ratio,
        "gradient": grad_ratio,
    }


def spherical_morrey(values: np.ndarray, points: np.ndarray, weights: np.ndarray,
                     sigma: float, centers: np.ndarray, radii, n: int) -> float:
    """Discrete sup of (r^(sigma+1-n) * integral of V^sigma over the sphere cap)^(1/sigma)."""
    mass = values ** sigma * weights
    dists = np.linalg.norm(points[None, :, :] - centers[:, None, :], axis=2)
    best = 0.0
    for r in radii:
        tot = (mass[None, :] * (dists < r)).sum(axis=1)
        best = max(best, float(((r ** (sigma + 1.0 - n)) * tot).max() ** (1.0 / sigma)))
    return best


def ball_trace_ratio(
    V,
    F: TrigField,
    sigma: float,
    n: int = 3,
    resolution: int = 32,
    radial_nodes: int = 24,
    diagnostic: bool = False,
) -> dict:
    """Empirical constant of the weighted trace estimate on the unit ball.

    V is a callable on the unit sphere (or an array matching the sphere
    grid).  The scale-weighted condition is checked over a dyadic family
    of centers and radii; violation raises unless diagnostic=True.
    """
    if n not in (3, 4):
        raise ValueError("ball harness supports n = 3 or 4")
    from .smoothing import sphere_grid

    dirs, sw = sphere_grid(n, resolution)
    vals = np.asarray(V(dirs) if callable(V) else V, dtype=float)
    if np.any(vals < 0):
        raise ValueError("V must be nonnegative")

    ax = np.linspace(-1.0, 1.0, 5)
    centers = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    centers = np.vstack([centers, dirs[:: max(1, len(dirs) // 64)]])
    radii = 2.0 ** (-np.arange(8, dtype=float))
    cond = spherical_morrey(vals, dirs, sw, sigma, centers, radii, n)
    if cond > 1.0 + 1e-9 and not diagnostic:
        raise HypothesisViolatedError(f"spherical condition value {cond:.4g} exceeds 1")

    f = F(dirs)
    lhs = float((vals * f ** 2 * sw).sum())
    f_term = float((f ** 2 * sw).sum())
    nodes, wts = np.polynomial.legendre.leggauss(radial_nodes)
    rho = 0.5 * (nodes + 1.0)
    wr = 0.5 * wts * rho ** (n - 1)
    pts = rho[:, None, None] * dirs[None, :, :]
    grads = F.gradient(pts.reshape(-1, n)).reshape(len(rho), len(dirs), n)
    grad_term = float(np.einsum("r,p,rpj,rpj->", wr, sw, grads, grads))
    rhs = grad_term + f_term
    ratio = 0.0 if rhs == 0.0 and lhs == 0.0 else lhs / rhs
    return {"condition": cond, "lhs": lhs, "grad_term": grad_term, "f_term": f_term, "ratio": ratio}
