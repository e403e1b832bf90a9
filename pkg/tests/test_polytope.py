import numpy as np
import pytest
from scipy.optimize import linprog

from polylab.polytope import (
    DegeneratePolytopeError,
    Halfspace,
    PolytopeError,
    UnboundedPolytopeError,
    cube,
    edge_pairs,
    face_interior_point,
    lambda0,
    make_polytope,
    normals_span_rank,
    sample_edge_points,
    sheared_prism,
    simplex_polytope,
)
from polylab.simplex import solve_lp


def test_simplex_solver_against_scipy(rng):
    for _ in range(150):
        nv = int(rng.integers(1, 6))
        nc = int(rng.integers(1, 14))
        A = rng.normal(size=(nc, nv)).round(3)
        b = rng.normal(size=nc).round(3)
        c = rng.normal(size=nv).round(3)
        mine = solve_lp(c, A, b)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * nv, method="highs")
        if ref.status == 0:
            assert mine.optimal
            assert mine.value == pytest.approx(ref.fun, abs=1e-7)
        elif ref.status == 2:
            assert mine.status == "infeasible"
        elif ref.status == 3:
            assert mine.status == "unbounded"


def test_cube_construction(cube3):
    assert cube3.nfaces == 6
    assert np.allclose(cube3.interior_point, [0.5, 0.5, 0.5])
    assert cube3.chebyshev_margin == pytest.approx(0.5)
    assert lambda0(cube3) == pytest.approx(2 * np.log(6))
    lo, hi = cube3.bbox
    assert np.allclose(lo, 0) and np.allclose(hi, 1)


def test_redundant_face_dropped():
    hs = cube(3) + [Halfspace(np.array([1.0, 0, 0]), -2.0)]
    assert make_polytope(hs, 3).nfaces == 6
    # touching face counts as redundant (tie tolerance)
    hs = cube(3) + [Halfspace(np.array([1.0, 0, 0]), -1.0)]
    assert make_polytope(hs, 3).nfaces == 6


def test_scaled_cube_lambda0():
    p = make_polytope(cube(3, side=2.0), 3)
    assert lambda0(p) == pytest.approx(np.log(6))


def test_simplex(simplex3):
    assert simplex3.nfaces == 4
    # margin solves t = (1 - 3t)/sqrt(3)
    assert simplex3.func_margin == pytest.approx(1.0 / (3.0 + np.sqrt(3.0)))
    assert lambda0(simplex3) == pytest.approx(np.log(4) / simplex3.func_margin)


def test_face_interior_points(cube3, simplex3):
    for p in (cube3, simplex3):
        for i0 in range(p.nfaces):
            y = face_interior_point(p, i0)
            vals = p.values(y)
            assert abs(vals[i0]) < 1e-12
            assert np.delete(vals, i0).max() < -1e-9


def test_face_interior_random_polytopes(rng):
    checked = 0
    for _ in range(100):
        k = int(rng.integers(4, 10))
        normals = rng.normal(size=(k, 3))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offs = -rng.uniform(0.5, 1.5, size=k)
        hs = [Halfspace(normals[i], offs[i]) for i in range(k)] + cube(3, side=3.0)
        try:
            p = make_polytope(hs, 3)
        except PolytopeError:
            continue
        checked += 1
        for i0 in range(p.nfaces):
            y = face_interior_point(p, i0)
            vals = p.values(y)
            assert abs(vals[i0]) < 1e-9
            assert np.delete(vals, i0).max() < -1e-9
        for i0, z in enumerate(p.witnesses):
            v = p.values(z)
            assert v[i0] > 1e-9
            assert np.delete(v, i0).max() <= 1e-9
    assert checked > 50


def test_span_rank(cube3, simplex3):
    assert normals_span_rank(cube3) == 3
    assert normals_span_rank(simplex3) == 3


def test_errors():
    with pytest.raises(UnboundedPolytopeError):
        make_polytope(cube(3)[:-1], 3)
    with pytest.raises(DegeneratePolytopeError):
        make_polytope(cube(3) + [Halfspace(np.array([1.0, 0, 0]), 0.0)], 3)
    with pytest.raises(DegeneratePolytopeError):
        make_polytope(cube(3)[:3], 3)
    with pytest.raises(ValueError):
        Halfspace(np.zeros(3), 1.0)


def test_edge_pairs_and_sampling(cube3, rng):
    pairs = edge_pairs(cube3)
    assert len(pairs) == 12
    for i1, i2, x0 in pairs:
        pts = sample_edge_points(cube3, i1, i2, x0, 50, rng)
        vals = cube3.values(pts)
        assert np.abs(vals[:, [i1, i2]]).max() < 1e-9
        others = np.delete(vals, [i1, i2], axis=1)
        assert others.max() < 1e-9
        # never on a third face
        assert (others > -1e-12).sum() == 0


def test_five_dimensional_polytope(rng):
    # desk-scale limit: n = 5 with 16 faces (10 box faces plus 6 random cuts)
    hs = cube(5)
    k = 0
    while len(hs) < 16:
        v = rng.normal(size=5)
        v /= np.linalg.norm(v)
        hs.append(Halfspace(v, -float(rng.uniform(0.9, 1.4))))
        k += 1
    p = make_polytope(hs, 5)
    assert 11 <= p.nfaces <= 16
    assert normals_span_rank(p) == 5
    assert lambda0(p) > 0
    for i0 in range(p.nfaces):
        y = face_interior_point(p, i0)
        vals = p.values(y)
        assert abs(vals[i0]) < 1e-9
        assert np.delete(vals, i0).max() < -1e-9


def test_sheared_prism_shape():
    p = make_polytope(sheared_prism(), 3)
    assert p.nfaces == 6
    # oblique top face present
    tops = [h for h in p.halfspaces if h.a[2] > 0.5 and abs(h.a[0]) > 0.1]
    assert len(tops) == 1
