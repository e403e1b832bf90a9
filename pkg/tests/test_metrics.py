import numpy as np
import pytest

from polylab import expressions as ex
from polylab.metrics import (
    MetricError,
    christoffel,
    conformal,
    constant,
    euclidean,
    from_callable,
    from_entries,
    sym_sqrt,
    validate_metric,
)


def test_euclidean_christoffel_zero(rng):
    pts = rng.normal(size=(10, 3))
    assert np.abs(christoffel(euclidean(3), pts)).max() == 0.0


def test_constant_christoffel_zero(rng):
    m = constant([[1.3, 0.2, 0.0], [0.2, 1.0, 0.1], [0.0, 0.1, 0.8]])
    pts = rng.normal(size=(10, 3))
    assert np.abs(christoffel(m, pts)).max() == 0.0


def test_conformal_christoffel_closed_form(rng):
    # Gamma^k_ij = d_j phi delta_ki + d_i phi delta_kj - d_k phi delta_ij
    phi = "0.1*x1"
    m = conformal(phi, 3)
    pts = rng.normal(size=(15, 3))
    G = christoffel(m, pts)
    node = ex.parse_expression(phi, 3)
    dphi = np.stack([ex.evaluate(ex.differentiate(node, k), pts) for k in range(3)], axis=-1)
    ref = np.zeros_like(G)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                ref[..., k, i, j] = (
                    (k == i) * dphi[..., j] + (k == j) * dphi[..., i] - (i == j) * dphi[..., k]
                )
    assert np.abs(G - ref).max() < 1e-12


def test_christoffel_symmetry(rng):
    m = from_entries({(0, 0): "1 + 0.1*x2^2", (0, 1): "0.05*x3", (1, 1): "1", (2, 2): "1"}, 3)
    G = christoffel(m, rng.normal(size=(8, 3)) * 0.3)
    assert np.abs(G - np.swapaxes(G, -1, -2)).max() == 0.0


def test_fd_agreement(rng):
    m = conformal("0.1*x1*x2", 3)
    box = (np.zeros(3), np.ones(3))
    out = validate_metric(m, box, rng)
    assert out["fd_error"] < 1e-6
    mc = from_callable(lambda x: np.exp(0.2 * x[..., 0])[..., None, None] * np.eye(3), 3)
    ref = conformal("0.1*x1", 3)
    pts = rng.uniform(size=(10, 3))
    assert np.abs(mc.derivatives(pts) - ref.derivatives(pts)).max() < 1e-9


def test_sym_sqrt(rng):
    m = constant([[1.3, 0.2, 0.0], [0.2, 1.0, 0.1], [0.0, 0.1, 0.8]])
    g = m(rng.normal(size=(4, 3)))
    s = sym_sqrt(g)
    assert np.abs(s @ s - g).max() < 1e-12


def test_non_spd_errors(rng):
    with pytest.raises(MetricError):
        constant(np.diag([1.0, -1.0, 1.0]))
    m = from_entries({(0, 0): "x1 - 10"}, 3)
    with pytest.raises(MetricError):
        christoffel(m, np.zeros((1, 3)))
    with pytest.raises(MetricError):
        validate_metric(m, (np.zeros(3), np.ones(3)), rng)
