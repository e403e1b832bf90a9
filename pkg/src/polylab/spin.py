"""Skew-Hermitian generator matrices for the complex spin representation in odd dimension.

The representation is built by a Kronecker recursion from the dimension-3
seed ``omega_a = -i * sigma_a`` (Pauli matrices).  Generators anticommute,
square to ``-id``, and the full ordered product is normalised so that
``i^((n+1)/2) * omega_1 @ ... @ omega_n == +id``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VOLUME_TOL = 1e-13

_PAULI = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


class SpinDimensionError(ValueError):
    """Raised for even n or n < 3."""


@dataclass(frozen=True)
class SpinRep:
    """Generators of the spinor space C^m, m = 2^((n-1)/2), for odd n.

    ``omega[a]`` holds the coefficient matrix of the a-th generator: row
    ``alpha`` lists the expansion of the image of the alpha-th basis spinor.
    The transpose therefore acts on coordinate columns; an m-tuple of
    spinors stored row-wise is acted on by right multiplication.
    """

    n: int
    m: int
    omega: tuple = field(repr=False)

    def direction_matrix(self, v) -> np.ndarray:
        """Coefficient matrix of the Clifford action of a direction vector v."""
        v = np.asarray(v, dtype=float)
        return sum(v[a] * self.omega[a] for a in range(self.n))


def _volume_scalar(mats) -> complex:
    n = len(mats)
    prod = mats[0]
    for w in mats[1:]:
        prod = prod @ w
    return (1j ** ((n + 1) // 2)) * prod[0, 0]


def build_spin_rep(n: int) -> SpinRep:
    """Construct the n generators for odd n with the +id volume normalisation.

    Raises SpinDimensionError unless n is odd and 3 <= n <= 9.
    """
    if n % 2 == 0 or n < 3 or n > 9:
        raise SpinDimensionError(f"n must be odd with 3 <= n <= 9, got {n}")

    mats = [-1j * p for p in _PAULI]
    while len(mats) < n:
        k = len(mats)
        m = mats[0].shape[0]
        eye = np.eye(m, dtype=complex)
        sz, sx, sy = _PAULI[2], _PAULI[0], _PAULI[1]
        new = [np.kron(sz, w) for w in mats]
        new.append(np.kron(1j * sx, eye))
        new.append(np.kron(1j * sy, eye))
        mats = new
        assert len(mats) == k + 2

    # the ordered product can come out as either sign; negating one
    # generator flips it without touching the other relations
    vol = _volume_scalar(mats)
    if vol.real < 0:
        mats[-1] = -mats[-1]
    rep = SpinRep(n=n, m=mats[0].shape[0], omega=tuple(w.copy() for w in mats))
    errs = rep_residuals(rep)
    assert max(errs.values()) < VOLUME_TOL, errs
    return rep


def rep_residuals(rep: SpinRep) -> dict:
    """Max residuals of the three defining invariants (skew, Clifford, volume)."""
    m = rep.m
    eye = np.eye(m)
    skew = max(np.abs(w + w.conj().T).max() for w in rep.omega)
    cliff = 0.0
    for a in range(rep.n):
        for b in range(rep.n):
            r = rep.omega[a] @ rep.omega[b] + rep.omega[b] @ rep.omega[a]
            if a == b:
                r = r + 2 * eye
            cliff = max(cliff, np.abs(r).max())
    prod = rep.omega[0]
    for w in rep.omega[1:]:
        prod = prod @ w
    vol = np.abs((1j ** ((rep.n + 1) // 2)) * prod - eye).max()
    return {"skew": skew, "clifford": cliff, "volume": vol}


def anticommutant_dim(rep: SpinRep, generators=None) -> int:
    """Complex dimension of {z : z w + w z = 0 for every generator w}.

    Computed as the nullity of the stacked anticommutator system on the
    m^2-dimensional space of z.  The full generator set gives 0 in odd
    dimension; subsets can have nontrivial anticommutants.
    """
    mats = rep.omega if generators is None else generators
    m = rep.m
    eye = np.eye(m)
    # row-major vec: vec(A Z + Z A) = (kron(A, I) + kron(I, A^T)) vec(Z)
    blocks = [np.kron(w, eye) + np.kron(eye, w.T) for w in mats]
    system = np.vstack(blocks)
    rank = np.linalg.matrix_rank(system, tol=1e-10)
    return m * m - rank


def product_span_rank(rep: SpinRep, generators=None) -> int:
    """Rank of span{omega_{a_1} @ ... @ omega_{a_r} : a_1 < ... < a_r} inside End(C^m).

    Includes the empty product (the identity).  Equals m^2 for the full
    generator set: the representation is surjective onto End(C^m).
    """
    mats = rep.omega if generators is None else list(generators)
    m = rep.m
    vecs = []
    for mask in range(1 << len(mats)):
        prod = np.eye(m, dtype=complex)
        for a in range(len(mats)):
            if mask >> a & 1:
                prod = prod @ mats[a]
        vecs.append(prod.ravel())
    return int(np.linalg.matrix_rank(np.array(vecs), tol=1e-10))
