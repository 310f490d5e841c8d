"""Elliptic dynamical R-matrices for gl_N, dual and gauge transforms, exchange operators.

The dynamical argument of a gl_N matrix is a vector in C^N; for gl_2 we
also use the reduced scalar lambda = lambda_1 - lambda_2 with weights +1
(v1) and -1 (v2).  A shift ``lambda - y h^(j)`` is applied by dispatching on
the weight of the basis vector sitting in tensor slot j.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .errors import PoleProximityError, SingularMatrixError
from .theta import EllipticParams, LatticeParams

DEFAULT_POLE_GUARD = 1e-12


def alpha(z, y, lam, lattice: LatticeParams, guard: float = DEFAULT_POLE_GUARD) -> complex:
    th = lattice.theta
    den = th(z - y) * th(lam)
    if abs(th(z - y)) < guard or abs(th(lam)) < guard:
        raise PoleProximityError("alpha: theta(z-y) or theta(lambda) near zero")
    return th(z) * th(lam + y) / den


def beta(z, y, lam, lattice: LatticeParams, guard: float = DEFAULT_POLE_GUARD) -> complex:
    th = lattice.theta
    if abs(th(z - y)) < guard or abs(th(lam)) < guard:
        raise PoleProximityError("beta: theta(z-y) or theta(lambda) near zero")
    return -th(z + lam) * th(y) / (th(z - y) * th(lam))


def r_matrix_glN(z, y, lam, N: int, lattice: LatticeParams) -> np.ndarray:
    """sum E_ii x E_ii + sum_{i!=j} alpha(lam_i - lam_j) E_ii x E_jj + beta(lam_i - lam_j) E_ij x E_ji."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.size != N:
        raise ValueError(f"dynamical argument must have length N={N}")
    R = np.zeros((N * N, N * N), dtype=complex)
    for i in range(N):
        R[i * N + i, i * N + i] = 1.0
        for j in range(N):
            if i == j:
                continue
            d = lam[i] - lam[j]
            R[i * N + j, i * N + j] = alpha(z, y, d, lattice)
            R[i * N + j, j * N + i] = beta(z, y, d, lattice)
    return R


def r_matrix_gl2(z, y, lam, lattice: LatticeParams) -> np.ndarray:
    """4x4 matrix in the basis v1v1, v1v2, v2v1, v2v2 with reduced lambda."""
    lam = complex(np.asarray(lam).reshape(-1)[0]) if np.ndim(lam) else complex(lam)
    R = np.eye(4, dtype=complex)
    R[1, 1] = alpha(z, y, lam, lattice)
    R[1, 2] = beta(z, y, lam, lattice)
    R[2, 1] = beta(z, y, -lam, lattice)
    R[2, 2] = alpha(z, y, -lam, lattice)
    return R


@dataclass(frozen=True)
class DynamicalRMatrix:
    """A weight-preserving R(z, y, lambda) on C^N x C^N.

    ``weights[i]`` is the shift vector of basis vector i (shape (N, d) where
    d is the length of the dynamical argument; d = 1 means a scalar lambda).
    """

    N: int
    evaluator: Callable
    weights: np.ndarray

    def __call__(self, z, y, lam) -> np.ndarray:
        return self.evaluator(z, y, lam)

    @property
    def lam_dim(self) -> int:
        return self.weights.shape[1]

    def shift(self, lam, y, weight_total) -> complex | np.ndarray:
        out = np.asarray(lam, dtype=complex) - y * np.asarray(weight_total)
        return complex(out.reshape(-1)[0]) if self.lam_dim == 1 else out


def gl2_rmatrix(lattice: LatticeParams) -> DynamicalRMatrix:
    return DynamicalRMatrix(
        2,
        lambda z, y, lam: r_matrix_gl2(z, y, lam, lattice),
        np.array([[1], [-1]]),
    )


def glN_rmatrix(N: int, lattice: LatticeParams) -> DynamicalRMatrix:
    return DynamicalRMatrix(
        N,
        lambda z, y, lam: r_matrix_glN(z, y, lam, N, lattice),
        np.eye(N, dtype=int),
    )


def two_site_operator(R: DynamicalRMatrix, m: int, a: int, b: int, z, y, lam,
                      shift_slots=()) -> np.ndarray:
    """R(z, lambda - y sum_{s in shift_slots} h^(s)) acting on slots (a, b) of (C^N)^{x m}.

    Slots are 0-based; R's first factor goes to slot a.  Basis tuples are
    ordered with slot 0 most significant.
    """
    N = R.N
    dim = N ** m
    out = np.zeros((dim, dim), dtype=complex)
    cache = {}
    strides = [N ** (m - 1 - s) for s in range(m)]
    for col, tup in enumerate(product(range(N), repeat=m)):
        total = sum((R.weights[tup[s]] for s in shift_slots), np.zeros(R.lam_dim, dtype=int))
        key = tuple(int(v) for v in total)
        if key not in cache:
            cache[key] = R(z, y, R.shift(lam, y, total))
        mat = cache[key]
        base = col - tup[a] * strides[a] - tup[b] * strides[b]
        src = tup[a] * N + tup[b]
        for c in range(N):
            for d in range(N):
                val = mat[c * N + d, src]
                if val != 0:
                    out[base + c * strides[a] + d * strides[b], col] = val
    return out


def permutation_operator(N: int, m: int, a: int, b: int) -> np.ndarray:
    dim = N ** m
    P = np.zeros((dim, dim))
    for col, tup in enumerate(product(range(N), repeat=m)):
        t = list(tup)
        t[a], t[b] = t[b], t[a]
        row = int(np.ravel_multi_index(t, (N,) * m))
        P[row, col] = 1.0
    return P


def relative_deviation(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """max |lhs - rhs| divided by the largest entry magnitude of either side."""
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    return float(np.max(np.abs(lhs - rhs)) / scale)


def dybe_sides(R: DynamicalRMatrix, z, w, y, lam):
    """Both sides of the dynamical Yang-Baxter equation on (C^N)^{x3}.

    R(z, lam - y h3)^12 R(z+w, lam)^13 R(w, lam - y h1)^23
        = R(w, lam)^23 R(z+w, lam - y h2)^13 R(z, lam)^12
    """
    lhs = (two_site_operator(R, 3, 0, 1, z, y, lam, shift_slots=(2,))
           @ two_site_operator(R, 3, 0, 2, z + w, y, lam)
           @ two_site_operator(R, 3, 1, 2, w, y, lam, shift_slots=(0,)))
    rhs = (two_site_operator(R, 3, 1, 2, w, y, lam)
           @ two_site_operator(R, 3, 0, 2, z + w, y, lam, shift_slots=(1,))
           @ two_site_operator(R, 3, 0, 1, z, y, lam))
    return lhs, rhs


def check_dybe(R: DynamicalRMatrix, z, w, y, lam) -> float:
    """Relative deviation between the two sides of the dynamical YBE."""
    return relative_deviation(*dybe_sides(R, z, w, y, lam))


def check_inversion(R: DynamicalRMatrix, z, y, lam) -> float:
    """Deviation of R(z)^(12) R(-z)^(21) from the identity."""
    prod_ = two_site_operator(R, 2, 0, 1, z, y, lam) @ two_site_operator(R, 2, 1, 0, -z, y, lam)
    return relative_deviation(prod_, np.eye(R.N ** 2))


def s_operator(i: int, params: EllipticParams, n: int | None = None,
               R: DynamicalRMatrix | None = None) -> np.ndarray:
    """S_i = R(z_i - z_{i+1}, lambda - y sum_{j >= i+2} h^(j))^(i,i+1) P^(i,i+1), i 1-based."""
    n = params.n if n is None else n
    if not 1 <= i <= n - 1:
        raise ValueError(f"s_operator index i={i} outside 1..{n - 1}")
    R = gl2_rmatrix(params.lattice) if R is None else R
    a, b = i - 1, i
    z = params.z
    Rop = two_site_operator(R, n, a, b, z[a] - z[b], params.y, params.lam,
                            shift_slots=tuple(range(i + 1, n)))
    return Rop @ permutation_operator(R.N, n, a, b)


def dual_r(R: DynamicalRMatrix) -> DynamicalRMatrix:
    """Transpose of the inverse, R^v = (R^-1)^T.

    The result is read on the same labelled basis with unchanged weights;
    with that reading it satisfies the dynamical YBE and inversion relation.
    """

    def evaluator(z, y, lam):
        mat = R(z, y, lam)
        if abs(np.linalg.det(mat)) < 1e-14:
            raise SingularMatrixError("R is singular at this point")
        return np.linalg.inv(mat).T

    return DynamicalRMatrix(R.N, evaluator, R.weights)


def theta_gauge(lattice: LatticeParams) -> Callable:
    """The diagonal gauge psi(lambda) = diag(theta(lambda) theta(lambda - y), 1)."""
    th = lattice.theta

    def psi(lam, y):
        lam = complex(np.asarray(lam).reshape(-1)[0])
        return np.array([th(lam) * th(lam - y), 1.0], dtype=complex)

    return psi


def gauge_r(R: DynamicalRMatrix, psi: Callable) -> DynamicalRMatrix:
    """psi_VV(lambda)^-1 R psi_VV(lambda)^(21) for a diagonal gauge psi(lambda, y).

    psi_VV(lambda) = psi(lambda - y h^(2))^(1) psi(lambda)^(2).
    """
    N = R.N

    def evaluator(z, y, lam):
        left = np.empty(N * N, dtype=complex)
        right = np.empty(N * N, dtype=complex)
        base = psi(lam, y)
        for a in range(N):
            for b in range(N):
                left[a * N + b] = psi(R.shift(lam, y, R.weights[b]), y)[a] * base[b]
                right[a * N + b] = psi(R.shift(lam, y, R.weights[a]), y)[b] * base[a]
        return (R(z, y, lam) / left[:, None]) * right[None, :]

    return DynamicalRMatrix(N, evaluator, R.weights)


def r_minus_closed_form(z, y, lam, lattice: LatticeParams) -> np.ndarray:
    """The closed form of the dual gl_2 matrix."""
    M = np.eye(4, dtype=complex)
    M[1, 1] = alpha(-z, y, -lam, lattice)
    M[1, 2] = beta(-z, y, lam, lattice)
    M[2, 1] = beta(-z, y, -lam, lattice)
    M[2, 2] = alpha(-z, y, lam, lattice)
    return M


def r_plus_closed_form(z, y, lam, lattice: LatticeParams) -> np.ndarray:
    """The closed form of the theta-gauged gl_2 matrix."""
    M = np.eye(4, dtype=complex)
    M[1, 1] = alpha(z, y, -lam, lattice)
    M[1, 2] = beta(z, y, lam, lattice)
    M[2, 1] = beta(z, y, -lam, lattice)
    M[2, 2] = alpha(z, y, lam, lattice)
    return M
