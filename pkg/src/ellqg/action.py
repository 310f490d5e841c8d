"""Action of the gl_2 elliptic dynamical quantum group.

Everything is a difference operator: a lambda-dependent matrix M(lambda)
followed by the shift f(lambda) -> f(lambda + nu y).  On the tensor side
matrices act on (C^2)^{x n} in the basis v_I; on the geometric side they act
on component vectors (s_K)_K.  Both use the index ``tensor_basis_index``, so
that sector k (= |K| = number of v1 slots) has weight 2k - n.

Composition follows (A T_a)(B T_b) = A(lambda) B(lambda + a y) T_{a+b}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Mapping

import numpy as np

from .combinatorics import (
    SubsetIndex,
    all_subsets,
    permute_subset,
    subsets,
    tensor_basis_index,
)
from .envelope import ComponentSection, QuadraticFormSpec, base_names, multiplier_check, params_from_base
from .errors import PoleProximityError, SingularMatrixError
from .rmatrix import gauge_r, gl2_rmatrix, r_matrix_gl2, theta_gauge, two_site_operator
from .theta import EllipticParams
from .weights import (
    normalized_w,
    omega_elementary,
    omega_explicit_function,
    restriction,
    shuffle_product,
)

# v1 is state 0 (weight +1), v2 state 1 (weight -1)
AUX_WEIGHT = (1, -1)


def shift_lam(params: EllipticParams, j) -> EllipticParams:
    return params.replace(lam=params.lam + j * params.y) if j else params


def sector_sizes(n: int) -> np.ndarray:
    """|K| for each basis index."""
    out = np.empty(2 ** n, dtype=int)
    for K in all_subsets(n):
        out[tensor_basis_index(K)] = K.k
    return out


def _rel(a, b) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / scale)


# Difference operators -----------------------------------------------------------


@dataclass(frozen=True)
class DifferenceOperator:
    """M(lambda) T_nu on a 2^n-dimensional space graded by sectors.

    ``mu`` is the weight change: sector k goes to k + mu/2.
    """

    n: int
    mu: int
    nu: int
    matrix_fn: Callable
    label: str = ""

    def __post_init__(self):
        if self.mu % 2:
            raise ValueError("weight change must be even")

    def matrix(self, params: EllipticParams) -> np.ndarray:
        return np.asarray(self.matrix_fn(params), dtype=complex)

    def coefficient(self, K: SubsetIndex, Kp: SubsetIndex, params: EllipticParams) -> complex:
        return complex(self.matrix(params)[tensor_basis_index(K), tensor_basis_index(Kp)])

    @property
    def coefficients(self) -> Callable:
        """(K, K') -> evaluator on params."""
        return lambda K, Kp: (lambda p: self.coefficient(K, Kp, p))

    def __matmul__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        if self.n != other.n:
            raise ValueError("operators act on different spaces")
        a, b = self, other

        def fn(p):
            return a.matrix(p) @ b.matrix(shift_lam(p, a.nu))

        return DifferenceOperator(a.n, a.mu + b.mu, a.nu + b.nu, fn, f"({a.label}{b.label})")

    def _check_same(self, other):
        if (self.n, self.mu, self.nu) != (other.n, other.mu, other.nu):
            raise ValueError("only operators of equal degree can be added")

    def __add__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        self._check_same(other)
        a, b = self, other
        return DifferenceOperator(a.n, a.mu, a.nu, lambda p: a.matrix(p) + b.matrix(p),
                                  f"{a.label}+{b.label}")

    def __sub__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        self._check_same(other)
        a, b = self, other
        return DifferenceOperator(a.n, a.mu, a.nu, lambda p: a.matrix(p) - b.matrix(p),
                                  f"{a.label}-{b.label}")

    def inverse(self) -> "DifferenceOperator":
        """(M T_nu)^-1 = M(lambda - nu y)^-1 T_-nu; needs mu = 0."""
        if self.mu:
            raise ValueError("only weight-preserving operators are invertible")
        a = self

        def fn(p):
            M = a.matrix(shift_lam(p, -a.nu))
            if np.linalg.cond(M) > 1e14:
                raise SingularMatrixError("operator matrix is singular")
            return np.linalg.inv(M)

        return DifferenceOperator(a.n, 0, -a.nu, fn, f"{a.label}^-1")

    def apply(self, vector_fn: Callable, params: EllipticParams) -> np.ndarray:
        """(phi s)(lambda) = M(lambda) s(lambda + nu y) for s given as params -> vector."""
        return self.matrix(params) @ np.asarray(vector_fn(shift_lam(params, self.nu)))

    def block_violation(self, params: EllipticParams) -> float:
        """Largest entry outside the sector pattern k -> k + mu/2 (exactly 0 when graded)."""
        sizes = sector_sizes(self.n)
        allowed = sizes[:, None] == sizes[None, :] + self.mu // 2
        M = self.matrix(params)
        return float(np.max(np.abs(M[~allowed]), initial=0.0))


def multiplication(n: int, fn: Callable, label: str = "") -> DifferenceOperator:
    """Diagonal operator multiplying component K by fn(K, params)."""
    subs = all_subsets(n)

    def mat(p):
        d = np.zeros(2 ** n, dtype=complex)
        for K in subs:
            d[tensor_basis_index(K)] = fn(K, p)
        return np.diag(d)

    return DifferenceOperator(n, 0, 0, mat, label)


def moment_maps(s: Callable, n: int):
    """(mu_l(s), mu_r(s)) for a scalar s(params).

    mu_r multiplies every component by s; mu_l multiplies sector k by s at lambda + (n - 2k) y.
    """
    left = multiplication(n, lambda K, p: s(shift_lam(p, n - 2 * K.k)), "mu_l")
    right = multiplication(n, lambda K, p: s(p), "mu_r")
    return left, right


# L-operators --------------------------------------------------------------------


@dataclass(frozen=True)
class LOperatorMatrix:
    """The four generators L_ij(w) as difference operators; i, j in {1, 2}."""

    n: int
    entry: Callable
    kind: str = ""

    def __call__(self, i: int, j: int, w) -> DifferenceOperator:
        if i not in (1, 2) or j not in (1, 2):
            raise ValueError("generator indices are 1 or 2")
        return self.entry(i, j, complex(w))


def nu_of(j: int) -> int:
    """Lambda shift of L_ij: -1 for j = 1, +1 for j = 2."""
    return -AUX_WEIGHT[j - 1]


@lru_cache(maxsize=256)
def _tensor_monodromy(w: complex, params: EllipticParams) -> np.ndarray:
    """R(w-z_1, lam - y sum_{i>=2} h_i)^{01} ... R(w-z_n, lam)^{0n} on 1 + n slots."""
    n = params.n
    R = gl2_rmatrix(params.lattice)
    M = np.eye(2 ** (n + 1), dtype=complex)
    for a in range(1, n + 1):
        M = M @ two_site_operator(R, n + 1, 0, a, w - params.z[a - 1], params.y, params.lam,
                                  shift_slots=tuple(range(a + 1, n + 1)))
    return M


def tensor_L(n: int) -> LOperatorMatrix:
    """Tensor product of evaluation representations at the points of ``params``."""
    D = 2 ** n

    def entry(i, j, w):
        def fn(p):
            if p.n != n:
                raise ValueError(f"expected {n} evaluation points")
            M = _tensor_monodromy(w, p)
            return M[(i - 1) * D:i * D, (j - 1) * D:j * D]

        return DifferenceOperator(n, 2 * (i - j), nu_of(j), fn, f"L{i}{j}")

    return LOperatorMatrix(n, entry, "tensor")


def vector_rep_L() -> LOperatorMatrix:
    """The two-dimensional evaluation representation."""
    return tensor_L(1)


def vector_rep_entries(w, params: EllipticParams) -> dict:
    """Closed-form action on v1, v2: {(i, j): 2x2 matrix in the basis v1, v2}."""
    th = params.lattice.theta
    z, y, lam = params.z[0], params.y, params.lam
    d = th(w - z - y) * th(lam)
    if abs(th(w - z - y)) < 1e-12 or abs(th(lam)) < 1e-12:
        raise PoleProximityError("vector representation near a pole")
    out = {key: np.zeros((2, 2), dtype=complex) for key in product((1, 2), repeat=2)}
    out[1, 1][0, 0] = 1.0
    out[1, 1][1, 1] = th(w - z) * th(lam + y) / d
    out[2, 2][1, 1] = 1.0
    out[2, 2][0, 0] = th(w - z) * th(lam - y) / d
    out[1, 2][1, 0] = -th(lam + w - z) * th(y) / d
    out[2, 1][0, 1] = -th(lam - w + z) * th(y) / d
    return out


# Gelfand-Zetlin -------------------------------------------------------------------


def weight_prefactor(n: int) -> DifferenceOperator:
    """theta(lambda - y h) / theta(lambda), with h the weight of the component."""
    return multiplication(n, lambda K, p: p.theta(p.lam - (2 * K.k - n) * p.y) / p.theta(p.lam),
                          "P")


def quantum_determinant(L: LOperatorMatrix, w) -> DifferenceOperator:
    """theta(lambda)/theta(lambda - y mu) (L11(w+y) L22(w) - L21(w+y) L12(w)), mu the sector weight.

    With the shift conventions used here this prefactor is the one that
    makes the determinant central; see ``_inverse_weight_prefactor``.
    """
    y_shift = _YShift(w)
    inner = DifferenceOperator(
        L.n, 0, 0,
        lambda p: ((L(1, 1, y_shift(p)) @ L(2, 2, w)) - (L(2, 1, y_shift(p)) @ L(1, 2, w))).matrix(p))
    return _inverse_weight_prefactor(L.n) @ inner


class _YShift:
    """w + y, resolved once params (hence y) are known."""

    def __init__(self, w):
        self.w = complex(w)

    def __call__(self, p: EllipticParams) -> complex:
        return self.w + p.y


def quantum_determinant_alg(w, params: EllipticParams) -> np.ndarray:
    return quantum_determinant(tensor_L(params.n), w).matrix(params)


def determinant_eigenvalue(w, params: EllipticParams) -> complex:
    th = params.lattice.theta
    z = np.asarray(params.z)
    return complex(np.prod(th(w - z + params.y) / th(w - z)))


def l22_eigenvalue(I: SubsetIndex, w, params: EllipticParams) -> complex:
    th = params.lattice.theta
    out = 1.0 + 0j
    for a in I.members:
        out *= th(w - params.z[a - 1]) / th(w - params.z[a - 1] - params.y)
    return out


def tangent_shifted(I: SubsetIndex, params: EllipticParams, shift) -> complex:
    th = params.lattice.theta
    out = 1.0 + 0j
    for a in I.members:
        for b in I.complement().members:
            out *= th(params.z[a - 1] - params.z[b - 1] + shift)
    return out


@dataclass(frozen=True)
class GZEigenvector:
    I: SubsetIndex
    coordinates: Mapping

    def vector(self) -> np.ndarray:
        v = np.zeros(2 ** self.I.n, dtype=complex)
        for J, c in self.coordinates.items():
            v[tensor_basis_index(J)] = c
        return v


def gz_eigenvector(I: SubsetIndex, params: EllipticParams) -> GZEigenvector:
    """Coefficients w-_J(z_I) / prod_{a in I, b not in I} theta(z_a - z_b + y) of v_J."""
    den = tangent_shifted(I, params, params.y)
    pts = np.array([params.z[a - 1] for a in I.members], dtype=complex)
    coords = {J: normalized_w(J, -1, pts, params) / den for J in subsets(I.n, I.k)}
    return GZEigenvector(I, coords)


def gz_residuals(I: SubsetIndex, w, params: EllipticParams) -> dict:
    """Relative residuals of the L22 and determinant eigen-equations on xi_I."""
    n = params.n
    L = tensor_L(n)
    xi = gz_eigenvector(I, params).vector()
    xi_up = gz_eigenvector(I, shift_lam(params, 1)).vector()
    l22 = L(2, 2, w).matrix(params) @ xi_up - l22_eigenvalue(I, w, params) * xi
    det = quantum_determinant(L, w).matrix(params) @ xi - determinant_eigenvalue(w, params) * xi
    norm = np.linalg.norm(xi)
    return {"L22": float(np.linalg.norm(l22) / norm), "Delta": float(np.linalg.norm(det) / norm)}


def commutator_norm(A: DifferenceOperator, B: DifferenceOperator, params: EllipticParams) -> float:
    """|AB - BA| relative to |AB| + |BA| as difference operators."""
    ab = (A @ B).matrix(params)
    ba = (B @ A).matrix(params)
    scale = max(np.max(np.abs(ab)), np.max(np.abs(ba)), 1e-300)
    return float(np.max(np.abs(ab - ba)) / scale)


# Geometric operators ----------------------------------------------------------------


def _theta_ratio_prod(th, w, zs, params):
    out = 1.0 + 0j
    for zj in zs:
        out *= th(w - zj) / th(w - zj - params.y)
    return out


def geo_Delta(w, n: int) -> DifferenceOperator:
    return multiplication(n, lambda K, p: determinant_eigenvalue(w, p), "Delta")


def geo_L22(w, n: int) -> DifferenceOperator:
    def mat(p):
        th = p.lattice.theta
        d = np.zeros(2 ** n, dtype=complex)
        for K in all_subsets(n):
            d[tensor_basis_index(K)] = _theta_ratio_prod(th, w, [p.z[a - 1] for a in K.members], p)
        return np.diag(d)

    return DifferenceOperator(n, 0, 1, mat, "L22")


def geo_L12(w, n: int) -> DifferenceOperator:
    """Lowers |K| by one; coefficient of s_{K+a} in component K."""

    def mat(p):
        th = p.lattice.theta
        y, lam = p.y, p.lam
        z = p.z
        M = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for K in all_subsets(n):
            k = K.k + 1
            if k > n:
                continue
            base = (-1) ** k * th(y) * _theta_ratio_prod(th, w, [z[j - 1] for j in K.members], p)
            Kbar = K.complement().members
            for a in Kbar:
                c = base * th(lam + w - z[a - 1] + (n - 2 * k + 1) * y) / th(w - z[a - 1] - y)
                for j in K.members:
                    c *= th(z[a - 1] - z[j - 1] - y)
                for j in Kbar:
                    if j != a:
                        c /= th(z[a - 1] - z[j - 1])
                Ka = SubsetIndex(n, tuple(sorted(K.members + (a,))))
                M[tensor_basis_index(K), tensor_basis_index(Ka)] = c
        return M

    return DifferenceOperator(n, -2, 1, mat, "L12")


def geo_L21(w, n: int) -> DifferenceOperator:
    """Raises |K| by one; coefficient of s_{K-a} in component K."""

    def mat(p):
        th = p.lattice.theta
        y, lam = p.y, p.lam
        z = p.z
        M = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for K in all_subsets(n):
            if K.k == 0:
                continue
            k = K.k - 1
            base = (-1) ** (n - k) * th(y) / (th(lam) * th(lam - y))
            for a in K.members:
                rest = [j for j in K.members if j != a]
                c = base * th(lam - w + z[a - 1]) / th(w - z[a - 1] - y)
                c *= _theta_ratio_prod(th, w, [z[j - 1] for j in rest], p)
                for j in K.complement().members:
                    c *= th(z[j - 1] - z[a - 1] - y)
                for j in rest:
                    c /= th(z[j - 1] - z[a - 1])
                Ka = SubsetIndex(n, tuple(rest))
                M[tensor_basis_index(K), tensor_basis_index(Ka)] = c
        return M

    return DifferenceOperator(n, 2, -1, mat, "L21")


def _inverse_weight_prefactor(n: int) -> DifferenceOperator:
    """theta(lambda) / theta(lambda - y mu) on the weight-mu sector."""
    return multiplication(n, lambda K, p: p.theta(p.lam) / p.theta(p.lam - (2 * K.k - n) * p.y),
                          "P^-1")


class _ShiftedW:
    def __init__(self, w, m):
        self.w, self.m = complex(w), m

    def value(self, p):
        return self.w + self.m * p.y


def _at(factory, w, m, n):
    """Operator factory(w + m y, n), with y read off the parameters at evaluation time."""
    sw = _ShiftedW(w, m)
    proto = factory(w, n)

    def fn(p):
        return factory(sw.value(p), n).matrix(p)

    return DifferenceOperator(n, proto.mu, proto.nu, fn, proto.label)


def geo_L11(w, n: int) -> DifferenceOperator:
    """(theta(lambda - y mu)/theta(lambda) Delta(w-y) + L21(w) L12(w-y)) L22(w-y)^-1.

    Obtained by solving the determinant relation for L11 and shifting w by -y.
    """
    head = weight_prefactor(n) @ _at(geo_Delta, w, -1, n)
    cross = geo_L21(w, n) @ _at(geo_L12, w, -1, n)
    inv = _at(geo_L22, w, -1, n).inverse()
    total = DifferenceOperator(n, 0, 0, lambda p: head.matrix(p) + cross.matrix(p), "num")
    out = total @ inv
    return DifferenceOperator(n, 0, -1, out.matrix_fn, "L11")


def geometric_L(n: int) -> LOperatorMatrix:
    table = {(1, 1): geo_L11, (1, 2): geo_L12, (2, 1): geo_L21, (2, 2): geo_L22}
    return LOperatorMatrix(n, lambda i, j, w: table[i, j](w, n), "geometric")


def geo_determinant(w, n: int) -> DifferenceOperator:
    """mu_r(theta(lambda))/mu_l(theta(lambda)) (L11(w+y) L22(w) - L21(w+y) L12(w)) on sections."""
    L = geometric_L(n)
    return quantum_determinant(L, w)


def geo_L11_expansion(w, n: int) -> DifferenceOperator:
    """L11 through the tensor coefficients: S(lambda) L11(lambda) S(lambda - y)^-1, S^-1 by orthogonality."""
    Lt = tensor_L(n)

    def fn(p):
        S = stab_matrix(p)
        Sinv = stab_inverse(shift_lam(p, -1))
        return S @ Lt(1, 1, w).matrix(p) @ Sinv

    return DifferenceOperator(n, 0, -1, fn, "L11e")


# Stable envelope matrices ---------------------------------------------------------


def stab_matrix(params: EllipticParams) -> np.ndarray:
    """S[M, I] = w+_I(z_M) over all subsets (zero across sectors)."""
    n = params.n
    S = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(n + 1):
        for I in subsets(n, k):
            for M in subsets(n, k):
                S[tensor_basis_index(M), tensor_basis_index(I)] = restriction(I, M, +1, params)
    return S


def stab_inverse(params: EllipticParams) -> np.ndarray:
    """S^-1[K, I] = w-_K(z_I) / prod_{a in I, b not in I} theta(z_a - z_b) theta(z_a - z_b + y)."""
    n = params.n
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(n + 1):
        for I in subsets(n, k):
            den = tangent_shifted(I, params, 0.0) * tangent_shifted(I, params, params.y)
            for K in subsets(n, k):
                out[tensor_basis_index(K), tensor_basis_index(I)] = restriction(K, I, -1, params) / den
    return out


def action_consistency(i: int, j: int, w, params: EllipticParams,
                       geo: LOperatorMatrix | None = None) -> float:
    """Largest per-column relative gap of G(lambda) S(lambda + nu y) = S(lambda) L(lambda).

    Column I compares the geometric operator applied to stab(v_I) with the
    tensor coefficients recombined over stab(v_K).
    """
    n = params.n
    geo = geometric_L(n) if geo is None else geo
    G = geo(i, j, w)
    Lt = tensor_L(n)(i, j, w)
    lhs = G.matrix(params) @ stab_matrix(shift_lam(params, G.nu))
    rhs = stab_matrix(params) @ Lt.matrix(params)
    worst = 0.0
    for col in range(2 ** n):
        worst = max(worst, _rel(lhs[:, col], rhs[:, col]))
    return worst


# RLL ------------------------------------------------------------------------------


def _r_entry(row, col, w) -> Callable:
    """Scalar R(w, y, lambda)[row, col] as a function of params."""
    def s(p):
        return r_matrix_gl2(w, p.y, p.lam, p.lattice)[row, col]
    return s


def rll_check(L: LOperatorMatrix, w1, w2, params: EllipticParams,
              vector_fn: Callable | None = None) -> float:
    """mu_l R(w1-w2)^{12} L(w1)^{13} L(w2)^{23} = L(w2)^{23} L(w1)^{13} mu_r R(w1-w2)^{12}.

    Compares the 16 auxiliary entries as difference operators, or their
    action on ``vector_fn`` (params -> vector) when given.
    """
    n = L.n
    w = complex(w1) - complex(w2)
    pairs = list(product((1, 2), repeat=2))
    idx = {pr: 2 * (pr[0] - 1) + (pr[1] - 1) for pr in pairs}
    mom = {}
    for r in pairs:
        for c in pairs:
            mom[r, c] = moment_maps(_r_entry(idx[r], idx[c], w), n)
    worst = 0.0
    for (i1, i2) in pairs:
        for (j1, j2) in pairs:
            lhs = None
            for (a, b) in pairs:
                if a + b != i1 + i2:
                    continue
                term = mom[(i1, i2), (a, b)][0] @ (L(a, j1, w1) @ L(b, j2, w2))
                lhs = term if lhs is None else _sum_any(lhs, term)
            rhs = None
            for (k1, k2) in pairs:
                if k1 + k2 != j1 + j2:
                    continue
                term = L(i2, k2, w2) @ (L(i1, k1, w1) @ mom[(k1, k2), (j1, j2)][1])
                rhs = term if rhs is None else _sum_any(rhs, term)
            if vector_fn is None:
                a_, b_ = lhs.matrix(params), rhs.matrix(params)
            else:
                a_, b_ = lhs.apply(vector_fn, params), rhs.apply(vector_fn, params)
            worst = max(worst, _rel(a_, b_))
    return worst


def _sum_any(a: DifferenceOperator, b: DifferenceOperator) -> DifferenceOperator:
    """Sum of two operators with equal shift; the weight label is taken from the nonzero one."""
    if a.nu != b.nu:
        raise ValueError("cannot add operators with different shifts")
    return DifferenceOperator(a.n, a.mu, a.nu, lambda p: a.matrix(p) + b.matrix(p))


def rll_geometric_check(w1, w2, params: EllipticParams, s: Callable | None = None) -> float:
    return rll_check(geometric_L(params.n), w1, w2, params, s)


def rll_tensor_check(w1, w2, params: EllipticParams) -> float:
    return rll_check(tensor_L(params.n), w1, w2, params)


def stab_vector(coeffs: Mapping) -> Callable:
    """params -> component vector of sum_I c_I stab(v_I); coefficients are constants."""
    def fn(p):
        S = stab_matrix(p)
        c = np.zeros(2 ** p.n, dtype=complex)
        for I, v in coeffs.items():
            c[tensor_basis_index(I)] = v
        return S @ c
    return fn


# xi-hat -----------------------------------------------------------------------------


def xi_hat_section(I: SubsetIndex, params: EllipticParams | None = None) -> ComponentSection:
    """sum_J w-_J(z_I) / prod theta(z_a - z_b + y) stab(v_J) as a section over |K| = |I|."""
    n, k = I.n, I.k

    def value(K):
        def ev(p):
            den = tangent_shifted(I, p, p.y)
            pts = np.array([p.z[a - 1] for a in I.members], dtype=complex)
            total = 0j
            for J in subsets(n, k):
                total += normalized_w(J, -1, pts, p) * restriction(J, K, +1, p)
            return total / den
        return ev

    return ComponentSection(n, k, {K: value(K) for K in subsets(n, k)})


def xi_hat_support(I: SubsetIndex, params: EllipticParams) -> dict:
    """Deviation of the diagonal value and the largest off-diagonal value relative to it."""
    sec = xi_hat_section(I, params)
    want = tangent_shifted(I, params, 0.0)
    diag = sec(I, params)
    off = max((abs(sec(K, params)) for K in subsets(I.n, I.k) if K != I), default=0.0)
    scale = abs(want)
    return {"diagonal": abs(diag - want) / scale, "off_support": off / scale}


# Equivariance and poles --------------------------------------------------------------


def swap_params(params: EllipticParams, a: int, b: int) -> EllipticParams:
    z = list(params.z)
    z[a - 1], z[b - 1] = z[b - 1], z[a - 1]
    return params.replace(z=tuple(z))


def equivariance_check(op: DifferenceOperator, params: EllipticParams) -> float:
    """max over transpositions of |phi_{sK, sK'}(s z) - phi_{K,K'}(z)|, relative."""
    n = op.n
    base = op.matrix(params)
    scale = max(np.max(np.abs(base)), 1e-300)
    worst = 0.0
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            perm = list(range(1, n + 1))
            perm[a - 1], perm[b - 1] = b, a
            swapped = op.matrix(swap_params(params, a, b))
            for K in all_subsets(n):
                for Kp in all_subsets(n):
                    u = base[tensor_basis_index(K), tensor_basis_index(Kp)]
                    v = swapped[tensor_basis_index(permute_subset(K, tuple(perm))),
                                tensor_basis_index(permute_subset(Kp, tuple(perm)))]
                    worst = max(worst, abs(u - v) / scale)
    return worst


def pole_cancellation(op_factory: Callable, w, params: EllipticParams, a: int, b: int,
                      vector_fn: Callable, deltas=(1e-3, 1e-4, 1e-5)) -> dict:
    """Size of (op s) near z_a = z_b + delta, and the size of the largest single term.

    The image stays bounded while individual coefficients grow like 1/delta.
    """
    n = params.n
    op = op_factory(w, n)
    image, terms = [], []
    for d in deltas:
        z = list(params.z)
        z[a - 1] = z[b - 1] + d
        p = params.replace(z=tuple(z))
        M = op.matrix(p)
        s = np.asarray(vector_fn(shift_lam(p, op.nu)))
        image.append(float(np.max(np.abs(M @ s))))
        terms.append(float(np.max(np.abs(M * s[None, :]))))
    ratios = [image[i + 1] / image[i] for i in range(len(image) - 1)]
    return {"deltas": list(deltas), "image": image, "terms": terms, "ratios": ratios,
            "bounded": all(r <= 2.0 for r in ratios)}


# The l-operator from shuffle maps --------------------------------------------------


def _fixed_points(points, k):
    from itertools import combinations
    return [np.array(c, dtype=complex) for c in combinations(points, k)]


def ell_operator(w, params: EllipticParams) -> np.ndarray:
    """Matrix of p_+^-1 p_- P on V x Theta(z) in the basis v_i x omega+_J.

    Index i * 2^n + tensor_basis_index(J), v1 = 0.  The input omega_J sits at
    lambda - y (weight of v_i).
    """
    n = params.n
    D = 2 ** n
    w = complex(w)
    points = (w,) + tuple(params.z)
    out = np.zeros((2 * D, 2 * D), dtype=complex)
    for k in range(n + 2):
        basis = [(i, J) for i in (0, 1) if 0 <= k - 1 + i <= n for J in subsets(n, k - 1 + i)]
        if not basis:
            continue
        pts = _fixed_points(points, k)
        A = np.empty((len(pts), len(basis)), dtype=complex)
        B = np.empty((len(pts), len(basis)), dtype=complex)
        for col, (i, J) in enumerate(basis):
            ki = 1 - i
            left = omega_elementary(ki, +1, w, params, lam_shift=n - 2 * J.k)
            right = omega_explicit_function(J, +1, params)
            p_plus = shuffle_product(left, right, +1)
            lowered = shift_lam(params, -AUX_WEIGHT[i])
            p_minus = shuffle_product(omega_explicit_function(J, +1, lowered),
                                      omega_elementary(ki, +1, w, params), +1)
            for row, t in enumerate(pts):
                A[row, col] = p_plus(t)
                B[row, col] = p_minus(t)
        if np.linalg.cond(A) > 1e13:
            raise SingularMatrixError("fixed-point evaluation of p_+ is singular")
        X = np.linalg.solve(A, B)
        rows = [i * D + tensor_basis_index(J) for i, J in basis]
        out[np.ix_(rows, rows)] = X
    return out


def slot_gauge(params: EllipticParams, order) -> np.ndarray:
    """Diagonal of prod_s psi(lambda - y (weights of the slots after s in ``order``))^(s).

    Slots are 0 (auxiliary) and 1..n; the basis is that of ``_tensor_monodromy``.
    """
    n = params.n
    psi = theta_gauge(params.lattice)
    cache = {}
    d = np.empty(2 ** (n + 1), dtype=complex)
    for idx, states in enumerate(product((0, 1), repeat=n + 1)):
        val = 1.0 + 0j
        for pos, slot in enumerate(order):
            later = sum(AUX_WEIGHT[states[t]] for t in order[pos + 1:])
            if later not in cache:
                cache[later] = psi(params.lam - later * params.y, params.y)
            val *= cache[later][states[slot]]
        d[idx] = val
    return d


def gauged_ell(w, params: EllipticParams) -> np.ndarray:
    """Psi_A l(w) Psi_B^-1, which should reproduce the tensor monodromy.

    Psi_A = psi(lambda - y h_W)^(aux) Psi_W(lambda) and
    Psi_B = Psi_W(lambda - y h_aux) psi(lambda)^(aux), where Psi_W(lambda)
    rescales omega+_J to v_J (product of psi over the sites, each shifted
    by the weights of the later sites).
    """
    n = params.n
    a = slot_gauge(params, tuple(range(n + 1)))
    b = slot_gauge(params, tuple(range(1, n + 1)) + (0,))
    return (a[:, None] * ell_operator(w, params)) / b[None, :]


def ell_vs_tensor_check(w, params: EllipticParams) -> float:
    return _rel(gauged_ell(w, params), _tensor_monodromy(complex(w), params))


def ell_yang_baxter(w1, w2, params: EllipticParams, reversed_rhs: bool = False) -> float:
    """Relative gap in the exchange relation of l with the gauged R-matrix R+.

    R+(w1-w2, lam - y h3)^12 l(w1, lam)^13 l(w2, lam - y h1)^23
        = l(w2, lam)^23 l(w1, lam - y h2)^13 R+(w1-w2, lam)^12.
    ``reversed_rhs`` swaps in l(w1, lam)^23 l(w2, lam - y h2)^13 R+(lam - y h3)^12
    on the right, which does not hold.
    """
    n = params.n
    D = 2 ** n
    y, lam = params.y, params.lam
    h_w = 2 * sector_sizes(n) - n
    r_plus = gauge_r(gl2_rmatrix(params.lattice), theta_gauge(params.lattice))
    ells = {}

    def ell(w, l):
        key = (w, l)
        if key not in ells:
            ells[key] = ell_operator(w, params.replace(lam=l))
        return ells[key]

    def index(s1, s2, J):
        return (2 * s1 + s2) * D + J

    dim = 4 * D

    def on_13(w, shifted):
        M = np.zeros((dim, dim), dtype=complex)
        for s1, s2, J in product(range(2), range(2), range(D)):
            L = ell(w, lam - y * AUX_WEIGHT[s2] if shifted else lam)
            for t1, K in product(range(2), range(D)):
                M[index(t1, s2, K), index(s1, s2, J)] = L[t1 * D + K, s1 * D + J]
        return M

    def on_23(w, shifted):
        M = np.zeros((dim, dim), dtype=complex)
        for s1, s2, J in product(range(2), range(2), range(D)):
            L = ell(w, lam - y * AUX_WEIGHT[s1] if shifted else lam)
            for t2, K in product(range(2), range(D)):
                M[index(s1, t2, K), index(s1, s2, J)] = L[t2 * D + K, s2 * D + J]
        return M

    def on_12(shifted):
        M = np.zeros((dim, dim), dtype=complex)
        w = complex(w1) - complex(w2)
        for s1, s2, J in product(range(2), range(2), range(D)):
            R = r_plus(w, y, lam - y * h_w[J] if shifted else lam)
            for t1, t2 in product(range(2), range(2)):
                M[index(t1, t2, J), index(s1, s2, J)] = R[2 * t1 + t2, 2 * s1 + s2]
        return M

    w1, w2 = complex(w1), complex(w2)
    lhs = on_12(True) @ on_13(w1, False) @ on_23(w2, True)
    if reversed_rhs:
        rhs = on_23(w1, False) @ on_13(w2, True) @ on_12(True)
    else:
        rhs = on_23(w2, False) @ on_13(w1, True) @ on_12(False)
    return _rel(lhs, rhs)


# Line-bundle data of diagonal coefficients ---------------------------------------


def _theta_ratio_form(n: int, w, numerators, denominators) -> QuadraticFormSpec:
    """(N, v) of prod theta(w + r.x) / prod theta(w + r'.x) in base coordinates.

    Each r is a dict {coordinate position: integer}.
    """
    names = base_names(n)
    p = len(names)
    N = np.zeros((p, p), dtype=np.int64)
    v = np.zeros(p, dtype=complex)
    for sign, rows in ((1, numerators), (-1, denominators)):
        for lin in rows:
            r = np.zeros(p, dtype=np.int64)
            for pos, c in lin.items():
                r[pos] += c
            N += sign * np.outer(r, r)
            v += sign * complex(w) * r
    return QuadraticFormSpec(names, N, v)


def delta_coefficient_form(w, n: int) -> QuadraticFormSpec:
    """Bundle of prod_i theta(w - z_i + y) / theta(w - z_i): N = sum (y^2 - 2 z_i y), v = w e_y."""
    y = n
    return _theta_ratio_form(n, w, [{i: -1, y: 1} for i in range(n)], [{i: -1} for i in range(n)])


def l22_coefficient_form(w, K: SubsetIndex) -> QuadraticFormSpec:
    """Bundle of the K-th diagonal coefficient prod_{i in K} theta(w - z_i) / theta(w - z_i - y)."""
    n = K.n
    y = n
    return _theta_ratio_form(n, w, [{a - 1: -1} for a in K.members],
                             [{a - 1: -1, y: -1} for a in K.members])


def coefficient_multiplier_check(op: DifferenceOperator, K: SubsetIndex, Kp: SubsetIndex,
                                 form: QuadraticFormSpec, params: EllipticParams,
                                 trials: int = 3, seed: int = 0) -> float:
    """multiplier_check of phi_{K,K'} as a function of (z, y, lambda)."""
    n = op.n
    lattice = params.lattice

    def f(x):
        return op.coefficient(K, Kp, params_from_base(x, n, lattice))

    return multiplier_check(f, form, lattice.tau, trials=trials, seed=seed)
