"""Pairing of minus and plus theta functions by iterated residues, and orthogonality.

Every pole met by the iterated residues is simple and sits at t_i = z_a; with
theta'(0) = 1 the residue is the remaining integrand evaluated there.  Only
injective assignments of variables to points contribute, so the pairing is
a finite sum over increasing tuples a_1 < ... < a_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .combinatorics import SubsetIndex, subsets
from .errors import PoleProximityError
from .theta import EllipticParams
from .weights import (
    SymmetricThetaFunction,
    omega_explicit_function,
    omega_elementary,
    psi_I,
    restriction_table,
    shuffle_product,
    tangent_product,
)


@dataclass(frozen=True)
class PairingContext:
    params: EllipticParams
    k: int
    guard: float = 1e-8

    def __post_init__(self):
        p = self.params
        th = p.lattice.theta
        for a in range(p.n):
            for b in range(p.n):
                if a == b:
                    continue
                for j in range(1, p.n):
                    if abs(th(p.z[a] - p.z[b] - j * p.y)) < self.guard:
                        raise PoleProximityError(
                            f"z_{a + 1} - z_{b + 1} - {j}y is too close to the lattice"
                        )


def residue_terms(f: SymmetricThetaFunction, g: SymmetricThetaFunction) -> list[complex]:
    """The summands of the residue formula, one per increasing tuple of points."""
    if f.k != g.k:
        raise ValueError("pairing needs equal variable counts")
    k = f.k
    if k == 0:
        return [f(np.zeros(0)) * g(np.zeros(0))]
    th = f.lattice.theta
    y = f.y
    z = np.asarray(f.z, dtype=complex)
    n = z.size
    thy = th(y)
    terms = []
    for tup in combinations(range(n), k):
        t = z[list(tup)]
        val = f(t) * g(t) * thy ** k
        if k > 1:
            d = t[:, None] - t[None, :]
            cross = th(d) / th(d + y)
            np.fill_diagonal(cross, 1.0)
            val *= np.prod(cross)
        others = np.ones(n, dtype=bool)
        for i, a in enumerate(tup):
            others[:] = True
            others[a] = False
            val /= np.prod(th(t[i] - z[others])) * np.prod(th(t[i] - z + y))
        terms.append(complex(val))
    return terms


def pairing(f: SymmetricThetaFunction, g: SymmetricThetaFunction, ctx: PairingContext | None = None,
            with_scale: bool = False):
    """<f, g> for f in a minus space and g in the plus space on the same points."""
    if f.sign > 0 or g.sign < 0:
        raise ValueError("pairing takes a minus function on the left and a plus function on the right")
    if ctx is not None and ctx.k != f.k:
        raise ValueError("context k does not match")
    terms = residue_terms(f, g)
    value = complex(sum(terms))
    scale = max((abs(t) for t in terms), default=0.0)
    return (value, scale) if with_scale else value


def orthogonality_matrix(k: int, params: EllipticParams):
    """Gram matrix <omega^-_I, omega^+_J> over k-subsets, and the largest residue term."""
    n = params.n
    subs = subsets(n, k)
    minus = [omega_explicit_function(I, -1, params) for I in subs]
    plus = [omega_explicit_function(J, +1, params) for J in subs]
    G = np.empty((len(subs), len(subs)), dtype=complex)
    scale = 0.0
    for i, f in enumerate(minus):
        for j, g in enumerate(plus):
            G[i, j], s = pairing(f, g, with_scale=True)
            scale = max(scale, s)
    return G, scale


def gram_deviation(k: int, params: EllipticParams) -> tuple[float, float]:
    """(relative error of the diagonal against psi_I, off-diagonal size over scale)."""
    G, scale = orthogonality_matrix(k, params)
    subs = subsets(params.n, k)
    psi = np.array([psi_I(I, params) for I in subs])
    diag = float(np.max(np.abs(np.diag(G) - psi) / np.abs(psi)))
    off = G - np.diag(np.diag(G))
    return diag, float(np.max(np.abs(off)) / scale) if off.size else 0.0


def _orthogonality_sums(k: int, params: EllipticParams):
    n = params.n
    subs = subsets(n, k)
    Wm = restriction_table(n, k, -1, params)   # Wm[I, K] = w^-_I(z_K)
    Wp = restriction_table(n, k, +1, params)
    t0 = np.array([tangent_product(K, params) for K in subs])
    t1 = np.array([tangent_product(K, params, params.y) for K in subs])
    return subs, Wm, Wp, t0, t1


def ortho_sum_matrix(k: int, params: EllipticParams) -> np.ndarray:
    """S[I, J] = sum_K w^-_I(z_K) w^+_J(z_K) / prod theta(z_a - z_b) theta(z_a - z_b + y)."""
    _, Wm, Wp, t0, t1 = _orthogonality_sums(k, params)
    return (Wm / (t0 * t1)[None, :]) @ Wp.T


def ortho_dual_matrix(k: int, params: EllipticParams) -> np.ndarray:
    """D[I, K] = sum_J w^-_J(z_I) w^+_J(z_K)."""
    _, Wm, Wp, _, _ = _orthogonality_sums(k, params)
    return Wm.T @ Wp


def ortho_sum_check(I: SubsetIndex, J: SubsetIndex, params: EllipticParams) -> float:
    subs = subsets(params.n, I.k)
    S = ortho_sum_matrix(I.k, params)
    return abs(S[subs.index(I), subs.index(J)] - (1.0 if I == J else 0.0))


def ortho_dual_check(I: SubsetIndex, K: SubsetIndex, params: EllipticParams) -> float:
    """Deviation from delta_{IK} prod theta(z_a - z_b) theta(z_a - z_b + y), relative to that product."""
    subs = subsets(params.n, I.k)
    D = ortho_dual_matrix(I.k, params)
    ref = tangent_product(I, params) * tangent_product(I, params, params.y)
    target = ref if I == K else 0.0
    return abs(D[subs.index(I), subs.index(K)] - target) / abs(ref)


def inverse_pair(k: int, params: EllipticParams):
    """X[I, K] = w^-_I(z_K)/prod theta(z_a - z_b) and Y[K, J] = w^+_J(z_K)/prod theta(z_a - z_b + y)."""
    _, Wm, Wp, t0, t1 = _orthogonality_sums(k, params)
    X = Wm / t0[None, :]
    Y = Wp.T / t1[:, None]
    return X, Y


def inverse_deviation(k: int, params: EllipticParams) -> float:
    X, Y = inverse_pair(k, params)
    eye = np.eye(X.shape[0])
    return float(max(np.max(np.abs(X @ Y - eye)), np.max(np.abs(Y @ X - eye))))


def factorized_pairing_check(params: EllipticParams) -> float:
    """<f1*f2, g1*g2> against <f1,g1><f2,g2> (or 0) for one-point factors on two points."""
    if params.n != 2:
        raise ValueError("two points required")
    worst = 0.0
    for k1 in (0, 1):
        for k2 in (0, 1):
            for l1 in (0, 1):
                for l2 in (0, 1):
                    if k1 + k2 != l1 + l2:
                        continue
                    # left factors carry lambda + y(1 - 2k'') relative to the right ones
                    f1 = omega_elementary(k1, -1, params.z[0], params, lam_shift=1 - 2 * k2)
                    f2 = omega_elementary(k2, -1, params.z[1], params)
                    g1 = omega_elementary(l1, +1, params.z[0], params, lam_shift=1 - 2 * l2)
                    g2 = omega_elementary(l2, +1, params.z[1], params)
                    lhs, scale = pairing(shuffle_product(f1, f2), shuffle_product(g1, g2), with_scale=True)
                    if (k1, k2) == (l1, l2):
                        rhs = pairing(f1, g1) * pairing(f2, g2)
                        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
                    else:
                        worst = max(worst, abs(lhs) / max(scale, 1e-300))
    return worst
