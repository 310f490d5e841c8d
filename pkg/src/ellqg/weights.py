"""Elliptic weight functions.

Two independent constructions are provided:

* ``omega_I_shuffle`` folds one-point generators with the shuffle product,
  summing over (k', k'')-shuffles only;
* ``omega_I_explicit`` evaluates the closed symmetrization over all of S_k
  through the compiled permutation-sum kernel.

A sign of -1 selects the minus family (zeros along t = z_a), +1 the plus
family (zeros along t = z_a - y).  Subsets use the tensor convention of
:mod:`ellqg.combinatorics`: slots in I carry v1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .combinatorics import (
    SubsetIndex,
    enumerate_shuffles,
    permutation_table,
    subset_leq,
    subsets,
    tensor_basis_index,
    weight_index,
    epsilon,
)
from .errors import PoleProximityError, SingularMatrixError
from .rmatrix import permutation_operator, s_operator
from .theta import EllipticParams, LatticeParams

MAX_N = 8
MAX_K = 4

# Minimal |theta(t_i - t_j)| accepted before a shuffle sum is rejected.
COINCIDENCE_GUARD = 1e-10
# offset for the reference point of vanishing checks
NUDGE = 1e-3


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


@dataclass(frozen=True)
class SymmetricThetaFunction:
    """A symmetric function of k variables bound to (z, y, lambda).

    ``evaluator`` maps a length-k complex array to a complex number.
    """

    k: int
    sign: int
    z: tuple
    y: complex
    lam: complex
    lattice: LatticeParams
    evaluator: Callable

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def params(self) -> EllipticParams:
        return EllipticParams(self.lattice, self.y, self.lam, self.z)

    def __call__(self, t) -> complex:
        t = np.asarray(t, dtype=complex).reshape(-1)
        if t.size != self.k:
            raise ValueError(f"expected {self.k} variables, got {t.size}")
        return complex(self.evaluator(t))

    def relabel(self, **changes) -> "SymmetricThetaFunction":
        """Same function, read as an element of a differently labelled space."""
        return replace(self, **changes)

    def quasi_ratio(self, t) -> complex:
        """f(t) divided by prod theta(t_j - z_a) (minus) or prod theta(t_j - z_a + y) (plus)."""
        t = np.asarray(t, dtype=complex)
        off = self.y if self.sign > 0 else 0.0
        den = np.prod(self.lattice.theta(t[:, None] - np.asarray(self.z)[None, :] + off))
        return self(t) / den

    def declared_multiplier(self, s: int) -> complex:
        """Factor picked up by ``quasi_ratio`` when one t_i moves by r + s tau."""
        return complex(np.exp(-2j * np.pi * self.sign * s * (self.lam - self.k * self.y)))


def omega_elementary(k: int, sign, z, params: EllipticParams, lam_shift: int = 0) -> SymmetricThetaFunction:
    """One-point generator of the k-variable space, at lambda + lam_shift*y.

    minus: prod_j theta(lambda - t_j + z - k y)
    plus:  prod_j theta(lambda + t_j - z + (1 - k) y)
    """
    sign = _sign(sign)
    if k < 0:
        raise ValueError("k must be nonnegative")
    z = complex(z)
    y = params.y
    lam = params.lam + lam_shift * y
    th = params.lattice.theta
    if sign < 0:
        def ev(t):
            return np.prod(th(lam - t + z - k * y)) if t.size else 1.0
    else:
        def ev(t):
            return np.prod(th(lam + t - z + (1 - k) * y)) if t.size else 1.0
    return SymmetricThetaFunction(k, sign, (z,), y, lam, params.lattice, ev)


def _check_lam(f: SymmetricThetaFunction, g: SymmetricThetaFunction):
    expected = g.lam + g.y * (g.n - 2 * g.k)
    if abs(f.lam - expected) > 1e-9 * max(1.0, abs(expected)):
        raise ValueError(
            "left factor must carry lambda + y(n'' - 2k'') relative to the right factor"
        )


def shuffle_product(f: SymmetricThetaFunction, g: SymmetricThetaFunction, sign=None) -> SymmetricThetaFunction:
    """Shuffle product f * g, summed over (k', k'')-shuffles without prefactor."""
    sign = f.sign if sign is None else _sign(sign)
    if f.sign != sign or g.sign != sign:
        raise ValueError("both factors must belong to the same sign family")
    if abs(f.y - g.y) > 1e-14 * max(1.0, abs(f.y)) or f.lattice != g.lattice:
        raise ValueError("factors must share y and the lattice")
    _check_lam(f, g)
    k1, k2 = f.k, g.k
    k = k1 + k2
    y = g.y
    th = g.lattice.theta
    zf = np.asarray(f.z)
    zg = np.asarray(g.z)
    shuffles = enumerate_shuffles(k1, k2).items

    def ev(t):
        if k1 == 0 or k2 == 0:
            pair0 = pair1 = None
        else:
            diff = t[:, None] - t[None, :]
            pair0 = th(diff)
            pair1 = th(diff + y)
            off = ~np.eye(k, dtype=bool)
            if np.min(np.abs(pair0[off])) < COINCIDENCE_GUARD:
                raise PoleProximityError("shuffle product evaluated at coincident variables")
        if sign < 0:
            g_side = th(t[:, None] - zf[None, :]).prod(axis=1) if zf.size else np.ones(k)
            f_side = th(t[:, None] - zg[None, :] + y).prod(axis=1) if zg.size else np.ones(k)
        else:
            g_side = th(t[:, None] - zf[None, :] + y).prod(axis=1) if zf.size else np.ones(k)
            f_side = th(t[:, None] - zg[None, :]).prod(axis=1) if zg.size else np.ones(k)
        total = 0j
        for p in shuffles:
            F = p[:k1]
            G = p[k1:]
            term = f(t[list(F)]) * g(t[list(G)])
            term *= np.prod(g_side[list(G)]) * np.prod(f_side[list(F)])
            if pair0 is not None:
                for j in F:
                    for l in G:
                        if sign < 0:
                            term *= pair1[l, j] / pair0[l, j]
                        else:
                            term *= pair1[j, l] / pair0[j, l]
            total += term
        return total

    return SymmetricThetaFunction(k, sign, tuple(f.z) + tuple(g.z), y, g.lam, g.lattice, ev)


def occupation(I: SubsetIndex) -> list[int]:
    return [1 if a in I.members else 0 for a in range(1, I.n + 1)]


def omega_I_shuffle(I: SubsetIndex, sign, params: EllipticParams) -> SymmetricThetaFunction:
    """Iterated shuffle of one-point generators; factor a sits at lambda - y sum_{b>a}(2k_b - 1)."""
    sign = _sign(sign)
    _check_caps(I)
    ks = occupation(I)
    n = I.n
    factors = []
    for a in range(n):
        shift = -sum(2 * kb - 1 for kb in ks[a + 1:])
        factors.append(omega_elementary(ks[a], sign, params.z[a], params, lam_shift=shift))
    return reduce(lambda acc, f: shuffle_product(f, acc, sign), reversed(factors[:-1]), factors[-1])


def _check_caps(I: SubsetIndex):
    if I.n > MAX_N or I.k > MAX_K:
        raise ValueError(f"weight functions capped at n <= {MAX_N}, k <= {MAX_K}")


def psi_I(I: SubsetIndex, params: EllipticParams) -> complex:
    """prod_{j in I} theta(lambda - (w(j,I) + 1) y) theta(lambda - w(j,I) y)."""
    th = params.lattice.theta
    out = 1.0 + 0j
    for j in I.members:
        w = weight_index(j, I)
        out *= th(params.lam - (w + 1) * params.y) * th(params.lam - w * params.y)
    return out


def _factor_table(I: SubsetIndex, sign: int, t: np.ndarray, params: EllipticParams) -> np.ndarray:
    """A[m, r] = prod_a l(r, a) evaluated at variable t_m."""
    n = I.n
    k = I.k
    y = params.y
    lam = params.lam
    z = np.asarray(params.z)
    a_idx = np.arange(1, n + 1)
    args = np.empty((k, k, n), dtype=complex)
    for r, ir in enumerate(I.members):
        w = weight_index(ir, I)
        tm = t[:, None]
        if sign > 0:
            below = tm - z[None, :] + y
            at = lam + tm - z[None, :] - w * y
            above = tm - z[None, :]
        else:
            below = tm - z[None, :]
            at = lam - tm + z[None, :] - (w + 1) * y
            above = tm - z[None, :] + y
        args[:, r, :] = np.where(a_idx[None, :] < ir, below,
                                 np.where(a_idx[None, :] == ir, at, above))
    return params.lattice.theta(args).prod(axis=2)


def _explicit_sym(I: SubsetIndex, sign: int, t, params: EllipticParams, fold_cross: bool = False):
    """The symmetrized ratio (before dividing by psi) and its largest term.

    With ``fold_cross`` the product prod_{j != l} theta(t_j - t_l + y) is
    absorbed term by term, which keeps every term finite on t_l = t_j - y.
    """
    t = np.asarray(t, dtype=complex).reshape(-1)
    k = I.k
    if t.size != k:
        raise ValueError(f"expected {k} variables, got {t.size}")
    if k == 0:
        return 1.0 + 0j, 1.0
    th = params.lattice.theta
    y = params.y
    diff = t[:, None] - t[None, :]
    d0 = th(diff)
    off = ~np.eye(k, dtype=bool)
    if k > 1 and np.min(np.abs(d0[off])) < COINCIDENCE_GUARD:
        raise PoleProximityError("explicit formula needs pairwise distinct variables")
    A = _factor_table(I, sign, t, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        if fold_cross:
            B = th(diff + y) / d0 if sign > 0 else th(diff.T + y) / d0.T
        elif sign > 0:
            # slots i < j holding variables p, q contribute 1/(theta(t_p - t_q) theta(t_q - t_p + y))
            B = 1.0 / (d0 * th(diff.T + y))
        else:
            B = 1.0 / (d0.T * th(diff + y))
    B[~off] = 0.0
    return _kernels.sym_sum(A, B, permutation_table(k))


def _cross_product(t, params: EllipticParams) -> complex:
    t = np.asarray(t, dtype=complex).reshape(-1)
    if t.size < 2:
        return 1.0 + 0j
    vals = params.lattice.theta(t[:, None] - t[None, :] + params.y)
    np.fill_diagonal(vals, 1.0)
    return complex(np.prod(vals))


def normalized_w(I: SubsetIndex, sign, t, params: EllipticParams, with_scale: bool = False):
    """Normalized weight function from the symmetrized formula.

    minus: omega / prod_{j != l} theta(t_j - t_l + y); plus: additionally / psi_I.
    """
    sign = _sign(sign)
    _check_caps(I)
    value, scale = _explicit_sym(I, sign, t, params)
    if sign > 0:
        psi = psi_I(I, params)
        value /= psi
        scale /= abs(psi)
    return (value, scale) if with_scale else value


def omega_I_explicit(I: SubsetIndex, sign, t, params: EllipticParams, with_scale: bool = False):
    """Weight function recovered from the symmetrized formula."""
    sign = _sign(sign)
    _check_caps(I)
    value, scale = _explicit_sym(I, sign, t, params, fold_cross=True)
    return (value, scale) if with_scale else value


def omega_explicit_function(I: SubsetIndex, sign, params: EllipticParams) -> SymmetricThetaFunction:
    """The explicit-formula weight function wrapped as a SymmetricThetaFunction."""
    sign = _sign(sign)
    return SymmetricThetaFunction(
        I.k, sign, params.z, params.y, params.lam, params.lattice,
        lambda t: omega_I_explicit(I, sign, t, params),
    )


# Duality ------------------------------------------------------------------

def rho(f: SymmetricThetaFunction) -> SymmetricThetaFunction:
    """Identity map from the minus space at lambda to the plus space at -lambda - (n-2k) y (and back)."""
    return f.relabel(sign=-f.sign, lam=-f.lam - (f.n - 2 * f.k) * f.y)


# Evaluation forms -----------------------------------------------------------

def _zero_function(f: SymmetricThetaFunction) -> SymmetricThetaFunction:
    return f.relabel(k=0, evaluator=lambda t: 0.0)


def ev_form(f: SymmetricThetaFunction, w, ell: int) -> SymmetricThetaFunction:
    """Substitute the last ell variables by w, w - y, ..., w - (ell-1) y.

    The result lives in the space with k - ell variables at lambda - ell*y.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if ell == 0:
        return f
    if ell > f.k:
        return _zero_function(f)
    pinned = np.array([w - s * f.y for s in range(ell)], dtype=complex)

    def ev(t):
        return f(np.concatenate([t, pinned]))

    return f.relabel(k=f.k - ell, lam=f.lam - ell * f.y, evaluator=ev)


def epsilon_form(f: SymmetricThetaFunction, ells: Sequence[int]):
    """Successive evaluation at z_1 (ell_1 times), ..., z_n (ell_n times).

    Returns a scalar when sum(ells) == k, otherwise the remaining function.
    """
    if len(ells) != f.n:
        raise ValueError("need one multiplicity per point")
    g = f
    for za, ell in zip(f.z, ells):
        g = ev_form(g, za, ell)
    if sum(ells) == f.k:
        return g(np.zeros(0))
    return g


def ev_at_point(f: SymmetricThetaFunction, c: int, lower: bool = False) -> SymmetricThetaFunction:
    """Pin one variable at z_c (or z_c - y when ``lower``), c 1-based.

    The result is read with z_c moved by -y (resp. +y) and lambda adjusted so
    that the declared multiplier is unchanged: minus keeps lambda at z_c and
    drops it by 2y at z_c - y; plus does the opposite.
    """
    if f.k < 1:
        raise ValueError("nothing to evaluate")
    zc = f.z[c - 1]
    w = zc - f.y if lower else zc
    dz = f.y if lower else -f.y
    lam = f.lam - f.y + f.sign * dz
    z = list(f.z)
    z[c - 1] = zc + dz
    pinned = np.array([w], dtype=complex)
    return f.relabel(k=f.k - 1, z=tuple(z), lam=lam,
                     evaluator=lambda t: f(np.concatenate([t, pinned])))


def ev_shuffle_sides(f: SymmetricThetaFunction, g: SymmetricThetaFunction, c: int):
    """Both sides of the interaction of a single evaluation with f * g, as functions.

    c indexes the joint points (1-based).  The evaluation point is the one
    that kills the unwanted shuffles: z_c for a left-block point in the minus
    family, z_c - y for the plus family, and the other one for the right block.
    """
    sign = f.sign
    n1 = f.n
    th = f.lattice.theta
    y = f.y
    zc = (tuple(f.z) + tuple(g.z))[c - 1]
    left = c <= n1
    lower = (sign > 0) == left
    lhs = ev_at_point(shuffle_product(f, g), c, lower)
    if left:
        others = np.asarray(g.z)
        factor = np.prod(th(zc - others + (y if sign < 0 else -y)))
        core = shuffle_product(ev_at_point(f, c, lower), g)
    else:
        others = np.asarray(f.z)
        factor = np.prod(th(zc - others + (-y if sign < 0 else y)))
        core = shuffle_product(f, ev_at_point(g, c - n1, lower))
    rhs = core.relabel(evaluator=lambda t: factor * core(t))
    return lhs, rhs


def ev2_shuffle_sides(f: SymmetricThetaFunction, g: SymmetricThetaFunction, c: int):
    """Evaluation of f * g at both z_c and z_c - y against the factorized form.

    Done as two single evaluations; the second one sees z_c already moved.
    """
    th = f.lattice.theta
    y = f.y
    n1 = f.n
    zc = (tuple(f.z) + tuple(g.z))[c - 1]
    left = c <= n1
    lower = (f.sign > 0) == left
    fg = shuffle_product(f, g)
    lhs = ev_at_point(ev_at_point(fg, c, lower), c, lower)
    if left:
        d = zc - np.asarray(g.z)
        shift = y if f.sign < 0 else -y
        core = shuffle_product(ev_at_point(ev_at_point(f, c, lower), c, lower), g)
    else:
        d = zc - np.asarray(f.z)
        shift = -y if f.sign < 0 else y
        cg = c - n1
        core = shuffle_product(f, ev_at_point(ev_at_point(g, cg, lower), cg, lower))
    factor = np.prod(th(d + shift) * th(d))
    rhs = core.relabel(evaluator=lambda t: factor * core(t))
    return lhs, rhs


def _pinned_points(f: SymmetricThetaFunction, g: SymmetricThetaFunction, c: int, double: bool):
    zc = (tuple(f.z) + tuple(g.z))[c - 1]
    if double:
        return np.array([zc, zc - f.y], dtype=complex)
    lower = (f.sign > 0) == (c <= f.n)
    return np.array([zc - f.y if lower else zc], dtype=complex)


def ev_shuffle_check(f: SymmetricThetaFunction, g: SymmetricThetaFunction, c: int,
                     double: bool = False, seed: int = 0, samples: int = 3) -> float:
    """Deviation of the single (or double) evaluation identity for f * g at point c.

    The scale is the larger of both sides and of f * g with the pinned
    variables nudged off their points, so identically vanishing cases count
    as agreement up to rounding.
    """
    lhs, rhs = (ev2_shuffle_sides if double else ev_shuffle_sides)(f, g, c)
    fg = shuffle_product(f, g)
    pins = _pinned_points(f, g, c, double)
    rng = np.random.default_rng(seed)
    tau = f.lattice.tau
    worst = 0.0
    for _ in range(samples):
        t = rng.random(lhs.k) - 0.5 + (rng.random(lhs.k) - 0.5) * tau
        a, b = lhs(t), rhs(t)
        nudged = np.concatenate([t, pins + NUDGE * np.exp(2j * np.pi * rng.random(pins.size))])
        scale = max(abs(a), abs(b), abs(fg(nudged)))
        worst = max(worst, abs(a - b) / scale if scale > 0 else 0.0)
    return worst


def epsilon_closed_form(factors: Sequence[SymmetricThetaFunction]) -> complex:
    """Value of the full triangular evaluation on f_1 * ... * f_n at matching multiplicities.

    prod_a ev_{z_a,k_a}(f_a) times, for a < b,
    prod_{r<k_b} theta(z_b - z_a + (k_a - r) y) prod_{s<k_a} theta(z_a - z_b + (1 - s) y).
    """
    th = factors[0].lattice.theta
    y = factors[0].y
    zs = [f.z[0] for f in factors]
    ks = [f.k for f in factors]
    out = complex(np.prod([epsilon_form(f, [f.k]) for f in factors]))
    for a in range(len(factors)):
        for b in range(a + 1, len(factors)):
            for r in range(ks[b]):
                out *= th(zs[b] - zs[a] + (ks[a] - r) * y)
            for s in range(ks[a]):
                out *= th(zs[a] - zs[b] + (1 - s) * y)
    return out


def epsilon_points(f: SymmetricThetaFunction, ells: Sequence[int]) -> np.ndarray:
    """The variable values used by the triangular evaluation, last variable first pinned."""
    pts = [za - s * f.y for za, ell in zip(f.z, ells) for s in range(ell)]
    return np.array(pts[::-1], dtype=complex)


def epsilon_vanishing_check(f: SymmetricThetaFunction, ells: Sequence[int], seed: int = 0) -> float:
    """|epsilon_ells(f)| relative to f at the nudged evaluation points."""
    pts = epsilon_points(f, ells)
    rng = np.random.default_rng(seed)
    ref = abs(f(pts + NUDGE * np.exp(2j * np.pi * rng.random(pts.size))))
    val = abs(f(pts))
    return val / ref if ref > 0 else val


def partial_sums_dominated(ells: Sequence[int], ks: Sequence[int]) -> bool:
    """ell_1 + ... + ell_p <= k_1 + ... + k_p for every p."""
    return all(a <= b for a, b in zip(np.cumsum(ells), np.cumsum(ks)))


def check_vanishing_condition(f: SymmetricThetaFunction, a: int, seed: int = 0, samples: int = 5) -> float:
    """max |f(..., z_a, z_a - y)| relative to |f| with the pinned pair nudged off the locus.

    ``a`` is 1-based.  Returns 0 when k <= 1.
    """
    if f.k <= 1:
        return 0.0
    rng = np.random.default_rng(seed)
    za = f.z[a - 1]
    worst = 0.0
    ref = 0.0
    tau = f.lattice.tau
    for _ in range(samples):
        free = rng.random(f.k - 2) + rng.random(f.k - 2) * tau
        pinned = np.concatenate([free, [za, za - f.y]])
        loose = pinned.copy()
        loose[-2:] += NUDGE * np.array([1.0, 1j])
        worst = max(worst, abs(f(pinned)))
        ref = max(ref, abs(f(loose)))
    return worst / ref if ref > 0 else worst


def check_vanishing_explicit(I: SubsetIndex, sign, params: EllipticParams, a: int,
                             seed: int = 0, samples: int = 5) -> float:
    """Vanishing test of the explicit formula, relative to the symmetrization scale.

    When every term vanishes on its own (up to rounding) the pinned terms
    carry no scale, so the largest term at a nearby point, with the pinned
    pair nudged off the locus, serves as a floor.
    """
    if I.k <= 1:
        return 0.0
    rng = np.random.default_rng(seed)
    za = params.z[a - 1]
    tau = params.tau
    worst = 0.0
    for _ in range(samples):
        free = rng.random(I.k - 2) + rng.random(I.k - 2) * tau
        t = np.concatenate([free, [za, za - params.y]])
        loose = t.copy()
        loose[-2:] += NUDGE * np.array([1.0, 1j])
        value, scale = omega_I_explicit(I, sign, t, params, with_scale=True)
        _, floor = omega_I_explicit(I, sign, loose, params, with_scale=True)
        worst = max(worst, abs(value) / max(scale, floor))
    return worst


# Exchange relations and R-matrices from weight functions --------------------

def swap_points(params: EllipticParams, i: int) -> EllipticParams:
    z = list(params.z)
    z[i - 1], z[i] = z[i], z[i - 1]
    return params.replace(z=tuple(z))


def omega_vector(t, params: EllipticParams, sign) -> np.ndarray:
    """The vector sum_I omega_I(t) v_I in (C^2)^{x n}, over subsets with |I| = len(t)."""
    t = np.asarray(t, dtype=complex).reshape(-1)
    n = params.n
    out = np.zeros(2 ** n, dtype=complex)
    for I in subsets(n, t.size):
        out[tensor_basis_index(I)] = omega_I_explicit(I, sign, t, params)
    return out


def random_points(rng: np.random.Generator, k: int, tau: complex) -> np.ndarray:
    return rng.random(k) + rng.random(k) * tau


def exchange_check(i: int, params: EllipticParams, seed: int = 0, samples: int = 3) -> float:
    """Largest relative deviation of both exchange relations for the transposition (i, i+1).

    minus: omega(t; z) = S_i(z) omega(t; s_i z).
    plus:  F(s_i z) Psi^-1 = F(z) Psi^-1 S_i(z), F the matrix of plus values at sample points.
    """
    n = params.n
    swapped = swap_points(params, i)
    S = s_operator(i, params)
    rng = np.random.default_rng(seed)
    worst = 0.0
    psi = np.zeros(2 ** n, dtype=complex)
    for k in range(n + 1):
        for I in subsets(n, k):
            psi[tensor_basis_index(I)] = psi_I(I, params)
    for k in range(n + 1):
        for _ in range(samples):
            t = random_points(rng, k, params.tau)
            lhs = omega_vector(t, params, -1)
            rhs = S @ omega_vector(t, swapped, -1)
            worst = max(worst, _rel(lhs, rhs))
            row_z = omega_vector(t, params, +1) / psi
            row_sz = omega_vector(t, swapped, +1) / psi
            worst = max(worst, _rel(row_sz, row_z @ S))
    return worst


def _rel(a, b) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def fixed_point_matrix(params: EllipticParams, sign, eval_params: EllipticParams | None = None) -> np.ndarray:
    """Block-diagonal matrix M[J, I] = omega_I(z_J) over the tensor basis.

    Evaluation points come from ``eval_params`` (defaults to ``params``).
    """
    eval_params = params if eval_params is None else eval_params
    n = params.n
    M = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for k in range(n + 1):
        for J in subsets(n, k):
            t = np.array([eval_params.z[a - 1] for a in J.members], dtype=complex)
            for I in subsets(n, k):
                M[tensor_basis_index(J), tensor_basis_index(I)] = omega_I_explicit(I, sign, t, params)
    return M


def r_pm_from_weight_functions(params: EllipticParams):
    """R^- and R^+ as Phi(z1, z2)^-1 Phi(z2, z1) P for the two weight-function families."""
    if params.n != 2:
        raise ValueError("two points required")
    swapped = swap_points(params, 1)
    P = permutation_operator(2, 2, 0, 1)
    out = []
    for sign in (-1, +1):
        A = fixed_point_matrix(params, sign)
        B = fixed_point_matrix(swapped, sign, eval_params=params)
        if abs(np.linalg.det(A)) < 1e-300:
            raise SingularMatrixError("fixed-point evaluation matrix is singular")
        out.append(np.linalg.solve(A, B) @ P)
    return out[0], out[1]


# Fixed-point restrictions ----------------------------------------------------

def restriction(I: SubsetIndex, J: SubsetIndex, sign, params: EllipticParams, with_scale: bool = False):
    """Normalized weight function at t = z_J."""
    t = np.array([params.z[a - 1] for a in J.members], dtype=complex)
    return normalized_w(I, sign, t, params, with_scale=with_scale)


def diagonal_restriction(I: SubsetIndex, sign, params: EllipticParams) -> complex:
    """Closed form of the normalized weight function at t = z_I."""
    th = params.lattice.theta
    sign = _sign(sign)
    y = params.y
    lam_part = 1.0 + 0j
    for a in I.members:
        lam_part *= th(params.lam - (weight_index(a, I) + 1) * y)
    cross = 1.0 + 0j
    for a in I.members:
        for b in I.complement().members:
            e = epsilon(b, a) if sign < 0 else epsilon(a, b)
            cross *= th(params.z[a - 1] - params.z[b - 1] + e * y)
    return cross * lam_part if sign < 0 else cross / lam_part


def is_nonzero_restriction(I: SubsetIndex, J: SubsetIndex, sign) -> bool:
    """Whether triangularity allows a nonzero value of w_I at z_J.

    w^-_I(z_J) vanishes unless I <= J; w^+_I(z_J) vanishes unless J <= I.
    """
    return subset_leq(I, J) if _sign(sign) < 0 else subset_leq(J, I)


def restriction_table(n: int, k: int, sign, params: EllipticParams) -> np.ndarray:
    """Matrix T[I, K] = w_I(z_K) over k-subsets in lexicographic order."""
    subs = subsets(n, k)
    T = np.empty((len(subs), len(subs)), dtype=complex)
    for i, I in enumerate(subs):
        for j, K in enumerate(subs):
            T[i, j] = restriction(I, K, sign, params)
    return T


def tangent_product(K: SubsetIndex, params: EllipticParams, shift: float = 0.0) -> complex:
    """prod_{a in K, b not in K} theta(z_a - z_b + shift)."""
    th = params.lattice.theta
    out = 1.0 + 0j
    for a in K.members:
        for b in K.complement().members:
            out *= th(params.z[a - 1] - params.z[b - 1] + shift)
    return out
