"""Fixed-point sections, quadratic-form multipliers and the elliptic stable envelope.

A line bundle on a product of elliptic curves is represented only by its
multiplier data (N, v): an integer symmetric matrix and a complex vector.  A
function f has that data when

    f(x + e_j)   = (-1)^{N_jj} f(x)
    f(x + tau e_j) = (-1)^{N_jj} exp(-2 pi i ((N x)_j + v_j) - pi i tau N_jj) f(x).

theta(r.x + c) has N = r r^T and v = c r; products add, ratios subtract.

Coordinates are named.  The base space uses ``z1..zn, y, lam``; theta
spaces prepend ``t1..tk``; the twisting forms use ``t1..tk, s1..s_{n-k}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .combinatorics import (
    SubsetIndex,
    count_above,
    epsilon,
    subsets,
    weight_index,
)
from .errors import PoleProximityError, SingularMatrixError
from .theta import EllipticParams, LatticeParams
from .weights import (
    NUDGE,
    SymmetricThetaFunction,
    is_nonzero_restriction,
    normalized_w,
    omega_I_explicit,
    psi_I,
    restriction,
    shuffle_product,
)

# Quadratic forms ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticFormSpec:
    """Multiplier data (N, v) over named coordinates; the form is x^T N x."""

    names: tuple
    N: np.ndarray
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        names = tuple(self.names)
        p = len(names)
        if len(set(names)) != p:
            raise ValueError("coordinate names must be distinct")
        N = np.asarray(self.N)
        if N.shape != (p, p):
            raise ValueError(f"N must be {p}x{p}")
        if not np.array_equal(N, N.T):
            raise ValueError("N must be symmetric")
        if not np.all(np.equal(np.mod(N, 1), 0)):
            raise ValueError("N must have integer entries")
        v = np.zeros(p, dtype=complex) if self.v is None else np.asarray(self.v, dtype=complex)
        if v.shape != (p,):
            raise ValueError(f"v must have length {p}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "N", N.astype(np.int64))
        object.__setattr__(self, "v", v)

    @property
    def p(self) -> int:
        return len(self.names)

    @classmethod
    def zero(cls, names) -> "QuadraticFormSpec":
        p = len(tuple(names))
        return cls(tuple(names), np.zeros((p, p), dtype=np.int64))

    def index(self, name: str) -> int:
        return self.names.index(name)

    def value(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        return complex(x @ self.N @ x)

    def __add__(self, other: "QuadraticFormSpec") -> "QuadraticFormSpec":
        if self.names != other.names:
            raise ValueError("forms live on different coordinates")
        return QuadraticFormSpec(self.names, self.N + other.N, self.v + other.v)

    def __sub__(self, other: "QuadraticFormSpec") -> "QuadraticFormSpec":
        if self.names != other.names:
            raise ValueError("forms live on different coordinates")
        return QuadraticFormSpec(self.names, self.N - other.N, self.v - other.v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadraticFormSpec):
            return NotImplemented
        return (self.names == other.names and np.array_equal(self.N, other.N)
                and np.allclose(self.v, other.v))

    __hash__ = None

    def pullback(self, names, substitution: Mapping[str, Mapping[str, int]]) -> "QuadraticFormSpec":
        """Form in new coordinates after old = S new.

        ``substitution`` maps each old name to a linear combination of new
        names; unlisted old names must also be new names (identity).
        """
        names = tuple(names)
        col = {m: j for j, m in enumerate(names)}
        S = np.zeros((self.p, len(names)), dtype=np.int64)
        for i, old in enumerate(self.names):
            combo = substitution.get(old, {old: 1})
            for new, c in combo.items():
                if new not in col:
                    raise KeyError(f"unknown coordinate {new!r}")
                S[i, col[new]] += int(c)
        return QuadraticFormSpec(names, S.T @ self.N @ S, S.T @ self.v)

    def rows(self, which: Sequence[str]) -> np.ndarray:
        return self.N[[self.index(m) for m in which], :]


class FormBuilder:
    """Accumulates x^T N x from squares and products of integer linear forms."""

    def __init__(self, names):
        self.names = tuple(names)
        self._col = {m: j for j, m in enumerate(self.names)}
        p = len(self.names)
        self._twice = np.zeros((p, p), dtype=np.int64)
        self._v = np.zeros(p, dtype=complex)

    def vec(self, lin: Mapping[str, int]) -> np.ndarray:
        r = np.zeros(len(self.names), dtype=np.int64)
        for m, c in lin.items():
            r[self._col[m]] += int(c)
        return r

    def product(self, coef, lin1, lin2):
        r1, r2 = self.vec(lin1), self.vec(lin2)
        self._twice = self._twice + int(coef) * (np.outer(r1, r2) + np.outer(r2, r1))
        return self

    def square(self, coef, lin, shift: complex = 0.0):
        """coef copies of theta(lin + shift); a negative coef divides."""
        r = self.vec(lin)
        self.product(coef, lin, lin)
        self._v = self._v + coef * shift * r
        return self

    def build(self) -> QuadraticFormSpec:
        if np.any(self._twice % 2):
            raise ValueError("accumulated form is not integral")
        return QuadraticFormSpec(self.names, self._twice // 2, self._v)


def base_names(n: int) -> tuple:
    return tuple(f"z{a}" for a in range(1, n + 1)) + ("y", "lam")


def theta_names(k: int, n: int) -> tuple:
    return tuple(f"t{r}" for r in range(1, k + 1)) + base_names(n)


def twisting_names(k: int, n: int) -> tuple:
    return (tuple(f"t{r}" for r in range(1, k + 1))
            + tuple(f"s{j}" for j in range(1, n - k + 1)) + ("y", "lam"))


def _check_kn(k: int, n: int):
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")


def twisting_form(k: int, n: int) -> QuadraticFormSpec:
    """2 sum t_i (lam + (n-k) y) + sum_{i,j} (t_i - s_j)^2."""
    _check_kn(k, n)
    b = FormBuilder(twisting_names(k, n))
    for i in range(1, k + 1):
        b.product(2, {f"t{i}": 1}, {"lam": 1, "y": n - k})
        for j in range(1, n - k + 1):
            b.square(1, {f"t{i}": 1, f"s{j}": -1})
    return b.build()


def theta_space_form(k: int, n: int) -> QuadraticFormSpec:
    """2 sum t_i (lam + (n-k) y) + sum_{i,a} (t_i - z_a)^2 + k(k-1) y^2."""
    _check_kn(k, n)
    b = FormBuilder(theta_names(k, n))
    for i in range(1, k + 1):
        b.product(2, {f"t{i}": 1}, {"lam": 1, "y": n - k})
        for a in range(1, n + 1):
            b.square(1, {f"t{i}": 1, f"z{a}": -1})
    b.square(k * (k - 1), {"y": 1})
    return b.build()


def weight_class_form(I: SubsetIndex) -> QuadraticFormSpec:
    """Form of the class bundle of the fixed point labelled by I, in (z, y, lam)."""
    n, k = I.n, I.k
    Ibar = I.complement()
    b = FormBuilder(base_names(n))
    for a in Ibar.members:
        b.product(-2 * count_above(a, I), {f"z{a}": 1}, {"y": 1})
    drop = 0
    for a in I.members:
        above_out = count_above(a, Ibar)
        drop += above_out
        b.product(-2, {f"z{a}": 1}, {"lam": 1, "y": above_out})
        b.square(-1, {"lam": 1, "y": -(count_above(a, I) + 1) + above_out})
    b.square(k * (n - k) - drop, {"y": 1})
    return b.build()


def _fixed_point_substitution(K: SubsetIndex) -> dict:
    sub = {f"t{r}": {f"z{a}": 1} for r, a in enumerate(K.members, start=1)}
    sub.update({f"s{j}": {f"z{a}": 1} for j, a in enumerate(K.complement().members, start=1)})
    return sub


def stab_form(I: SubsetIndex, K: SubsetIndex) -> QuadraticFormSpec:
    """Declared form of w+_I(z_K): class form plus the twisting form at t = z_K, s = z_Kbar."""
    if I.n != K.n or I.k != K.k:
        raise ValueError("I and K must be k-subsets of the same [n]")
    tw = twisting_form(K.k, K.n).pullback(base_names(K.n), _fixed_point_substitution(K))
    return weight_class_form(I) + tw


def sym_argument_form(I: SubsetIndex) -> QuadraticFormSpec:
    """Form of one term of the symmetrized plus formula, read off its theta factors."""
    n, k = I.n, I.k
    b = FormBuilder(theta_names(k, n))
    for r, ir in enumerate(I.members, start=1):
        w = weight_index(ir, I)
        for a in range(1, n + 1):
            if a < ir:
                b.square(1, {f"t{r}": 1, f"z{a}": -1, "y": 1})
            elif a == ir:
                b.square(1, {"lam": 1, f"t{r}": 1, f"z{a}": -1, "y": -w})
            else:
                b.square(1, {f"t{r}": 1, f"z{a}": -1})
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            b.square(-1, {f"t{i}": 1, f"t{j}": -1})
            b.square(-1, {f"t{j}": 1, f"t{i}": -1, "y": 1})
    return b.build()


def sym_argument_t_part(k: int, n: int) -> QuadraticFormSpec:
    """The t-dependent part: 2 sum t_r(lam + (n-k)y) + sum (t_r - z_a)^2 - 2 sum_{r<s} (t_r - t_s)^2."""
    b = FormBuilder(theta_names(k, n))
    for r in range(1, k + 1):
        b.product(2, {f"t{r}": 1}, {"lam": 1, "y": n - k})
        for a in range(1, n + 1):
            b.square(1, {f"t{r}": 1, f"z{a}": -1})
        for s in range(r + 1, k + 1):
            b.square(-2, {f"t{r}": 1, f"t{s}": -1})
    return b.build()


def t_rows_agree(a: QuadraticFormSpec, b: QuadraticFormSpec) -> bool:
    """Whether two forms on the same coordinates agree in every t-row."""
    if a.names != b.names:
        raise ValueError("forms live on different coordinates")
    rows = [m for m in a.names if m.startswith("t")]
    return bool(np.array_equal(a.rows(rows), b.rows(rows)))


def cross_kernel_form(k: int, n: int) -> QuadraticFormSpec:
    """sum_{i != j} (t_i - t_j + y)^2 in theta-space coordinates."""
    b = FormBuilder(theta_names(k, n))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j:
                b.square(1, {f"t{i}": 1, f"t{j}": -1, "y": 1})
    return b.build()


def theta_twisting_residual(I: SubsetIndex) -> int:
    """Largest entry of (N^Theta - cross kernel)|_{t=z_I} - N_{k,n}|_{t=z_I, s=z_Ibar}."""
    n, k = I.n, I.k
    sub = _fixed_point_substitution(I)
    lhs = (theta_space_form(k, n) - cross_kernel_form(k, n)).pullback(
        base_names(n), {m: sub[m] for m in sub if m.startswith("t")})
    rhs = twisting_form(k, n).pullback(base_names(n), sub)
    return int(np.max(np.abs(lhs.N - rhs.N))) if n else 0


def shuffle_shift_form(k1: int, n1: int, k2: int, n2: int) -> QuadraticFormSpec:
    """k'' y ((n' - k') y - 2 sum_{a <= n'} z_a) on the theta space of (k'+k'', n'+n'')."""
    _check_kn(k1, n1)
    _check_kn(k2, n2)
    b = FormBuilder(theta_names(k1 + k2, n1 + n2))
    b.square(k2 * (n1 - k1), {"y": 1})
    for a in range(1, n1 + 1):
        b.product(-2 * k2, {"y": 1}, {f"z{a}": 1})
    return b.build()


def shuffle_source_form(k1: int, n1: int, k2: int, n2: int) -> QuadraticFormSpec:
    """Form of one shuffle term: both factor forms plus the plus-family kernels."""
    k, n = k1 + k2, n1 + n2
    names = theta_names(k, n)
    left = theta_space_form(k1, n1).pullback(names, {"lam": {"lam": 1, "y": n2 - 2 * k2}})
    right_sub = {f"t{r}": {f"t{r + k1}": 1} for r in range(1, k2 + 1)}
    right_sub.update({f"z{a}": {f"z{a + n1}": 1} for a in range(1, n2 + 1)})
    right = theta_space_form(k2, n2).pullback(names, right_sub)
    b = FormBuilder(names)
    for j in range(1, k1 + 1):
        for l in range(k1 + 1, k + 1):
            b.square(1, {f"t{j}": 1, f"t{l}": -1, "y": 1})
            b.square(-1, {f"t{j}": 1, f"t{l}": -1})
        for bb in range(n1 + 1, n + 1):
            b.square(1, {f"t{j}": 1, f"z{bb}": -1})
    for l in range(k1 + 1, k + 1):
        for a in range(1, n1 + 1):
            b.square(1, {f"t{l}": 1, f"z{a}": -1, "y": 1})
    return left + right + b.build()


def shuffle_shift_residual(k1: int, n1: int, k2: int, n2: int) -> int:
    """Largest entry of source form - N^Theta_{k,n} - shift form; 0 when the identity holds."""
    diff = (shuffle_source_form(k1, n1, k2, n2)
            - theta_space_form(k1 + k2, n1 + n2) - shuffle_shift_form(k1, n1, k2, n2))
    return int(np.max(np.abs(diff.N))) if diff.p else 0


# Multiplier checking -------------------------------------------------------------


def _cell_point(rng: np.random.Generator, p: int, tau: complex, radius: float) -> np.ndarray:
    u = rng.uniform(-radius, radius, p)
    v = rng.uniform(-radius, radius, p)
    return u + v * tau


def multiplier_check(f: Callable, spec: QuadraticFormSpec, tau: complex, trials: int = 5,
                     seed: int = 0, directions: Sequence[str] | None = None,
                     radius: float = 0.5) -> float:
    """Largest relative gap between f's shifts by 1 and tau and the declared multipliers.

    ``f`` takes a coordinate vector ordered as ``spec.names``.
    """
    tau = complex(tau)
    rng = np.random.default_rng(seed)
    cols = range(spec.p) if directions is None else [spec.index(m) for m in directions]
    worst = 0.0
    for _ in range(trials):
        x = _cell_point(rng, spec.p, tau, radius)
        fx = complex(f(x))
        Nx = spec.N @ x
        for j in cols:
            sign = -1.0 if spec.N[j, j] % 2 else 1.0
            e = np.zeros(spec.p)
            e[j] = 1.0
            expected_real = sign * fx
            expected_tau = sign * fx * np.exp(
                -2j * np.pi * (Nx[j] + spec.v[j]) - 1j * np.pi * tau * spec.N[j, j])
            for shifted, expected in ((x + e, expected_real), (x + tau * e, expected_tau)):
                got = complex(f(shifted))
                scale = max(abs(got), abs(expected), 1e-300)
                worst = max(worst, abs(got - expected) / scale)
    return worst


def params_from_base(x, n: int, lattice: LatticeParams) -> EllipticParams:
    """Read (z1..zn, y, lam) off a coordinate vector in base order."""
    x = np.asarray(x, dtype=complex)
    return EllipticParams(lattice, x[n], x[n + 1], tuple(x[:n]))


def base_vector(params: EllipticParams) -> np.ndarray:
    return np.array([*params.z, params.y, params.lam], dtype=complex)


def _split_theta_coords(x, k: int, n: int, lattice: LatticeParams):
    x = np.asarray(x, dtype=complex)
    return x[:k], params_from_base(x[k:], n, lattice)


# Sections over fixed-point components -------------------------------------------


@dataclass(frozen=True)
class ComponentSection:
    """Values on the fixed-point components Y_K, |K| = k.

    ``values[K]`` maps EllipticParams to a complex number.  A section bound
    to one parameter point (see ``phi_map``) accepts only that point.
    """

    n: int
    k: int
    values: Mapping
    declared_form: Mapping | None = None

    def __post_init__(self):
        keys = set(self.values)
        expected = set(subsets(self.n, self.k))
        if keys != expected:
            raise ValueError("a section needs exactly one value per k-subset")

    def __call__(self, K: SubsetIndex, params: EllipticParams | None = None) -> complex:
        return complex(self.values[K](params))

    def vector(self, params: EllipticParams | None = None) -> np.ndarray:
        return np.array([self(K, params) for K in subsets(self.n, self.k)], dtype=complex)


@dataclass(frozen=True)
class StableEnvelopeClass:
    I: SubsetIndex
    section: ComponentSection

    @property
    def sign(self) -> int:
        return 1


def stab(I: SubsetIndex, params: EllipticParams | None = None, guard: float = 1e-12) -> StableEnvelopeClass:
    """Component values K -> w+_I(z_K) together with their declared forms."""
    if params is not None:
        psi = psi_I(I, params)
        if abs(psi) < guard:
            raise PoleProximityError(f"|psi_I| = {abs(psi):.3e} below guard {guard:g}")
    values = {}
    forms = {}
    for K in subsets(I.n, I.k):
        values[K] = (lambda K: lambda p: restriction(I, K, +1, p))(K)
        forms[K] = stab_form(I, K)
    return StableEnvelopeClass(I, ComponentSection(I.n, I.k, values, forms))


def envelope_diagonal(I: SubsetIndex, params: EllipticParams) -> complex:
    """prod_{a in I, b not in I} theta(z_a - z_b + eps(a,b) y) / prod_{a in I} theta(lam - (w(a,I)+1) y)."""
    th = params.lattice.theta
    num = 1.0 + 0j
    for a in I.members:
        for b in I.complement().members:
            num *= th(params.z[a - 1] - params.z[b - 1] + epsilon(a, b) * params.y)
    den = 1.0 + 0j
    for a in I.members:
        den *= th(params.lam - (weight_index(a, I) + 1) * params.y)
    return num / den


@dataclass
class AxiomReport:
    I: SubsetIndex
    deviations: dict
    tolerances: dict

    @property
    def failures(self) -> list:
        return [name for name, dev in self.deviations.items() if not dev <= self.tolerances[name]]

    @property
    def passed(self) -> bool:
        return not self.failures


AXIOM_TOLERANCES = {"multiplier": 1e-9, "diagonal": 1e-10, "divisor": 1e-8, "triangularity": 1e-9}


def _locus_params(params: EllipticParams, a: int, b: int, rng: np.random.Generator,
                  offset: complex) -> EllipticParams:
    """Redraw z_a on z_a = z_b + offset + (lattice vector)."""
    m, l = rng.integers(-1, 2, size=2)
    z = list(params.z)
    z[a - 1] = z[b - 1] + offset + m + l * params.tau
    return params.replace(z=tuple(z))


def _vanishing_ratio(value_fn: Callable, params: EllipticParams, a: int) -> float:
    """|F| on the locus over max(term scale, |F| after nudging z_a off it)."""
    value, scale = value_fn(params)
    z = list(params.z)
    z[a - 1] += NUDGE * (1 + 1j)
    moved, moved_scale = value_fn(params.replace(z=tuple(z)))
    return abs(value) / max(scale, abs(moved), 1e-300)


def divisor_check(I: SubsetIndex, J: SubsetIndex, params: EllipticParams,
                  samples: int = 20, seed: int = 0) -> float:
    """psi_I w+_I(z_J) on z_a = z_b - y + lattice, a in J, b not in J, b < a."""
    rng = np.random.default_rng(seed)

    def value_fn(p):
        v, s = restriction(I, J, +1, p, with_scale=True)
        psi = psi_I(I, p)
        return v * psi, s * abs(psi)

    worst = 0.0
    for a in J.members:
        for b in J.complement().members:
            if b >= a:
                continue
            for _ in range(samples):
                p = _locus_params(params, a, b, rng, -params.y)
                worst = max(worst, _vanishing_ratio(value_fn, p, a))
    return worst


def axiomatic_check(I: SubsetIndex, params: EllipticParams, samples: int = 20, seed: int = 0,
                    trials: int = 3) -> AxiomReport:
    """Multiplier, diagonal, divisor and triangularity properties of stab(I)."""
    env = stab(I, params)
    n, lattice = I.n, params.lattice
    dev = {name: 0.0 for name in AXIOM_TOLERANCES}
    for idx, K in enumerate(subsets(n, I.k)):
        spec = env.section.declared_form[K]
        f = (lambda K: lambda x: restriction(I, K, +1, params_from_base(x, n, lattice)))(K)
        dev["multiplier"] = max(dev["multiplier"],
                                multiplier_check(f, spec, params.tau, trials, seed + idx))
        if K != I and not is_nonzero_restriction(I, K, +1):
            value, scale = restriction(I, K, +1, params, with_scale=True)
            dev["triangularity"] = max(dev["triangularity"], abs(value) / max(scale, 1e-300))
        dev["divisor"] = max(dev["divisor"], divisor_check(I, K, params, samples, seed + idx))
    got = restriction(I, I, +1, params)
    want = envelope_diagonal(I, params)
    dev["diagonal"] = abs(got - want) / max(abs(want), 1e-300)
    return AxiomReport(I, dev, dict(AXIOM_TOLERANCES))


# The phi correspondence ------------------------------------------------------------


def _points(K: SubsetIndex, params: EllipticParams) -> np.ndarray:
    return np.array([params.z[a - 1] for a in K.members], dtype=complex)


def _cross(t, params: EllipticParams) -> complex:
    t = np.asarray(t, dtype=complex)
    if t.size < 2:
        return 1.0 + 0j
    vals = params.lattice.theta(t[:, None] - t[None, :] + params.y)
    np.fill_diagonal(vals, 1.0)
    return complex(np.prod(vals))


def divisor_distance(params: EllipticParams, k: int) -> float:
    """Smallest |theta| among the factors phi and its inverse divide by."""
    th = params.lattice.theta
    n = params.n
    vals = [abs(th(params.y))]
    for a in range(n):
        for b in range(n):
            if a != b:
                d = params.z[a] - params.z[b]
                vals += [abs(th(d)), abs(th(d + params.y))]
    for K in subsets(n, k):
        vals.append(abs(psi_I(K, params)))
    return min(vals)


def phi_map(f: SymmetricThetaFunction, guard: float = 1e-10) -> ComponentSection:
    """K -> f(z_K) / prod_{i != j} theta(t_i - t_j + y) at t = z_K, bound to f's parameters."""
    params = f.params
    if divisor_distance(params, f.k) < guard:
        raise PoleProximityError("parameters too close to the divisor of the correspondence")
    cache = {}
    for K in subsets(f.n, f.k):
        t = _points(K, params)
        cache[K] = f(t) / _cross(t, params)

    def bound(K):
        def ev(p=None):
            if p is not None and p != params:
                raise ValueError("this section is bound to a single parameter point")
            return cache[K]
        return ev

    return ComponentSection(f.n, f.k, {K: bound(K) for K in cache})


def phi_inverse_coefficients(s: ComponentSection, params: EllipticParams) -> dict:
    """Coefficients c_K with phi^-1(s) = sum_K c_K omega+_K."""
    n, k = s.n, s.k
    subs = subsets(n, k)
    vals = {I: s(I, params) for I in subs}
    coeffs = {}
    for K in subs:
        psi = psi_I(K, params)
        total = 0j
        for I in subs:
            den = 1.0 + 0j
            th = params.lattice.theta
            for a in I.members:
                for b in I.complement().members:
                    d = params.z[a - 1] - params.z[b - 1]
                    den *= th(d) * th(d + params.y)
            total += normalized_w(K, -1, _points(I, params), params) * vals[I] / den
        coeffs[K] = total / psi
    return coeffs


def omega_combination(coeffs: Mapping, params: EllipticParams) -> SymmetricThetaFunction:
    """sum_K c_K omega+_K as a function of t."""
    items = list(coeffs.items())
    if not items:
        raise ValueError("empty combination")
    k = items[0][0].k

    def ev(t):
        return sum(c * omega_I_explicit(K, +1, t, params) for K, c in items)

    return SymmetricThetaFunction(k, 1, params.z, params.y, params.lam, params.lattice, ev)


def phi_inverse(s: ComponentSection, params: EllipticParams) -> SymmetricThetaFunction:
    return omega_combination(phi_inverse_coefficients(s, params), params)


def phi_basis_matrix(n: int, k: int, params: EllipticParams) -> np.ndarray:
    """Columns phi(omega+_K) over k-subsets in lexicographic order."""
    subs = subsets(n, k)
    M = np.empty((len(subs), len(subs)), dtype=complex)
    for j, K in enumerate(subs):
        for i, J in enumerate(subs):
            t = _points(J, params)
            M[i, j] = omega_I_explicit(K, +1, t, params) / _cross(t, params)
    return M


def phi_injectivity(n: int, k: int, params: EllipticParams, sweeps: int = 20) -> float:
    """Smallest singular value of the phi image of the basis after row and column equilibration.

    Nonzero means the images are linearly independent; 1 is perfectly conditioned.
    """
    M = phi_basis_matrix(n, k, params)
    for _ in range(sweeps):
        rows = np.linalg.norm(M, axis=1)
        if np.any(rows == 0):
            raise SingularMatrixError("zero row in the basis image")
        M = M / rows[:, None]
        cols = np.linalg.norm(M, axis=0)
        if np.any(cols == 0):
            raise SingularMatrixError("zero column in the basis image")
        M = M / cols[None, :]
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def phi_round_trip(params: EllipticParams, k: int, seed: int = 0, samples: int = 3) -> dict:
    """Residuals of phi(phi^-1(s)) = s, of phi^-1(phi(f)) = f at sampled t, and coefficient recovery."""
    n = params.n
    rng = np.random.default_rng(seed)
    subs = subsets(n, k)
    coeffs = {K: complex(*rng.standard_normal(2)) for K in subs}
    f = omega_combination(coeffs, params)
    s = phi_map(f)
    back = phi_inverse_coefficients(s, params)
    scale = max(abs(c) for c in coeffs.values())
    coeff_res = max(abs(back[K] - coeffs[K]) for K in subs) / scale

    g = omega_combination(back, params)
    f_res = 0.0
    for _ in range(samples):
        t = rng.uniform(-0.5, 0.5, k) + rng.uniform(-0.5, 0.5, k) * params.tau
        a, b = f(t), g(t)
        f_res = max(f_res, abs(a - b) / max(abs(a), abs(b), 1e-300))

    target = {K: complex(*rng.standard_normal(2)) for K in subs}
    sec = ComponentSection(n, k, {K: (lambda v: lambda p=None: v)(v) for K, v in target.items()})
    again = phi_map(phi_inverse(sec, params))
    s_res = max(abs(again(K) - target[K]) for K in subs) / max(abs(v) for v in target.values())
    return {"coefficients": coeff_res, "function": f_res, "section": s_res}


# Gluing ----------------------------------------------------------------------------


def gluing_check(s: ComponentSection, params: EllipticParams, a: int, b: int,
                 samples: int = 3, seed: int = 0) -> float:
    """max |s_K - s_K'| on z_a = z_b, over K containing a but not b, K' = K - a + b.

    The scale is the largest magnitude of the compared components on or just
    off the locus, so that components vanishing on the locus compare as equal.
    Components containing both a and b are not evaluated on the locus.
    """
    if a == b:
        raise ValueError("gluing needs a != b")
    rng = np.random.default_rng(seed)
    pairs = []
    for K in subsets(s.n, s.k):
        if a in K and b not in K:
            pairs.append((K, SubsetIndex(s.n, tuple(sorted(set(K.members) - {a} | {b})))))
    worst = 0.0
    for _ in range(samples):
        z = list(params.z)
        u, v = rng.uniform(-0.25, 0.25, 2)
        z[b - 1] += u + v * params.tau
        z[a - 1] = z[b - 1]
        on = params.replace(z=tuple(z))
        z[a - 1] += NUDGE * (1 + 1j)
        off = params.replace(z=tuple(z))
        involved = [K for pair in pairs for K in pair]
        scale = max([abs(s(K, q)) for K in involved for q in (on, off)] + [1e-300])
        for K, Kp in pairs:
            worst = max(worst, abs(s(K, on) - s(Kp, on)) / scale)
    return worst


def gluing_all(s: ComponentSection, params: EllipticParams, samples: int = 3, seed: int = 0) -> float:
    worst = 0.0
    for a in range(1, s.n + 1):
        for b in range(1, s.n + 1):
            if a != b:
                worst = max(worst, gluing_check(s, params, a, b, samples, seed + 31 * a + b))
    return worst


def perturbed_section(s: ComponentSection, K: SubsetIndex, amount: complex = 0.1) -> ComponentSection:
    """Copy of s with a constant added to one component; a gluing counterexample."""
    values = dict(s.values)
    base = values[K]
    values[K] = lambda p=None: base(p) + amount
    return ComponentSection(s.n, s.k, values, s.declared_form)


# Forms of weight functions and shuffles ---------------------------------------------


def omega_plus_multiplier(I: SubsetIndex, params: EllipticParams, trials: int = 3, seed: int = 0) -> float:
    """t-direction multipliers of omega+_I against the theta-space form."""
    n, k = I.n, I.k
    spec = theta_space_form(k, n)
    lattice = params.lattice

    def f(x):
        t, p = _split_theta_coords(x, k, n, lattice)
        return omega_I_explicit(I, +1, t, p)

    return multiplier_check(f, spec, params.tau, trials, seed,
                            directions=[f"t{r}" for r in range(1, k + 1)])


def sym_argument_value(I: SubsetIndex, t, params: EllipticParams) -> complex:
    """The identity-permutation term of the symmetrized plus formula."""
    th = params.lattice.theta
    t = np.asarray(t, dtype=complex)
    y, lam = params.y, params.lam
    out = 1.0 + 0j
    for r, ir in enumerate(I.members):
        w = weight_index(ir, I)
        for a in range(1, I.n + 1):
            d = t[r] - params.z[a - 1]
            out *= th(d + y) if a < ir else th(lam + d - w * y) if a == ir else th(d)
    for i in range(I.k):
        for j in range(i + 1, I.k):
            out /= th(t[i] - t[j]) * th(t[j] - t[i] + y)
    return out


def sym_argument_multiplier(I: SubsetIndex, params: EllipticParams, trials: int = 3, seed: int = 0) -> float:
    n, k = I.n, I.k
    lattice = params.lattice

    def f(x):
        t, p = _split_theta_coords(x, k, n, lattice)
        return sym_argument_value(I, t, p)

    return multiplier_check(f, sym_argument_form(I), params.tau, trials, seed)


def model_theta_section(k: int, params: EllipticParams, lam_shift: int = 0) -> SymmetricThetaFunction:
    """A symmetric function whose full multiplier is the theta-space form.

    prod_i theta(t_i + c) / (theta(t_i) theta(c)) * prod_{i,a} theta(t_i - z_a) * theta(y)^{k(k-1)},
    with c = lam + (n - k) y; not in the vanishing subspace.
    """
    th = params.lattice.theta
    n = params.n
    y = params.y
    lam = params.lam + lam_shift * y
    c = lam + (n - k) * y
    z = np.asarray(params.z, dtype=complex)

    def ev(t):
        if t.size == 0:
            return 1.0 + 0j
        out = np.prod(th(t + c) / (th(t) * th(c)))
        if z.size:
            out *= np.prod(th(t[:, None] - z[None, :]))
        return out * th(y) ** (k * (k - 1))

    return SymmetricThetaFunction(k, 1, params.z, y, lam, params.lattice, ev)


def shuffle_multiplier_shift_check(k1: int, n1: int, k2: int, n2: int, params: EllipticParams,
                                   trials: int = 3, seed: int = 0) -> float:
    """Multiplier of the plus shuffle of two model sections against N^Theta plus the shift form.

    ``params`` supplies only the lattice; coordinates are sampled.
    """
    k, n = k1 + k2, n1 + n2
    lattice = params.lattice
    spec = theta_space_form(k, n) + shuffle_shift_form(k1, n1, k2, n2)

    def f(x):
        t, p = _split_theta_coords(x, k, n, lattice)
        left = model_theta_section(k1, p.replace(z=p.z[:n1]), lam_shift=n2 - 2 * k2)
        right = model_theta_section(k2, p.replace(z=p.z[n1:]))
        return shuffle_product(left, right, +1)(t)

    return multiplier_check(f, spec, lattice.tau, trials, seed)
