"""Identity suites behind the ``ellqg`` command.

Each check samples guarded-generic parameters from its own RNG stream,
evaluates one identity, and reports the largest deviation seen over the
trials.  Streams are derived from the master seed by hashing the check
name, so reports do not depend on scheduling or on which suites ran.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Callable

import numpy as np

from . import action, envelope, pairing, rmatrix, weights
from .combinatorics import SubsetIndex, all_subsets, subsets
from .errors import CapError, EllqgError, SamplingError
from .theta import LatticeParams, quasi_period_multiplier, sample_generic_params

SCHEMA = "ellqg-report/1"
SUITES = ("theta", "ybe", "shuffle", "weightfn", "orthogonality", "envelope", "gz", "rll",
          "consistency")
MAX_N = 8
MAX_K = 4

# default tolerances by kind of identity
TOL_THETA = 1e-10
TOL_DIRECT = 1e-9
TOL_SUMS = 1e-8
TOL_COMPOSED = 1e-7


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    n: int = 3
    k_max: int = 2
    trials: int = 20
    seed: int = 0
    tol: float | None = None
    guard: float = 1e-3
    jobs: int = 1

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite!r}")
        if not 1 <= self.n <= MAX_N:
            raise CapError(f"n must be in 1..{MAX_N}")
        if not 1 <= self.k_max <= MAX_K:
            raise CapError(f"k_max must be in 1..{MAX_K}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.guard > 0:
            raise ValueError("guard must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    def suites(self) -> tuple:
        return SUITES if self.suite == "all" else (self.suite,)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    deviation: float | None
    tolerance: float
    passed: bool
    seed: int
    params: str
    error: str | None = None

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seed": self.seed,
            "params": self.params,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class SuiteReport:
    suite: str
    config: SuiteConfig
    records: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]


def stable_seed(master: int, name: str) -> int:
    digest = hashlib.sha256(f"{master}:{name}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


# Check registry ---------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    tolerance: float
    fn: Callable  # (ctx) -> (deviation, digest)
    max_n: int = MAX_N
    min_n: int = 1


class Context:
    """What a check sees: its seed, the effective n, and the config."""

    def __init__(self, cfg: SuiteConfig, seed: int, n: int):
        self.cfg = cfg
        self.seed = seed
        self.n = n
        self.digest = ""

    def params(self, trial: int, n: int | None = None):
        p = sample_generic_params(self.n if n is None else n, k_max=self.cfg.k_max,
                                  seed=self.seed + trial, guard=self.cfg.guard)
        if trial == 0:
            self.digest = p.digest()
        return p

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, trial])

    @property
    def trials(self) -> int:
        return self.cfg.trials

    @property
    def k_max(self) -> int:
        return min(self.cfg.k_max, self.n)


REGISTRY: list[Check] = []


def check(suite: str, name: str, anchor: str, tolerance: float, max_n: int = MAX_N,
          min_n: int = 1):
    def deco(fn):
        REGISTRY.append(Check(suite, name, anchor, tolerance, fn, max_n, min_n))
        return fn
    return deco


def _cell(rng, tau, size=None):
    u = rng.random(size) - 0.5
    v = rng.random(size) - 0.5
    return u + v * tau


def _lattice(ctx, trial) -> tuple:
    rng = ctx.rng(trial)
    L = LatticeParams(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0)))
    if trial == 0:
        ctx.digest = hashlib.sha256(repr(L.tau).encode()).hexdigest()[:16]
    return L, rng


# theta --------------------------------------------------------------------------

THETA_SAMPLES = 50


@check("theta", "theta.odd", "theta is odd", TOL_THETA)
def _theta_odd(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        L, rng = _lattice(ctx, trial)
        z = _cell(rng, L.tau, THETA_SAMPLES)
        a, b = L.theta(z), L.theta(-z)
        worst = max(worst, float(np.max(np.abs(a + b) / np.maximum(np.abs(a), 1e-300))))
    return worst


@check("theta", "theta.quasi_periods", "quasi-periodicity under Z + tau Z", TOL_THETA)
def _theta_quasi(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        L, rng = _lattice(ctx, trial)
        for z in _cell(rng, L.tau, THETA_SAMPLES // 5):
            base = L.theta(z)
            for r, s in ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (2, -1)):
                got = L.theta(z + r + s * L.tau)
                want = quasi_period_multiplier(z, r, s, L) * base
                worst = max(worst, abs(got - want) / max(abs(got), abs(want), 1e-300))
    return worst


@check("theta", "theta.unit_derivative", "theta'(0) = 1", 1e-8)
def _theta_deriv(ctx):
    from .theta import theta_derivative_at_zero
    worst = 0.0
    for trial in range(ctx.trials):
        L, _ = _lattice(ctx, trial)
        worst = max(worst, abs(theta_derivative_at_zero(L) - 1.0))
    return worst


@check("theta", "theta.truncation", "product truncation is converged", 1e-12)
def _theta_trunc(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        L, rng = _lattice(ctx, trial)
        L2 = L.with_order(2 * L.truncation_order)
        z = _cell(rng, L.tau, THETA_SAMPLES)
        a, b = L.theta(z), L2.theta(z)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
    return worst


# ybe ----------------------------------------------------------------------------


def _gl3_lam(rng, tau, y, lattice):
    for _ in range(100):
        lam = _cell(rng, tau, 3)
        ok = all(abs(lattice.theta(lam[i] - lam[j] - s * y)) > 1e-3
                 for i in range(3) for j in range(3) if i != j for s in range(-2, 3))
        if ok:
            return lam
    raise SamplingError("no generic gl_3 dynamical point")


@check("ybe", "ybe.gl2.dybe", "dynamical Yang-Baxter equation, gl_2", TOL_DIRECT)
def _ybe2(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 1)
        rng = ctx.rng(trial)
        z, w = _cell(rng, p.tau, 2)
        worst = max(worst, rmatrix.check_dybe(rmatrix.gl2_rmatrix(p.lattice), z, w, p.y, p.lam))
    return worst


@check("ybe", "ybe.gl2.inversion", "unitarity R(z)R(-z)^21 = 1, gl_2", TOL_DIRECT)
def _inv2(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 1)
        z = _cell(ctx.rng(trial), p.tau)
        worst = max(worst, rmatrix.check_inversion(rmatrix.gl2_rmatrix(p.lattice), z, p.y, p.lam))
    return worst


@check("ybe", "ybe.gl3.dybe", "dynamical Yang-Baxter equation, gl_3", TOL_DIRECT)
def _ybe3(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 1)
        rng = ctx.rng(trial)
        z, w = _cell(rng, p.tau, 2)
        lam = _gl3_lam(rng, p.tau, p.y, p.lattice)
        worst = max(worst, rmatrix.check_dybe(rmatrix.glN_rmatrix(3, p.lattice), z, w, p.y, lam))
    return worst


@check("ybe", "ybe.gl3.inversion", "unitarity R(z)R(-z)^21 = 1, gl_3", TOL_DIRECT)
def _inv3(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 1)
        rng = ctx.rng(trial)
        z = _cell(rng, p.tau)
        lam = _gl3_lam(rng, p.tau, p.y, p.lattice)
        worst = max(worst, rmatrix.check_inversion(rmatrix.glN_rmatrix(3, p.lattice), z, p.y, lam))
    return worst


@check("ybe", "ybe.dual_and_gauge", "dual and theta-gauged matrices solve the same equation",
       TOL_DIRECT)
def _ybe_variants(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 1)
        z, w = _cell(ctx.rng(trial), p.tau, 2)
        R = rmatrix.gl2_rmatrix(p.lattice)
        for variant in (rmatrix.dual_r(R), rmatrix.gauge_r(R, rmatrix.theta_gauge(p.lattice))):
            worst = max(worst, rmatrix.check_dybe(variant, z, w, p.y, p.lam))
    return worst


@check("ybe", "ybe.weight_function_matrices",
       "R-matrices from weight functions match the dual and gauged closed forms", TOL_DIRECT)
def _r_pm(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 2)
        z = p.z[0] - p.z[1]
        Rm, Rp = weights.r_pm_from_weight_functions(p)
        R = rmatrix.gl2_rmatrix(p.lattice)
        pairs = (
            (Rm, rmatrix.r_minus_closed_form(z, p.y, p.lam, p.lattice)),
            (Rp, rmatrix.r_plus_closed_form(z, p.y, p.lam, p.lattice)),
            (Rm, rmatrix.dual_r(R)(z, p.y, p.lam)),
            (Rp, rmatrix.gauge_r(R, rmatrix.theta_gauge(p.lattice))(z, p.y, p.lam)),
        )
        for a, b in pairs:
            worst = max(worst, rmatrix.relative_deviation(a, b))
    return worst


# shuffle --------------------------------------------------------------------------


def _chain(ks, zs, sign, p, lam_shift=0):
    """Iterated shuffle of one-point generators at points zs with multiplicities ks."""
    fs = []
    for a in range(len(ks)):
        sh = lam_shift - sum(2 * kb - 1 for kb in ks[a + 1:])
        fs.append(weights.omega_elementary(ks[a], sign, zs[a], p, lam_shift=sh))
    return reduce(lambda acc, f: weights.shuffle_product(f, acc, sign), reversed(fs[:-1]), fs[-1]), fs


def _random_ks(rng, count, total_max):
    while True:
        ks = tuple(int(v) for v in rng.integers(0, 3, size=count))
        if 0 < sum(ks) <= total_max:
            return ks


@check("shuffle", "shuffle.associativity", "associativity of the shuffle product", TOL_DIRECT,
       min_n=1)
def _assoc(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 3)
        rng = ctx.rng(trial)
        ks = _random_ks(rng, 3, 4)
        for sign in (-1, 1):
            h = weights.omega_elementary(ks[2], sign, p.z[2], p)
            g = weights.omega_elementary(ks[1], sign, p.z[1], p, lam_shift=1 - 2 * ks[2])
            f = weights.omega_elementary(ks[0], sign, p.z[0], p,
                                         lam_shift=(1 - 2 * ks[2]) + (1 - 2 * ks[1]))
            A = weights.shuffle_product(weights.shuffle_product(f, g), h)
            B = weights.shuffle_product(f, weights.shuffle_product(g, h))
            t = _cell(rng, p.tau, sum(ks))
            a, b = A(t), B(t)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return worst


@check("shuffle", "shuffle.duality", "rho(f * g) = rho(g) * rho(f)", TOL_DIRECT)
def _duality(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 4)
        rng = ctx.rng(trial)
        kg = _random_ks(rng, 2, 3)
        kf = _random_ks(rng, 2, 3)
        for sign in (-1, 1):
            g, _ = _chain(kg, p.z[2:], sign, p)
            f, _ = _chain(kf, p.z[:2], sign, p, lam_shift=2 - 2 * sum(kg))
            lhs = weights.rho(weights.shuffle_product(f, g))
            rhs = weights.shuffle_product(weights.rho(g), weights.rho(f))
            t = _cell(rng, p.tau, lhs.k)
            a, b = lhs(t), rhs(t)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return worst


@check("shuffle", "shuffle.evaluations",
       "single and double point evaluations factor through the shuffle product", TOL_DIRECT)
def _ev_shuffle(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial, 4)
        rng = ctx.rng(trial)
        kf, kg = _random_ks(rng, 2, 3), _random_ks(rng, 2, 3)
        for sign in (-1, 1):
            g, _ = _chain(kg, p.z[2:], sign, p)
            f, _ = _chain(kf, p.z[:2], sign, p, lam_shift=2 - 2 * sum(kg))
            for c in range(1, 5):
                block = f.k if c <= f.n else g.k
                if block >= 1:
                    worst = max(worst, weights.ev_shuffle_check(f, g, c, seed=trial))
                if block >= 2:
                    worst = max(worst, weights.ev_shuffle_check(f, g, c, double=True, seed=trial))
    return worst


@check("shuffle", "shuffle.triangular_evaluation",
       "closed form of the triangular evaluation of an iterated product", TOL_DIRECT)
def _epsilon(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 3)
        ks = _random_ks(ctx.rng(trial), 3, 4)
        F, fs = _chain(ks, p.z, -1, p)
        closed = weights.epsilon_closed_form(fs)
        val = weights.epsilon_form(F, list(ks))
        worst = max(worst, abs(val - closed) / abs(closed))
        th = p.theta
        for k in range(4):
            e = weights.omega_elementary(k, -1, p.z[0], p)
            want = np.prod([th(p.lam - s * p.y) for s in range(1, k + 1)]) if k else 1.0
            got = weights.epsilon_form(e, [k])
            worst = max(worst, abs(got - want) / abs(want))
    return worst


@check("shuffle", "shuffle.triangular_vanishing",
       "triangular evaluation vanishes off the dominance order", TOL_DIRECT)
def _epsilon_zero(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial, 3)
        ks = _random_ks(ctx.rng(trial), 3, 4)
        F, _ = _chain(ks, p.z, -1, p)
        total = sum(ks)
        for ls in product(range(total + 1), repeat=3):
            if sum(ls) != total or weights.partial_sums_dominated(ls, ks):
                continue
            worst = max(worst, weights.epsilon_vanishing_check(F, ls, seed=trial))
    return worst


# weight functions ----------------------------------------------------------------


def _index_sets(n, k_max):
    return [I for k in range(1, min(k_max, n) + 1) for I in subsets(n, k)]


@check("weightfn", "weightfn.cross_construction",
       "iterated shuffle and symmetrization formulas agree", TOL_DIRECT)
def _cross(ctx):
    worst = 0.0
    trials = max(1, ctx.trials // 4)
    for trial in range(trials):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        for I in _index_sets(ctx.n, ctx.k_max):
            for sign in (-1, 1):
                f = weights.omega_I_shuffle(I, sign, p)
                for _ in range(3):
                    t = _cell(rng, p.tau, I.k)
                    a = f(t)
                    b, scale = weights.omega_I_explicit(I, sign, t, p, with_scale=True)
                    worst = max(worst, abs(a - b) / max(abs(a), abs(b), scale, 1e-300))
    return worst


@check("weightfn", "weightfn.vanishing", "weight functions vanish at t = (z_a, z_a - y)",
       TOL_DIRECT)
def _vanish(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        for I in _index_sets(ctx.n, ctx.k_max):
            if I.k < 2:
                continue
            for sign in (-1, 1):
                for a in range(1, ctx.n + 1):
                    worst = max(worst, weights.check_vanishing_explicit(I, sign, p, a, seed=trial))
    return worst


@check("weightfn", "weightfn.exchange",
       "exchange relations under adjacent transpositions", TOL_DIRECT, min_n=2, max_n=5)
def _exchange(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        for i in range(1, ctx.n):
            worst = max(worst, weights.exchange_check(i, p, seed=trial))
    return worst


# orthogonality -------------------------------------------------------------------


@check("orthogonality", "orthogonality.gram",
       "residue pairing of the two weight-function families is diagonal", TOL_SUMS, max_n=5)
def _gram(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        for k in range(1, ctx.k_max + 1):
            worst = max(worst, *pairing.gram_deviation(k, p))
    return worst


@check("orthogonality", "orthogonality.fixed_point_sums",
       "orthogonality sums over fixed points", TOL_SUMS)
def _sums(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial)
        for k in range(1, ctx.k_max + 1):
            S = pairing.ortho_sum_matrix(k, p)
            worst = max(worst, float(np.max(np.abs(S - np.eye(S.shape[0])))))
            subs = subsets(ctx.n, k)
            D = pairing.ortho_dual_matrix(k, p)
            ref = np.array([weights.tangent_product(I, p) * weights.tangent_product(I, p, p.y)
                            for I in subs])
            worst = max(worst, float(np.max(np.abs(D - np.diag(ref)) / np.abs(ref)[:, None])))
            worst = max(worst, pairing.inverse_deviation(k, p))
    return worst


@check("orthogonality", "orthogonality.triangularity",
       "restrictions are triangular with the closed-form diagonal", TOL_DIRECT)
def _triangular(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial)
        for k in range(1, ctx.k_max + 1):
            for sign in (-1, 1):
                for I in subsets(ctx.n, k):
                    d = weights.diagonal_restriction(I, sign, p)
                    worst = max(worst, abs(weights.restriction(I, I, sign, p) - d) / abs(d))
                    for J in subsets(ctx.n, k):
                        if weights.is_nonzero_restriction(I, J, sign):
                            continue
                        val, scale = weights.restriction(I, J, sign, p, with_scale=True)
                        worst = max(worst, abs(val) / max(scale, abs(d)))
    return worst


# envelope ------------------------------------------------------------------------


def _envelope_axiom(name):
    def fn(ctx):
        worst = 0.0
        for trial in range(max(1, ctx.trials // 10)):
            p = ctx.params(trial)
            for k in range(1, ctx.k_max + 1):
                for I in subsets(ctx.n, k):
                    rep = envelope.axiomatic_check(I, p, samples=5, seed=trial)
                    worst = max(worst, rep.deviations[name])
        return worst
    return fn


for _axiom, _text in (("multiplier", "stable envelope restrictions carry the predicted multipliers"),
                      ("diagonal", "stable envelope diagonal restriction"),
                      ("divisor", "stable envelope vanishes on the required divisors"),
                      ("triangularity", "stable envelope support condition")):
    check("envelope", f"envelope.axioms.{_axiom}", _text,
          envelope.AXIOM_TOLERANCES[_axiom], max_n=4)(_envelope_axiom(_axiom))


@check("envelope", "envelope.form_identities",
       "integer quadratic-form identities for theta spaces and shuffle shifts", TOL_DIRECT)
def _forms(ctx):
    worst = 0.0
    for k in range(1, ctx.k_max + 1):
        for I in subsets(ctx.n, k):
            worst = max(worst, abs(envelope.theta_twisting_residual(I)))
    for k1, n1, k2, n2 in ((0, 1, 0, 1), (1, 1, 0, 1), (0, 1, 1, 1), (1, 1, 1, 1), (1, 2, 1, 1),
                           (2, 3, 1, 2), (1, 2, 2, 2)):
        worst = max(worst, abs(envelope.shuffle_shift_residual(k1, n1, k2, n2)))
    return float(worst)


@check("envelope", "envelope.shuffle_multipliers",
       "shuffle products of model sections carry the shifted multipliers", TOL_DIRECT)
def _shuffle_mult(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 10)):
        p = ctx.params(trial, 4)
        for c in ((1, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1)):
            worst = max(worst, envelope.shuffle_multiplier_shift_check(*c, p, trials=2, seed=trial))
        for k in range(1, ctx.k_max + 1):
            for I in subsets(min(ctx.n, 4), k):
                worst = max(worst, envelope.omega_plus_multiplier(I, p.replace(z=p.z[:I.n]),
                                                                  trials=2, seed=trial))
    return worst


@check("envelope", "envelope.gluing", "restrictions agree on intersecting components",
       TOL_DIRECT, min_n=2, max_n=4)
def _gluing(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 10)):
        p = ctx.params(trial)
        for k in range(1, ctx.k_max + 1):
            for I in subsets(ctx.n, k):
                s = envelope.stab(I, p).section
                worst = max(worst, envelope.gluing_all(s, p, samples=2, seed=trial))
    return worst


@check("envelope", "envelope.phi_round_trip",
       "theta functions and sections correspond through restriction", TOL_SUMS, max_n=4)
def _phi(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 10)):
        p = ctx.params(trial)
        for k in range(1, ctx.k_max + 1):
            res = envelope.phi_round_trip(p, k, seed=trial, samples=2)
            worst = max(worst, *res.values())
    return worst


# Gelfand-Zetlin --------------------------------------------------------------------


def _w(rng, tau):
    return complex(_cell(rng, tau))


@check("gz", "gz.eigenvectors", "xi_I diagonalizes L22 and the quantum determinant", TOL_SUMS,
       max_n=4)
def _gz_eigen(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        w = _w(ctx.rng(trial), p.tau)
        for I in all_subsets(ctx.n):
            worst = max(worst, *action.gz_residuals(I, w, p).values())
    return worst


@check("gz", "gz.commutators", "L22 and the determinant commute", TOL_DIRECT, max_n=4)
def _gz_comm(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        w1, w2 = _w(rng, p.tau), _w(rng, p.tau)
        L = action.tensor_L(ctx.n)
        worst = max(worst, action.commutator_norm(L(2, 2, w1), L(2, 2, w2), p),
                    action.commutator_norm(action.quantum_determinant(L, w1), L(2, 2, w2), p))
    return worst


@check("gz", "gz.xi_hat_support", "xi-hat restricts to a single component", TOL_SUMS, max_n=4)
def _xi_hat(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        for I in all_subsets(ctx.n):
            worst = max(worst, *action.xi_hat_support(I, p).values())
    return worst


@check("gz", "gz.geometric_determinant",
       "geometric determinant equals multiplication by the theta ratio", TOL_COMPOSED, max_n=4)
def _geo_det(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        w = _w(ctx.rng(trial), p.tau)
        worst = max(worst, action._rel(action.geo_determinant(w, ctx.n).matrix(p),
                                       action.geo_Delta(w, ctx.n).matrix(p)))
    return worst


# RLL -------------------------------------------------------------------------------


@check("rll", "rll.tensor", "RLL relations on the tensor product", TOL_COMPOSED, max_n=3)
def _rll_tensor(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        worst = max(worst, action.rll_tensor_check(_w(rng, p.tau), _w(rng, p.tau), p))
    return worst


@check("rll", "rll.geometric", "RLL relations with moment maps on sections", TOL_COMPOSED,
       max_n=3)
def _rll_geo(ctx):
    worst = 0.0
    for trial in range(ctx.trials):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        coeffs = {I: complex(*rng.standard_normal(2)) for I in all_subsets(ctx.n)}
        worst = max(worst, action.rll_geometric_check(_w(rng, p.tau), _w(rng, p.tau), p,
                                                      action.stab_vector(coeffs)))
    return worst


@check("rll", "rll.pole_cancellation",
       "L12 image stays bounded near diagonals (largest growth ratio)", 2.0, min_n=2, max_n=4)
def _poles(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        coeffs = {I: complex(*rng.standard_normal(2)) for I in all_subsets(ctx.n)}
        res = action.pole_cancellation(action.geo_L12, _w(rng, p.tau), p, 1, 2,
                                       action.stab_vector(coeffs))
        worst = max(worst, *res["ratios"])
    return worst


@check("rll", "rll.ell_operator", "shuffle-defined operator matches the tensor L after gauge",
       TOL_COMPOSED, max_n=3)
def _ell(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        worst = max(worst, action.ell_vs_tensor_check(_w(ctx.rng(trial), p.tau), p))
    return worst


@check("rll", "rll.ell_exchange", "exchange relation of the shuffle-defined operator",
       TOL_DIRECT, max_n=2)
def _ell_ybe(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        rng = ctx.rng(trial)
        worst = max(worst, action.ell_yang_baxter(_w(rng, p.tau), _w(rng, p.tau), p))
    return worst


# consistency -----------------------------------------------------------------------


def _consistency(i, j):
    def fn(ctx):
        worst = 0.0
        for trial in range(max(1, ctx.trials // 4)):
            p = ctx.params(trial)
            worst = max(worst, action.action_consistency(i, j, _w(ctx.rng(trial), p.tau), p))
        return worst
    return fn


for _i, _j in product((1, 2), repeat=2):
    check("consistency", f"consistency.L{_i}{_j}",
          f"geometric L{_i}{_j} on stable envelopes matches the tensor action", TOL_COMPOSED,
          max_n=4)(_consistency(_i, _j))


@check("consistency", "consistency.equivariance",
       "coefficient matrices are symmetric-group equivariant", TOL_DIRECT, min_n=2, max_n=4)
def _equiv(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 4)):
        p = ctx.params(trial)
        w = _w(ctx.rng(trial), p.tau)
        L = action.geometric_L(ctx.n)
        for i, j in product((1, 2), repeat=2):
            worst = max(worst, action.equivariance_check(L(i, j, w), p))
        worst = max(worst, action.equivariance_check(action.geo_Delta(w, ctx.n), p))
    return worst


@check("consistency", "consistency.L11_expansion",
       "L11 from the determinant agrees with the orthogonality expansion", TOL_COMPOSED, max_n=4)
def _l11(ctx):
    worst = 0.0
    for trial in range(max(1, min(5, ctx.trials))):
        p = ctx.params(trial)
        w = _w(ctx.rng(trial), p.tau)
        worst = max(worst, action._rel(action.geo_L11(w, ctx.n).matrix(p),
                                       action.geo_L11_expansion(w, ctx.n).matrix(p)))
    return worst


@check("consistency", "consistency.bundle_data",
       "diagonal coefficients carry the derived line-bundle multipliers", TOL_DIRECT, max_n=4)
def _bundles(ctx):
    worst = 0.0
    for trial in range(max(1, ctx.trials // 10)):
        p = ctx.params(trial)
        w = _w(ctx.rng(trial), p.tau)
        empty = SubsetIndex(ctx.n, ())
        worst = max(worst, action.coefficient_multiplier_check(
            action.geo_Delta(w, ctx.n), empty, empty, action.delta_coefficient_form(w, ctx.n), p,
            seed=trial))
        for K in all_subsets(ctx.n):
            worst = max(worst, action.coefficient_multiplier_check(
                action.geo_L22(w, ctx.n), K, K, action.l22_coefficient_form(w, K), p, seed=trial))
    return worst


# Running -------------------------------------------------------------------------


def checks_for(suite: str) -> list[Check]:
    return [c for c in REGISTRY if c.suite == suite]


def _run_check(c: Check, cfg: SuiteConfig) -> CheckRecord:
    seed = stable_seed(cfg.seed, c.name)
    n = max(c.min_n, min(cfg.n, c.max_n))
    ctx = Context(cfg, seed, n)
    tol = c.tolerance if cfg.tol is None else cfg.tol
    name = c.name if n == cfg.n else f"{c.name}[n={n}]"
    try:
        dev = float(c.fn(ctx))
    except SamplingError:
        raise
    except (EllqgError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return CheckRecord(name, c.anchor, None, tol, False, seed, ctx.digest,
                           f"{type(exc).__name__}: {exc}")
    ok = math.isfinite(dev) and dev <= tol
    return CheckRecord(name, c.anchor, dev, tol, ok, seed, ctx.digest)


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    start = time.perf_counter()
    todo = [c for s in cfg.suites() for c in checks_for(s)]
    if cfg.jobs == 1:
        records = [_run_check(c, cfg) for c in todo]
    else:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(lambda c: _run_check(c, cfg), todo))
    return SuiteReport(cfg.suite, cfg, records, time.perf_counter() - start)


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.3e}"


def emit_report(report: SuiteReport, fmt: str = "json", timing: bool = False) -> str:
    """Serialize a report; without ``timing`` the output depends only on the config."""
    if fmt == "json":
        cfg = report.config
        doc = {
            "schema": SCHEMA,
            "suite": report.suite,
            "config": {"n": cfg.n, "k_max": cfg.k_max, "trials": cfg.trials, "seed": cfg.seed,
                       "tol": cfg.tol, "guard": cfg.guard},
            "passed": report.passed,
            "records": [r.as_dict() for r in report.records],
        }
        if timing:
            doc["wall_time"] = round(report.wall_time, 3)
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "text":
        lines = []
        for r in report.records:
            status = "PASS" if r.passed else "FAIL"
            line = f"{status} {r.name}  dev={_fmt(r.deviation)} tol={r.tolerance:.1e}  ({r.anchor})"
            if r.error:
                line += f"  error: {r.error}"
            lines.append(line)
        summary = f"{'PASS' if report.passed else 'FAIL'} {report.suite}: " \
                  f"{len(report.records) - len(report.failures())}/{len(report.records)} checks"
        if timing:
            summary += f" in {report.wall_time:.1f}s"
        lines.append(summary)
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
