import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from ellqg.combinatorics import SubsetIndex, subsets
from ellqg.envelope import (
    ComponentSection,
    FormBuilder,
    QuadraticFormSpec,
    axiomatic_check,
    gluing_all,
    multiplier_check,
    perturbed_section,
    phi_injectivity,
    phi_round_trip,
    shuffle_multiplier_shift_check,
    shuffle_shift_form,
    shuffle_shift_residual,
    stab,
    sym_argument_multiplier,
    theta_space_form,
    theta_twisting_residual,
    twisting_form,
)
from ellqg.theta import LatticeParams, sample_generic_params


def _symbolic(spec):
    x = sp.Matrix(sp.symbols(spec.names))
    return sp.expand((x.T * sp.Matrix(spec.N.tolist()) * x)[0])


def _syms(names):
    return {m: sp.Symbol(m) for m in names}


@pytest.mark.parametrize("k, n", [(1, 1), (1, 3), (2, 3), (2, 4)])
def test_twisting_form_polynomial(k, n):
    spec = twisting_form(k, n)
    s = _syms(spec.names)
    t = [s[f"t{i}"] for i in range(1, k + 1)]
    u = [s[f"s{j}"] for j in range(1, n - k + 1)]
    want = sum(2 * ti * (s["lam"] + (n - k) * s["y"]) for ti in t)
    want += sum((ti - sj) ** 2 for ti in t for sj in u)
    assert sp.expand(want - _symbolic(spec)) == 0


@pytest.mark.parametrize("k, n", [(0, 2), (1, 2), (2, 3), (3, 4)])
def test_theta_space_form_polynomial(k, n):
    spec = theta_space_form(k, n)
    s = _syms(spec.names)
    t = [s[f"t{i}"] for i in range(1, k + 1)]
    z = [s[f"z{a}"] for a in range(1, n + 1)]
    want = sum(2 * ti * (s["lam"] + (n - k) * s["y"]) for ti in t)
    want += sum((ti - za) ** 2 for ti in t for za in z) + k * (k - 1) * s["y"] ** 2
    assert sp.expand(want - _symbolic(spec)) == 0


def test_shuffle_shift_form_polynomial():
    spec = shuffle_shift_form(1, 2, 2, 3)
    s = _syms(spec.names)
    want = 2 * s["y"] * ((2 - 1) * s["y"] - 2 * (s["z1"] + s["z2"]))
    assert sp.expand(want - _symbolic(spec)) == 0


def test_integer_identities():
    for n in range(1, 5):
        for k in range(n + 1):
            for I in subsets(n, k):
                assert theta_twisting_residual(I) == 0
    for k1, n1, k2, n2 in [(0, 1, 1, 1), (1, 2, 1, 2), (2, 3, 1, 1), (1, 1, 2, 3)]:
        assert shuffle_shift_residual(k1, n1, k2, n2) == 0


def test_form_validation():
    with pytest.raises(ValueError):
        QuadraticFormSpec(("a", "b"), np.array([[1, 2], [0, 1]]))
    with pytest.raises(ValueError):
        QuadraticFormSpec(("a", "a"), np.eye(2, dtype=int))
    with pytest.raises(ValueError):
        FormBuilder(("a", "b")).product(1, {"a": 1}, {"b": 1}).build()


def test_multiplier_check_on_theta_products():
    L = LatticeParams(0.15 + 0.9j)
    th = L.theta
    f = lambda x: th(x[0] - x[1]) * th(x[0] + x[1])
    good = QuadraticFormSpec(("a", "b"), np.diag([2, 2]))
    bad = QuadraticFormSpec(("a", "b"), np.array([[2, 1], [1, 2]]))
    assert multiplier_check(f, good, L.tau) < 1e-10
    assert multiplier_check(f, bad, L.tau) > 1e-3


@settings(max_examples=5)
@given(st.integers(0, 10_000))
def test_axioms(seed):
    p = sample_generic_params(3, k_max=2, seed=seed)
    for I in subsets(3, 1) + subsets(3, 2):
        rep = axiomatic_check(I, p, samples=3, seed=seed)
        assert rep.passed, rep.deviations


def test_declared_form_detects_wrong_multiplier():
    p = sample_generic_params(3, seed=2)
    I = SubsetIndex(3, (2,))
    sec = stab(I, p).section
    K = SubsetIndex(3, (1,))
    f = lambda x: sec(K, p.replace(z=tuple(x[:3]), y=x[3], lam=x[4]))
    form = sec.declared_form[K]
    assert multiplier_check(f, form, p.tau) < 1e-9
    shifted = QuadraticFormSpec(form.names, form.N + np.eye(5, dtype=int) * 2)
    assert multiplier_check(f, shifted, p.tau) > 1e-3


def test_sym_argument_multiplier():
    p = sample_generic_params(3, seed=5)
    for I in subsets(3, 2):
        assert sym_argument_multiplier(I, p) < 1e-9


def test_shuffle_multiplier_shift():
    p = sample_generic_params(2, seed=1)
    for c in [(1, 1, 1, 1), (1, 2, 1, 1), (2, 2, 1, 2)]:
        assert shuffle_multiplier_shift_check(*c, p) < 1e-9


def test_gluing_and_perturbation():
    p = sample_generic_params(3, seed=3)
    sec = stab(SubsetIndex(3, (1, 3)), p).section
    assert gluing_all(sec, p) < 1e-9
    bad = perturbed_section(sec, SubsetIndex(3, (1, 2)), 0.5)
    assert gluing_all(bad, p) > 1e-3


def test_phi():
    p = sample_generic_params(4, k_max=2, seed=6)
    res = phi_round_trip(p, 2)
    assert max(res.values()) < 1e-8
    assert phi_injectivity(4, 2, p) > 1e-6


def test_section_needs_all_components():
    with pytest.raises(ValueError):
        ComponentSection(3, 1, {SubsetIndex(3, (1,)): lambda p: 0.0})
