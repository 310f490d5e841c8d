import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ellqg import _kernels, _kernels_py
from ellqg.combinatorics import permutation_table
from ellqg.theta import LatticeParams

ckernels = pytest.importorskip("ellqg._ckernels")

taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.4, 2.0))
coords = st.floats(-3, 3)


def test_compiled_backend_selected():
    if os.environ.get("ELLQG_PURE_PYTHON") != "1":
        assert _kernels.BACKEND == "cython"


def test_pure_python_switch():
    env = dict(os.environ, ELLQG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import ellqg; print(ellqg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(taus, coords, coords)
def test_theta_parity(tau, u, v):
    L = LatticeParams(tau)
    z = u + v * L.tau
    args = (L.tau, L._qpow, L._qabs, L._norm)
    a = _kernels_py.theta_eval(z, *args)
    b = ckernels.theta_eval(z, *args)
    assert abs(a - b) <= 1e-13 * max(abs(a), 1e-300)


def test_theta_many_parity():
    rng = np.random.default_rng(0)
    L = LatticeParams(-0.2 + 0.7j)
    zs = rng.uniform(-2, 2, (4, 5)) + 1j * rng.uniform(-1, 1, (4, 5))
    args = (L.tau, L._qpow, L._qabs, L._norm)
    a = _kernels_py.theta_many(zs, *args)
    b = ckernels.theta_many(zs, *args)
    assert a.shape == b.shape == (4, 5)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@pytest.mark.parametrize("k", [0, 1, 2, 4, 6])
def test_sym_sum_parity(k):
    rng = np.random.default_rng(k)
    A = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    B = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    s1, m1 = _kernels_py.sym_sum(A, B, permutation_table(k))
    s2, m2 = ckernels.sym_sum(A, B, permutation_table(k))
    assert abs(s1 - s2) <= 1e-12 * max(m1, 1.0)
    assert m1 == pytest.approx(m2, rel=1e-13)


def test_sym_sum_is_permanent_when_b_is_one():
    # with B = 1 the sum is the permanent of A
    A = np.array([[1, 2, 3], [4, 5, 6], [7, 8, 10]], dtype=complex)
    B = np.ones((3, 3), dtype=complex)
    total, _ = _kernels.sym_sum(A, B, permutation_table(3))
    assert total == pytest.approx(1 * 5 * 10 + 1 * 6 * 8 + 2 * 4 * 10 + 2 * 6 * 7 + 3 * 4 * 8 + 3 * 5 * 7)
