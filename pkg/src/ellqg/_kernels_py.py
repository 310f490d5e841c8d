"""Pure-Python hot kernels.

Reference implementation of the two inner loops that dominate run time:
the truncated theta product and the permutation sum used by the explicit
weight-function formula.  The compiled module ``_ckernels`` mirrors these
signatures exactly; ``ellqg._kernels`` picks one at import.
"""

import cmath
import math

import numpy as np

# A factor 1 - c with |c| below this is exactly 1.0 in double precision.
_NEGLIGIBLE = 2.0 ** -60

_TWO_PI_I = 2j * math.pi


def theta_eval(z, tau, qpow, qabs, norm):
    """Odd theta at one point with lattice reduction.

    ``qpow``/``qabs`` hold q**j and |q**j| for j = 1..order, ``norm`` is
    prod (1 - q**j)**-2.
    """
    z = complex(z)
    s = round(z.imag / tau.imag)
    w = z - s * tau
    r = round(w.real)
    z0 = w - r
    x = cmath.exp(_TWO_PI_I * z0)
    xi = 1.0 / x
    m = max(abs(x), abs(xi))
    prod = 1.0 + 0.0j
    for qj, aj in zip(qpow, qabs):
        if aj * m < _NEGLIGIBLE:
            break
        prod *= (1.0 - qj * x) * (1.0 - qj * xi)
    val = cmath.sin(math.pi * z0) / math.pi * prod * norm
    if r or s:
        sign = -1.0 if (r + s) % 2 else 1.0
        val *= sign * cmath.exp(-1j * math.pi * s * s * tau - _TWO_PI_I * s * z0)
    return val


def theta_many(zs, tau, qpow, qabs, norm):
    zs = np.asarray(zs, dtype=complex)
    out = np.empty(zs.shape, dtype=complex)
    flat_in = zs.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = theta_eval(flat_in[i], tau, qpow, qabs, norm)
    return out


def sym_sum(A, B, perms):
    """Sum over permutations of prod_r A[p[r], r] * prod_{i<j} B[p[i], p[j]].

    Returns the sum and the largest term modulus (the cancellation scale).
    """
    A = np.asarray(A, dtype=complex).tolist()
    B = np.asarray(B, dtype=complex).tolist()
    perms = np.asarray(perms).tolist()
    total = 0j
    biggest = 0.0
    for p in perms:
        k = len(p)
        term = 1.0 + 0.0j
        for r in range(k):
            term *= A[p[r]][r]
        for i in range(k):
            row = B[p[i]]
            for j in range(i + 1, k):
                term *= row[p[j]]
        total += term
        if abs(term) > biggest:
            biggest = abs(term)
    return total, biggest
