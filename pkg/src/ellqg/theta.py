"""Odd Jacobi theta function, its quasi-periods, and generic parameter sampling.

theta(z) = sin(pi z)/pi * prod_j (1 - q^j e^{2 pi i z})(1 - q^j e^{-2 pi i z}) / (1 - q^j)^2

with q = exp(2 pi i tau).  It is odd, has derivative 1 at the origin, and
satisfies theta(z+1) = -theta(z), theta(z+tau) = -exp(-pi i tau - 2 pi i z) theta(z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import PoleProximityError, SamplingError


@dataclass(frozen=True)
class LatticeParams:
    """The lattice Z + tau Z together with the product truncation."""

    tau: complex
    truncation_order: int = 40
    _qpow: np.ndarray = field(init=False, repr=False, compare=False)
    _qabs: np.ndarray = field(init=False, repr=False, compare=False)
    _norm: complex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tau = complex(self.tau)
        if not cmath.isfinite(tau) or tau.imag <= 0:
            raise ValueError(f"Im tau must be positive, got tau={self.tau!r}")
        if int(self.truncation_order) < 1:
            raise ValueError("truncation_order must be >= 1")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "truncation_order", int(self.truncation_order))
        q = cmath.exp(2j * math.pi * tau)
        qpow = q ** np.arange(1, self.truncation_order + 1)
        object.__setattr__(self, "_qpow", np.ascontiguousarray(qpow, dtype=complex))
        object.__setattr__(self, "_qabs", np.ascontiguousarray(np.abs(qpow)))
        object.__setattr__(self, "_norm", complex(np.prod((1.0 - qpow) ** -2)))

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    def theta(self, z):
        """Theta at a scalar (returns complex) or an array (returns ndarray)."""
        if np.ndim(z) == 0:
            z = complex(z)
            if not cmath.isfinite(z):
                raise ValueError(f"theta argument must be finite, got {z!r}")
            return _kernels.theta_eval(z, self.tau, self._qpow, self._qabs, self._norm)
        arr = np.asarray(z, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise ValueError("theta arguments must be finite")
        return _kernels.theta_many(arr, self.tau, self._qpow, self._qabs, self._norm)

    def with_order(self, order: int) -> "LatticeParams":
        return LatticeParams(self.tau, order)


@dataclass(frozen=True)
class EllipticParams:
    """Evaluation context: lattice, deformation y, dynamical lambda, points z."""

    lattice: LatticeParams
    y: complex
    lam: complex
    z: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "y", complex(self.y))
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "z", tuple(complex(v) for v in self.z))

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def tau(self) -> complex:
        return self.lattice.tau

    def theta(self, x):
        return self.lattice.theta(x)

    def replace(self, **changes) -> "EllipticParams":
        return replace(self, **changes)

    def digest(self) -> str:
        """Short stable text fingerprint, for reports."""
        parts = [self.tau, self.y, self.lam, *self.z]
        return ";".join(f"{c.real:.12g}{c.imag:+.12g}j" for c in parts)


def theta(z, lattice: LatticeParams):
    return lattice.theta(z)


def theta_derivative_at_zero(lattice: LatticeParams, step: float = 1e-5) -> complex:
    """Central difference (theta(h) - theta(-h)) / 2h; equals 1 up to O(h^2)."""
    return (lattice.theta(step) - lattice.theta(-step)) / (2.0 * step)


def quasi_period_multiplier(z, r: int, s: int, lattice: LatticeParams) -> complex:
    """Exact factor M with theta(z + r + s tau) = M theta(z)."""
    z = complex(z)
    sign = -1.0 if (r + s) % 2 else 1.0
    if s == 0:
        return complex(sign)
    tau = lattice.tau
    return sign * cmath.exp(-1j * math.pi * s * s * tau - 2j * math.pi * s * z)


def _in_cell(rng: np.random.Generator, tau: complex) -> complex:
    """Uniform point of the cell centred at 0, which keeps |theta| moderate."""
    u, v = rng.random(2) - 0.5
    return complex(u + v * tau)


def check_guard(params: EllipticParams, guard: float, lam_range: int | None = None) -> bool:
    """True when every resonance combination clears the guard."""
    n = params.n
    th = params.lattice.theta
    y = params.y
    if abs(th(y)) <= guard:
        return False
    jmax = 2 * n if lam_range is None else lam_range
    for j in range(-jmax, jmax + 1):
        if abs(th(params.lam - j * y)) <= guard:
            return False
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            for s in range(-n, n + 1):
                if abs(th(params.z[a] - params.z[b] - s * y)) <= guard:
                    return False
    return True


def sample_generic_params(
    n: int,
    k_max: int | None = None,
    seed: int = 0,
    guard: float = 1e-3,
    truncation_order: int = 40,
    max_attempts: int = 1000,
) -> EllipticParams:
    """Seeded draw of (tau, y, lambda, z_1..z_n) away from all resonances.

    Im tau is uniform in [0.5, 2] and Re tau in [-0.5, 0.5]; the other
    parameters are uniform in the cell spanned by 1 and tau, centred at 0.  The
    lambda-resonance range is |j| <= 2n, widened to n + k_max + 1 when that
    is larger.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if guard <= 0:
        raise ValueError("guard must be positive")
    lam_range = 2 * n
    if k_max is not None:
        lam_range = max(lam_range, n + int(k_max) + 1)
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
        lattice = LatticeParams(tau, truncation_order)
        y = _in_cell(rng, tau)
        lam = _in_cell(rng, tau)
        z = tuple(_in_cell(rng, tau) for _ in range(n))
        params = EllipticParams(lattice, y, lam, z)
        if check_guard(params, guard, lam_range):
            return params
    raise SamplingError(
        f"no generic parameters found in {max_attempts} attempts (guard={guard})"
    )


def require_nonzero(value: complex, guard: float, what: str) -> complex:
    """Raise when a denominator is within the guard of zero."""
    if abs(value) < guard:
        raise PoleProximityError(f"|{what}| = {abs(value):.3e} below guard {guard:g}")
    return value


def as_points(values: Sequence) -> np.ndarray:
    return np.asarray(values, dtype=complex)
