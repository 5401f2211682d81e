"""Rational frequencies, transfer matrices, discriminants and Chambers' Delta.

Everything downstream (band structure, Lyapunov exponents, Green functions)
is built on the one-step transfer matrix

    T_j(E) = [[E - V(j), -1], [1, 0]],        det T_j = 1,

and the one-period product Phi_q(E) = T_q ... T_1.  The matrices here are
generic over their scalar type: ``complex`` for everyday work,
``fractions.Fraction`` for the exact evaluation path used by the q <= 8
oracles, and :class:`DualComplex` when the energy derivative has to be
carried through the recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

import mpmath
import numpy as np

TWO_PI = 2.0 * math.pi

# Rescale the running transfer product every few steps; one step can grow
# entries by at most |E| + |V| + 2, so 8 steps stay far below overflow.
_RESCALE_EVERY = 8

__all__ = [
    "ReducedRational",
    "OperatorSpec",
    "Mat2",
    "DualComplex",
    "reduce_fraction",
    "potential_eval",
    "potential_array",
    "transfer_matrix",
    "monodromy",
    "monodromy_scaled",
    "discriminant",
    "delta",
    "chambers_residual",
    "discriminant_grid",
    "discriminant_and_derivative_grid",
]


# ---------------------------------------------------------------------------
# rationals


@dataclass(frozen=True)
class ReducedRational:
    """Fraction p/q in lowest terms with q >= 1, exact integer arithmetic."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError(f"denominator must be >= 1, got {self.q}")
        if gcd(abs(self.p), self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not reduced")

    @property
    def value(self) -> float:
        return self.p / self.q

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def reduce_fraction(p: int, q: int) -> ReducedRational:
    """Reduce p/q to lowest terms.  q must be a positive integer."""
    if q == 0:
        raise ValueError("denominator q = 0")
    if q < 0:
        raise ValueError(f"denominator must be positive, got {q}")
    if p == 0:
        return ReducedRational(0, 1)
    g = gcd(abs(p), q)
    return ReducedRational(p // g, q // g)


# ---------------------------------------------------------------------------
# operator specification


@dataclass(frozen=True)
class OperatorSpec:
    """A periodic discrete Schrodinger operator H = Delta + V on l^2(Z).

    Either the almost Mathieu form V(n) = lam * cos(2 pi alpha n + theta)
    with rational alpha = p/q (period q), or an explicit period-``len(values)``
    potential sequence.
    """

    alpha: ReducedRational | None = None
    lam: float | None = None
    theta: float | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def almost_mathieu(
        cls, alpha: ReducedRational, lam: float, theta: float
    ) -> "OperatorSpec":
        return cls(alpha=alpha, lam=float(lam), theta=float(theta))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "OperatorSpec":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("explicit potential needs at least one value")
        return cls(values=vals)

    def __post_init__(self) -> None:
        am = self.alpha is not None
        ex = self.values is not None
        if am == ex:
            raise ValueError("spec must be almost Mathieu or explicit, not both")
        if am and (self.lam is None or self.theta is None):
            raise ValueError("almost Mathieu spec needs lam and theta")

    @property
    def is_almost_mathieu(self) -> bool:
        return self.alpha is not None

    @property
    def period(self) -> int:
        return self.alpha.q if self.alpha is not None else len(self.values)

    @property
    def coupling(self) -> float:
        """lam for the AM form, max |V| for explicit potentials."""
        if self.lam is not None:
            return abs(self.lam)
        return max(abs(v) for v in self.values)


def potential_eval(spec: OperatorSpec, n: int) -> float:
    """V(n); exactly periodic because the phase is reduced mod q in integers."""
    if spec.is_almost_mathieu:
        q = spec.alpha.q
        m = (spec.alpha.p * n) % q
        return spec.lam * math.cos(TWO_PI * m / q + spec.theta)
    return spec.values[n % len(spec.values)]


def potential_array(spec: OperatorSpec, start: int, count: int) -> np.ndarray:
    """V(start), ..., V(start + count - 1) as a float array."""
    n = np.arange(start, start + count, dtype=np.int64)
    if spec.is_almost_mathieu:
        q = spec.alpha.q
        m = (spec.alpha.p * n) % q
        return spec.lam * np.cos(TWO_PI * m / q + spec.theta)
    vals = np.asarray(spec.values, dtype=np.float64)
    return vals[n % len(vals)]


# ---------------------------------------------------------------------------
# dual numbers (forward-mode derivative in E)


@dataclass(frozen=True)
class DualComplex:
    """Value together with its derivative d/dE, propagated exactly."""

    value: complex
    deriv: complex = 0j

    @staticmethod
    def variable(x: complex) -> "DualComplex":
        return DualComplex(x, 1.0 + 0j)

    @staticmethod
    def _lift(x) -> "DualComplex":
        if isinstance(x, DualComplex):
            return x
        return DualComplex(x, 0j)

    def __add__(self, other):
        o = self._lift(other)
        return DualComplex(self.value + o.value, self.deriv + o.deriv)

    __radd__ = __add__

    def __neg__(self):
        return DualComplex(-self.value, -self.deriv)

    def __sub__(self, other):
        o = self._lift(other)
        return DualComplex(self.value - o.value, self.deriv - o.deriv)

    def __rsub__(self, other):
        o = self._lift(other)
        return DualComplex(o.value - self.value, o.deriv - self.deriv)

    def __mul__(self, other):
        o = self._lift(other)
        return DualComplex(
            self.value * o.value, self.deriv * o.value + self.value * o.deriv
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return DualComplex(
            self.value / o.value,
            (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value),
        )

    def __rtruediv__(self, other):
        return self._lift(other).__truediv__(self)


# ---------------------------------------------------------------------------
# 2x2 matrices over an arbitrary scalar


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix; entries may be complex, Fraction or DualComplex."""

    a11: object
    a12: object
    a21: object
    a22: object

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1, 0, 0, 1)

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )

    def apply(self, v):
        return (
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        )

    def trace(self):
        return self.a11 + self.a22

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def scaled(self, factor) -> "Mat2":
        return Mat2(
            self.a11 * factor, self.a12 * factor, self.a21 * factor, self.a22 * factor
        )

    def max_abs(self) -> float:
        def mag(x):
            if isinstance(x, DualComplex):
                return abs(x.value)
            return abs(x)

        return max(mag(self.a11), mag(self.a12), mag(self.a21), mag(self.a22))

    def as_array(self) -> np.ndarray:
        return np.array(
            [[complex(self.a11), complex(self.a12)], [complex(self.a21), complex(self.a22)]]
        )


def _potential_like(spec: OperatorSpec, j: int, E):
    """V(j) coerced to the arithmetic of E (Fraction stays exact)."""
    v = potential_eval(spec, j)
    if isinstance(E, Fraction):
        return Fraction(v)
    return v


def transfer_matrix(spec: OperatorSpec, E, j: int) -> Mat2:
    """One-step transfer matrix [[E - V(j), -1], [1, 0]]."""
    return Mat2(E - _potential_like(spec, j, E), -1, 1, 0)


def monodromy(spec: OperatorSpec, E) -> Mat2:
    """One-period product T_q ... T_1 over the scalar type of E.

    Grows like exp(q * gamma) off the spectrum; for large q at real energies
    use :func:`monodromy_scaled` instead.
    """
    m = Mat2.identity()
    for j in range(1, spec.period + 1):
        m = transfer_matrix(spec, E, j) @ m
    return m


def monodromy_scaled(spec: OperatorSpec, z: complex) -> tuple[Mat2, float]:
    """One-period product as (mantissa matrix, log scale).

    The true monodromy is ``mantissa * exp(log_scale)`` entrywise; rescaling
    along the way keeps the entries representable for any q.
    """
    z = complex(z)
    m = Mat2.identity()
    log_scale = 0.0
    for j in range(1, spec.period + 1):
        m = transfer_matrix(spec, z, j) @ m
        if j % _RESCALE_EVERY == 0:
            s = m.max_abs()
            if s > 0.0:
                m = m.scaled(1.0 / s)
                log_scale += math.log(s)
    s = m.max_abs()
    if s > 0.0:
        m = m.scaled(1.0 / s)
        log_scale += math.log(s)
    return m, log_scale


def discriminant(spec: OperatorSpec, E):
    """D(E) = Tr Phi_q(E), a monic degree-q polynomial in E.

    Accepts complex, Fraction, or DualComplex energies; a DualComplex input
    returns D together with dD/dE.
    """
    return monodromy(spec, E).trace()


def delta(alpha: ReducedRational, lam: float, E):
    """Chambers' Delta: the discriminant evaluated at theta = pi / (2q)."""
    spec = OperatorSpec.almost_mathieu(alpha, lam, math.pi / (2.0 * alpha.q))
    return discriminant(spec, E)


def _mp_trig_table(q: int, dps: int):
    """cos/sin of 2 pi m / q for m = 0..q-1 at the working precision."""
    key = (q, dps)
    table = _MP_TRIG_CACHE.get(key)
    if table is None:
        two_pi = 2 * mpmath.pi
        table = [
            (mpmath.cos(two_pi * m / q), mpmath.sin(two_pi * m / q)) for m in range(q)
        ]
        _MP_TRIG_CACHE[key] = table
    return table


_MP_TRIG_CACHE: dict = {}


def _mp_discriminant(alpha: ReducedRational, lam, theta, E, table):
    """High-precision Tr Phi_q for the almost Mathieu potential."""
    q = alpha.q
    cos_t = mpmath.cos(theta)
    sin_t = mpmath.sin(theta)
    a, b, c, d = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1)
    for j in range(1, q + 1):
        cm, sm = table[(alpha.p * j) % q]
        e = E - lam * (cm * cos_t - sm * sin_t)
        a, b, c, d = e * a - c, e * b - d, a, b
    return a + d


def chambers_residual(
    alpha: ReducedRational, lam: float, E: complex, theta: float
) -> float:
    """| D_theta(E) - Delta(E) + 2 (lam/2)^q cos(q theta) |.

    Zero up to arithmetic error for every reduced p/q: the whole theta
    dependence of the discriminant sits in the cos(q theta) term.  The two
    discriminants are evaluated in extended precision because rounding in the
    transfer product is amplified by ||Phi_q|| ~ exp(q gamma); the returned
    residual then measures the identity rather than float64 noise.
    """
    q = alpha.q
    growth = abs(E) + abs(lam) + 3.0
    dps = 35 + int(q * math.log10(growth)) + 1
    with mpmath.workdps(dps):
        table = _mp_trig_table(q, dps)
        lam_mp = mpmath.mpf(lam)
        theta_mp = mpmath.mpf(theta)
        if isinstance(E, complex) and E.imag != 0.0:
            E_mp = mpmath.mpc(E.real, E.imag)
        else:
            E_mp = mpmath.mpf(complex(E).real)
        d_theta = _mp_discriminant(alpha, lam_mp, theta_mp, E_mp, table)
        d_ref = _mp_discriminant(
            alpha, lam_mp, mpmath.pi / (2 * q), E_mp, table
        )
        resid = abs(
            d_theta - d_ref + 2 * (lam_mp / 2) ** q * mpmath.cos(q * theta_mp)
        )
        return float(resid)


# ---------------------------------------------------------------------------
# vectorized evaluation on energy grids


def _grid_dtype(energies: np.ndarray) -> np.dtype:
    return np.complex128 if np.iscomplexobj(energies) else np.float64


def discriminant_grid(
    spec: OperatorSpec, energies: np.ndarray, return_peak: bool = False
):
    """D at every grid energy, in scaled form (mantissa, log_scale).

    D = mantissa * exp(log_scale) elementwise; log_scale stays finite where
    a direct product would overflow.  With ``return_peak`` the running
    maximum of log_scale comes along too: rounding in the recurrence is
    amplified by the largest intermediate product, so eps * exp(peak) is an
    evaluation-noise estimate for D.
    """
    E = np.asarray(energies)
    dt = _grid_dtype(E)
    E = E.astype(dt)
    q = spec.period
    V = potential_array(spec, 1, q)

    a = np.ones_like(E)
    b = np.zeros_like(E)
    c = np.zeros_like(E)
    d = np.ones_like(E)
    log_scale = np.zeros(E.shape, dtype=np.float64)
    peak = np.zeros(E.shape, dtype=np.float64)

    for j in range(q):
        e = E - V[j]
        a, c = e * a - c, a
        b, d = e * b - d, b
        if (j + 1) % _RESCALE_EVERY == 0 or j == q - 1:
            s = np.maximum(
                np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d))
            )
            s = np.where(s > 0.0, s, 1.0)
            a /= s
            b /= s
            c /= s
            d /= s
            log_scale += np.log(s)
            np.maximum(peak, log_scale, out=peak)
    if return_peak:
        return a + d, log_scale, peak
    return a + d, log_scale


def discriminant_and_derivative_grid(
    spec: OperatorSpec, energies: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D mantissa, D' mantissa, shared log_scale) at every grid energy."""
    E = np.asarray(energies)
    dt = _grid_dtype(E)
    E = E.astype(dt)
    q = spec.period
    V = potential_array(spec, 1, q)

    a = np.ones_like(E)
    b = np.zeros_like(E)
    c = np.zeros_like(E)
    d = np.ones_like(E)
    da = np.zeros_like(E)
    db = np.zeros_like(E)
    dc = np.zeros_like(E)
    dd = np.zeros_like(E)
    log_scale = np.zeros(E.shape, dtype=np.float64)

    for j in range(q):
        e = E - V[j]
        da, dc = a + e * da - dc, da
        db, dd = b + e * db - dd, db
        a, c = e * a - c, a
        b, d = e * b - d, b
        if (j + 1) % _RESCALE_EVERY == 0 or j == q - 1:
            s = np.maximum(
                np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d))
            )
            s = np.where(s > 0.0, s, 1.0)
            for arr in (a, b, c, d, da, db, dc, dd):
                arr /= s
            log_scale += np.log(s)
    return a + d, da + dd, log_scale
