"""Independent reference computations used only by the test suite.

Each oracle takes a route that shares nothing with the library path it
checks: exact Fraction arithmetic, hand-derived closed forms for small
periods, dense truncated resolvent solves, finite differences, and
eigenvalue-based band edges.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import scipy.linalg

from almost_mathieu.core import OperatorSpec, potential_array, potential_eval


def exact_discriminant(spec: OperatorSpec, E: Fraction) -> Fraction:
    """Tr(T_q ... T_1) over Fractions; potential samples rationalized exactly.

    Exact in E: the float potential values are binary rationals, so the
    whole product is computed without rounding.
    """
    a, b, c, d = Fraction(1), Fraction(0), Fraction(0), Fraction(1)
    for j in range(1, spec.period + 1):
        e = E - Fraction(potential_eval(spec, j))
        a, b, c, d = e * a - c, e * b - d, a, b
    return a + d


def symbolic_discriminant_q2(v1: float, v2: float, E: complex) -> complex:
    """Hand product for period 2: D = (E - v1)(E - v2) - 2."""
    return (E - v1) * (E - v2) - 2.0


def symbolic_discriminant_q3(v1: float, v2: float, v3: float, E: complex) -> complex:
    """Hand product for period 3: D = prod(E - vi) - sum(E - vi)."""
    e1, e2, e3 = E - v1, E - v2, E - v3
    return e1 * e2 * e3 - e1 - e2 - e3


def central_difference(f, x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def eig_band_edges(spec: OperatorSpec) -> np.ndarray:
    """All 2q band edges of the spectrum {|D| <= 2}, via eigenvalues.

    D(E) = 2 exactly at eigenvalues of the q x q periodic restriction and
    D(E) = -2 at those of the antiperiodic one; touching bands come out as
    coincident eigenvalues with no special handling.
    """
    q = spec.period
    V = potential_array(spec, 1, q)
    if q == 1:
        return np.sort(np.array([V[0] - 2.0, V[0] + 2.0]))
    edges = []
    for corner in (1.0, -1.0):
        H = np.diag(V.astype(np.float64))
        for i in range(q - 1):
            H[i, i + 1] = 1.0
            H[i + 1, i] = 1.0
        if q == 2:
            H[0, 1] += corner
            H[1, 0] += corner
        else:
            H[0, q - 1] += corner
            H[q - 1, 0] += corner
        edges.append(scipy.linalg.eigvalsh(H))
    return np.sort(np.concatenate(edges))


def truncated_halfline_green(
    potential: np.ndarray, z: complex, sources: list[int], n_sites: int
) -> np.ndarray:
    """Dense tridiagonal solve of (H - z) x = delta_source on sites 1..n_sites.

    ``potential[i]`` is V(i + 1).  Returns one column of the truncated
    resolvent per source index (1-based), shape (n_sites, len(sources)).
    """
    if len(potential) < n_sites:
        raise ValueError("potential array shorter than truncation size")
    ab = np.zeros((3, n_sites), dtype=np.complex128)
    ab[0, 1:] = 1.0
    ab[1, :] = potential[:n_sites] - z
    ab[2, :-1] = 1.0
    rhs = np.zeros((n_sites, len(sources)), dtype=np.complex128)
    for col, s in enumerate(sources):
        rhs[s - 1, col] = 1.0
    return scipy.linalg.solve_banded((1, 1), ab, rhs)


def am_potential_range(alpha_p: int, alpha_q: int, lam: float, theta: float, n_sites: int) -> np.ndarray:
    """V(1..n_sites) for the almost Mathieu potential, phase reduced exactly."""
    n = np.arange(1, n_sites + 1, dtype=np.int64)
    m = (alpha_p * n) % alpha_q
    return lam * np.cos(2.0 * math.pi * m / alpha_q + theta)


def mp_edge_offset(spec: OperatorSpec, E: float, target: float, dps: int = 40) -> float:
    """Distance from E to the true solution of D = target, in exact-ish terms.

    Evaluates D and D' at 40 digits and returns |D(E) - target| / |D'(E)|,
    a first-order bound on the edge placement error that is immune to the
    float64 evaluation noise of the discriminant.
    """
    import mpmath

    with mpmath.workdps(dps):
        h = mpmath.mpf(2) ** -60
        def d_of(x):
            a, b, c, d = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1)
            for j in range(1, spec.period + 1):
                e = x - mpmath.mpf(potential_eval(spec, j))
                a, b, c, d = e * a - c, e * b - d, a, b
            return a + d

        x0 = mpmath.mpf(E)
        val = d_of(x0) - mpmath.mpf(target)
        deriv = (d_of(x0 + h) - d_of(x0 - h)) / (2 * h)
        return float(abs(val) / abs(deriv))


def brute_force_zeros(f, lo: float, hi: float, n_grid: int = 20000) -> list[float]:
    """All sign-change roots of a scalar callable on [lo, hi], by bisection."""
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([f(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            a, b = xs[i], xs[i + 1]
            fa = vals[i]
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = f(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a = mid
                    fa = fm
            roots.append(0.5 * (a + b))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots
