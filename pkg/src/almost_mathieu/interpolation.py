"""Interpolation between rational frequencies at critical coupling.

To compare a fine rational p~/q~ with a coarse one p/q, the intermediate
operator follows the fine potential on an initial window of l0 whole
coarse periods and then freezes the accumulated phase:

    V~(n) = 2 cos(2 pi (p/q) n + theta_n),   theta_n = 2 pi (p~/q~ - p/q) n

for n < l0 q, with theta held at theta_{l0 q} afterwards.  Below the freeze
site V~ is exactly the fine potential.  The machinery here builds that
operator, checks that the phase window keeps the energy uniformly
hyperbolic (D_theta < -2 - 3 delta / 4 through Chambers' formula), forms
the inverse transfer blocks whose traces certify a per-block exponent
floor, and compares the two half-line Green functions by dense truncated
resolvent solves.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .core import Mat2, ReducedRational, delta as chambers_delta

__all__ = [
    "IntermediatePotential",
    "WindowReport",
    "TraceMarginReport",
    "ComparisonReport",
    "TruncationError",
    "build_intermediate",
    "window_check",
    "inverse_blocks",
    "trace_margin_check",
    "green_comparison",
    "truncated_green_row",
]

TAIL_TOL = 1e-12


class TruncationError(RuntimeError):
    def __init__(self, achieved: float):
        super().__init__(
            f"truncated resolvent tail {achieved:.3e} exceeds {TAIL_TOL:.0e}"
        )
        self.achieved_tail = achieved


@dataclass(frozen=True)
class IntermediatePotential:
    """The two-scale potential: fine rational up to l0 q, frozen phase after."""

    base: ReducedRational
    fine: ReducedRational
    delta: float
    l0: int
    ctilde: float
    gate_eta: float
    gate_ok: bool

    @property
    def freeze_site(self) -> int:
        return self.l0 * self.base.q

    def drift(self) -> Fraction:
        return self.fine.as_fraction() - self.base.as_fraction()

    def theta(self, n: int) -> float:
        """theta_n = 2 pi (p~/q~ - p/q) n, frozen at the freeze site."""
        n_eff = min(n, self.freeze_site)
        d = self.drift()
        frac = (d.numerator * n_eff) % d.denominator if d != 0 else 0
        den = d.denominator if d != 0 else 1
        return 2.0 * math.pi * frac / den

    def potential(self, n: int) -> float:
        q = self.base.q
        if n < self.freeze_site:
            qf = self.fine.q
            return 2.0 * math.cos(2.0 * math.pi * ((self.fine.p * n) % qf) / qf)
        return 2.0 * math.cos(
            2.0 * math.pi * ((self.base.p * n) % q) / q + self.theta(n)
        )

    def potential_array(self, start: int, count: int) -> np.ndarray:
        n = np.arange(start, start + count, dtype=np.int64)
        q = self.base.q
        qf = self.fine.q
        fine_phase = 2.0 * math.pi * ((self.fine.p * n) % qf) / qf
        frozen = 2.0 * math.pi * ((self.base.p * n) % q) / q + self.theta(
            self.freeze_site
        )
        return np.where(
            n < self.freeze_site, 2.0 * np.cos(fine_phase), 2.0 * np.cos(frozen)
        )


@dataclass(frozen=True)
class WindowReport:
    ok: bool
    worst_margin: float
    worst_j: int
    threshold: float


@dataclass(frozen=True)
class TraceMarginReport:
    margins: tuple[float, ...]
    gammas: tuple[float, ...]
    gamma_floor: float
    trace_ok: bool
    gamma_ok: bool

    @property
    def ok(self) -> bool:
        return self.trace_ok and self.gamma_ok


@dataclass(frozen=True)
class ComparisonReport:
    epsilon: float
    lhs_i: float
    rhs_i: float
    lhs_ii: float
    rhs_ii: float
    final_lhs: float
    final_rhs: float
    fitted_cprime: float
    window_ok: bool
    trace_ok: bool

    @property
    def step_i_ok(self) -> bool:
        return self.lhs_i <= self.rhs_i * (1.0 + 1e-12)

    @property
    def final_ok(self) -> bool:
        return self.final_lhs <= self.final_rhs * (1.0 + 1e-12)


def build_intermediate(
    pq: ReducedRational,
    ptqt: ReducedRational,
    delta: float,
    ctilde: float = 0.5,
    gate_constant: float = 50.0,
) -> IntermediatePotential:
    """Window length l0 = floor(ctilde q~ sqrt(delta) / q), with guards.

    The closeness gate |p~/q~ - p/q| <= gate_constant^{-q} delta^2 is
    recorded, not enforced: coarse approximants are flagged and still
    computable.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    l0 = int(math.floor(ctilde * ptqt.q * math.sqrt(delta) / pq.q))
    if l0 < 1:
        raise ValueError(f"approximant too coarse: l0 = {l0} < 1")
    if l0 > ptqt.q:
        raise ValueError(f"window too long: l0 = {l0} > {ptqt.q}")
    eta = Fraction(gate_constant) ** (-pq.q) * Fraction(delta) ** 2
    gap = abs(ptqt.as_fraction() - pq.as_fraction())
    return IntermediatePotential(
        base=pq,
        fine=ptqt,
        delta=float(delta),
        l0=l0,
        ctilde=float(ctilde),
        gate_eta=float(eta),
        gate_ok=gap <= eta,
    )


def window_check(ip: IntermediatePotential, E: float) -> WindowReport:
    """D_{p/q, 2, theta_j}(E) < -2 - 3 delta / 4 for all 0 <= j <= l0 q.

    At critical coupling Chambers' formula collapses the check to a single
    Delta evaluation: D_theta = Delta - 2 cos(q theta).
    """
    q = ip.base.q
    thr = -2.0 - 0.75 * ip.delta
    dval = complex(chambers_delta(ip.base, 2.0, complex(E))).real
    d = ip.drift()
    n_j = np.arange(0, ip.freeze_site + 1, dtype=np.int64)
    if d != 0:
        frac = (d.numerator * n_j) % d.denominator
        thetas = 2.0 * math.pi * frac.astype(np.float64) / d.denominator
    else:
        thetas = np.zeros(len(n_j))
    d_theta = dval - 2.0 * np.cos(q * thetas)
    margins = thr - d_theta
    worst = int(np.argmin(margins))
    return WindowReport(
        ok=bool(np.all(margins > 0.0)),
        worst_margin=float(margins[worst]),
        worst_j=int(n_j[worst]),
        threshold=thr,
    )


def inverse_blocks(ip: IntermediatePotential, E: float, epsilon: float) -> list[Mat2]:
    """The l0 inverse one-period transfer blocks at E + i epsilon.

    Each block is Q^{-1}_{jq+1} ... Q^{-1}_{(j+1)q} with
    Q^{-1}_n = [[0, 1], [-1, E + i eps - V~(n)]]; det = 1 structurally.
    """
    z = complex(E, epsilon)
    q = ip.base.q
    blocks = []
    for j in range(ip.l0):
        m = None
        for k in range(1, q + 1):
            n = j * q + k
            qinv = Mat2(0.0, 1.0, -1.0, z - ip.potential(n))
            m = qinv if m is None else m @ qinv
        blocks.append(m)
    return blocks


def trace_margin_check(
    ip: IntermediatePotential, E: float, epsilon: float
) -> TraceMarginReport:
    """|Tr T_j^{-1}| > 2 + delta/2 per block, and the exponent floor.

    A trace margin implies per-block eigenvalues e^{+-(gamma_j + i zeta_j)}
    with gamma_j > arccosh(1 + delta/4) >= c sqrt(delta).
    """
    blocks = inverse_blocks(ip, E, epsilon)
    margins = []
    gammas = []
    for b in blocks:
        tr = complex(b.trace())
        margins.append(abs(tr) - (2.0 + ip.delta / 2.0))
        s = cmath.sqrt(tr * tr - 4.0)
        if abs(tr + s) < abs(tr - s):
            s = -s
        lam_big = (tr + s) / 2.0
        gammas.append(math.log(max(abs(lam_big), 1.0)))
    floor = math.acosh(1.0 + ip.delta / 4.0)
    return TraceMarginReport(
        margins=tuple(margins),
        gammas=tuple(gammas),
        gamma_floor=floor,
        trace_ok=all(m > 0.0 for m in margins),
        gamma_ok=all(g > floor for g in gammas),
    )


def truncated_green_row(
    potential: np.ndarray, z: complex, n_sites: int
) -> np.ndarray:
    """Row G(1, .) of the half-line resolvent, dense banded solve.

    potential[i] is V(i+1); raises TruncationError unless the solution has
    decayed below TAIL_TOL at the boundary.
    """
    ab = np.zeros((3, n_sites), dtype=np.complex128)
    ab[0, 1:] = 1.0
    ab[1, :] = potential[:n_sites] - z
    ab[2, :-1] = 1.0
    rhs = np.zeros(n_sites, dtype=np.complex128)
    rhs[0] = 1.0
    x = scipy.linalg.solve_banded((1, 1), ab, rhs)
    tail = float(max(abs(x[-1]), abs(x[-2])))
    if tail > TAIL_TOL:
        raise TruncationError(tail)
    return x


def green_comparison(
    ip: IntermediatePotential, E: float, epsilon: float
) -> ComparisonReport:
    """Two-step Green comparison between fine and intermediate operators.

    Step (i): |G(1, q q~)| <= (5 / eps^3) |G~(1, l0 q)|.  Step (ii) is
    reported through the fitted decay constant c' solving
    |G~(1, l0 q)| = (4 / eps) exp(-c' delta q~ / q), and the combined bound
    |G(1, q q~)| <= (20 / eps^4) exp(-c' delta q~ / q) with that same c'.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    z = complex(E, epsilon)
    q, qt = ip.base.q, ip.fine.q
    n_sites = 4 * q * qt + int(math.ceil(50.0 / epsilon))

    qf = ip.fine.q
    n = np.arange(1, n_sites + 1, dtype=np.int64)
    v_fine = 2.0 * np.cos(2.0 * math.pi * ((ip.fine.p * n) % qf) / qf)
    v_mid = ip.potential_array(1, n_sites)

    g_fine = truncated_green_row(v_fine, z, n_sites)
    g_mid = truncated_green_row(v_mid, z, n_sites)

    lhs_i = float(abs(g_fine[q * qt - 1]))
    g_tilde = float(abs(g_mid[ip.freeze_site - 1]))
    rhs_i = 5.0 / epsilon**3 * g_tilde

    cprime = -math.log(epsilon * g_tilde / 4.0) * q / (ip.delta * qt)
    decay = math.exp(-cprime * ip.delta * qt / q)
    rhs_ii = 4.0 / epsilon * decay
    final_rhs = 20.0 / epsilon**4 * decay

    win = window_check(ip, E)
    tr = trace_margin_check(ip, E, epsilon)

    return ComparisonReport(
        epsilon=float(epsilon),
        lhs_i=lhs_i,
        rhs_i=rhs_i,
        lhs_ii=g_tilde,
        rhs_ii=rhs_ii,
        final_lhs=lhs_i,
        final_rhs=final_rhs,
        fitted_cprime=cprime,
        window_ok=win.ok,
        trace_ok=tr.ok,
    )
