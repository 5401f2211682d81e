"""Growth certificates for products of hyperbolic SL2(C) matrices.

Given factors T_n with eigenvalues e^{+-(gamma_n + i zeta_n)}, gamma_n > 0,
and unit eigenvectors phi_n^+-, the product Phi_N = T_N ... T_1 applied to
phi_1^+ grows like exp(sum gamma_n) provided the eigenvectors drift slowly:

    4 max(|phi_n^+ - phi_{n+1}^+|, |phi_n^- - phi_{n+1}^-|) / |det U_{n+1}|
        < beta gamma_n e^{-gamma_n},

in which case

    (1-beta) e^{(1-beta) sum gamma}  <=  |Phi_N phi_1^+|
                                     <=  (1+beta) e^{(1+beta) sum gamma}.

The certificate tracks Phi_{n-1} phi_1^+ = A_n phi_n^+ + B_n phi_n^- and
checks |B_n| <= beta |A_n| inductively at every step, recording the whole
track.  Coefficients are kept in rescaled form (value times exp(scale_log))
so certificates survive sum gamma far beyond float range.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import Mat2

__all__ = [
    "HyperbolicFactor",
    "ProductCertificate",
    "NonHyperbolicError",
    "eigensystem_2x2",
    "align_phases",
    "hypothesis_margins",
    "product_growth",
    "random_drift_chain",
]

_DET_TOL = 1e-10
_UNIT_TOL = 1e-10


class NonHyperbolicError(ValueError):
    """Factor with (numerically) unimodular eigenvalues."""


@dataclass(frozen=True)
class HyperbolicFactor:
    """One SL2 factor with its eigen-data; columns of U are phi^+, phi^-."""

    T: Mat2
    gamma: float
    zeta: float
    phi_plus: tuple[complex, complex]
    phi_minus: tuple[complex, complex]

    @property
    def U(self) -> Mat2:
        return Mat2(self.phi_plus[0], self.phi_minus[0], self.phi_plus[1], self.phi_minus[1])

    def det_u(self) -> complex:
        return self.phi_plus[0] * self.phi_minus[1] - self.phi_minus[0] * self.phi_plus[1]

    def with_phases(self, phase_plus: complex, phase_minus: complex) -> "HyperbolicFactor":
        return HyperbolicFactor(
            self.T,
            self.gamma,
            self.zeta,
            (self.phi_plus[0] * phase_plus, self.phi_plus[1] * phase_plus),
            (self.phi_minus[0] * phase_minus, self.phi_minus[1] * phase_minus),
        )


@dataclass(frozen=True)
class ProductCertificate:
    """Coefficient track and growth verdict for one factor chain.

    A[n], B[n] are the rescaled coefficients of Phi_{n-1} phi_1^+ in the
    basis (phi_n^+, phi_n^-); true values are A[n] * exp(scale_log[n]).
    All norms and bounds are carried as logarithms.
    """

    beta: float
    gammas: tuple[float, ...]
    A: tuple[complex, ...]
    B: tuple[complex, ...]
    scale_log: tuple[float, ...]
    hypothesis_margins: tuple[float, ...]
    norm_final_log: float
    lower_log: float
    upper_log: float
    induction_ok: bool
    lower_chain_ok: bool
    verdict: str
    fail_location: int | None

    @property
    def sum_gamma(self) -> float:
        return float(sum(self.gammas))

    @property
    def norm_final(self) -> float:
        try:
            return math.exp(self.norm_final_log)
        except OverflowError:
            return math.inf

    @property
    def lower(self) -> float:
        try:
            return math.exp(self.lower_log)
        except OverflowError:
            return math.inf

    @property
    def upper(self) -> float:
        try:
            return math.exp(self.upper_log)
        except OverflowError:
            return math.inf

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _canonical_phase(v: tuple[complex, complex]) -> tuple[complex, complex]:
    lead = v[0] if abs(v[0]) > 1e-12 else v[1]
    ph = abs(lead) / lead
    return (v[0] * ph, v[1] * ph)


def eigensystem_2x2(T: Mat2) -> HyperbolicFactor:
    """Eigen-decomposition of a det-1 matrix with |eigenvalues| != 1.

    Eigenvalues come out as e^{+-(gamma + i zeta)} with gamma > 0; both
    eigenvectors are normalized and phase-fixed so their leading component
    is real positive.
    """
    det = T.det()
    if abs(det - 1.0) > _DET_TOL:
        raise ValueError(f"determinant {det} is not 1 within {_DET_TOL}")
    tr = complex(T.trace())
    s = cmath.sqrt(tr * tr - 4.0)
    if abs(tr + s) < abs(tr - s):
        s = -s
    lam_big = (tr + s) / 2.0
    if abs(abs(lam_big) - 1.0) <= _UNIT_TOL:
        raise NonHyperbolicError(
            f"non-hyperbolic factor: |eigenvalue| = {abs(lam_big)}"
        )
    lam_small = 1.0 / lam_big
    gamma = math.log(abs(lam_big))
    zeta = cmath.phase(lam_big)

    def eigvec(lam: complex) -> tuple[complex, complex]:
        c1 = (complex(T.a12), lam - complex(T.a11))
        c2 = (lam - complex(T.a22), complex(T.a21))
        v = c1 if abs(c1[0]) + abs(c1[1]) >= abs(c2[0]) + abs(c2[1]) else c2
        n = math.hypot(abs(v[0]), abs(v[1]))
        if n == 0.0:
            raise NonHyperbolicError("defective eigenvector")
        return _canonical_phase((v[0] / n, v[1] / n))

    return HyperbolicFactor(T, gamma, zeta, eigvec(lam_big), eigvec(lam_small))


def _solve_u(f: HyperbolicFactor, rhs: tuple[complex, complex]) -> tuple[complex, complex]:
    """Coefficients (a, b) with rhs = a phi^+ + b phi^-."""
    d = f.det_u()
    a = (f.phi_minus[1] * rhs[0] - f.phi_minus[0] * rhs[1]) / d
    b = (-f.phi_plus[1] * rhs[0] + f.phi_plus[0] * rhs[1]) / d
    return a, b


def align_phases(factors: list[HyperbolicFactor]) -> list[HyperbolicFactor]:
    """Re-phase eigenvectors, last to first, so that in

        phi_j^+- = a_j^+- phi_{j+1}^+- + b_j^+- phi_{j+1}^-+

    the diagonal coefficients a_j^+- are real and nonnegative."""
    if not factors:
        raise ValueError("empty factor list")
    out = list(factors)
    for j in range(len(out) - 2, -1, -1):
        nxt = out[j + 1]
        a_plus, _ = _solve_u(nxt, out[j].phi_plus)
        _, a_minus = _solve_u(nxt, out[j].phi_minus)
        ph_p = abs(a_plus) / a_plus if abs(a_plus) > 0.0 else 1.0
        ph_m = abs(a_minus) / a_minus if abs(a_minus) > 0.0 else 1.0
        out[j] = out[j].with_phases(ph_p, ph_m)
    return out


def hypothesis_margins(factors: list[HyperbolicFactor], beta: float) -> list[float]:
    """margin_n = beta gamma_n e^{-gamma_n} - 4 max drift / |det U_{n+1}|.

    The chain is extended by T_{N+1} = T_N, so the last margin carries zero
    drift.  All margins positive means the growth sandwich is guaranteed.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    margins = []
    n_fact = len(factors)
    for n in range(n_fact):
        cur = factors[n]
        nxt = factors[n + 1] if n + 1 < n_fact else factors[n]
        drift_p = math.hypot(
            abs(cur.phi_plus[0] - nxt.phi_plus[0]), abs(cur.phi_plus[1] - nxt.phi_plus[1])
        )
        drift_m = math.hypot(
            abs(cur.phi_minus[0] - nxt.phi_minus[0]),
            abs(cur.phi_minus[1] - nxt.phi_minus[1]),
        )
        margins.append(
            beta * cur.gamma * math.exp(-cur.gamma)
            - 4.0 * max(drift_p, drift_m) / abs(nxt.det_u())
        )
    return margins


def product_growth(factors: list[HyperbolicFactor], beta: float) -> ProductCertificate:
    """Run the coefficient recurrence and certify the growth sandwich.

    The coefficient step solves U_{n+1} (A_{n+1}, B_{n+1}) = U_n Lambda_n
    (A_n, B_n) with rescaling, then checks |B_n| <= beta |A_n| at every n
    and the final (1 -+ beta) exponential bounds.  A violated hypothesis
    still runs the recurrence but the verdict reports the first bad index.
    """
    margins = hypothesis_margins(factors, beta)
    n_fact = len(factors)
    hyp_bad = next((i + 1 for i, mg in enumerate(margins) if mg <= 0.0), None)

    A = [1.0 + 0j]
    B = [0j]
    scale_log = [0.0]
    induction_ok = abs(B[0]) <= beta * abs(A[0])
    ind_bad = None
    a, b, s_log = A[0], B[0], 0.0
    for n in range(n_fact):
        cur = factors[n]
        nxt = factors[n + 1] if n + 1 < n_fact else factors[n]
        lam = cmath.exp(complex(cur.gamma, cur.zeta))
        wa = a * lam
        wb = b / lam
        rhs = (
            wa * cur.phi_plus[0] + wb * cur.phi_minus[0],
            wa * cur.phi_plus[1] + wb * cur.phi_minus[1],
        )
        a, b = _solve_u(nxt, rhs)
        m = max(abs(a), abs(b))
        if m > 0.0:
            a /= m
            b /= m
            s_log += math.log(m)
        A.append(a)
        B.append(b)
        scale_log.append(s_log)
        if abs(b) > beta * abs(a) and ind_bad is None:
            ind_bad = n + 1
    induction_ok = ind_bad is None

    last = factors[-1]
    final_vec = (
        A[-1] * last.phi_plus[0] + B[-1] * last.phi_minus[0],
        A[-1] * last.phi_plus[1] + B[-1] * last.phi_minus[1],
    )
    norm_final_log = scale_log[-1] + math.log(
        math.hypot(abs(final_vec[0]), abs(final_vec[1]))
    )
    sum_gamma = sum(f.gamma for f in factors)
    lower_log = math.log1p(-beta) + (1.0 - beta) * sum_gamma
    upper_log = math.log1p(beta) + (1.0 + beta) * sum_gamma

    log_a_final = scale_log[-1] + math.log(max(abs(A[-1]), 1e-300))
    lower_chain_ok = log_a_final >= (1.0 - beta) * sum_gamma - 1e-9

    sandwich_ok = lower_log - 1e-9 <= norm_final_log <= upper_log + 1e-9
    if hyp_bad is not None:
        verdict, loc = "fail", hyp_bad
    elif not induction_ok:
        verdict, loc = "fail", ind_bad
    elif not sandwich_ok:
        verdict, loc = "fail", n_fact
    else:
        verdict, loc = "pass", None

    return ProductCertificate(
        beta=beta,
        gammas=tuple(f.gamma for f in factors),
        A=tuple(A),
        B=tuple(B),
        scale_log=tuple(scale_log),
        hypothesis_margins=tuple(margins),
        norm_final_log=norm_final_log,
        lower_log=lower_log,
        upper_log=upper_log,
        induction_ok=induction_ok,
        lower_chain_ok=lower_chain_ok,
        verdict=verdict,
        fail_location=loc,
    )


def random_drift_chain(
    rng: np.random.Generator,
    n_factors: int,
    beta: float,
    gamma_range: tuple[float, float] = (0.3, 1.5),
    drift_scale: float = 1.0,
) -> list[HyperbolicFactor]:
    """Admissible random factor chain; intended for tests and self-checks.

    Starts from a random hyperbolic factor and evolves the eigenvector frame
    by rotations of angle at most drift_scale * (beta/8) gamma e^{-gamma}
    |det U|, half of what the drift hypothesis allows, so the resulting
    chain passes hypothesis_margins by construction.
    """
    lo_g, hi_g = gamma_range
    gamma = float(rng.uniform(lo_g, hi_g))
    zeta = float(rng.uniform(-math.pi / 4, math.pi / 4))
    while True:
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        p = raw[:, 0] / np.linalg.norm(raw[:, 0])
        m_ = raw[:, 1] / np.linalg.norm(raw[:, 1])
        det_u = p[0] * m_[1] - m_[0] * p[1]
        if abs(det_u) >= 0.3:
            break
    phi_p = (complex(p[0]), complex(p[1]))
    phi_m = (complex(m_[0]), complex(m_[1]))

    def make_factor(gamma, zeta, phi_p, phi_m):
        lam = cmath.exp(complex(gamma, zeta))
        u = Mat2(phi_p[0], phi_m[0], phi_p[1], phi_m[1])
        d = u.det()
        u_inv = Mat2(u.a22 / d, -u.a12 / d, -u.a21 / d, u.a11 / d)
        t = (u @ Mat2(lam, 0, 0, 1.0 / lam)) @ u_inv
        return HyperbolicFactor(t, gamma, zeta, phi_p, phi_m)

    def rephased(prev_p, prev_m, p, m):
        # fix the new frame's phases so the diagonal decomposition
        # coefficients of the previous frame come out real nonnegative;
        # this keeps align_phases a no-op on generated chains
        d = p[0] * m[1] - m[0] * p[1]
        a = (m[1] * prev_p[0] - m[0] * prev_p[1]) / d
        b = (-p[1] * prev_m[0] + p[0] * prev_m[1]) / d
        ph_p = a / abs(a) if abs(a) > 0.0 else 1.0
        ph_m = b / abs(b) if abs(b) > 0.0 else 1.0
        return (p[0] * ph_p, p[1] * ph_p), (m[0] * ph_m, m[1] * ph_m)

    factors = []
    for _ in range(n_factors):
        factors.append(make_factor(gamma, zeta, phi_p, phi_m))
        det_u = abs(phi_p[0] * phi_m[1] - phi_m[0] * phi_p[1])
        # target drift: half of what the hypothesis allows for this factor
        target = 0.5 * beta * gamma * math.exp(-gamma) * det_u / 4.0
        ang = drift_scale * target
        cand_p, cand_m = phi_p, phi_m
        for _ in range(60):
            ca, sa = math.cos(ang), math.sin(ang)
            cand_p = (ca * phi_p[0] - sa * phi_p[1], sa * phi_p[0] + ca * phi_p[1])
            cand_m = (ca * phi_m[0] - sa * phi_m[1], sa * phi_m[0] + ca * phi_m[1])
            cand_p, cand_m = rephased(phi_p, phi_m, cand_p, cand_m)
            drift = max(
                math.hypot(abs(cand_p[0] - phi_p[0]), abs(cand_p[1] - phi_p[1])),
                math.hypot(abs(cand_m[0] - phi_m[0]), abs(cand_m[1] - phi_m[1])),
            )
            if 4.0 * drift / det_u <= 0.5 * beta * gamma * math.exp(-gamma):
                break
            ang /= 2.0
        phi_p, phi_m = cand_p, cand_m
        gamma = float(min(hi_g, max(lo_g, gamma + rng.uniform(-0.05, 0.05))))
        zeta = float(zeta + rng.uniform(-0.02, 0.02))
    return factors
