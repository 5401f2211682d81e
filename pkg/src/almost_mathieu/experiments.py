"""Measure decay along rational approximants, fractal dimension estimates,
interval-cover dimension bounds, and Hofstadter-butterfly datasets.

The central experiment: fix a coarse rational p/q and delta > 0, and watch
meas(S(p~/q~, 2) intersect J_delta) shrink as the approximants p~/q~ sharpen.
The decay rate is fitted, never assumed; the covering machinery turns
families of interval covers with power-law measures into Hausdorff
dimension upper bounds max(1/(1+beta_1), 1/(1+beta_2)).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bands import SpectralSet, jdelta_sets, spectral_union_S, spectrum_bands
from .core import OperatorSpec, ReducedRational, reduce_fraction

__all__ = [
    "DecayRow",
    "DecayReport",
    "BoxCountReport",
    "CoverLevel",
    "CoverFamily",
    "CoverBoundReport",
    "ButterflyDataset",
    "measure_decay",
    "box_counting_dimension",
    "cover_dimension_bound",
    "butterfly_generate",
    "approximant_family",
]

BUTTERFLY_QMAX_GUARD = 500


@dataclass(frozen=True)
class DecayRow:
    approximant: ReducedRational
    q_tilde: int
    measure: float
    gate_ok: bool


@dataclass(frozen=True)
class DecayReport:
    base: ReducedRational
    delta: float
    variant: int
    rows: tuple[DecayRow, ...]
    fitted_rate: float
    fitted_prefactor: float
    r_squared: float


@dataclass(frozen=True)
class BoxCountReport:
    estimate: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    r_squared: float


@dataclass(frozen=True)
class CoverLevel:
    n: int
    q_n: int
    qt_n: int
    family1: tuple[tuple[float, float], ...]
    family2: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class CoverFamily:
    levels: tuple[CoverLevel, ...]
    c1: float
    c2: float
    beta1: float
    beta2: float


@dataclass(frozen=True)
class CoverBoundReport:
    bound: float
    jensen_lhs: tuple[float, ...]
    jensen_rhs: tuple[float, ...]
    c_t: float


@dataclass(frozen=True)
class ButterflyDataset:
    """(p, q, band_index, lo, hi) rows, ordered by q, then p, then band."""

    lam: float
    theta_mode: str
    rows: tuple[tuple[int, int, int, float, float], ...]
    failures: tuple[str, ...]


def approximant_family(base: ReducedRational, k_min: int, k_max: int) -> list[ReducedRational]:
    """Continued-fraction children of the base: append one quotient k.

    For base 1/2 this is the classical family k / (2k + 1); such children
    are automatically reduced and converge to the base at rate 1/(k q^2).
    """
    p, q = abs(base.p), base.q
    # penultimate convergent of p/q by the Euclidean recurrence
    quotients = []
    a, b = p, q
    while b:
        quotients.append(a // b)
        a, b = b, a % b
    h_prev, h = 1, quotients[0]
    k_prev, k = 0, 1
    for n in quotients[1:]:
        h_prev, h = h, n * h + h_prev
        k_prev, k = k, n * k + k_prev
    sign = -1 if base.p < 0 else 1
    return [
        reduce_fraction(sign * (j * p + h_prev), j * q + k_prev)
        for j in range(k_min, k_max + 1)
    ]


def measure_decay(
    base: ReducedRational,
    delta: float,
    variant: int,
    approximants: list[ReducedRational],
    gate_constant: float = 50.0,
    max_workers: int | None = None,
) -> DecayReport:
    """meas(S(p~/q~, 2) intersect J_delta) per approximant, with decay fit.

    Measures are exact interval-union arithmetic; the closeness gate at the
    configured constant is flagged per row, never enforced.  The decay model
    ln(measure) ~ prefactor + rate * q~ is least-squares fitted over the
    rows with positive measure.
    """
    jd = jdelta_sets(base, delta, variant)
    eta = Fraction(gate_constant) ** (-base.q) * Fraction(delta) ** 2
    base_frac = base.as_fraction()

    def one(appr: ReducedRational) -> DecayRow:
        s = spectral_union_S(appr, 2.0)
        inter_measure = s.measure - s.intersection_measure(jd.complement)
        gate = appr.as_fraction() != base_frac and abs(
            appr.as_fraction() - base_frac
        ) < eta
        return DecayRow(appr, appr.q, float(inter_measure), bool(gate))

    ordered = sorted(approximants, key=lambda r: (r.q, r.p))
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as ex:
            rows = list(ex.map(one, ordered))
    else:
        rows = [one(a) for a in ordered]

    pts = [(r.q_tilde, r.measure) for r in rows if r.measure > 0.0]
    if len(pts) >= 2:
        x = np.array([p[0] for p in pts], dtype=np.float64)
        y = np.log(np.array([p[1] for p in pts], dtype=np.float64))
        rate, intercept = np.polyfit(x, y, 1)
        resid = y - (rate * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        prefactor = float(np.exp(intercept))
    else:
        rate, prefactor, r2 = math.nan, math.nan, math.nan
    return DecayReport(
        base, float(delta), variant, tuple(rows), float(rate), prefactor, float(r2)
    )


def box_counting_dimension(
    s: SpectralSet, scales: list[float]
) -> BoxCountReport:
    """Box counts N(scale) and the fitted slope of ln N against ln(1/scale).

    N(scale) is the number of grid boxes [k scale, (k+1) scale) meeting the
    set, computed exactly by merging integer box ranges per band.
    """
    scales = [float(x) for x in scales]
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    if any(x < 1e-12 for x in scales):
        raise ValueError("scales must be >= 1e-12")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")

    intervals = s.intervals()
    counts = []
    for scale in scales:
        ranges = []
        for lo, hi in intervals:
            k_lo = math.floor(lo / scale)
            k_hi = math.floor(hi / scale)
            # boxes meeting the interval with positive length; a width-zero
            # band still occupies the single box containing it
            if hi <= k_hi * scale:
                k_hi -= 1
            ranges.append((k_lo, max(k_hi, k_lo)))
        ranges.sort()
        total = 0
        cur_lo, cur_hi = None, None
        for lo_k, hi_k in ranges:
            if cur_lo is None:
                cur_lo, cur_hi = lo_k, hi_k
            elif lo_k <= cur_hi + 1:
                cur_hi = max(cur_hi, hi_k)
            else:
                total += cur_hi - cur_lo + 1
                cur_lo, cur_hi = lo_k, hi_k
        if cur_lo is not None:
            total += cur_hi - cur_lo + 1
        counts.append(total)

    x = np.log(1.0 / np.array(scales))
    y = np.log(np.array(counts, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return BoxCountReport(float(slope), tuple(scales), tuple(counts), float(r2))


def _union_measure(intervals) -> float:
    ivs = sorted(intervals)
    total, cur_lo, cur_hi = 0.0, None, None
    for lo, hi in ivs:
        if cur_lo is None:
            cur_lo, cur_hi = lo, hi
        elif lo <= cur_hi:
            cur_hi = max(cur_hi, hi)
        else:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
    if cur_lo is not None:
        total += cur_hi - cur_lo
    return total


def cover_dimension_bound(cf: CoverFamily) -> CoverBoundReport:
    """Hausdorff bound max(1/(1+beta1), 1/(1+beta2)) from two cover families.

    Verifies the hypotheses at every provided level (counts, union-measure
    power laws, growing q_n), then certifies the Jensen step
    sum meas^t <= (max C)^t (q^{1-t(1+b1)} + q~^{1-t(1+b2)}) <= 2 (max C)^t
    at t equal to the returned bound.
    """
    if cf.beta1 < 0 or cf.beta2 < 0 or cf.c1 <= 0 or cf.c2 <= 0:
        raise ValueError("constants must be positive (betas nonnegative)")
    prev_q = prev_qt = 0
    for lev in cf.levels:
        if len(lev.family1) > lev.q_n:
            raise ValueError(f"level {lev.n}: family 1 has more than q_n intervals")
        if len(lev.family2) > lev.qt_n:
            raise ValueError(f"level {lev.n}: family 2 has more than q~_n intervals")
        if lev.q_n <= prev_q or lev.qt_n <= prev_qt:
            raise ValueError(f"level {lev.n}: cover counts must grow")
        prev_q, prev_qt = lev.q_n, lev.qt_n
        m1 = _union_measure(lev.family1)
        if m1 >= cf.c1 / lev.q_n**cf.beta1:
            raise ValueError(
                f"level {lev.n}: family 1 measure {m1} breaks C1/q^beta1"
            )
        m2 = _union_measure(lev.family2)
        if m2 >= cf.c2 / lev.qt_n**cf.beta2:
            raise ValueError(
                f"level {lev.n}: family 2 measure {m2} breaks C2/q~^beta2"
            )

    t = max(1.0 / (1.0 + cf.beta1), 1.0 / (1.0 + cf.beta2))
    c_t = 2.0 * max(cf.c1, cf.c2) ** t
    lhs_all, rhs_all = [], []
    for lev in cf.levels:
        lhs = sum((hi - lo) ** t for lo, hi in lev.family1) + sum(
            (hi - lo) ** t for lo, hi in lev.family2
        )
        rhs = max(cf.c1, cf.c2) ** t * (
            lev.q_n ** (1.0 - t * (1.0 + cf.beta1))
            + lev.qt_n ** (1.0 - t * (1.0 + cf.beta2))
        )
        if lhs > rhs * (1.0 + 1e-12) or rhs > c_t * (1.0 + 1e-12):
            raise RuntimeError(
                f"level {lev.n}: Jensen step failed ({lhs} > {rhs} or > {c_t})"
            )
        lhs_all.append(lhs)
        rhs_all.append(rhs)
    return CoverBoundReport(t, tuple(lhs_all), tuple(rhs_all), c_t)


def _reduced_fractions(qmax: int):
    yield 0, 1
    for q in range(2, qmax + 1):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                yield p, q


def butterfly_generate(
    qmax: int,
    lam: float,
    theta_mode: str = "union-S",
    theta: float = 0.0,
    max_workers: int | None = None,
    qmax_guard: int = BUTTERFLY_QMAX_GUARD,
) -> ButterflyDataset:
    """Band rows for every reduced p/q with q <= qmax, at fixed coupling.

    theta_mode "union-S" tabulates the theta-union set S(p/q, lam);
    "fixed-theta" tabulates the spectrum at the given phase.  Cells that
    fail are recorded and generation continues; ordering is deterministic
    (q asc, p asc, band asc) regardless of parallelism.
    """
    if qmax < 1:
        raise ValueError("qmax must be >= 1")
    if qmax > qmax_guard:
        raise ValueError(f"qmax {qmax} above guard {qmax_guard}")
    if theta_mode not in ("union-S", "fixed-theta"):
        raise ValueError(f"unknown theta_mode {theta_mode!r}")

    cells = list(_reduced_fractions(qmax))

    def one(cell):
        p, q = cell
        alpha = ReducedRational(p, q)
        try:
            if theta_mode == "union-S":
                s = spectral_union_S(alpha, lam)
            else:
                s = spectrum_bands(OperatorSpec.almost_mathieu(alpha, lam, theta))
            return [(p, q, b.index, b.lo, b.hi) for b in s.bands], None
        except Exception as exc:  # cell failures recorded, generation continues
            return [], f"{p}/{q}: {exc}"

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as ex:
            results = list(ex.map(one, cells))
    else:
        results = [one(c) for c in cells]

    rows: list[tuple[int, int, int, float, float]] = []
    failures: list[str] = []
    for cell_rows, failure in results:
        rows.extend(cell_rows)
        if failure:
            failures.append(failure)
    rows.sort(key=lambda r: (r[1], r[0], r[2]))
    return ButterflyDataset(float(lam), theta_mode, tuple(rows), tuple(failures))
