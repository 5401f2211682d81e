import math

import numpy as np
import pytest

from almost_mathieu.core import OperatorSpec, discriminant, reduce_fraction
from almost_mathieu.interpolation import (
    TruncationError,
    build_intermediate,
    green_comparison,
    inverse_blocks,
    trace_margin_check,
    truncated_green_row,
    window_check,
)
from almost_mathieu.products import align_phases, eigensystem_2x2, hypothesis_margins, product_growth

HALF = reduce_fraction(1, 2)
ZERO = reduce_fraction(0, 1)
FINE = reduce_fraction(13, 27)


class TestBuildIntermediate:
    def test_worked_l0(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        assert ip.l0 == 6
        assert ip.freeze_site == 12

    def test_second_worked_l0(self):
        ip = build_intermediate(HALF, reduce_fraction(21, 43), 0.01, ctilde=1.0)
        assert ip.l0 == 2

    def test_too_coarse_rejected(self):
        with pytest.raises(ValueError, match="too coarse"):
            build_intermediate(HALF, FINE, 1e-4)

    def test_window_too_long_rejected(self):
        with pytest.raises(ValueError, match="too long"):
            build_intermediate(HALF, FINE, 25.0, ctilde=1.0)

    def test_gate_flags(self):
        assert not build_intermediate(HALF, FINE, 0.25, ctilde=1.0).gate_ok
        assert build_intermediate(HALF, FINE, 0.25, ctilde=1.0, gate_constant=1.0).gate_ok

    def test_fine_potential_below_freeze(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        for n in range(1, ip.freeze_site):
            fine = 2.0 * math.cos(2.0 * math.pi * (13 * n % 27) / 27.0)
            assert ip.potential(n) == pytest.approx(fine, abs=1e-14)

    def test_frozen_phase_after(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        th = ip.theta(ip.freeze_site)
        for n in range(ip.freeze_site, ip.freeze_site + 8):
            want = 2.0 * math.cos(math.pi * n + th)
            assert ip.potential(n) == pytest.approx(want, abs=1e-12)

    def test_array_matches_scalar(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        arr = ip.potential_array(1, 40)
        for i, n in enumerate(range(1, 41)):
            assert arr[i] == pytest.approx(ip.potential(n), abs=1e-14)


class TestWindowCheck:
    def test_half_at_zero(self):
        ip = build_intermediate(HALF, FINE, 0.3, ctilde=0.5)
        rep = window_check(ip, 0.0)
        assert rep.ok
        assert rep.threshold == pytest.approx(-2.225)
        # at j = 0 the margin is -2.225 - (-6) = 3.775; drift can only lower it
        assert 0.0 < rep.worst_margin <= 3.775 + 1e-12

    def test_boundary_case_reported_not_thrown(self):
        # Delta(E) = -delta exactly: E = sqrt(4 - delta)
        delta = 0.3
        E = math.sqrt(4.0 - delta)
        ip = build_intermediate(HALF, FINE, delta, ctilde=1.0)
        rep = window_check(ip, E)
        assert isinstance(rep.ok, bool)

    def test_free_base(self):
        # D_{0/1,2,theta}(E) = E - 2 cos(theta): stays below -2.375 for
        # E = -3 while the window keeps cos(theta_j) > -0.3125
        ip = build_intermediate(ZERO, reduce_fraction(1, 400), 0.5, ctilde=0.1)
        rep = window_check(ip, -3.0)
        assert rep.ok
        assert rep.worst_margin <= -2.375 - (-5.0)

    def test_matches_direct_discriminant(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        E = 0.3
        for j in (0, 3, ip.freeze_site):
            spec = OperatorSpec.almost_mathieu(HALF, 2.0, ip.theta(j))
            d = discriminant(spec, E)
            dval = complex(d).real
            from almost_mathieu.core import delta as chambers_delta

            dd = complex(chambers_delta(HALF, 2.0, complex(E))).real
            assert dval == pytest.approx(dd - 2.0 * math.cos(2.0 * ip.theta(j)), abs=1e-10)


class TestInverseBlocks:
    def test_free_base_plugin(self):
        ip = build_intermediate(ZERO, ZERO, 1.0, ctilde=1.0)
        blocks = inverse_blocks(ip, 3.0, 0.0)
        assert len(blocks) == 1
        b = blocks[0]
        assert (b.a11, b.a12) == (0.0, 1.0)
        assert b.a21 == -1.0
        assert complex(b.a22) == pytest.approx(1.0, abs=1e-14)

    def test_dets_are_one(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=1.0)
        for b in inverse_blocks(ip, 0.37, 0.05):
            assert abs(complex(b.det()) - 1.0) <= 1e-10

    def test_zero_drift_blocks_are_periodic_inverses(self):
        ip = build_intermediate(HALF, HALF, 1.0, ctilde=1.0)
        z = 0.2 + 0.1j
        blocks = inverse_blocks(ip, 0.2, 0.1)
        spec = OperatorSpec.almost_mathieu(HALF, 2.0, 0.0)
        from almost_mathieu.core import monodromy

        phi = monodromy(spec, z)
        prod = blocks[0] @ phi
        assert complex(prod.a11) == pytest.approx(1.0, abs=1e-12)
        assert complex(prod.a22) == pytest.approx(1.0, abs=1e-12)
        assert abs(complex(prod.a12)) <= 1e-12
        assert abs(complex(prod.a21)) <= 1e-12


class TestTraceMargins:
    def test_half_small_drift(self):
        ip = build_intermediate(HALF, reduce_fraction(500, 1001), 0.3, ctilde=0.05)
        rep = trace_margin_check(ip, 0.0, 1e-3)
        assert rep.ok
        # trace ~ D(0) = -6, margin ~ 6 - 2.15
        assert min(rep.margins) > 3.0

    def test_zero_drift_trace_is_discriminant(self):
        ip = build_intermediate(HALF, HALF, 1.0, ctilde=1.0)
        z = 0.37 + 0.01j
        blocks = inverse_blocks(ip, 0.37, 0.01)
        spec = OperatorSpec.almost_mathieu(HALF, 2.0, 0.0)
        d = discriminant(spec, z)
        assert complex(blocks[0].trace()) == pytest.approx(complex(d), rel=1e-12)

    def test_gamma_floor(self):
        ip = build_intermediate(HALF, reduce_fraction(500, 1001), 0.3, ctilde=0.05)
        rep = trace_margin_check(ip, 0.0, 1e-3)
        assert rep.gamma_floor == pytest.approx(math.acosh(1.075))
        assert all(g > rep.gamma_floor for g in rep.gammas)


class TestGreenComparison:
    def test_zero_drift_degeneration(self):
        ip = build_intermediate(HALF, HALF, 1.0, ctilde=1.0)
        rep = green_comparison(ip, 0.0, 0.2)
        assert rep.step_i_ok
        assert rep.final_ok
        # identical operators: G~ equals G at the window site
        assert rep.window_ok

    def test_worked_example_step_i(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=0.5)
        rep = green_comparison(ip, 0.0, 0.1)
        assert rep.step_i_ok
        assert rep.final_ok
        assert rep.fitted_cprime > 0.0
        assert rep.window_ok and rep.trace_ok

    def test_sanity_at_large_epsilon(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=0.5)
        rep = green_comparison(ip, 0.5, 1.0)
        assert rep.lhs_i <= 1.0 + 1e-12
        assert rep.lhs_ii <= 1.0 + 1e-12

    def test_perturbation_stability(self):
        ip = build_intermediate(HALF, FINE, 0.25, ctilde=0.5)
        rep_a = green_comparison(ip, 0.37, 0.1)
        rep_b = green_comparison(ip, 0.37 + 1e-12, 0.1)
        for fa, fb in (
            (rep_a.lhs_i, rep_b.lhs_i),
            (rep_a.lhs_ii, rep_b.lhs_ii),
            (rep_a.fitted_cprime, rep_b.fitted_cprime),
        ):
            assert fa == pytest.approx(fb, rel=1e-6)
        assert rep_a.step_i_ok == rep_b.step_i_ok

    def test_truncation_certificate(self):
        v = np.zeros(60)
        with pytest.raises(TruncationError):
            truncated_green_row(v, 0.0 + 1e-4j, 60)


class TestGrowthTheoremApplication:
    def test_inverse_blocks_feed_growth_certificate(self):
        # admissible drift: |p~/q~ - p/q| = 1/28002 below 50^-2 delta^2
        ip = build_intermediate(
            HALF, reduce_fraction(7000, 14001), 0.3, ctilde=0.05
        )
        assert ip.gate_ok
        assert window_check(ip, 0.0).ok
        tr = trace_margin_check(ip, 0.0, 0.1)
        assert tr.ok
        blocks = inverse_blocks(ip, 0.0, 0.1)
        # the product Phi^{-1} = T_0^{-1} ... T_{l0-1}^{-1} applies the last
        # block first, so the growth certificate sees the chain reversed
        factors = align_phases([eigensystem_2x2(b) for b in reversed(blocks)])
        margins = hypothesis_margins(factors, 0.5)
        assert all(m > 0.0 for m in margins)
        cert = product_growth(factors, 0.5)
        assert cert.passed
        floor = math.acosh(1.0 + ip.delta / 4.0)
        assert cert.norm_final_log >= math.log(0.5) + 0.5 * cert.sum_gamma - 1e-9
        assert cert.sum_gamma >= ip.l0 * floor
