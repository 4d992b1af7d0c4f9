import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamcap import (AntennaModel, RadioParams, beam_area, beam_boundary, coverage_radius,
                     dbm_to_mw, directivity_reduction, max_directivity, mw_to_dbm,
                     pair_coverage_area, receive_power)

DEG = math.pi / 180.0


def radio(p_tx=10.0, n_thr=-78.0, theta_deg=52.0, kappa=2.0, c=6.3e6):
    return RadioParams(p_tx, n_thr, theta_deg * DEG, kappa, c)


class TestDirectivityReduction:
    def test_boresight(self):
        assert directivity_reduction(0.0, 52 * DEG) == 1.0

    def test_beam_edge(self):
        assert directivity_reduction(52 * DEG, 52 * DEG) == 0.0

    def test_half(self):
        assert directivity_reduction(26 * DEG, 52 * DEG) == pytest.approx(0.5, rel=1e-12)

    def test_beyond_edge_is_zero(self):
        assert directivity_reduction(60 * DEG, 52 * DEG) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            directivity_reduction(-0.1, 1.0)
        with pytest.raises(ValueError):
            directivity_reduction(0.1, 0.0)


class TestMaxDirectivity:
    def test_half_sphere(self):
        assert max_directivity(math.pi) == pytest.approx(2.0, rel=1e-15)

    def test_52_degrees(self):
        # high-precision evaluation of 2/(1 - cos 26 deg)
        assert max_directivity(52 * DEG) == pytest.approx(19.761683249505698, rel=1e-12)

    def test_narrow_beam(self):
        d0 = max_directivity(0.2)
        assert d0 == pytest.approx(400.33350006616072, rel=1e-12)
        # small-angle behaviour ~ 16/theta^2
        assert d0 == pytest.approx(16.0 / 0.2**2, rel=2e-3)

    def test_strictly_decreasing(self):
        grid = np.linspace(0.05, 2 * math.pi - 0.05, 64)
        vals = [max_directivity(t) for t in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("theta", [0.0, -1.0, 2 * math.pi])
    def test_domain_errors(self, theta):
        with pytest.raises(ValueError):
            max_directivity(theta)


class TestReceivePower:
    def test_threshold_at_coverage_radius(self, baseline_radio, analytic_antenna):
        r = coverage_radius(baseline_radio)
        p = receive_power(baseline_radio, analytic_antenna, r, 0.0)
        assert p == pytest.approx(baseline_radio.n_thr_mw, rel=1e-12)

    def test_zero_beyond_beam(self, baseline_radio, analytic_antenna):
        assert receive_power(baseline_radio, analytic_antenna, 5.0, baseline_radio.theta) == 0.0

    def test_example_at_10m(self, baseline_radio, analytic_antenna):
        # direct evaluation p_tx_mw * D0 / (C d^kappa), cross-checked in
        # arbitrary precision
        p = receive_power(baseline_radio, analytic_antenna, 10.0, 0.0)
        assert p == pytest.approx(3.1367751189691571e-07, rel=1e-12)

    def test_invalid_distance(self, baseline_radio, analytic_antenna):
        with pytest.raises(ValueError):
            receive_power(baseline_radio, analytic_antenna, 0.0, 0.0)

    @given(d1=st.floats(0.1, 1e4), scale=st.floats(1.01, 100.0))
    def test_decreasing_in_distance(self, d1, scale):
        r = radio()
        ant = AntennaModel.analytic()
        assert receive_power(r, ant, d1, 0.0) > receive_power(r, ant, d1 * scale, 0.0)

    @given(a1=st.floats(0.0, 1.5), a2=st.floats(0.0, 1.5))
    def test_non_increasing_in_deviation(self, a1, a2):
        lo, hi = sorted((a1, a2))
        r = radio()
        ant = AntennaModel.analytic()
        assert receive_power(r, ant, 25.0, lo) >= receive_power(r, ant, 25.0, hi)

    @settings(max_examples=60)
    @given(p_tx=st.floats(-20.0, 30.0), margin=st.floats(10.0, 100.0),
           theta_deg=st.floats(4.0, 179.0), kappa=st.floats(1.5, 5.0),
           c=st.floats(1e3, 1e8))
    def test_radius_threshold_identity(self, p_tx, margin, theta_deg, kappa, c):
        r = RadioParams(p_tx, p_tx - margin, theta_deg * DEG, kappa, c)
        rr = coverage_radius(r)
        p = receive_power(r, AntennaModel.analytic(), rr, 0.0)
        assert p == pytest.approx(r.n_thr_mw, rel=1e-9)


class TestCoverageRadius:
    def test_baseline_values(self, baseline_radio):
        assert coverage_radius(baseline_radio) == pytest.approx(44.487878116362457, rel=1e-12)

    def test_fourth_root_relation(self):
        r2 = coverage_radius(radio(kappa=2.0))
        r4 = coverage_radius(radio(kappa=4.0))
        assert r4 == pytest.approx(6.6699233965887837, rel=1e-12)
        assert r4 == pytest.approx(math.sqrt(r2), rel=1e-12)

    def test_unit_ratio(self):
        # P_tx = N_thr impossible by invariant; arrange D0 = C instead with
        # theta = pi (D0 = 2) and a 3 dB margin folded into C
        r = RadioParams(0.0, -3.0103, math.pi, 2.0, 2.0 * dbm_to_mw(3.0103))
        assert coverage_radius(r) == pytest.approx(1.0, rel=1e-5)

    def test_param_invariants(self):
        with pytest.raises(ValueError):
            RadioParams(10, -78, 0.0, 2, 6.3e6)
        with pytest.raises(ValueError):
            RadioParams(10, -78, 4.0, 2, 6.3e6)  # theta > pi
        with pytest.raises(ValueError):
            RadioParams(10, -78, 1.0, 0.0, 6.3e6)
        with pytest.raises(ValueError):
            RadioParams(10, -78, 1.0, 2, -1.0)
        with pytest.raises(ValueError):
            RadioParams(-80, -78, 1.0, 2, 6.3e6)  # p_tx below sensitivity
        with pytest.raises(ValueError):
            RadioParams(10, -78, 1.0, 2, 6.3e6, bandwidth_hz=0.0)


class TestBeamGeometry:
    def test_boundary_boresight(self):
        assert beam_boundary(2.0, 1.0, 2.0, 0.0) == pytest.approx((2.0, 0.0))

    def test_boundary_edge(self):
        x, y = beam_boundary(2.0, 1.0, 2.0, 1.0)
        assert (x, y) == pytest.approx((0.0, 0.0), abs=1e-15)

    def test_boundary_example(self):
        # 2 * sqrt(0.5) * (cos 0.5, sin 0.5)
        x, y = beam_boundary(2.0, 1.0, 2.0, 0.5)
        assert x == pytest.approx(1.2410891611274912, rel=1e-12)
        assert y == pytest.approx(0.67801009884208973, rel=1e-12)

    def test_boundary_domain(self):
        with pytest.raises(ValueError):
            beam_boundary(2.0, 1.0, 2.0, 1.1)
        with pytest.raises(ValueError):
            beam_boundary(2.0, 1.0, 2.0, -0.1)

    def test_area_vanishes_with_beamwidth(self):
        assert beam_area(10.0, 1e-12, 2.0) < 1e-9

    def test_area_unit_case(self):
        assert beam_area(1.0, 1.0, 2.0) == pytest.approx(0.5, rel=1e-15)

    def test_area_baseline_case(self):
        assert beam_area(44.5, 52 * DEG, 2.0) == pytest.approx(898.6089453280605, rel=1e-12)

    def test_pair_coverage_is_twice(self):
        assert pair_coverage_area(44.5, 52 * DEG, 2.0) == pytest.approx(
            2 * beam_area(44.5, 52 * DEG, 2.0), rel=1e-15)
        assert pair_coverage_area(1.0, 1.0, 2.0) == pytest.approx(1.0, rel=1e-15)

    @given(r=st.floats(0.1, 100.0), theta=st.floats(0.01, math.pi),
           kappa=st.floats(1.0, 6.0))
    def test_boundary_curve_closes(self, r, theta, kappa):
        x0, y0 = beam_boundary(r, theta, kappa, 0.0)
        xe, ye = beam_boundary(r, theta, kappa, theta)
        assert math.hypot(x0, y0) == pytest.approx(r, rel=1e-12)
        assert math.hypot(xe, ye) == pytest.approx(0.0, abs=1e-12)

    def test_area_scaling(self):
        # linear in theta, quadratic in R
        a = beam_area(3.0, 0.4, 2.0)
        assert beam_area(3.0, 0.8, 2.0) == pytest.approx(2 * a, rel=1e-12)
        assert beam_area(6.0, 0.4, 2.0) == pytest.approx(4 * a, rel=1e-12)


class TestAntennaTable:
    def sampled_table(self, r, step_deg=0.1):
        d0 = max_directivity(r.theta)
        angles, gains = [], []
        a = 0.0
        while a < r.theta - 1e-9:
            rho = 1.0 - a / r.theta
            angles.append(a)
            gains.append(10 * math.log10(d0 * rho))
            a += step_deg * DEG
        angles.append(r.theta)
        gains.append(-120.0)  # pattern floor at the beam edge
        return AntennaModel.from_table(zip(angles, gains))

    def test_matches_analytic_within_interpolation_error(self, baseline_radio):
        table = self.sampled_table(baseline_radio)
        analytic = AntennaModel.analytic()
        for frac in np.linspace(0.0, 0.95, 40):
            alpha = frac * baseline_radio.theta
            pa = receive_power(baseline_radio, analytic, 20.0, alpha)
            pt = receive_power(baseline_radio, table, 20.0, alpha)
            assert pt == pytest.approx(pa, rel=1e-3)

    def test_clamps_beyond_last_angle(self, baseline_radio):
        table = AntennaModel.from_table([(0.0, 10.0), (0.5, 0.0)])
        assert table.gain_linear(2.0, baseline_radio) == pytest.approx(1.0)

    def test_pattern_file_roundtrip(self, tmp_path, baseline_radio):
        path = tmp_path / "pattern.csv"
        path.write_text("angle_deg,gain_dbi\n0,12.96\n26,9.95\n52,-120\n")
        ant = AntennaModel.from_pattern_file(path)
        assert ant.gain_linear(0.0, baseline_radio) == pytest.approx(10 ** 1.296)
        mid = ant.gain_linear(13 * DEG, baseline_radio)
        assert 10 ** 0.995 < mid < 10 ** 1.296

    def test_pattern_file_errors(self, tmp_path):
        bad_header = tmp_path / "a.csv"
        bad_header.write_text("deg,dbi\n0,1\n")
        with pytest.raises(ValueError, match="header"):
            AntennaModel.from_pattern_file(bad_header)
        bad_row = tmp_path / "b.csv"
        bad_row.write_text("angle_deg,gain_dbi\n0,1\nx,2\n")
        with pytest.raises(ValueError, match="b.csv:3"):
            AntennaModel.from_pattern_file(bad_row)

    def test_table_invariants(self):
        with pytest.raises(ValueError, match="start at angle 0"):
            AntennaModel.from_table([(0.1, 1.0), (0.2, 0.0)])
        with pytest.raises(ValueError, match="strictly increasing"):
            AntennaModel.from_table([(0.0, 1.0), (0.0, 0.0)])
        with pytest.raises(ValueError, match="finite"):
            AntennaModel.from_table([(0.0, 1.0), (0.2, -math.inf)])
        with pytest.raises(ValueError, match="no pattern table"):
            AntennaModel(angles=np.array([0.0, 1.0]), gains_dbi=np.array([1.0, 0.0]))


def test_dbm_roundtrip():
    assert dbm_to_mw(10.0) == pytest.approx(10.0, rel=1e-15)
    assert mw_to_dbm(dbm_to_mw(-78.0)) == pytest.approx(-78.0, rel=1e-12)
    with pytest.raises(ValueError):
        mw_to_dbm(0.0)
