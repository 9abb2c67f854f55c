"""Tests for sweep orchestration, classification, and artifact emission."""

import pytest

from degenheat.dynamics import ForcingTerm, Nonlinearity, TimeProfile
from degenheat.errors import ConfigError
from degenheat.grids import InitialProfile
from degenheat.lab import (EscalationLevel, RunSpec, SweepSpec, apply_axis,
                           classify_point, default_escalation, points_to_csv,
                           points_to_json, run_sweep, sweep_svg)

from conftest import axis_weight, line_grid


def base_run(**kwargs) -> RunSpec:
    defaults = dict(
        weight=axis_weight(0.0),
        grid=line_grid(2.0, 5),
        forcings=(ForcingTerm(TimeProfile.power(0.0), Nonlinearity.power(2.0)),),
        profile=InitialProfile("constant", 1.0),
        tol=1e-3,
        diffusionless=True,
    )
    defaults.update(kwargs)
    return RunSpec(**defaults)


class TestApplyAxis:
    def test_each_axis(self):
        run = base_run(forcings=(
            ForcingTerm(TimeProfile.power(0.0), Nonlinearity.power(2.0)),
            ForcingTerm(TimeProfile.power(0.0), Nonlinearity.log_power(2.0)),
        ))
        assert apply_axis(run, "p", 3.5).forcings[0].nonlinearity.exponent == 3.5
        assert apply_axis(run, "q", 2.5).forcings[1].nonlinearity.exponent == 2.5
        assert apply_axis(run, "r", 1.0).forcings[0].profile.exponent == 1.0
        assert apply_axis(run, "s", 0.5).forcings[1].profile.exponent == 0.5
        assert apply_axis(run, "alpha", 0.5).weight.alpha == 0.5
        assert apply_axis(run, "amplitude", 3.0).profile.amplitude == 3.0

    def test_errors(self):
        run = base_run()
        with pytest.raises(ConfigError):
            apply_axis(run, "sigma", 1.0)
        with pytest.raises(ConfigError):
            apply_axis(run, "q", 2.0)  # no log term present


class TestSweepSpecValidation:
    def test_axis_count(self):
        run = base_run()
        with pytest.raises(ConfigError):
            SweepSpec(run, ())
        with pytest.raises(ConfigError):
            SweepSpec(run, (("p", [2.0]), ("q", [2.0]), ("r", [0.0])))

    def test_increasing_grids_and_horizons(self):
        run = base_run()
        with pytest.raises(ConfigError):
            SweepSpec(run, (("p", [3.0, 2.0]),))
        with pytest.raises(ConfigError):
            SweepSpec(run, (("p", [2.0, 3.0]),),
                      (EscalationLevel(10.0), EscalationLevel(5.0)))


class TestClassifyPoint:
    def test_zero_data_global(self):
        run = base_run(profile=InitialProfile("constant", 0.0), diffusionless=False)
        pt = classify_point(run, default_escalation((1.0, 5.0)))
        assert pt.classification == "GlobalLike"

    def test_ode_point_blows(self):
        pt = classify_point(base_run(), default_escalation((5.0,)),
                            with_criteria=False)
        assert pt.classification == "BlowUp"
        assert pt.t_star == pytest.approx(1.0, abs=0.02)

    def test_supercritical_dichotomy(self):
        run = base_run(
            weight=axis_weight(0.0),
            grid=line_grid(40.0, 401),
            forcings=(ForcingTerm(TimeProfile.power(0.0), Nonlinearity.power(4.0)),),
            profile=InitialProfile("gaussian", 1e-2, 1.0),
            diffusionless=False,
            tol=1e-2,
        )
        small = classify_point(run, default_escalation((5.0, 50.0)))
        big = classify_point(apply_axis(run, "amplitude", 1e4),
                             default_escalation((5.0, 50.0)))
        assert small.classification == "GlobalLike"
        assert big.classification == "BlowUp"

    def test_empty_escalation(self):
        with pytest.raises(ConfigError):
            classify_point(base_run(), ())


class TestRunSweep:
    def _spec(self):
        return SweepSpec(base_run(), (("amplitude", [0.5, 1.0, 2.0]),),
                         default_escalation((5.0,)), with_criteria=False)

    def test_empty_grid_header_only(self):
        spec = SweepSpec(base_run(), (("amplitude", []),),
                         default_escalation((5.0,)), with_criteria=False)
        points = run_sweep(spec, 1)
        assert points == []
        assert points_to_csv(points) == \
            "axis1,axis2,classification,t_star,horizon,index_I,certificate_tau\n"

    def test_amplitude_monotone_blowup(self):
        # BlowUp set is upward closed along the amplitude axis
        points = run_sweep(self._spec(), 1)
        blew = [pt.classification == "BlowUp" for pt in points]
        assert blew == sorted(blew)
        ts = [pt.t_star for pt in points if pt.t_star is not None]
        assert all(a >= b for a, b in zip(ts, ts[1:]))

    def test_determinism_worker_counts(self):
        spec = self._spec()
        csv1 = points_to_csv(run_sweep(spec, 1))
        csv2 = points_to_csv(run_sweep(spec, 2))
        assert csv1 == csv2

    def test_csv_json_roundtrip(self):
        points = run_sweep(self._spec(), 1)
        rows = points_to_csv(points).strip().split("\n")[1:]
        objs = points_to_json(points)
        assert len(rows) == len(objs)
        for row, obj in zip(rows, objs):
            ax1, ax2, cls, t_star, horizon, index_i, tau = row.split(",")
            assert float(ax1) == obj["axis1"]
            assert ax2 == "" and obj["axis2"] is None
            assert cls == obj["classification"]
            if t_star:
                assert float(t_star) == pytest.approx(obj["t_star"], rel=1e-9)
            else:
                assert obj["t_star"] is None
            assert float(horizon) == obj["horizon"]

    def test_two_axis_ordering(self):
        spec = SweepSpec(base_run(), (("p", [2.0, 3.0]), ("amplitude", [1.0, 2.0])),
                         default_escalation((5.0,)), with_criteria=False)
        points = run_sweep(spec, 1)
        assert [pt.axis_values for pt in points] == \
            [(2.0, 1.0), (2.0, 2.0), (3.0, 1.0), (3.0, 2.0)]


class TestSweepSvg:
    def test_heat_map_with_boundary(self):
        run = base_run()
        spec = SweepSpec(run, (("p", [2.0, 2.5, 3.5, 4.0]),),
                         default_escalation((5.0,)), with_criteria=False)
        points = run_sweep(spec, 1)
        svg = sweep_svg(spec, points)
        assert svg.startswith("<svg")
        assert "#c0392b" in svg  # at least one BlowUp cell
        # p* = 3 lies inside the axis range: dashed analytic boundary drawn
        assert "stroke-dasharray" in svg

    def test_no_boundary_outside_range(self):
        run = base_run()
        spec = SweepSpec(run, (("amplitude", [1.0, 2.0]),),
                         default_escalation((5.0,)), with_criteria=False)
        svg = sweep_svg(spec, run_sweep(spec, 1))
        assert "stroke-dasharray" not in svg
