import pytest
from hypothesis import given
from hypothesis import strategies as st

from nescape.asymptotics import AsymptoticModel
from nescape.engine import WalkConfig, WalkResult, run_ensemble
from nescape.errors import ValidationError
from nescape.geometry import TrapConfiguration
from nescape.stats import (
    average_tau,
    boundary_fraction,
    build_boundary_rows,
    build_comparison,
    layer_volume_fraction,
    relative_boundary_time,
    relative_error,
)
from nescape.stepping import DiffusionSpec


def walk(steps, b01, b001, dt=1e-3):
    return WalkResult(
        escape_time=steps * dt,
        steps=steps,
        trap_index=0,
        deltas=(0.1, 0.01),
        boundary_steps=(b01, b001),
    )


class TestRelativeError:
    def test_table_value(self):
        assert relative_error(106.0237, 105.6267) == pytest.approx(0.3745, abs=1e-4)

    def test_equal_inputs(self):
        assert relative_error(52.8, 52.8) == 0.0

    def test_direct_substitution(self):
        assert relative_error(100.0, 90.0) == pytest.approx(10.0, abs=1e-12)

    def test_rejects_nonpositive_reference(self):
        with pytest.raises(ValidationError):
            relative_error(0.0, 1.0)
        with pytest.raises(ValidationError):
            relative_error(-5.0, 1.0)

    @given(
        st.floats(1e-3, 1e6),
        st.floats(0.0, 1e6),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, v, vb, c):
        assert relative_error(c * v, c * vb) == pytest.approx(
            relative_error(v, vb), rel=1e-9
        )


class TestRelativeBoundaryTime:
    def test_wide_layer_value(self):
        assert round(relative_boundary_time(0.2829, 0.2853), 4) == 0.8484

    def test_narrow_layer_value(self):
        assert round(relative_boundary_time(0.04014, 0.04410), 4) == 9.8655

    def test_equal_inputs(self):
        assert relative_boundary_time(0.28, 0.28) == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            relative_boundary_time(0.0, 0.1)

    @given(st.floats(1e-3, 1.0), st.floats(0.0, 1.0), st.floats(1e-3, 1e2))
    def test_scale_invariance(self, ti, ta, c):
        assert relative_boundary_time(c * ti, c * ta) == pytest.approx(
            relative_boundary_time(ti, ta), rel=1e-9
        )


class TestLayerVolume:
    def test_values(self):
        assert layer_volume_fraction(0.1) == pytest.approx(0.271, abs=1e-12)
        assert layer_volume_fraction(0.01) == pytest.approx(0.029701, abs=1e-12)
        assert layer_volume_fraction(1.0) == 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            layer_volume_fraction(0.0)


class TestBoundaryFraction:
    def test_single_walk_ratio(self):
        w = walk(10_000, 2800, 280)
        assert boundary_fraction(w, 0.1) == 0.28
        assert boundary_fraction(w, 0.01) == 0.028

    def test_whole_ball_layer(self):
        w = WalkResult(
            escape_time=1.0,
            steps=1000,
            trap_index=0,
            deltas=(1.0,),
            boundary_steps=(1000,),
        )
        assert boundary_fraction(w, 1.0) == 1.0

    def test_zero_duration_rejected(self):
        w = WalkResult(0.0, 0, 0, (0.1,), (0,))
        with pytest.raises(ValidationError):
            boundary_fraction(w, 0.1)

    def test_monotone_in_delta_per_walk(self):
        w = walk(1000, 300, 40)
        assert boundary_fraction(w, 0.01) <= boundary_fraction(w, 0.1)

    def test_mean_of_ratios_vs_pooled(self):
        walks = [walk(100, 50, 5), walk(400, 40, 4)]
        assert boundary_fraction(walks, 0.1) == pytest.approx((0.5 + 0.1) / 2)
        assert boundary_fraction(walks, 0.1, pooled=True) == pytest.approx(90 / 500)

    def test_zero_duration_walks_skipped_in_mean(self):
        walks = [walk(100, 50, 5), WalkResult(0.0, 0, 0, (0.1, 0.01), (0, 0))]
        assert boundary_fraction(walks, 0.1) == 0.5

    def test_ensemble_stats_lookup_matches_recompute(self):
        cfg = WalkConfig(
            start=(0, 0, 0),
            traps=TrapConfiguration.one_trap(0.5),
            diffusion=DiffusionSpec(dt=1e-3),
        )
        from nescape.engine import RngStream, run_walk

        stats = run_ensemble(cfg, 12, base_seed=5)
        walks = [run_walk(cfg, RngStream(5 + i)) for i in range(12)]
        assert boundary_fraction(stats, 0.1) == boundary_fraction(walks, 0.1)
        assert boundary_fraction(stats, 0.01) == boundary_fraction(walks, 0.01)


class TestTables:
    model = AsymptoticModel.one_trap(0.5)

    def make_stats(self, n=6):
        cfg = WalkConfig(
            start=(0, 0, 0),
            traps=TrapConfiguration.one_trap(0.5),
            diffusion=DiffusionSpec(dt=1e-3),
        )
        return run_ensemble(cfg, n, base_seed=1)

    def test_empty_campaign_empty_table(self):
        assert build_comparison([], self.model) == []

    def test_row_contents(self):
        stats = self.make_stats()
        row = build_comparison([stats], self.model)[0]
        v = self.model.field((0, 0, 0))
        assert row.asymptotic == v
        assert row.simulated == stats.mean_escape_time
        assert row.delta_v_pct == relative_error(v, stats.mean_escape_time)
        assert row.n_walks == 6

    def test_pure_join_permutation(self):
        a = self.make_stats(4)
        b = self.make_stats(8)
        fwd = build_comparison([a, b], self.model)
        rev = build_comparison([b, a], self.model)
        assert fwd == rev[::-1]

    def test_boundary_rows(self):
        stats = self.make_stats()
        row = build_boundary_rows([stats], "isotropic")[0]
        assert row.tau == stats.tau
        assert row.volume_fractions == (
            layer_volume_fraction(0.1),
            layer_volume_fraction(0.01),
        )
        assert row.mode == "isotropic"

    def test_average_tau_unweighted(self):
        a = self.make_stats(4)
        b = self.make_stats(8)
        assert average_tau([a, b], 0.1) == pytest.approx(
            (a.tau[0] + b.tau[0]) / 2, rel=1e-14
        )
