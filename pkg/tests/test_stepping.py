import math

import numpy as np
import pytest

from nescape.errors import ValidationError
from nescape.stepping import (
    DiffusionSpec,
    RngStream,
    anisotropic_factors,
    langevin_step,
    scale_step_anisotropic,
    wiener_step,
)

from oracles import F_PAR_AT_LAYER_EDGE, F_PERP_AT_LAYER_EDGE


class TestDiffusionSpec:
    def test_defaults(self):
        spec = DiffusionSpec()
        assert spec.diffusivity == 1.0
        assert spec.dt == 6e-6
        assert spec.mode == "isotropic"

    def test_sigma_standard(self):
        spec = DiffusionSpec()
        assert spec.step_sigma == pytest.approx(3.464e-3, rel=1e-3)
        assert spec.step_sigma == math.sqrt(2 * 6e-6)

    def test_sigma_paper_convention(self):
        spec = DiffusionSpec(variance="paper")
        assert spec.step_sigma == pytest.approx(4.243e-3, rel=1e-3)
        assert spec.step_sigma == math.sqrt(3 * 6e-6)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(diffusivity=0.0),
            dict(dt=-1.0),
            dict(particle_radius=0.0),
            dict(boundary_factor=-2.0),
            dict(particle_radius=0.1, boundary_factor=22.5),  # layer >= 1
            dict(mode="sideways"),
            dict(scaling="cubic"),
            dict(variance="guess"),
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValidationError):
            DiffusionSpec(**kwargs)


class TestWienerStep:
    def test_seeded_determinism(self):
        spec = DiffusionSpec()
        a = [wiener_step(RngStream(9), spec) for _ in range(1)]
        s1, s2 = RngStream(99), RngStream(99)
        seq1 = [wiener_step(s1, spec) for _ in range(50)]
        seq2 = [wiener_step(s2, spec) for _ in range(50)]
        assert all(np.array_equal(u, v) for u, v in zip(seq1, seq2))

    def test_empirical_variance(self):
        spec = DiffusionSpec()
        stream = RngStream(123)
        draws = spec.step_sigma * stream.standard_normal(200_000, 3)
        var = draws.var(axis=0)
        assert np.all(np.abs(var / spec.step_sigma ** 2 - 1.0) < 0.02)

    def test_mean_square_displacement(self):
        spec = DiffusionSpec()
        stream = RngStream(321)
        draws = spec.step_sigma * stream.standard_normal(200_000, 3)
        msd = np.mean(np.sum(draws ** 2, axis=1))
        assert msd == pytest.approx(6 * spec.diffusivity * spec.dt, rel=0.02)


class TestAnisotropicFactors:
    def test_far_field(self):
        f_par, f_perp = anisotropic_factors(1e9, 1e-3)
        assert f_par == pytest.approx(1.0, abs=1e-9)
        assert f_perp == pytest.approx(1.0, abs=1e-9)

    def test_contact(self):
        f_par, f_perp = anisotropic_factors(1e-3, 1e-3)
        assert f_par == pytest.approx(0.32422, abs=1e-5)
        assert f_par == 1 - 9 / 16 + 1 / 8 - 45 / 256 - 1 / 16
        assert f_perp == 0.375

    def test_below_contact_clamped(self):
        assert anisotropic_factors(1e-4, 1e-3) == anisotropic_factors(1e-3, 1e-3)

    def test_layer_edge(self):
        f_par, f_perp = anisotropic_factors(22.5e-3, 1e-3)
        assert f_par == pytest.approx(F_PAR_AT_LAYER_EDGE, abs=1e-12)
        assert f_perp == pytest.approx(F_PERP_AT_LAYER_EDGE, abs=1e-12)
        assert f_par > 0.95 and f_perp > 0.95

    def test_monotone_in_distance(self):
        # The truncated perpendicular series dips just above contact (its
        # derivative in a/z flips sign at a/z = sqrt(3)/2), so monotonicity
        # in z only holds from z = a/sqrt(0.75) outward; the parallel
        # series is monotone from contact.
        a = 1e-3
        zs = np.linspace(a, 100 * a, 500)
        par = [anisotropic_factors(z, a)[0] for z in zs]
        assert all(p2 > p1 for p1, p2 in zip(par, par[1:]))
        zs_perp = np.linspace(a / math.sqrt(0.75) + 1e-9, 100 * a, 500)
        perp = [anisotropic_factors(z, a)[1] for z in zs_perp]
        assert all(p2 > p1 for p1, p2 in zip(perp, perp[1:]))

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValidationError):
            anisotropic_factors(0.0, 1e-3)
        with pytest.raises(ValidationError):
            anisotropic_factors(1e-3, -1e-3)


class TestScaleStepAnisotropic:
    spec = DiffusionSpec(mode="anisotropic")

    def test_unchanged_outside_layer(self):
        step = np.array([1e-3, 2e-3, -1e-3])
        out = scale_step_anisotropic(step, (0.5, 0, 0), self.spec)
        assert np.array_equal(out, step)

    def test_contact_sqrt_mode(self):
        x = np.array([0.0, 0.0, 1.0 - 1e-3])
        step = np.array([2e-3, 0.0, 3e-3])  # tangential x, radial z
        out = scale_step_anisotropic(step, x, self.spec)
        assert out[0] == pytest.approx(2e-3 * 0.5694, rel=1e-3)
        assert out[2] == pytest.approx(3e-3 * 0.6124, rel=1e-3)
        assert out[0] == pytest.approx(2e-3 * math.sqrt(0.32421875), rel=1e-12)
        assert out[2] == pytest.approx(3e-3 * math.sqrt(0.375), rel=1e-12)

    def test_contact_linear_mode(self):
        spec = DiffusionSpec(mode="anisotropic", scaling="linear")
        x = np.array([0.0, 0.0, 1.0 - 1e-3])
        step = np.array([2e-3, 0.0, 3e-3])
        out = scale_step_anisotropic(step, x, spec)
        assert out[0] == pytest.approx(2e-3 * 0.32421875, rel=1e-12)
        assert out[2] == pytest.approx(3e-3 * 0.375, rel=1e-12)

    def test_decomposition_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            x = rng.normal(size=3)
            x *= (1.0 - rng.uniform(0, 22e-3)) / np.linalg.norm(x)
            step = rng.normal(size=3) * 3e-3
            out = scale_step_anisotropic(step, x, self.spec)
            nhat = x / np.linalg.norm(x)
            z = max(1.0 - np.linalg.norm(x), self.spec.particle_radius)
            f_par, f_perp = anisotropic_factors(z, self.spec.particle_radius)
            # radial part scales by sqrt(f_perp) and stays radial
            assert out @ nhat == pytest.approx(
                math.sqrt(f_perp) * (step @ nhat), rel=1e-9
            )
            # tangential part scales by sqrt(f_par) and stays tangential
            tang_in = step - (step @ nhat) * nhat
            tang_out = out - (out @ nhat) * nhat
            assert np.allclose(tang_out, math.sqrt(f_par) * tang_in, atol=1e-15)


class TestLangevinStep:
    def test_reduces_to_plain_step_at_equal_times(self):
        disp = langevin_step((0.2, 0, 0), (0.1, 0, 0), (1e-3, 2e-3, 0), 6e-6, 6e-6)
        assert disp == pytest.approx((1e-3, 2e-3, 0), abs=1e-18)

    def test_half_relaxation(self):
        disp = langevin_step((0.1, 0, 0), (0.1, 0, 0), (2e-3, 0, 0), 1e-6, 2e-6)
        assert disp == pytest.approx((1e-3, 0, 0), abs=1e-18)

    def test_rest_state_persists(self):
        disp = langevin_step((0.3, 0.1, 0), (0.3, 0.1, 0), (0, 0, 0), 1e-6, 5e-6)
        assert disp == pytest.approx((0, 0, 0), abs=0)

    def test_rejects_bad_relaxation_time(self):
        with pytest.raises(ValidationError):
            langevin_step((0, 0, 0), (0, 0, 0), (0, 0, 0), 1e-6, 0.0)
