import json
import math

import pytest

from nescape.errors import ValidationError
from nescape.manifest import (
    PAPER_ANGLES,
    PAPER_RADII,
    parse_manifest,
    parse_manifest_data,
    polar_launch,
)


class TestDefaults:
    def test_empty_file_gives_pure_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        m = parse_manifest(path)
        assert m.preset == "one-trap"
        assert m.traps.label == "one-trap"
        assert m.epsilon == 0.01
        assert m.diffusion.dt == 6e-6
        assert m.diffusion.diffusivity == 1.0
        assert m.n_walks == 10_000
        assert m.base_seed == 0
        assert m.deltas == (0.1, 0.01)
        assert m.launches == ((0.0, 0.0, 0.0),)
        assert m.integrator == "wiener"
        assert m.reflection == "project"

    def test_empty_object_same_as_empty_file(self, tmp_path):
        a = tmp_path / "a.json"
        a.write_text("{}")
        b = tmp_path / "b.json"
        b.write_text("")
        assert parse_manifest(a) == parse_manifest(b)


class TestValidation:
    def test_epsilon_out_of_range_flagged_before_compute(self):
        with pytest.raises(ValidationError, match="epsilon"):
            parse_manifest_data({"epsilon": 1.5})

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError, match="walkz"):
            parse_manifest_data({"walkz": 3})

    def test_bad_launch_named(self):
        with pytest.raises(ValidationError, match="launches"):
            parse_manifest_data({"launches": [[0, 0, 2.0]]})

    def test_langevin_needs_tau(self):
        with pytest.raises(ValidationError, match="tau_relax"):
            parse_manifest_data({"integrator": "langevin"})

    def test_bad_json_reported(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="JSON"):
            parse_manifest(path)

    def test_bad_diffusion_named(self):
        with pytest.raises(ValidationError, match="diffusion"):
            parse_manifest_data({"diffusion": {"D": -1}})

    def test_bad_preset(self):
        with pytest.raises(ValidationError, match="preset"):
            parse_manifest_data({"preset": "three-trap"})

    def test_bad_reflection(self):
        with pytest.raises(ValidationError, match="reflection"):
            parse_manifest_data({"reflection": "bounce"})

    def test_overlapping_explicit_traps(self):
        with pytest.raises(ValidationError, match="traps"):
            parse_manifest_data(
                {"traps": {"centers": [[0, 0, 1], [0, 0, 1]], "radii": [0.01, 0.01]}}
            )


class TestLaunchGrids:
    def test_paper_grid_one_trap_is_36_points(self):
        m = parse_manifest_data({"preset": "one-trap", "launch_grid": "paper"})
        assert len(m.launches) == 36

    def test_paper_grid_two_trap_is_22_points(self):
        m = parse_manifest_data({"preset": "two-trap", "launch_grid": "paper"})
        assert len(m.launches) == 22

    def test_symmetry_reduction_bounds(self):
        m = parse_manifest_data({"preset": "one-trap", "launch_grid": "paper"})
        # reduced to phi in [0, pi]: all launches have x >= 0
        assert all(p[0] >= -1e-12 for p in m.launches)
        m2 = parse_manifest_data({"preset": "two-trap", "launch_grid": "paper"})
        # two-trap further reduces to phi in [0, pi/2]: z >= 0 too
        assert all(p[0] >= -1e-12 and p[2] >= -1e-12 for p in m2.launches)

    def test_reduction_can_be_disabled(self):
        m = parse_manifest_data(
            {
                "preset": "one-trap",
                "launch_grid": {
                    "r": list(PAPER_RADII),
                    "phi": list(PAPER_ANGLES),
                    "reduce_symmetry": False,
                },
            }
        )
        assert len(m.launches) == 57  # 8 angles x 8 radii, origin deduplicated

    def test_explicit_launches_never_reduced(self):
        pts = [polar_launch(0.5, phi) for phi in PAPER_ANGLES]
        m = parse_manifest_data({"launches": [list(p) for p in pts]})
        assert len(m.launches) == 8

    def test_custom_traps_grid_not_reduced(self):
        m = parse_manifest_data(
            {
                "traps": {"centers": [[0, 0, 1]], "radii": [0.01]},
                "launch_grid": {"r": [0.5], "phi": list(PAPER_ANGLES)},
            }
        )
        assert len(m.launches) == 8

    def test_grid_and_explicit_mutually_exclusive(self):
        with pytest.raises(ValidationError):
            parse_manifest_data(
                {"launches": [[0, 0, 0]], "launch_grid": "paper"}
            )

    def test_launch_coordinates_match_polar_map(self):
        m = parse_manifest_data(
            {"launch_grid": {"r": [0.9], "phi": [math.pi / 4]}}
        )
        x, y, z = m.launches[0]
        assert x == pytest.approx(0.9 * math.sin(math.pi / 4))
        assert y == 0.0
        assert z == pytest.approx(0.9 * math.cos(math.pi / 4))


class TestRoundTrip:
    def test_parse_serialize_parse(self, tmp_path):
        data = {
            "preset": "two-trap",
            "epsilon": 0.02,
            "diffusion": {"mode": "anisotropic", "scaling": "linear"},
            "launch_grid": {"r": [0.0, 0.5], "phi": [0.0, math.pi / 2]},
            "n_walks": 250,
            "base_seed": 42,
            "deltas": [0.2, 0.05],
        }
        m1 = parse_manifest_data(data)
        path = tmp_path / "round.json"
        path.write_text(json.dumps(m1.to_dict()))
        m2 = parse_manifest(path)
        assert m1 == m2
        assert m1.sha256() == m2.sha256()

    def test_hash_changes_with_content(self):
        a = parse_manifest_data({})
        b = parse_manifest_data({"n_walks": 11})
        assert a.sha256() != b.sha256()

    def test_explicit_traps_round_trip(self):
        m1 = parse_manifest_data(
            {"traps": {"centers": [[0, 1, 0]], "radii": [0.05]}}
        )
        m2 = parse_manifest_data(m1.to_dict())
        assert m1.traps.centers == m2.traps.centers
        assert m1.traps.radii == m2.traps.radii
