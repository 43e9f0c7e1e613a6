"""Run manifests: a single JSON document describing a whole run.

A manifest resolves to validated module objects (trap configuration,
diffusion spec, launch list, field grid) before any compute starts, so a
bad field fails fast with a diagnostic naming it.  The resolved form
serializes back to JSON canonically; its SHA-256 is embedded in every
output file for auditability.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import ValidationError
from .geometry import TrapConfiguration
from .stepping import DiffusionSpec

#: Launch-grid radii and spherical angles used throughout the study.
PAPER_RADII = (0.0, 0.1, 0.2, 0.4, 0.6, 0.7, 0.8, 0.9)
PAPER_ANGLES = tuple(k * math.pi / 4.0 for k in range(8))

PRESETS = ("one-trap", "two-trap")

#: Largest spherical angle needed per preset; the trap arrangement is
#: symmetric under phi -> -phi, and the two-trap case also under
#: phi -> pi - phi.
_SYMMETRY_MAX_PHI = {"one-trap": math.pi, "two-trap": math.pi / 2.0}

_DEFAULTS = {
    "preset": "one-trap",
    "epsilon": 0.01,
    "n_walks": 10_000,
    "base_seed": 0,
    "deltas": (0.1, 0.01),
    "max_steps": 2 ** 33,
    "integrator": "wiener",
    "tau_relax": None,
    "reflection": "project",
    "workers": None,
    "out_dir": "nescape-out",
}


def polar_launch(r: float, phi: float) -> Tuple[float, float, float]:
    """Launch coordinate (r sin(phi), 0, r cos(phi)) in the xz plane."""
    return (r * math.sin(phi), 0.0, r * math.cos(phi))


def _field(data: dict, key: str, default):
    value = data.get(key, default)
    return value


def _reject(key: str, why: str):
    raise ValidationError("manifest field %r: %s" % (key, why))


@dataclass(frozen=True)
class RunManifest:
    """Fully resolved, validated run description."""

    preset: Optional[str]
    traps: TrapConfiguration
    epsilon: float
    diffusion: DiffusionSpec
    launches: Tuple[Tuple[float, float, float], ...]
    n_walks: int
    base_seed: int
    deltas: Tuple[float, ...]
    max_steps: int
    integrator: str
    tau_relax: Optional[float]
    reflection: str
    field_grid_r: Tuple[float, ...]
    field_grid_phi: Tuple[float, ...]
    workers: Optional[int]
    out_dir: str

    def to_dict(self) -> dict:
        """Canonical JSON-serializable form (parses back to an equal manifest)."""
        # Preset traps are derivable from (preset, epsilon); only custom
        # configurations serialize the explicit window list.
        traps = None
        if self.preset is None:
            traps = {
                "centers": [list(c) for c in self.traps.centers],
                "radii": list(self.traps.radii),
            }
        return {
            "preset": self.preset,
            "traps": traps,
            "epsilon": self.epsilon,
            "diffusion": {
                "D": self.diffusion.diffusivity,
                "dt": self.diffusion.dt,
                "mode": self.diffusion.mode,
                "particle_radius": self.diffusion.particle_radius,
                "boundary_factor": self.diffusion.boundary_factor,
                "scaling": self.diffusion.scaling,
                "variance": self.diffusion.variance,
            },
            "launches": [list(p) for p in self.launches],
            "n_walks": self.n_walks,
            "base_seed": self.base_seed,
            "deltas": list(self.deltas),
            "max_steps": self.max_steps,
            "integrator": self.integrator,
            "tau_relax": self.tau_relax,
            "reflection": self.reflection,
            "field_grid": {
                "r": list(self.field_grid_r),
                "phi": list(self.field_grid_phi),
            },
            "workers": self.workers,
            "out_dir": self.out_dir,
        }

    def sha256(self) -> str:
        """Hash of the experiment definition.  Where results are written
        and how many threads run them do not change what was computed, so
        out_dir and workers stay out of the hash."""
        data = self.to_dict()
        del data["out_dir"]
        del data["workers"]
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _parse_traps(data: dict, epsilon: float) -> Tuple[Optional[str], TrapConfiguration]:
    preset = _field(data, "preset", None)
    explicit = _field(data, "traps", None)
    if explicit is not None:
        try:
            traps = TrapConfiguration(
                explicit["centers"], explicit["radii"], label="custom"
            )
        except (KeyError, TypeError) as err:
            _reject("traps", "needs 'centers' and 'radii' lists (%s)" % err)
        except ValidationError as err:
            _reject("traps", str(err))
        return None, traps
    if preset is None:
        preset = _DEFAULTS["preset"]
    if preset not in PRESETS:
        _reject("preset", "unknown preset %r, expected one of %s" % (preset, PRESETS))
    try:
        if preset == "one-trap":
            return preset, TrapConfiguration.one_trap(epsilon)
        return preset, TrapConfiguration.two_trap(epsilon)
    except ValidationError as err:
        _reject("epsilon", str(err))


def _parse_diffusion(data: dict) -> DiffusionSpec:
    d = _field(data, "diffusion", {})
    if not isinstance(d, dict):
        _reject("diffusion", "expected an object")
    try:
        return DiffusionSpec(
            diffusivity=float(d.get("D", 1.0)),
            dt=float(d.get("dt", 6e-6)),
            mode=d.get("mode", "isotropic"),
            particle_radius=float(d.get("particle_radius", 1e-3)),
            boundary_factor=float(d.get("boundary_factor", 22.5)),
            scaling=d.get("scaling", "sqrt"),
            variance=d.get("variance", "standard"),
        )
    except ValidationError as err:
        _reject("diffusion", str(err))


def _parse_launches(data: dict, preset: Optional[str]) -> Tuple[Tuple[float, float, float], ...]:
    explicit = _field(data, "launches", None)
    grid = _field(data, "launch_grid", None)
    if explicit is not None and grid is not None:
        _reject("launches", "give either 'launches' or 'launch_grid', not both")
    if explicit is not None:
        out = []
        for i, p in enumerate(explicit):
            if len(p) != 3:
                _reject("launches", "entry %d is not a 3-vector" % i)
            out.append(tuple(float(v) for v in p))
        if not out:
            _reject("launches", "must not be empty")
        return tuple(out)
    if grid is None:
        return ((0.0, 0.0, 0.0),)
    if grid == "paper":
        grid = {"r": list(PAPER_RADII), "phi": list(PAPER_ANGLES)}
    if not isinstance(grid, dict) or "r" not in grid or "phi" not in grid:
        _reject("launch_grid", "expected 'paper' or an object with 'r' and 'phi'")
    radii = [float(r) for r in grid["r"]]
    angles = [float(p) for p in grid["phi"]]
    reduce_symmetry = bool(grid.get("reduce_symmetry", True))
    if reduce_symmetry and preset in _SYMMETRY_MAX_PHI:
        cutoff = _SYMMETRY_MAX_PHI[preset]
        angles = [p for p in angles if p <= cutoff + 1e-12]
    launches: List[Tuple[float, float, float]] = []
    seen = set()
    for r in radii:
        for phi in angles:
            point = polar_launch(r, phi)
            key = tuple(round(v, 12) for v in point)
            if key in seen:
                continue
            seen.add(key)
            launches.append(point)
    if not launches:
        _reject("launch_grid", "produced no launch points")
    return tuple(launches)


def _parse_field_grid(data: dict) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    grid = _field(data, "field_grid", None)
    if grid is None:
        return PAPER_RADII, PAPER_ANGLES
    if not isinstance(grid, dict) or "r" not in grid or "phi" not in grid:
        _reject("field_grid", "expected an object with 'r' and 'phi'")
    return (
        tuple(float(r) for r in grid["r"]),
        tuple(float(p) for p in grid["phi"]),
    )


def parse_manifest_data(data: Optional[dict]) -> RunManifest:
    """Resolve and validate a manifest dictionary (None means all defaults)."""
    data = dict(data or {})
    known = {
        "preset", "traps", "epsilon", "diffusion", "launches", "launch_grid",
        "n_walks", "base_seed", "deltas", "max_steps", "integrator",
        "tau_relax", "reflection", "field_grid", "workers", "out_dir",
    }
    for key in data:
        if key not in known:
            _reject(key, "unknown manifest field")

    epsilon = float(_field(data, "epsilon", _DEFAULTS["epsilon"]))
    if not 0.0 < epsilon < 1.0:
        _reject("epsilon", "must be in (0, 1), got %.6g" % epsilon)
    preset, traps = _parse_traps(data, epsilon)
    diffusion = _parse_diffusion(data)
    launches = _parse_launches(data, preset)

    n_walks = int(_field(data, "n_walks", _DEFAULTS["n_walks"]))
    if n_walks < 1:
        _reject("n_walks", "must be >= 1, got %d" % n_walks)
    base_seed = int(_field(data, "base_seed", _DEFAULTS["base_seed"]))
    deltas = tuple(float(d) for d in _field(data, "deltas", _DEFAULTS["deltas"]))
    for d in deltas:
        if not 0.0 < d <= 1.0:
            _reject("deltas", "entries must be in (0, 1], got %.6g" % d)
    max_steps = int(_field(data, "max_steps", _DEFAULTS["max_steps"]))
    if max_steps < 1:
        _reject("max_steps", "must be >= 1, got %d" % max_steps)
    integrator = _field(data, "integrator", _DEFAULTS["integrator"])
    tau_relax = _field(data, "tau_relax", _DEFAULTS["tau_relax"])
    if tau_relax is not None:
        tau_relax = float(tau_relax)
    if integrator not in ("wiener", "langevin"):
        _reject("integrator", "must be 'wiener' or 'langevin', got %r" % (integrator,))
    if integrator == "langevin" and (tau_relax is None or tau_relax <= 0.0):
        _reject("tau_relax", "langevin integrator needs tau_relax > 0")
    reflection = _field(data, "reflection", _DEFAULTS["reflection"])
    if reflection not in ("project", "specular"):
        _reject("reflection", "must be 'project' or 'specular', got %r" % (reflection,))
    field_r, field_phi = _parse_field_grid(data)
    workers = _field(data, "workers", _DEFAULTS["workers"])
    if workers is not None:
        workers = int(workers)
        if workers < 1:
            _reject("workers", "must be >= 1, got %d" % workers)
    out_dir = str(_field(data, "out_dir", _DEFAULTS["out_dir"]))

    manifest = RunManifest(
        preset=preset,
        traps=traps,
        epsilon=epsilon,
        diffusion=diffusion,
        launches=launches,
        n_walks=n_walks,
        base_seed=base_seed,
        deltas=deltas,
        max_steps=max_steps,
        integrator=integrator,
        tau_relax=tau_relax,
        reflection=reflection,
        field_grid_r=field_r,
        field_grid_phi=field_phi,
        workers=workers,
        out_dir=out_dir,
    )
    _validate_launches(manifest)
    return manifest


def _validate_launches(manifest: RunManifest) -> None:
    # Building the walk configs runs every launch through the engine's
    # precondition checks before any compute happens.
    from .engine import WalkConfig

    for i, launch in enumerate(manifest.launches):
        try:
            WalkConfig(
                start=launch,
                traps=manifest.traps,
                diffusion=manifest.diffusion,
                deltas=manifest.deltas,
                max_steps=manifest.max_steps,
                integrator=manifest.integrator,
                tau_relax=manifest.tau_relax,
                reflection=manifest.reflection,
            )
        except ValidationError as err:
            _reject("launches", "entry %d: %s" % (i, err))


def parse_manifest(path) -> RunManifest:
    """Load and validate a manifest file.

    An empty file is treated as an empty document (all defaults); anything
    else must be a JSON object.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.strip() == "":
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ValidationError("manifest %s is not valid JSON: %s" % (path, err))
    if not isinstance(data, dict):
        raise ValidationError("manifest root must be a JSON object")
    return parse_manifest_data(data)
