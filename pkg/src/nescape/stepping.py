"""Stochastic displacement generation.

Isotropic Gaussian steps, near-wall anisotropic rescaling for a particle
of finite radius, and an optional velocity-relaxation (second-order
difference) integrator.  The step-variance and anisotropic-scaling
conventions are explicit knobs on :class:`DiffusionSpec` because the two
natural readings differ; defaults are the physically standard ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ValidationError

#: Modes / conventions accepted by DiffusionSpec.
MODES = ("isotropic", "anisotropic")
SCALINGS = ("sqrt", "linear")
VARIANCES = ("standard", "paper")


@dataclass(frozen=True)
class DiffusionSpec:
    """Diffusion model parameters for the walk.

    diffusivity      isotropic diffusion constant D (dimensionless).
    dt               time step (dimensionless).
    mode             "isotropic" or "anisotropic" (near-wall hindered mobility).
    particle_radius  particle radius a used by the anisotropic factors.
    boundary_factor  multiple of a defining the hindered layer width.
    scaling          how mobility factors hit the displacement:
                     "sqrt" multiplies components by sqrt(f) (diffusivity
                     scales variance), "linear" multiplies by f directly.
    variance         per-component step std: "standard" -> sqrt(2 D dt),
                     "paper" -> sqrt(3 D dt) compatibility convention.
    """

    diffusivity: float = 1.0
    dt: float = 6e-6
    mode: str = "isotropic"
    particle_radius: float = 1e-3
    boundary_factor: float = 22.5
    scaling: str = "sqrt"
    variance: str = "standard"

    def __post_init__(self):
        if self.diffusivity <= 0.0:
            raise ValidationError("diffusivity must be > 0, got %r" % (self.diffusivity,))
        if self.dt <= 0.0:
            raise ValidationError("dt must be > 0, got %r" % (self.dt,))
        if self.particle_radius <= 0.0:
            raise ValidationError(
                "particle_radius must be > 0, got %r" % (self.particle_radius,)
            )
        if self.boundary_factor <= 0.0:
            raise ValidationError(
                "boundary_factor must be > 0, got %r" % (self.boundary_factor,)
            )
        if self.particle_radius * self.boundary_factor >= 1.0:
            raise ValidationError(
                "hindered layer a*boundary_factor = %.6g must be < 1 (the sphere radius)"
                % (self.particle_radius * self.boundary_factor)
            )
        if self.mode not in MODES:
            raise ValidationError("mode must be one of %s, got %r" % (MODES, self.mode))
        if self.scaling not in SCALINGS:
            raise ValidationError(
                "scaling must be one of %s, got %r" % (SCALINGS, self.scaling)
            )
        if self.variance not in VARIANCES:
            raise ValidationError(
                "variance must be one of %s, got %r" % (VARIANCES, self.variance)
            )

    @property
    def step_sigma(self) -> float:
        """Per-component standard deviation of one Gaussian step."""
        if self.variance == "standard":
            return math.sqrt(2.0 * self.diffusivity * self.dt)
        return math.sqrt(3.0 * self.diffusivity * self.dt)

    @property
    def layer_width(self) -> float:
        """Wall distance below which anisotropic scaling is applied."""
        return self.particle_radius * self.boundary_factor


class RngStream:
    """A seeded, single-owner random stream.

    Wraps a PCG64 bit generator; equal seeds yield identical draw
    sequences.  The walk engine gives every walk its own stream
    (seed = base_seed + walk_index) so results never depend on worker
    scheduling.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.bit_generator = np.random.PCG64(self.seed)
        self.generator = np.random.Generator(self.bit_generator)

    def standard_normal(self, *shape) -> np.ndarray:
        return self.generator.standard_normal(shape or None)


def wiener_step(rng: RngStream, spec: DiffusionSpec) -> np.ndarray:
    """Draw one Gaussian displacement vector.

    Components are independent N(0, sigma^2) with sigma =
    ``spec.step_sigma``.
    """
    return spec.step_sigma * rng.standard_normal(3)


def anisotropic_factors(z: float, a: float) -> Tuple[float, float]:
    """Hindered-mobility factors for a sphere of radius ``a`` whose center
    is at distance ``z`` from a flat wall.

    Returns ``(f_par, f_perp)``, the ratios of the parallel and
    perpendicular diffusivities to the bulk value, from the truncated
    far-field series in a/z.  ``z`` below contact (z < a) is clamped to
    contact; ``z <= 0`` is rejected.
    """
    z = float(z)
    a = float(a)
    if a <= 0.0:
        raise ValidationError("particle radius must be > 0, got %r" % (a,))
    if z <= 0.0:
        raise ValidationError("wall distance must be > 0, got %r" % (z,))
    if z < a:
        z = a
    r = a / z
    r3 = r * r * r
    f_par = 1.0 - 0.5625 * r + 0.125 * r3 - (45.0 / 256.0) * r3 * r - 0.0625 * r3 * r * r
    f_perp = 1.0 - 1.125 * r + 0.5 * r3
    return f_par, f_perp


def scale_step_anisotropic(step, x, spec: DiffusionSpec) -> np.ndarray:
    """Rescale a displacement near the wall by the hindered-mobility factors.

    Outside the layer (wall distance >= ``spec.layer_width``) the step is
    returned unchanged.  Inside, the component along the outward radial
    direction at ``x`` is multiplied by g(f_perp) and the tangential
    remainder by g(f_par), with g = sqrt or identity per ``spec.scaling``.
    """
    step = np.asarray(step, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    r = float(np.sqrt(x @ x))
    z = 1.0 - r
    if z < spec.particle_radius:
        z = spec.particle_radius
    if z >= spec.layer_width:
        return step.copy()
    f_par, f_perp = anisotropic_factors(z, spec.particle_radius)
    if spec.scaling == "sqrt":
        g_par, g_perp = math.sqrt(f_par), math.sqrt(f_perp)
    else:
        g_par, g_perp = f_par, f_perp
    nhat = x / r
    radial = float(step @ nhat) * nhat
    tangential = step - radial
    return g_perp * radial + g_par * tangential


def langevin_step(x_n, x_prev, dstep_prev, dt: float, tau_relax: float) -> np.ndarray:
    """Displacement of the velocity-relaxation second-order scheme.

    Given the current and previous positions and the previous Gaussian
    draw, returns x_{n+1} - x_n:

        (1 - dt/tau) * (x_n - x_prev) + (dt/tau) * dstep_prev

    With dt = tau this collapses to plain Gaussian stepping.
    """
    if tau_relax <= 0.0:
        raise ValidationError("tau_relax must be > 0, got %r" % (tau_relax,))
    x_n = np.asarray(x_n, dtype=np.float64)
    x_prev = np.asarray(x_prev, dtype=np.float64)
    dstep_prev = np.asarray(dstep_prev, dtype=np.float64)
    beta = dt / tau_relax
    return (1.0 - beta) * (x_n - x_prev) + beta * dstep_prev
