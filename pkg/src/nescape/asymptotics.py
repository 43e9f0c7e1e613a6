"""Matched-asymptotic mean first passage times for the unit sphere.

Closed-form evaluation of the surface Neumann Green's function, trap
interaction energies, the averaged MFPT for N well-separated circular
surface windows (identical radii, two radius classes, and the general
capacitance-vector route), and the MFPT field in the outer region.

All evaluators are deterministic pure functions in 64-bit floats; the
truncation error of the expansions, O(eps log eps), dwarfs arithmetic
error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import SingularityError, ValidationError
from .geometry import TOL, TrapConfiguration

#: Volume of the unit ball.
SPHERE_VOLUME = 4.0 * math.pi / 3.0

#: Self-interaction (regular part of the Green's function on the
#: diagonal): -9/(20 pi), a constant on the unit sphere.
SELF_INTERACTION = -9.0 / (20.0 * math.pi)

#: Multiple of the trap radius within which field evaluations are flagged
#: as inside (or too near) the boundary-layer region of a window, where
#: the outer expansion loses validity.
NEAR_TRAP_FACTOR = 5.0


def _unit3(v, what: str) -> np.ndarray:
    out = np.asarray(v, dtype=np.float64).reshape(3)
    n = float(np.sqrt(out @ out))
    if abs(n - 1.0) > TOL:
        raise ValidationError("%s must be a unit vector, got norm %.17g" % (what, n))
    return out


def green_sphere(x, xi) -> float:
    """Surface Neumann Green's function of the unit sphere.

    ``xi`` lies on the sphere, ``x`` anywhere in the closed ball except
    ``xi`` itself.  Depends only on |x|, |x - xi| and the angle between
    the two vectors, hence is invariant under joint rotations.
    """
    x = np.asarray(x, dtype=np.float64).reshape(3)
    xi = _unit3(xi, "green_sphere source point")
    diff = x - xi
    d = float(np.sqrt(diff @ diff))
    if d < TOL:
        raise SingularityError("green_sphere evaluated at its singular point")
    xnorm2 = float(x @ x)
    cosdot = float(x @ xi)  # |x| cos(gamma)
    return (
        1.0 / (2.0 * math.pi * d)
        + (xnorm2 + 1.0) / (8.0 * math.pi)
        + math.log(2.0 / (1.0 - cosdot + d)) / (4.0 * math.pi)
        - 7.0 / (10.0 * math.pi)
    )


def self_interaction() -> float:
    """Regular part of the Green's function at coincident surface points."""
    return SELF_INTERACTION


def pairwise_interaction(x_i, x_j) -> float:
    """Pairwise trap interaction energy h for two surface points.

    Symmetric, depends only on the chord distance; singular for
    coincident points.
    """
    a = _unit3(x_i, "first center")
    b = _unit3(x_j, "second center")
    d = float(np.sqrt((a - b) @ (a - b)))
    if d < TOL:
        raise SingularityError("pairwise interaction of coincident centers")
    return 1.0 / d - 0.5 * math.log(d) - 0.5 * math.log(2.0 + d)


def interaction_energy(centers: Sequence) -> float:
    """Sum of pairwise interaction energies over unordered center pairs."""
    pts = [np.asarray(c, dtype=np.float64).reshape(3) for c in centers]
    total = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            total += pairwise_interaction(pts[i], pts[j])
    return total


def capacitance(a: float) -> float:
    """Electrostatic capacitance of a circular window of radius ``a``."""
    return 2.0 * a / math.pi


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must be in (0, 1), got %r" % (eps,))


def avg_mfpt_identical(n_traps: int, eps: float, diffusivity: float, centers: Sequence) -> float:
    """Averaged MFPT for ``n_traps`` identical circular windows of angular
    radius ``eps`` centered at ``centers``."""
    _check_eps(eps)
    if n_traps < 1:
        raise ValidationError("need at least one trap, got %d" % n_traps)
    if len(centers) != n_traps:
        raise ValidationError(
            "expected %d centers, got %d" % (n_traps, len(centers))
        )
    energy = interaction_energy(centers)
    bracket = (
        1.0
        + (eps / math.pi) * math.log(2.0 / eps)
        + (eps / math.pi)
        * (
            -9.0 * n_traps / 5.0
            + 2.0 * (n_traps - 2) * math.log(2.0)
            + 1.5
            + (4.0 / n_traps) * energy
        )
    )
    return SPHERE_VOLUME / (4.0 * eps * diffusivity * n_traps) * bracket


def avg_mfpt_two_sizes(
    n_pairs: int, alpha: float, eps: float, diffusivity: float, centers: Sequence
) -> float:
    """Averaged MFPT for two window-size classes.

    ``centers`` holds 2*n_pairs surface points: the first ``n_pairs``
    windows have angular radius ``eps`` and the rest ``eps * alpha``.
    At ``alpha = 1`` this coincides with :func:`avg_mfpt_identical` on the
    doubled configuration.
    """
    _check_eps(eps)
    if alpha <= 0.0:
        raise ValidationError("alpha must be > 0, got %r" % (alpha,))
    if n_pairs < 1:
        raise ValidationError("need at least one pair, got %d" % n_pairs)
    if len(centers) != 2 * n_pairs:
        raise ValidationError(
            "expected %d centers, got %d" % (2 * n_pairs, len(centers))
        )
    pts = [np.asarray(c, dtype=np.float64).reshape(3) for c in centers]
    n = n_pairs
    energy = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            energy += pairwise_interaction(pts[i], pts[j])
    cross = 0.0
    for i in range(n):
        for j in range(n, 2 * n):
            cross += pairwise_interaction(pts[i], pts[j])
    energy += alpha * cross
    small = 0.0
    for i in range(n, 2 * n):
        for j in range(i + 1, 2 * n):
            small += pairwise_interaction(pts[i], pts[j])
    energy += alpha * alpha * small

    one_alpha = 1.0 + alpha
    ratio = (1.0 + alpha * alpha) / one_alpha
    s_const = (
        -1.8 * n * one_alpha
        + 2.0 * math.log(2.0) * ((n - 2) * one_alpha + 4.0 * alpha / one_alpha)
        + 1.5 * ratio
        - (alpha * alpha / one_alpha) * math.log(alpha)
    )
    bracket = (
        1.0
        + (eps / math.pi) * math.log(2.0 / eps) * ratio
        + (eps / math.pi) * (s_const + (4.0 / (n * one_alpha)) * energy)
    )
    return SPHERE_VOLUME / (4.0 * eps * diffusivity * n * one_alpha) * bracket


@dataclass(frozen=True)
class FieldGrid:
    """MFPT field sampled on an (r, phi) polar grid in a coordinate plane."""

    r_values: Tuple[float, ...]
    phi_values: Tuple[float, ...]
    values: np.ndarray        # shape (len(r_values), len(phi_values)), row-major
    near_trap: np.ndarray     # bool mask, same shape
    plane: str = "xz"


class AsymptoticModel:
    """Trap arrangement plus everything derived from it.

    Parameters
    ----------
    centers : sequence of unit 3-vectors
        Window centers on the sphere.
    radii : sequence of float
        Per-window radius scale factors a_j; window j has angular radius
        ``eps * a_j``.
    eps : float
        Common small radius scale, in (0, 1).
    diffusivity : float
        Bulk diffusion constant D.

    The averaged MFPT is computed through the general capacitance-vector
    route (quadratic form of the Green's matrix), which reduces to the
    printed identical-radius and two-size series; the field evaluator
    combines it with the Green's function sum.
    """

    def __init__(self, centers, radii, eps: float, diffusivity: float = 1.0):
        _check_eps(eps)
        if diffusivity <= 0.0:
            raise ValidationError("diffusivity must be > 0, got %r" % (diffusivity,))
        self.centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
        self.radii = np.asarray(radii, dtype=np.float64).reshape(-1)
        if self.centers.shape[0] != self.radii.shape[0]:
            raise ValidationError(
                "got %d centers but %d radii"
                % (self.centers.shape[0], self.radii.shape[0])
            )
        if self.centers.shape[0] < 1:
            raise ValidationError("need at least one trap")
        if np.any(self.radii <= 0.0):
            raise ValidationError("radius scale factors must be > 0")
        for i, c in enumerate(self.centers):
            _unit3(c, "trap center %d" % i)
        self.eps = float(eps)
        self.diffusivity = float(diffusivity)
        self.n_traps = self.centers.shape[0]

        self.capacitances = 2.0 * self.radii / math.pi
        self.mean_capacitance = float(np.mean(self.capacitances))
        self.kappas = (self.capacitances / 2.0) * (
            2.0 * math.log(2.0) - 1.5 + np.log(self.radii)
        )
        self.greens_matrix = self._build_greens_matrix()

    def _build_greens_matrix(self) -> np.ndarray:
        n = self.n_traps
        g = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            g[i, i] = SELF_INTERACTION
            for j in range(i + 1, n):
                gij = green_sphere(self.centers[i], self.centers[j])
                g[i, j] = gij
                g[j, i] = gij
        return g

    @classmethod
    def from_traps(
        cls, traps: TrapConfiguration, eps: float, diffusivity: float = 1.0
    ) -> "AsymptoticModel":
        """Build a model from a trap configuration whose angular radii are
        interpreted as eps * a_j."""
        radii = [r / eps for r in traps.radii]
        return cls(list(traps.centers), radii, eps, diffusivity)

    @classmethod
    def one_trap(cls, eps: float = 0.01, diffusivity: float = 1.0) -> "AsymptoticModel":
        return cls([(0.0, 0.0, 1.0)], [1.0], eps, diffusivity)

    @classmethod
    def two_trap(cls, eps: float = 0.01, diffusivity: float = 1.0) -> "AsymptoticModel":
        return cls([(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)], [1.0, 1.0], eps, diffusivity)

    def interaction_quadratic_form(self) -> float:
        """p_c: the capacitance vector contracted with the Green's matrix."""
        return float(self.capacitances @ self.greens_matrix @ self.capacitances)

    def avg_mfpt(self) -> float:
        """Averaged MFPT through the general capacitance-vector route."""
        n = self.n_traps
        cbar = self.mean_capacitance
        eps = self.eps
        sum_c2 = float(self.capacitances @ self.capacitances)
        sum_ck = float(self.capacitances @ self.kappas)
        p_c = self.interaction_quadratic_form()
        bracket = (
            1.0
            + eps * math.log(2.0 / eps) * sum_c2 / (2.0 * n * cbar)
            + (2.0 * math.pi * eps / (n * cbar)) * p_c
            - (eps / (n * cbar)) * sum_ck
        )
        return SPHERE_VOLUME / (2.0 * math.pi * eps * self.diffusivity * n * cbar) * bracket

    def near_trap(self, x) -> bool:
        """Whether ``x`` lies within NEAR_TRAP_FACTOR window radii (chord
        distance) of some window center, where the outer expansion is
        unreliable."""
        x = np.asarray(x, dtype=np.float64).reshape(3)
        for center, a in zip(self.centers, self.radii):
            d = float(np.linalg.norm(x - center))
            if d < NEAR_TRAP_FACTOR * self.eps * a:
                return True
        return False

    def field(self, x) -> float:
        """MFPT field v(x) in the outer region.

        Valid to O(eps log eps) away from the windows; raises
        :class:`SingularityError` at a window center.
        """
        x = np.asarray(x, dtype=np.float64).reshape(3)
        n = float(np.sqrt(x @ x))
        if n > 1.0 + TOL:
            raise ValidationError("field point outside the ball: |x| = %.17g" % n)
        total = 0.0
        for center, c in zip(self.centers, self.capacitances):
            total += c * green_sphere(x, center)
        coeff = SPHERE_VOLUME / (self.diffusivity * self.n_traps * self.mean_capacitance)
        return self.avg_mfpt() - coeff * total


def mfpt_field(model: AsymptoticModel, x) -> float:
    """Functional form of :meth:`AsymptoticModel.field`."""
    return model.field(x)


def polar_point(r: float, phi: float, plane: str = "xz") -> Tuple[float, float, float]:
    """Map a polar launch/grid coordinate to Cartesian.

    In the "xz" plane: (r sin(phi), 0, r cos(phi)), so phi = 0 points at
    the north pole.
    """
    if plane != "xz":
        raise ValidationError("only the xz plane is supported, got %r" % (plane,))
    return (r * math.sin(phi), 0.0, r * math.cos(phi))


def mfpt_grid(
    model: AsymptoticModel,
    r_values: Sequence[float],
    phi_values: Sequence[float],
    plane: str = "xz",
) -> FieldGrid:
    """Evaluate the MFPT field on an (r, phi) grid.

    Raises :class:`SingularityError` naming the grid point if one falls on
    a window center; points merely close to a window are flagged in the
    ``near_trap`` mask instead.
    """
    r_values = tuple(float(r) for r in r_values)
    phi_values = tuple(float(p) for p in phi_values)
    values = np.empty((len(r_values), len(phi_values)), dtype=np.float64)
    mask = np.zeros_like(values, dtype=bool)
    for i, r in enumerate(r_values):
        for j, phi in enumerate(phi_values):
            point = polar_point(r, phi, plane)
            try:
                values[i, j] = model.field(point)
            except SingularityError:
                raise SingularityError(
                    "grid point (r=%.6g, phi=%.6g) coincides with a trap center"
                    % (r, phi)
                )
            mask[i, j] = model.near_trap(point)
    return FieldGrid(r_values, phi_values, values, mask, plane)
