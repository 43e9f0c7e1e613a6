"""Unit-sphere domain geometry.

Everything the walk loop needs from the domain: where a displaced particle
crosses the sphere, how it reflects there, whether a wall contact lands in
an absorbing window, and whether a position sits in the near-wall shell.
All functions are pure and operate on plain 3-vectors (any sequence of
three floats); they are the scalar reference implementations mirrored by
the compiled kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import PathologyError, ValidationError

#: Geometric tolerance for unit-norm and path-length checks.  Double
#: precision leaves ~4 orders of magnitude of headroom below the default
#: step size (~4e-3).
TOL = 1e-12

#: Hard cap on wall bounces within a single displacement.  A step short
#: enough to be physical never comes close; hitting the cap means the
#: inputs are pathological.
MAX_BOUNCES = 64

Vec3 = Tuple[float, float, float]


def _as_vec3(x) -> Vec3:
    a, b, c = (float(v) for v in x)
    return (a, b, c)


def _norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@dataclass(frozen=True)
class TrapConfiguration:
    """Absorbing circular windows on the unit sphere.

    Parameters
    ----------
    centers : sequence of unit 3-vectors
        Window centers on the sphere surface.
    radii : sequence of float
        Angular radii (radians), one per center, each in (0, pi).
    label : str
        Optional human-readable name ("one-trap", "two-trap", ...).

    Windows must be pairwise disjoint: the angular separation of any two
    centers has to exceed the sum of their angular radii.
    """

    centers: Tuple[Vec3, ...]
    radii: Tuple[float, ...]
    label: str = ""

    def __init__(self, centers, radii, label: str = ""):
        centers = tuple(_as_vec3(c) for c in centers)
        radii = tuple(float(r) for r in radii)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "label", label)
        self._validate()

    def _validate(self) -> None:
        if len(self.centers) == 0:
            raise ValidationError("trap configuration needs at least one window")
        if len(self.centers) != len(self.radii):
            raise ValidationError(
                "got %d centers but %d radii" % (len(self.centers), len(self.radii))
            )
        for i, c in enumerate(self.centers):
            if abs(_norm(c) - 1.0) > TOL:
                raise ValidationError(
                    "trap center %d has norm %.17g, expected a unit vector"
                    % (i, _norm(c))
                )
        for i, r in enumerate(self.radii):
            if not 0.0 < r < math.pi:
                raise ValidationError(
                    "trap radius %d is %.17g, expected 0 < radius < pi" % (i, r)
                )
        for i in range(len(self.centers)):
            for j in range(i + 1, len(self.centers)):
                cosang = max(-1.0, min(1.0, _dot(self.centers[i], self.centers[j])))
                sep = math.acos(cosang)
                if sep <= self.radii[i] + self.radii[j]:
                    raise ValidationError(
                        "traps %d and %d overlap: separation %.6g <= radii sum %.6g"
                        % (i, j, sep, self.radii[i] + self.radii[j])
                    )

    @classmethod
    def one_trap(cls, eps: float = 0.01) -> "TrapConfiguration":
        """Single window of angular radius ``eps`` at the north pole."""
        return cls([(0.0, 0.0, 1.0)], [eps], label="one-trap")

    @classmethod
    def two_trap(cls, eps: float = 0.01) -> "TrapConfiguration":
        """Equal windows of angular radius ``eps`` at both poles."""
        return cls([(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)], [eps, eps], label="two-trap")

    def centers_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=np.float64)

    def cos_radii_array(self) -> np.ndarray:
        return np.cos(np.asarray(self.radii, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class ReflectionOutcome:
    """Result of pushing one displacement through the reflecting wall."""

    position: Vec3
    bounces: int
    absorbed: bool = False
    trap_index: Optional[int] = None


def boundary_intersection(x, lam) -> Tuple[Vec3, float]:
    """First intersection of the segment x -> x + lam with the unit sphere.

    Returns ``(u, alpha)`` where ``u`` is the contact point on the sphere
    and ``alpha`` the distance traveled along the (normalized) direction,
    so ``u = x + alpha * lam/|lam|`` with ``0 <= alpha <= |lam|``.

    Requires ``|x| < 1``, ``|x + lam| >= 1`` and a non-degenerate ``lam``.
    """
    x = _as_vec3(x)
    lam = _as_vec3(lam)
    lam_norm = _norm(lam)
    if lam_norm < TOL:
        raise ValidationError("degenerate displacement: |lam| = %.3g < tol" % lam_norm)
    xn = _norm(x)
    if xn >= 1.0:
        raise ValidationError("start point has norm %.17g, expected |x| < 1" % xn)
    end = (x[0] + lam[0], x[1] + lam[1], x[2] + lam[2])
    if _norm(end) < 1.0:
        raise ValidationError("segment does not reach the sphere: |x + lam| < 1")
    kappa = _dot(x, lam) / lam_norm
    disc = 1.0 + kappa * kappa - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    # disc > 0 is guaranteed by |x| < 1; the max() only absorbs rounding.
    alpha = math.sqrt(max(disc, 0.0)) - kappa
    inv = 1.0 / lam_norm
    u = (x[0] + alpha * lam[0] * inv, x[1] + alpha * lam[1] * inv, x[2] + alpha * lam[2] * inv)
    return u, alpha


def rotation_matrix_180(u) -> np.ndarray:
    """180-degree rotation matrix about the axis ``u`` (a unit vector).

    Entries are ``2 u_i u_j - delta_ij``; the result is symmetric,
    orthogonal, has determinant +1, and fixes ``u``.
    """
    u = _as_vec3(u)
    if abs(_norm(u) - 1.0) > TOL:
        raise ValidationError("rotation axis has norm %.17g, expected 1" % _norm(u))
    out = 2.0 * np.outer(u, u) - np.eye(3)
    return out


def is_escaped(x, config: TrapConfiguration) -> Tuple[bool, Optional[int]]:
    """Whether a point on the sphere lies inside an absorbing window.

    ``x`` must lie on the sphere (|x| = 1 within tolerance).  A point
    escapes through window ``j`` when its angular distance to the center
    is strictly below the window radius; the first matching index is
    returned.  Points exactly on a rim do not escape.
    """
    x = _as_vec3(x)
    if abs(_norm(x) - 1.0) > TOL:
        raise ValidationError(
            "escape test needs |x| = 1, got %.17g" % _norm(x)
        )
    for j, (c, r) in enumerate(zip(config.centers, config.radii)):
        # acos(<x,c>) < r  <=>  <x,c> > cos(r)  for r in (0, pi)
        if _dot(x, c) > math.cos(r):
            return True, j
    return False, None


def in_boundary_layer(x, delta: float) -> bool:
    """Whether ``x`` lies in the wall shell of thickness ``delta``,
    i.e. ``1 - delta <= |x|``."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError("layer thickness must be in (0, 1], got %r" % (delta,))
    x = _as_vec3(x)
    return _norm(x) >= 1.0 - delta


def reflect_step(x, lam, config: Optional[TrapConfiguration] = None) -> ReflectionOutcome:
    """Advance a particle by displacement ``lam`` with specular wall
    reflections and absorption checks.

    The segment is folded back into the ball as many times as it exits,
    preserving total path length; at every wall contact the escape
    predicate of ``config`` (if given) is evaluated.  On absorption the
    returned position is the contact point itself.

    Raises :class:`PathologyError` after ``MAX_BOUNCES`` reflections
    within this single displacement.
    """
    x = _as_vec3(x)
    lam = _as_vec3(lam)
    if _norm(x) > 1.0 + TOL:
        raise ValidationError("start point outside the ball: |x| = %.17g" % _norm(x))

    dx, dy, dz = lam
    px, py, pz = x
    bounces = 0
    while True:
        nx, ny, nz = px + dx, py + dy, pz + dz
        if nx * nx + ny * ny + nz * nz < 1.0:
            return ReflectionOutcome((nx, ny, nz), bounces)
        lam_norm = math.sqrt(dx * dx + dy * dy + dz * dz)
        if lam_norm < TOL:
            # Zero remaining length with the endpoint numerically on the
            # sphere: settle at the current point.
            return ReflectionOutcome((px, py, pz), bounces)
        kappa = (px * dx + py * dy + pz * dz) / lam_norm
        disc = 1.0 + kappa * kappa - (px * px + py * py + pz * pz)
        alpha = math.sqrt(max(disc, 0.0)) - kappa
        inv = 1.0 / lam_norm
        ux = px + alpha * dx * inv
        uy = py + alpha * dy * inv
        uz = pz + alpha * dz * inv
        if config is not None:
            hit, j = is_escaped((ux, uy, uz), config)
            if hit:
                return ReflectionOutcome((ux, uy, uz), bounces, absorbed=True, trap_index=j)
        bounces += 1
        if bounces > MAX_BOUNCES:
            raise PathologyError(
                "more than %d wall bounces in a single step (|lam| = %.6g)"
                % (MAX_BOUNCES, _norm(lam))
            )
        remaining = lam_norm - alpha
        if remaining <= 1e-15:
            # Consumed the whole segment exactly at the wall.
            return ReflectionOutcome((ux, uy, uz), bounces)
        # Specular bounce: flip the normal component of the unit direction
        # at the contact point (the outward normal there is u itself).
        ddn = (dx * ux + dy * uy + dz * uz) * inv
        rdx = dx * inv - 2.0 * ddn * ux
        rdy = dy * inv - 2.0 * ddn * uy
        rdz = dz * inv - 2.0 * ddn * uz
        dx, dy, dz = remaining * rdx, remaining * rdy, remaining * rdz
        px, py, pz = ux, uy, uz
