"""Post-processing of walk ensembles.

Relative errors against the closed-form predictions, boundary-shell time
fractions, isotropic-vs-anisotropic comparisons, and the table rows the
CLI serializes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from .asymptotics import AsymptoticModel
from .engine import EnsembleStats, WalkResult
from .errors import ValidationError


@dataclass(frozen=True)
class ComparisonRow:
    """Simulated vs asymptotic escape time for one launch point."""

    launch: Tuple[float, float, float]
    simulated: float
    asymptotic: float
    delta_v_pct: float
    stderr: float
    n_walks: int
    n_excluded: int = 0


@dataclass(frozen=True)
class BoundaryTimeRow:
    """Boundary-time fractions for one launch point."""

    launch: Tuple[float, float, float]
    deltas: Tuple[float, ...]
    tau: Tuple[float, ...]
    tau_stderr: Tuple[float, ...]
    volume_fractions: Tuple[float, ...]
    mode: str
    n_walks: int


def relative_error(asymptotic: float, simulated: float) -> float:
    """Relative percentage error |v - vB| / v * 100."""
    if asymptotic <= 0.0:
        raise ValidationError(
            "reference value must be > 0, got %r" % (asymptotic,)
        )
    return abs(asymptotic - simulated) / asymptotic * 100.0


def relative_boundary_time(tau_iso: float, tau_aniso: float) -> float:
    """Relative percentage boundary-time difference
    |tau_iso - tau_aniso| / tau_iso * 100."""
    if tau_iso <= 0.0:
        raise ValidationError("isotropic tau must be > 0, got %r" % (tau_iso,))
    return abs(tau_iso - tau_aniso) / tau_iso * 100.0


def layer_volume_fraction(delta: float) -> float:
    """Volume fraction of the wall shell of thickness ``delta`` in the
    unit ball: 1 - (1 - delta)^3."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError("layer thickness must be in (0, 1], got %r" % (delta,))
    return 1.0 - (1.0 - delta) ** 3


def boundary_fraction(
    result: Union[WalkResult, EnsembleStats, Sequence[WalkResult]],
    delta: float,
    pooled: bool = False,
) -> float:
    """Fraction of walk time spent in the shell of thickness ``delta``.

    For a single walk this is T_delta / T (undefined for zero-duration
    walks).  For an ensemble it is the mean of per-walk ratios; with
    ``pooled=True`` the diagnostic total-T_delta over total-T is returned
    instead (only available when recomputing from a walk sequence).
    """
    if isinstance(result, EnsembleStats):
        if pooled:
            raise ValidationError(
                "pooled fraction needs the individual walks, not aggregated stats"
            )
        return result.tau[result.deltas.index(delta)]
    if isinstance(result, WalkResult):
        if result.steps == 0:
            raise ValidationError("zero-duration walk has no boundary fraction")
        i = result.deltas.index(delta)
        return result.boundary_steps[i] / result.steps
    walks = [w for w in result if w.steps > 0]
    if not walks:
        raise ValidationError("no walks of positive duration")
    i = walks[0].deltas.index(delta)
    if pooled:
        total_in = sum(w.boundary_steps[i] for w in walks)
        total = sum(w.steps for w in walks)
        return total_in / total
    acc = 0.0
    for w in walks:
        acc += w.boundary_steps[i] / w.steps
    return acc / len(walks)


def build_comparison(
    stats: Sequence[EnsembleStats], model: AsymptoticModel
) -> List[ComparisonRow]:
    """Join simulated means with the asymptotic field, one row per launch."""
    rows: List[ComparisonRow] = []
    for s in stats:
        v = model.field(s.start)
        rows.append(
            ComparisonRow(
                launch=s.start,
                simulated=s.mean_escape_time,
                asymptotic=v,
                delta_v_pct=relative_error(v, s.mean_escape_time),
                stderr=s.stderr_escape_time,
                n_walks=s.n_walks,
                n_excluded=s.n_excluded,
            )
        )
    return rows


def build_boundary_rows(
    stats: Sequence[EnsembleStats], mode: str
) -> List[BoundaryTimeRow]:
    """One boundary-time row per launch."""
    rows: List[BoundaryTimeRow] = []
    for s in stats:
        rows.append(
            BoundaryTimeRow(
                launch=s.start,
                deltas=s.deltas,
                tau=s.tau,
                tau_stderr=s.tau_stderr,
                volume_fractions=tuple(layer_volume_fraction(d) for d in s.deltas),
                mode=mode,
                n_walks=s.n_walks,
            )
        )
    return rows


def average_tau(stats: Sequence[EnsembleStats], delta: float) -> float:
    """Unweighted mean of per-launch tau values, as in the table footers."""
    if not stats:
        raise ValidationError("no ensembles to average")
    acc = 0.0
    for s in stats:
        acc += s.tau[s.deltas.index(delta)]
    return acc / len(stats)
