"""Walk engine: single walks, parallel ensembles, launch campaigns.

Walks are embarrassingly parallel; every walk owns the random stream
seeded ``base_seed + walk_index`` and results are aggregated in walk-index
order, so an ensemble is a pure function of (config, n_walks, base_seed)
no matter how many workers run it.  The compiled kernel releases the GIL,
which makes plain threads effective.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NonEscapeError, PathologyError, ValidationError
from .geometry import MAX_BOUNCES, TOL, TrapConfiguration, is_escaped
from .kernels import ABSORBED, BOUNCE_PATHOLOGY, STEP_CAP, get_kernel
from .stepping import DiffusionSpec, RngStream

INTEGRATORS = ("wiener", "langevin")

#: Wall treatments for a step whose endpoint leaves the ball.
#: "project" ends the step on the wall, checking escape at the segment's
#: first sphere crossing and at the normalized endpoint where the
#: particle settles (it then hugs the wall until a draw pulls it back
#: inside); this is the default because it reproduces the reference
#: escape times and above-volume boundary occupancy at the production
#: step size.  "specular" folds the leftover path length back into the
#: ball (escape checked at every contact) and is measure-preserving;
#: at dt = 6e-6 its discrete capture bias against an eps = 0.01 window is
#: ~30% (the window is only ~3 step lengths wide), which the reference
#: values do not show.
REFLECTIONS = ("project", "specular")


@dataclass(frozen=True)
class WalkConfig:
    """Everything one walk needs.

    ``deltas`` lists the wall-shell thicknesses whose occupancy is
    tracked.  ``start`` must be strictly inside the ball, or on the
    boundary inside a trap (immediate absorption).
    """

    start: Tuple[float, float, float]
    traps: TrapConfiguration
    diffusion: DiffusionSpec = DiffusionSpec()
    deltas: Tuple[float, ...] = (0.1, 0.01)
    max_steps: int = 2 ** 33
    integrator: str = "wiener"
    tau_relax: Optional[float] = None
    reflection: str = "project"
    capture_every: int = 0
    capture_max: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        norm = math.sqrt(sum(v * v for v in self.start))
        if norm > 1.0 + TOL:
            raise ValidationError("start outside the ball: |start| = %.17g" % norm)
        if norm >= 1.0 - TOL:
            hit, _ = is_escaped(self.start, self.traps)
            if not hit:
                raise ValidationError(
                    "start on the reflecting boundary outside every trap"
                )
        for d in self.deltas:
            if not 0.0 < d <= 1.0:
                raise ValidationError("layer thickness must be in (0, 1], got %r" % (d,))
        if self.max_steps <= 0:
            raise ValidationError("max_steps must be > 0, got %r" % (self.max_steps,))
        if self.integrator not in INTEGRATORS:
            raise ValidationError(
                "integrator must be one of %s, got %r" % (INTEGRATORS, self.integrator)
            )
        if self.integrator == "langevin":
            if self.tau_relax is None or self.tau_relax <= 0.0:
                raise ValidationError(
                    "langevin integrator needs tau_relax > 0, got %r" % (self.tau_relax,)
                )
        if self.reflection not in REFLECTIONS:
            raise ValidationError(
                "reflection must be one of %s, got %r" % (REFLECTIONS, self.reflection)
            )
        if self.capture_every < 0:
            raise ValidationError("capture_every must be >= 0")

    @property
    def immediate_escape(self) -> Optional[int]:
        """Trap index when the start point itself is absorbing, else None."""
        norm = math.sqrt(sum(v * v for v in self.start))
        if norm >= 1.0 - TOL:
            hit, j = is_escaped(self.start, self.traps)
            if hit:
                return j
        return None

    def draw_sigma(self) -> float:
        """Per-component std of the Gaussian draws fed to the integrator.

        Plain stepping uses the per-step std; the velocity-relaxation
        scheme draws at the relaxation time scale, which collapses to the
        plain value when dt = tau_relax.
        """
        if self.integrator == "langevin":
            k = 2.0 if self.diffusion.variance == "standard" else 3.0
            return math.sqrt(k * self.diffusion.diffusivity * self.tau_relax)
        return self.diffusion.step_sigma


@dataclass(frozen=True)
class WalkResult:
    """Outcome of a single walk."""

    escape_time: float
    steps: int
    trap_index: Optional[int]
    deltas: Tuple[float, ...]
    boundary_steps: Tuple[int, ...]
    absorbed: bool = True
    captured: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def total_time(self) -> float:
        return self.escape_time

    def boundary_time(self, delta: float) -> float:
        """Time spent in the shell of thickness ``delta`` (tracked deltas only)."""
        i = self.deltas.index(delta)
        dt = self.escape_time / self.steps if self.steps else 0.0
        return self.boundary_steps[i] * dt


@dataclass(frozen=True)
class EnsembleStats:
    """Aggregate of an ensemble of walks from one launch point."""

    start: Tuple[float, float, float]
    n_walks: int
    n_escaped: int
    n_excluded: int
    mean_escape_time: float
    stderr_escape_time: float
    deltas: Tuple[float, ...]
    tau: Tuple[float, ...]
    tau_stderr: Tuple[float, ...]
    tau_n: int
    tau_excluded: int
    per_trap_counts: Tuple[int, ...]
    base_seed: int


def _mean_stderr(values: Sequence[float]) -> Tuple[float, float]:
    n = len(values)
    if n == 0:
        return float("nan"), float("nan")
    total = 0.0
    for v in values:
        total += v
    mean = total / n
    if n == 1:
        return mean, float("nan")
    ss = 0.0
    for v in values:
        d = v - mean
        ss += d * d
    return mean, math.sqrt(ss / (n - 1)) / math.sqrt(n)


def run_walk(config: WalkConfig, stream: RngStream, backend: str = "auto") -> WalkResult:
    """Run one walk to absorption.

    Raises :class:`NonEscapeError` (carrying the partial result) when the
    step cap is hit, :class:`PathologyError` on a runaway bounce cascade.
    """
    j = config.immediate_escape
    if j is not None:
        return WalkResult(
            escape_time=0.0,
            steps=0,
            trap_index=j,
            deltas=config.deltas,
            boundary_steps=tuple(0 for _ in config.deltas),
        )
    kernel, _ = get_kernel(backend)
    spec = config.diffusion
    thr2 = np.array([(1.0 - d) * (1.0 - d) for d in config.deltas], dtype=np.float64)
    capture_buf = None
    if config.capture_every > 0:
        rows = min(
            config.capture_max, config.max_steps // config.capture_every + 1
        )
        capture_buf = np.empty((rows, 3), dtype=np.float64)
    status, steps, trap_index, counts, final, n_captured = kernel(
        np.asarray(config.start, dtype=np.float64),
        config.traps.centers_array(),
        config.traps.cos_radii_array(),
        config.draw_sigma(),
        thr2,
        config.max_steps,
        MAX_BOUNCES,
        spec.mode == "anisotropic",
        spec.particle_radius,
        spec.layer_width,
        spec.scaling == "sqrt",
        config.integrator == "langevin",
        (spec.dt / config.tau_relax) if config.integrator == "langevin" else 0.0,
        stream.bit_generator,
        config.capture_every,
        capture_buf,
        1 if config.reflection == "project" else 0,
    )
    captured = None
    if capture_buf is not None:
        captured = capture_buf[:n_captured].copy()
    if status == BOUNCE_PATHOLOGY:
        raise PathologyError(
            "walk with seed %d exceeded %d bounces in one step" % (stream.seed, MAX_BOUNCES)
        )
    result = WalkResult(
        escape_time=steps * spec.dt,
        steps=int(steps),
        trap_index=int(trap_index) if status == ABSORBED else None,
        deltas=config.deltas,
        boundary_steps=tuple(int(c) for c in counts),
        absorbed=status == ABSORBED,
        captured=captured,
    )
    if status == STEP_CAP:
        raise NonEscapeError(
            "walk with seed %d hit the %d-step cap before absorption"
            % (stream.seed, config.max_steps),
            partial=result,
        )
    return result


def _walk_task(config: WalkConfig, seed: int, backend: str):
    try:
        return run_walk(config, RngStream(seed), backend)
    except NonEscapeError as err:
        return err


def aggregate(
    config: WalkConfig, outcomes: Sequence[Union[WalkResult, NonEscapeError]], base_seed: int
) -> EnsembleStats:
    """Fold per-walk outcomes (in walk-index order) into ensemble statistics.

    Non-escaped walks are excluded from all means and counted.  The
    boundary fraction is the mean of per-walk ratios T_delta/T; walks of
    zero duration (immediate absorption) contribute no ratio and are
    counted separately.
    """
    times: List[float] = []
    per_trap = [0] * len(config.traps)
    ratios: List[List[float]] = [[] for _ in config.deltas]
    n_excluded = 0
    tau_excluded = 0
    for out in outcomes:
        if isinstance(out, NonEscapeError):
            n_excluded += 1
            continue
        times.append(out.escape_time)
        if out.trap_index is not None:
            per_trap[out.trap_index] += 1
        if out.steps == 0:
            tau_excluded += 1
            continue
        for m in range(len(config.deltas)):
            ratios[m].append(out.boundary_steps[m] / out.steps)
    mean, stderr = _mean_stderr(times)
    tau = []
    tau_stderr = []
    for m in range(len(config.deltas)):
        t_mean, t_se = _mean_stderr(ratios[m])
        tau.append(t_mean)
        tau_stderr.append(t_se)
    return EnsembleStats(
        start=config.start,
        n_walks=len(outcomes),
        n_escaped=len(times),
        n_excluded=n_excluded,
        mean_escape_time=mean,
        stderr_escape_time=stderr,
        deltas=config.deltas,
        tau=tuple(tau),
        tau_stderr=tuple(tau_stderr),
        tau_n=len(ratios[0]) if config.deltas else 0,
        tau_excluded=tau_excluded,
        per_trap_counts=tuple(per_trap),
        base_seed=base_seed,
    )


def run_ensemble(
    config: WalkConfig,
    n_walks: int,
    base_seed: int = 0,
    workers: Optional[int] = None,
    backend: str = "auto",
) -> EnsembleStats:
    """Run ``n_walks`` independent walks and aggregate.

    Walk i uses seed ``base_seed + i``; aggregation happens in walk-index
    order, so the result is identical for any worker count.
    """
    if n_walks < 1:
        raise ValidationError("n_walks must be >= 1, got %r" % (n_walks,))
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, n_walks))
    seeds = [base_seed + i for i in range(n_walks)]
    if workers == 1:
        outcomes = [_walk_task(config, s, backend) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda s: _walk_task(config, s, backend), seeds))
    return aggregate(config, outcomes, base_seed)


@dataclass(frozen=True)
class CampaignEntry:
    """One launch of a campaign: its config and either stats or the error."""

    config: WalkConfig
    stats: Optional[EnsembleStats]
    error: Optional[Exception] = None


def run_campaign(
    configs: Sequence[WalkConfig],
    n_walks: int,
    base_seed: int = 0,
    workers: Optional[int] = None,
    backend: str = "auto",
) -> List[CampaignEntry]:
    """Run an ensemble per launch config.

    Launch k draws from seeds ``base_seed + k*n_walks ...`` so streams
    never overlap across launches.  A failing launch is recorded and the
    campaign continues.
    """
    if not configs:
        raise ValidationError("campaign needs at least one launch config")
    entries: List[CampaignEntry] = []
    for k, config in enumerate(configs):
        seed_k = base_seed + k * n_walks
        try:
            stats = run_ensemble(config, n_walks, seed_k, workers, backend)
            entries.append(CampaignEntry(config, stats))
        except PathologyError as err:
            entries.append(CampaignEntry(config, None, err))
    return entries
