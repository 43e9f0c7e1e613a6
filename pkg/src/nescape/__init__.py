"""First-passage Monte Carlo for Brownian particles in the unit sphere
with absorbing surface traps, plus closed-form matched-asymptotic mean
first passage times to validate against.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticModel,
    avg_mfpt_identical,
    avg_mfpt_two_sizes,
    green_sphere,
    interaction_energy,
    mfpt_field,
    mfpt_grid,
    pairwise_interaction,
    self_interaction,
)
from .engine import (
    EnsembleStats,
    WalkConfig,
    WalkResult,
    run_campaign,
    run_ensemble,
    run_walk,
)
from .errors import (
    NescapeError,
    NonEscapeError,
    PathologyError,
    SingularityError,
    ValidationError,
)
from .geometry import (
    ReflectionOutcome,
    TrapConfiguration,
    boundary_intersection,
    in_boundary_layer,
    is_escaped,
    reflect_step,
    rotation_matrix_180,
)
from .manifest import RunManifest, parse_manifest
from .stats import (
    boundary_fraction,
    build_comparison,
    relative_boundary_time,
    relative_error,
)
from .stepping import (
    DiffusionSpec,
    RngStream,
    anisotropic_factors,
    langevin_step,
    scale_step_anisotropic,
    wiener_step,
)
