"""Point vortices and vorticity blobs in simply connected planar domains.

Domains are images of the unit disk under a conformal map; Green's function,
Robin function and their derivatives are transported from the disk.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .analysis import (
    LawFit,
    StationaryReport,
    check_rotation_invariance,
    check_valid,
    classify,
    find_stationary_points,
    fit_log_law,
    fit_power_law,
    locate_unstable_example,
    numerical_univalence,
    peanut_map,
)
from .conformal import (
    ConformalMap,
    DomainModel,
    check_injectivity,
    identity_map,
    normalized_derivatives_at,
    polynomial_map,
    sc_regular_polygon,
)
from .dynamics import (
    BlobState,
    DiagnosticsRecord,
    ExitTimeResult,
    VortexSystem,
    diagnostics,
    hamiltonian,
    init_blob,
    measure_exit_time,
    simulate_point_vortices,
    simulate_single_vortex,
    step_blob,
    step_point_vortices,
    unstable_direction,
    unstable_exit_experiment,
)
from .errors import (
    BoundaryCollision,
    DomainError,
    InversionError,
    PhysicalEvent,
    PreconditionError,
    SearchFailed,
    SingularityError,
    VortexCollapse,
    VortexLabError,
)
from .greens import (
    grad_gamma_x,
    grad_robin,
    green,
    hessian_robin_at_stationary,
    lemdev_ratio,
    robin,
    robin_hessian_fd,
    self_induced_velocities,
    velocity,
)
from .harness import ExperimentConfig, apply_overrides, preset, run, sample_boundary

__all__ = [name for name in dir() if not name.startswith("_")]
