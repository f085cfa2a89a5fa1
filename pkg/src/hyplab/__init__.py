"""Numerical laboratory for hyperbolic surface heat kernels.

Layers, bottom up: geometry (upper half plane, isometries), plane_kernel
(plane heat kernel by two routes), collar (collar lemma geometry and
cylinder kernels), fuchsian (cocompact groups, shell sums, heat traces),
spectral (log-determinant assembly and limit laws), harness (experiment
configs and the inequality registry), cli.
"""

from .errors import (
    AccuracyError,
    ConfigError,
    ConsistencyError,
    DomainError,
    HyplabError,
    RangeError,
    ResourceError,
)
from .geometry import (
    Isometry,
    PlanePoint,
    apply,
    axis_translation,
    ball_volume,
    compose,
    dist,
    displacement,
    identity,
    inverse,
    point_to_i,
    rotation_about_i,
)
from .plane_kernel import (
    DEFAULT_CFG,
    KernelEvalConfig,
    dm_envelope,
    p_plane,
    p_plane_array,
    p_plane_diag_spectral,
    p_plane_majorant,
)
from .collar import (
    CollarSpec,
    CylinderPoint,
    LengthSpectrum,
    boundary_inj,
    collar_inj_integrals,
    collar_width,
    cylinder_distance,
    cylinder_heat_diag,
    cylinder_heat_kernel,
    inj_radius_cylinder,
    l_eta,
    translate_distance,
)

from .fuchsian import (
    ShellTable,
    SurfaceGroup,
    TraceEngine,
    ball_at_point,
    bolza_preset,
    enumerate_shells,
    enumerate_words_unpruned,
    heat_trace,
    heat_trace_with_error,
    load_group,
    min_translate,
    packing_count_bound,
    shell_tail_bound,
    surface_heat_diag,
    trace_engine,
)
from .spectral import (
    EULER_GAMMA,
    HeatTraceCurve,
    LimitLaw,
    LogDetResult,
    default_t_grid,
    e_h,
    e_mu,
    large_time_bound_check,
    logdet_assemble,
    lower_bound_check,
    surface_trace_curve,
    trace_diff_cylinder,
)
from .harness import (
    BoundReport,
    ExperimentConfig,
    bound_registry,
    run,
    run_bound,
)

__version__ = "0.1.0"
