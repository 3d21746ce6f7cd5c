"""Spectral controllability toolkit for the transverse beam equation.

The beam u_tt + u_xxxx = g on (0, 1) with pinned-guided ends diagonalizes
over sin(mu_m x), mu_m = (2m+1) pi/2.  This package computes minimal-energy
controls supported on shrinking windows [xi, xi + 1/n], the limiting point
control v(t) delta_xi at strategic points, and the observability quantities
that make the limit passage work.  All time integrals of the trigonometric
solutions are closed form; quadrature appears only in test oracles.
"""

from .config import ExperimentConfig, initial_state, parse_config
from .dynamics import (
    ControlField,
    TraceSignal,
    duhamel_solve,
    evolve_to_final,
    forced_signals,
    homogeneous_eval,
    homogeneous_signals,
    spatial_overlap,
    spatial_overlap_matrix,
    time_overlap,
    time_overlap_matrices,
    trace,
    trace_dx,
    window_energy,
    window_product_integral,
)
from .errors import (
    ConfigError,
    DegenerateWeightError,
    ForcingGridError,
    InvalidRegionError,
    SingularGramianError,
)
from .hum import (
    ControlProblem,
    Gramian,
    HumDiagnostics,
    NullControlReport,
    assemble_gramian,
    control_energy,
    observed_energy,
    pairing_vector,
    solve_hum,
    synthesize_control,
    verify_null_control,
)
from .limits import (
    ScalingFit,
    ScalingReport,
    SweepRecord,
    SweepResult,
    TestField,
    duality_identity,
    effective_trace,
    pairing_functional,
    scaling_report,
    sweep,
    field_battery,
)
from .modal import (
    D4_V,
    L2_VDUAL,
    V_L2,
    FrequencyTable,
    ModalState,
    SpaceTag,
    f_dual_tag,
    f_tag,
    frequencies,
    function_norm_sq,
    norm,
    norm_sq,
    project,
    reconstruct,
)
from .observability import (
    INVERSE_BOUND_CONSTANT,
    StrategicReport,
    inverse_bound_check,
    observability_constant,
    overlap_kernel,
    strategic_check,
    window_mass,
    window_mass_lower_bound,
    window_mass_table,
)
from .regions import ControlRegion, Internal, Pointwise, region_scale
from .trig import TrigSignal

__version__ = "0.1.0"
