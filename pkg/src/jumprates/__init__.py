"""Convergence-rate estimation workbench for advection schemes with jump data."""

from .grid import (
    DomainMismatchError,
    Grid1D,
    GridFunction1D,
    JumpIC,
    coincident_difference,
    common_subgrid,
    l1_norm,
    make_jump_function,
    write_grid_function_csv,
)
from .harness import (
    DEFAULT_RATIOS,
    ExperimentConfig,
    SmoothRow,
    TableRow,
    config_from_mapping,
    jump_rows_csv,
    jump_rows_table,
    load_config_file,
    run_jump_table,
    run_smooth_table,
    smooth_rows_csv,
)
from .richardson import (
    COARSE_MIDDLE,
    ORDERINGS,
    SUCCESSIVE,
    WIDE_MIDDLE,
    IndeterminateRateError,
    NoValidRateError,
    RateEstimate,
    RefinementTriple,
    estimate_all_orderings,
    format_rate_table,
    norm_ratio,
    read_rates_csv,
    solve_rate,
    write_rates_csv,
)
from .schemes import (
    FOOTPRINTS,
    SCHEME_KINDS,
    SCHEME_ORDER,
    SchemeSpec,
    StabilityError,
    StencilFootprint,
    integrate_to,
    minmod,
    smooth_convergence_order,
    step,
)
from .similarity import (
    DegenerateProfileError,
    Hyp1F2Result,
    PrecisionLossError,
    RatioResult,
    ScaledFrame,
    SimilarityProfile,
    TailTruncationError,
    erf_profile,
    first_order_norm_gap,
    godunov2_profile,
    godunov2_similarity_profile,
    hyp1f2,
    scaled_frame_difference,
    scaled_ratio_quadrature,
)

__version__ = "0.1.0"
