"""Finite interpolation by analytic self-maps of the disc: checks and construction."""

from .geometry import (
    CircleArc,
    DomainError,
    Model,
    ModelMismatchError,
    ModelPoint,
    cayley,
    disc_point,
    geodesic_interpolate,
    halfplane_point,
    hyp_distance,
    hyperbolic_area_disc,
    pseudo_distance,
    stolz_projection,
)
from .dyadic import (
    CarlesonBox,
    DyadicInterval,
    IntervalFamily,
    box_geometry,
    generation_count,
    lemma2_cover,
    locate,
    nested_center_gap,
)
from .conditions import (
    AnalysisReport,
    DensityParams,
    InterpolationInstance,
    analyze,
    best_split_threshold,
    carleson_intensity,
    compatibility_ratio,
    density_check,
    necessity_witness,
    pick_matrix_psd,
    separation_constant,
    split_two_separated,
)
from .covering import IntermediateFamily, build_intermediate, verify_intermediate
from .barycenter import (
    BarycenterResult,
    StepMap,
    WeightedPointSet,
    barycenter,
    contraction_check,
    karcher_value,
    reshetnyak_slack,
)
from .builder import (
    PiecewiseInterpolant,
    SmoothInterpolant,
    augment_sundberg,
    build_phi_t,
    build_smooth,
    carleson_norm,
    smooth_phi_eval,
    tent_eval,
    thin_wellseparated,
    tree_extend_values,
    verify_interpolation_constancy,
)
from .correction import (
    BoundaryFunction,
    GridFunction,
    JonesSolver,
    SourceCells,
    StepBoundary,
    blaschke,
    bmo_norm,
    jones_dbar_solve,
    outer_function,
    poisson_integral,
)
from .pipeline import CombineResult, ConstructionResult, RunConfig, combine_two_sequences, construct

__all__ = [name for name in dir() if not name.startswith("_")]
