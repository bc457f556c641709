"""Exact computations for Riesz potentials of finite point-mass measures.

Everything here works with sums over finitely many atoms, so potentials,
maximal functions, covering constructions, and the inequality scans are
evaluated exactly (up to floating point) rather than by quadrature.
"""

from .measure import (
    Ball,
    CenteredCube,
    CenterPolicy,
    DoublingReport,
    DyadicCube,
    GrowthReport,
    MeasureFormatError,
    OperatorParams,
    PointMassMeasure,
    SampledFunction,
    ScaleRange,
    as_values,
    ball_integral,
    ball_mass,
    cube_integral,
    cube_mass,
    doubling_constant_scan,
    growth_constant_scan,
    load_measure,
    load_points,
    save_measure,
    save_points,
)
from .potentials import (
    DistributionCurve,
    PotentialOptions,
    TreeEvaluator,
    distribution_function,
    fractional_maximal,
    hl_maximal,
    layer_cake_integral,
    lorentz_weak_quasinorm,
    lp_norm,
    maximal_functions_many,
    riesz_potential_direct,
    riesz_potential_direct_many,
    riesz_potential_tree,
    superlevel_mass,
)
from .covering import (
    BesicovitchOverlapError,
    BesicovitchSelection,
    BigDoublingResult,
    DoublingCubeNotFound,
    DoublingSearchConfig,
    OpenSetOracle,
    OracleInconsistencyError,
    SmallDoublingResult,
    WhitneyCheckReport,
    WhitneyDecomposition,
    besicovitch_select,
    find_big_doubling_cube,
    find_small_doubling_cube,
    verify_whitney,
    whitney_decompose,
)
from .weights import (
    AInftyFit,
    ApConstantReport,
    ainfty_fit,
    ap_constant,
    atom_centered_cube_family,
    weighted_mass,
)
from .goodlambda import (
    GoodLambdaReport,
    GoodLambdaScanConfig,
    NormReport,
    WeakTypeReport,
    WeightedGoodLambdaReport,
    potential_and_maximal,
    verify_conditional,
    verify_norm_inequality,
    verify_two_term,
    verify_weak_type,
    verify_weighted,
)
from .generators import (
    GeneratorSpec,
    gen_cantor_like,
    gen_lebesgue_grid,
    gen_power_density,
    gen_random_atoms,
    gen_segment_in_plane,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Ball",
    "CenteredCube",
    "CenterPolicy",
    "DoublingReport",
    "DyadicCube",
    "GrowthReport",
    "MeasureFormatError",
    "OperatorParams",
    "PointMassMeasure",
    "SampledFunction",
    "ScaleRange",
    "as_values",
    "ball_integral",
    "ball_mass",
    "cube_integral",
    "cube_mass",
    "doubling_constant_scan",
    "growth_constant_scan",
    "load_measure",
    "load_points",
    "save_measure",
    "save_points",
    "DistributionCurve",
    "PotentialOptions",
    "TreeEvaluator",
    "distribution_function",
    "fractional_maximal",
    "hl_maximal",
    "layer_cake_integral",
    "lorentz_weak_quasinorm",
    "lp_norm",
    "maximal_functions_many",
    "riesz_potential_direct",
    "riesz_potential_direct_many",
    "riesz_potential_tree",
    "superlevel_mass",
    "BesicovitchOverlapError",
    "BesicovitchSelection",
    "BigDoublingResult",
    "DoublingCubeNotFound",
    "DoublingSearchConfig",
    "OpenSetOracle",
    "OracleInconsistencyError",
    "SmallDoublingResult",
    "WhitneyCheckReport",
    "WhitneyDecomposition",
    "besicovitch_select",
    "find_big_doubling_cube",
    "find_small_doubling_cube",
    "verify_whitney",
    "whitney_decompose",
    "AInftyFit",
    "ApConstantReport",
    "ainfty_fit",
    "ap_constant",
    "atom_centered_cube_family",
    "weighted_mass",
    "GoodLambdaReport",
    "GoodLambdaScanConfig",
    "NormReport",
    "WeakTypeReport",
    "WeightedGoodLambdaReport",
    "potential_and_maximal",
    "verify_conditional",
    "verify_norm_inequality",
    "verify_two_term",
    "verify_weak_type",
    "verify_weighted",
    "GeneratorSpec",
    "gen_cantor_like",
    "gen_lebesgue_grid",
    "gen_power_density",
    "gen_random_atoms",
    "gen_segment_in_plane",
]
