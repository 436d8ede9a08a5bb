"""Game-theoretic attribution: exact and sampled Shapley values, pairwise
interaction spectra and their purified components, set-wise interaction
indices, and an executable property verifier."""

from .axioms import AxiomReport, PropertyCheck, run_axioms
from .games import (
    Coalition,
    CrossCheckError,
    ExactLimitError,
    Game,
    GameConfigError,
    GameSpec,
    MaskFormatError,
    OracleError,
    TableFormatError,
    augment_dummy,
    build_game,
    coalition_from_mask_string,
    delta_S,
    delta_i,
    delta_ij,
    mask_to_string,
    merge_coalition,
    parse_game_spec,
    scale_game,
    sum_game,
    symmetrized_pair,
)
from .interactions import (
    OrderSpectrum,
    interaction,
    interaction_order,
    merge_pair,
    purified_from_raw,
    purified_order,
    r_t,
    raw_from_purified,
    spectrum,
)
from .sampling import (
    Estimate,
    estimate_b_prime,
    estimate_interaction,
    estimate_interaction_order,
    estimate_purified_order,
    estimate_shapley,
    estimate_shapley_order,
    estimate_taylor,
    sample_fixed_size_subset,
)
from .setwise import (
    GrabischRecursionReport,
    SignificanceReport,
    TaylorIndex,
    b_significance,
    b_value,
    grabisch_index,
    grabisch_recursive_check,
    shapley_taylor,
    taylor_by_enumeration,
    taylor_index,
)
from .shapley import (
    OrderProfile,
    ShapleyVector,
    shapley_order,
    shapley_profile,
    shapley_value,
    shapley_values,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomReport",
    "Coalition",
    "CrossCheckError",
    "Estimate",
    "ExactLimitError",
    "Game",
    "GameConfigError",
    "GameSpec",
    "GrabischRecursionReport",
    "MaskFormatError",
    "OracleError",
    "OrderProfile",
    "OrderSpectrum",
    "PropertyCheck",
    "ShapleyVector",
    "SignificanceReport",
    "TableFormatError",
    "TaylorIndex",
    "augment_dummy",
    "b_significance",
    "b_value",
    "build_game",
    "coalition_from_mask_string",
    "delta_S",
    "delta_i",
    "delta_ij",
    "estimate_b_prime",
    "estimate_interaction",
    "estimate_interaction_order",
    "estimate_purified_order",
    "estimate_shapley",
    "estimate_shapley_order",
    "estimate_taylor",
    "grabisch_index",
    "grabisch_recursive_check",
    "interaction",
    "interaction_order",
    "mask_to_string",
    "merge_coalition",
    "merge_pair",
    "parse_game_spec",
    "purified_from_raw",
    "purified_order",
    "r_t",
    "raw_from_purified",
    "run_axioms",
    "sample_fixed_size_subset",
    "scale_game",
    "shapley_order",
    "shapley_profile",
    "shapley_taylor",
    "shapley_value",
    "shapley_values",
    "spectrum",
    "sum_game",
    "symmetrized_pair",
    "taylor_by_enumeration",
    "taylor_index",
]
