"""permstab: metrics, finite-group engines, and rounding algorithms for
almost-homomorphisms into symmetric groups."""

from .errors import (
    CapacityError,
    ConfigError,
    EigensolveError,
    NoWitnessError,
    NonGeneratingError,
    NotAbelianError,
    NotAHomomorphismError,
    NotAnActionError,
    NotASubgroupError,
    NotSurjectiveError,
    OutOfRegimeError,
    PermstabError,
    SizeMismatchError,
    WindowEmptyError,
)
from .perms import (
    PartialInjection,
    Perm,
    commutator_defect,
    compose,
    from_cycles,
    hamming,
    hs_distance,
    identity,
    inverse,
    random_perm,
    swap,
)
from .groups import (
    CyclicGroup,
    DirectProductGroup,
    FinGroup,
    GroupHom,
    MarkedGroup,
    MarkedHom,
    MarkedMap,
    PermAction,
    PermGroup,
    SL2Group,
    TableGroup,
    action_from_generator_images,
    canonical_subgroup_key,
    cyclic,
    direct_product,
    group_from_perm_generators,
    hom_from_generator_images,
    left_coset_reps,
    left_regular,
    orbit_type_census,
    product_with_free_z,
    right_regular,
    sl2_mod,
)
from .spectral import (
    ExpansionCheck,
    GlobalInvarianceCheck,
    KazhdanBracket,
    check_expansion,
    global_from_generators,
    kazhdan_abelian_exact,
    kazhdan_bracket,
)
from .almost_invariant import (
    AlmostInvSet,
    almost_inv_set,
    grow_to_window,
    round_to_invariant,
    shrink_step,
    window_cardinality,
    window_set_cyclic,
)
from .families import (
    BiTranslationAction,
    CosetStructure,
    DefectReport,
    FlagshipInstance,
    SwapFamily,
    build_bitranslation,
    build_swap_family,
    commuting_distance_floor,
    defect_report,
    family_on_marked,
    flagship_family,
    induce_finite_index,
    product_lift,
    relator_defects,
)
from .rounding import (
    AlmostResult,
    ConjugacyResult,
    MatchMatrix,
    commuting_extension,
    extract_conjugacy,
    nearest_right_translation,
    rigidity_pipeline,
)
from .oracle import (
    OracleResult,
    nearest_homomorphism_bruteforce,
    stability_defect_table,
)
from .experiment import ExperimentConfig, run_experiment, run_instance

__version__ = "0.1.0"
