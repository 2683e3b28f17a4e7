"""Tangled modal logics toolkit.

Formula syntax and parsing, Kripke and topological semantics for the modal
mu-calculus with tangle operators, translations between fragments, model
filtration and untangling, axiom schemas with frame correspondence checks,
and bounded counter-model search.
"""

from .formula import (
    And,
    Atom,
    Bot,
    Box,
    BoxD,
    CaptureError,
    ClosureSet,
    Dia,
    DiaD,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Mu,
    Neg,
    Nu,
    Or,
    ParseError,
    PositivityError,
    Tangle,
    TangleD,
    Top,
    all_names,
    box_star,
    conj,
    dia_star,
    disj,
    free_atoms,
    fresh_names,
    immediate_subformulas,
    parse,
    positive_in,
    pretty,
    subformula_closure,
    substitute,
)
from .kripke import (
    ClusterDecomposition,
    Closures,
    Evaluator,
    Frame,
    KripkeModel,
    NonTransitiveError,
    RelationProperties,
    cluster_decomposition,
    closures,
    generated_submodel,
    locally_n_connected,
    min_local_connectedness,
    model_check,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    path_components,
    relation_properties,
    tangle_oracle,
    to_dot,
)
from .topo import (
    FiniteSpace,
    SetOperators,
    SpaceError,
    SpacePredicates,
    TopoEvaluator,
    TopoModel,
    alexandrov,
    operators,
    space_from_dict,
    space_predicates,
    space_to_dict,
    space_to_json,
    topo_model_check,
    topo_model_from_dict,
    topo_model_from_json,
)
from .translate import TranslationError, star, to_d, to_mu
from .filtration import (
    AtomicTypeData,
    CharacteristicReport,
    CriticalPointError,
    FiltrationResult,
    FrameProfile,
    PreservationReport,
    ReductionReport,
    UntangleResult,
    characteristic_formulas,
    defining_formula,
    filtrate,
    preservation_report,
    reduction_conditions,
    untangle,
    verify_reduction,
)
from .logics import (
    BudgetExceededError,
    LogicProfile,
    ProfileError,
    SchemaError,
    SchemaInstance,
    ValidityReport,
    bounded_sat,
    enumerate_frames,
    figure3_constraints,
    figure3_model,
    frame_validates,
    instantiate,
    named_frames,
    parse_profile,
    schema_instance,
)

__version__ = "0.1.0"
