"""QoS-driven cloud service provider ranking and brokerage toolkit."""

from .errors import (
    BackendUnavailable,
    EmptyRDS,
    EmptyRegistry,
    InvalidK,
    MissingLabel,
    NotRanked,
    OutOfRange,
    ParseError,
    QosBrokerError,
    SchemaMismatch,
    TooManyAttributes,
    UnknownAttribute,
    UnknownProvider,
    ValidationError,
)
from .model import (
    AttributeSpec,
    DecisionSystem,
    DefinitionDocument,
    FuzzyDegree,
    InformationSystem,
    NormalizedMatrix,
    ProviderProfile,
    QosRequest,
    ValidationReport,
    information_system_from_csv,
    information_system_from_json,
    information_system_to_csv,
    information_system_to_json,
    min_max_normalize,
    parse_definition_document,
    validate_definition_document,
    validate_information_system,
)
from . import catalog
from .clustering import ClusterAssignment, ClusterConfig, attach_decision, elbow_optimal_k, kmeans
from .reducts import (
    ClauseSet,
    FuzzyClause,
    Reduct,
    ReductConfig,
    brute_force_reducts_oracle,
    build_clause_set,
    enumerate_all_reducts,
    pair_discernibility,
    project_to_rds,
    select_best_reduct,
    subset_satisfies,
)
from .ranking import (
    RankedEntry,
    WeightTable,
    WeightedTable,
    assign_weights,
    build_weighted_table,
    compute_score,
    rank_providers,
)

__version__ = "0.1.0"
