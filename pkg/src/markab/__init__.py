"""Behavior metrics for labeled Markov chains, adaptive abstraction of
piecewise-affine systems, and abstraction-based policy synthesis.

The pieces compose in that order: :func:`kant_metric` compares chains,
:func:`refine` grows a chain abstraction of a dynamical system until it is
deterministic (scoring candidate splits with the metric), and
:func:`control_pipeline` solves an MDP over each abstraction stage and
evaluates the policies on the concrete system.
"""

from .chain import (
    EMPTY_WORD,
    Alphabet,
    ForwardState,
    LabeledMarkovChain,
    Word,
    extend_prefix,
    initial_forward,
    validate_chain,
    word_probability,
)
from .control import (
    AbstractMdp,
    ControlledSystem,
    ControlReport,
    ControlRow,
    Policy,
    RewardEstimate,
    benchmark_controlled_system,
    build_mdp,
    control_pipeline,
    evaluate_policy,
    value_iteration,
)
from .dynsys import (
    Abstraction,
    AdaptivePartition,
    AffineMap,
    Box,
    DynamicalSystem,
    ExactRegionOracle,
    PiecewiseAffineSystem,
    Provenance,
    Region,
    RegionMeasureOracle,
    SampledRegionOracle,
    benchmark_system,
    build_abstraction,
    check_closure,
    check_covering,
    class_membership,
    validate_system,
)
from .errors import CoveringError, GuardError, MarkabError, ParseError, ValidationError
from .fileio import (
    load_chain,
    load_system,
    parse_chain,
    parse_system,
    save_chain,
    save_system,
    serialize_chain,
    serialize_system,
)
from .kantorovich import (
    CantorParams,
    KantNode,
    MetricResult,
    cantor_distance,
    chain_metric,
    horizon_for_accuracy,
    kant_metric,
    level_increments,
    walk_nodes,
)
from .refine import (
    RefinementConfig,
    RefinementTrace,
    behavior_equivalence_check,
    is_deterministic,
    refine,
)
from .transport import (
    Coupling,
    WordDistribution,
    cantor_cost_matrix,
    check_lemma_blockflow,
    check_lemma_diagonal,
    coupling_feasibility,
    enumerate_distribution,
    exact_kantorovich,
)

__version__ = "0.1.0"

__all__ = [
    "Abstraction",
    "AbstractMdp",
    "AdaptivePartition",
    "AffineMap",
    "Alphabet",
    "Box",
    "CantorParams",
    "ControlledSystem",
    "ControlReport",
    "ControlRow",
    "Coupling",
    "CoveringError",
    "DynamicalSystem",
    "EMPTY_WORD",
    "ExactRegionOracle",
    "ForwardState",
    "GuardError",
    "KantNode",
    "LabeledMarkovChain",
    "MarkabError",
    "MetricResult",
    "ParseError",
    "PiecewiseAffineSystem",
    "Policy",
    "Provenance",
    "Region",
    "RegionMeasureOracle",
    "RefinementConfig",
    "RefinementTrace",
    "RewardEstimate",
    "SampledRegionOracle",
    "ValidationError",
    "Word",
    "WordDistribution",
    "behavior_equivalence_check",
    "benchmark_controlled_system",
    "benchmark_system",
    "build_abstraction",
    "build_mdp",
    "cantor_cost_matrix",
    "cantor_distance",
    "chain_metric",
    "check_closure",
    "check_covering",
    "check_lemma_blockflow",
    "check_lemma_diagonal",
    "class_membership",
    "control_pipeline",
    "coupling_feasibility",
    "enumerate_distribution",
    "evaluate_policy",
    "exact_kantorovich",
    "extend_prefix",
    "horizon_for_accuracy",
    "initial_forward",
    "is_deterministic",
    "kant_metric",
    "level_increments",
    "load_chain",
    "load_system",
    "parse_chain",
    "parse_system",
    "refine",
    "save_chain",
    "save_system",
    "serialize_chain",
    "serialize_system",
    "validate_chain",
    "validate_system",
    "value_iteration",
    "walk_nodes",
    "word_probability",
]
