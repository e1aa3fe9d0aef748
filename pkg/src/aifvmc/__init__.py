"""Exact minimum-cost Markov chains and optimal binary AIFV-m codes."""
from .aifv import AifvProblem, aifv_problem
from .codec import (
    AifvCode,
    AifvTree,
    Node,
    NodeKind,
    SourceDistribution,
    decode,
    encode,
    enumerate_trees,
    tree_to_state,
    validate_tree,
)
from .core import (
    EnvelopeEval,
    LiftedPoint,
    ProblemSpec,
    Rational,
    StateSpec,
    chain_cost,
    classify_cone,
    eval_envelope,
    eval_f,
    eval_h,
    multi_typed_intersection,
    stationary_distribution,
)
from .errors import AifvmcError, DecodeError, InputError, InternalError, SnapRejected
from .oracle import brute_force_min, exhaustive_roundtrip, sample_height
from .slice import PrecisionConfig, SlicePoint, boundary_sign_check, eval_E1, snap_to_exact, solve_slice_search
from .solver import IterationTrace, SolveResult, solve_and_certify, solve_iterative

__version__ = "0.1.0"
