"""Exact interval-valued inference for credal choice logic.

A theory couples an acyclic logic program with choice spaces whose
alternatives may share atoms; only the per-atom masses are fixed, not a
joint distribution.  Queries therefore get a probability interval, and
this package computes it exactly (rational arithmetic end to end), plus
a satisfiability-based bracketing pipeline and a ranking application.
"""

from .errors import (
    ArityConflictError,
    CapExceededError,
    CCLError,
    CyclicityError,
    InfeasibleError,
    ParseError,
    TheoryValidationError,
    UnboundedError,
    UnknownAtomError,
)
from .inference import (
    IntervalResult,
    MassFunction,
    credal_bounds_single_space,
    credal_bounds_strong_extension,
    enumerate_vertices,
    icl_mass_function,
    icl_probability,
    marginal_polytope,
    outer_bound,
    proxy_in_credal_set,
    proxy_query_value,
)
from .logic import (
    Atom,
    Clause,
    Interpretation,
    Literal,
    Program,
    Term,
    atom,
    check_acyclic,
    ground,
    parse_program,
    stable_model,
)
from .psat import (
    bisect_bounds,
    build_psat_instance,
    choice_formula,
    completion_formula,
    enumerate_models,
    export_psat,
    inner_point,
    psat_decide,
)
from .ranking import (
    RankingDataset,
    build_ranking_theory,
    counts_from_rankings,
    decide_preference,
    evaluate,
    pairwise_query,
    parse_counts_csv,
    parse_rankings,
    smooth_marginals,
)
from .theory import (
    Alternative,
    CCLTheory,
    ChoiceSpace,
    Query,
    alternative,
    from_icl,
    load_ccl,
    merge_spaces,
    parse_ccl,
    parse_query,
    query,
    validate_theory,
)
from .worlds import (
    World,
    WorldSpace,
    build_world_space,
    coherent_partial_choices,
    enumerate_total_choices,
    satisfies,
)

__version__ = "0.1.0"
