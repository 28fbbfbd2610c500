"""Budgeted stochastic network design under correlated edge failures.

Edge states follow a Markov-random-field distribution; scenarios are drawn
with a Gibbs chain or a parity-constraint (XOR) sampler, protection policies
are optimized by sample average approximation, and exact enumeration oracles
verify everything at small scale.
"""

__version__ = "0.1.0"

from .errors import (
    BoundViolationError,
    EnumerationCapError,
    GenerationError,
    IncompleteScenarioError,
    InfeasiblePolicyError,
    NetprotectError,
    NonErgodicError,
    PositivityError,
    SamplingFailureError,
    SearchBudgetError,
    SolveCapError,
    ValidationError,
)
from .mrf import (
    Factor,
    Mrf,
    exact_marginals,
    exact_policy_value,
    log_unnormalized_density,
    partition_function,
    unnormalized_density,
)
from .network import (
    Edge,
    Network,
    Node,
    Policy,
    ProtectionAction,
    Scenario,
    is_feasible,
    policy_cost,
    reachable_weight,
)
from .saa import SaaInstance, SolveResult, saa_objective, solve_exact, solve_greedy
from .lp_export import MipEncoding, encode_mip, export_mip_lp
from .generate import (
    DisasterModel,
    RegionAssignment,
    generate_disaster_mrf,
    generate_network,
    large_preset,
    small_preset,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    McEstimate,
    convergence_diagnostic,
    estimate_policy_value_mc,
    run_experiment,
)
from . import samplers
