"""Privacy budget accounting under Wasserstein differential privacy.

Core numerics live in the submodules; `wasserstein_dp.service` wraps them in
an HTTP API and `wasserstein_dp.cli` is a thin client over that API.
"""

from .accountant import (
    AccountantConfig,
    AccountantState,
    PairDistanceEstimate,
    accumulate,
    delta_given_epsilon,
    epsilon_given_delta,
    estimate_pair_distance,
    step_loss,
)
from .composition import (
    BudgetSequence,
    GeneralizedWdpBudget,
    advanced_delta,
    compose_parallel,
    compose_sequential,
    group_privacy,
    is_vacuous,
)
from .conversions import (
    LipschitzAssumption,
    dp_round_trip,
    dp_to_wdp,
    rdp_to_wdp,
    wdp_to_dp,
    wdp_to_rdp,
    wdp_to_zcdp,
)
from .empirical_ot import (
    DiscreteDist,
    SampleSet,
    kantorovich_dual_1d,
    mechanism_audit,
    pushforward_check,
    wasserstein_1d_samples,
    wasserstein_discrete,
)
from .mechanisms import (
    DpBudget,
    MechanismSpec,
    RdpBudget,
    WdpBudget,
    attack_success_probability,
    dp_gaussian,
    dp_laplace,
    rdp_gaussian,
    rdp_laplace,
    wdp_gaussian,
    wdp_laplace,
)
from .simulation import (
    CompositionCurve,
    GradientTrace,
    clip_threshold,
    generate_trace,
    run_composition,
)
from .special_functions import ConvergenceError, MomentParams, abs_moment, gamma_fn, kummer_1f1

__version__ = "0.1.0"
