"""Exact and asymptotic interconversion rates for majorisation-based
resource theories: entanglement/coherence and thermodynamics."""

from .distributions import (
    GibbsSpec,
    ProbVec,
    ProductDist,
    SortedProbVec,
    embed,
    from_amplitudes,
    gibbs_from_energies,
    gibbs_from_weights,
    make_prob_vec,
    prefix_sum_at_rank,
    sharp,
    sort_desc,
    tensor_product,
    total_states,
    uniform,
)
from .entropic import (
    INDETERMINATE,
    EntropicSummary,
    asymptotic_rate,
    entropy_variance,
    irreversibility,
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
    summarise,
)
from .majorisation import (
    ApproxMajResult,
    brute_force_min_epsilon,
    fidelity,
    majorises,
    majorises_product,
    max_prefix_violation,
    min_epsilon_post,
    min_epsilon_pre,
    tvd,
)
from .moderate import (
    CrossingValues,
    ModerateSequence,
    TailReport,
    crossing_values,
    cut_and_pile,
    cutting_point,
    dominance_check,
    magnitude_tail_sum,
    offset_irreversibility,
    offset_rate,
    power_rank_threshold_log,
    rank_tail_sum,
    total_rank_threshold_log,
)
from .rates import (
    ConvergenceRow,
    ExactRatePoint,
    RateExpansion,
    convergence_report,
    error_level,
    exact_optimal_rate,
    expand_rate,
    resonance_gap,
)
from .rayleigh import (
    ConjecturedRate,
    RayleighEval,
    conjectured_converse_infidelity,
    crossing_point,
    gaussian_cdf,
    gaussian_cdf_shifted,
    rayleigh_cdf,
    rayleigh_inverse_approx,
)

__version__ = "0.1.0"
