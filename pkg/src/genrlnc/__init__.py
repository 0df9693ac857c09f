"""Random linear coding over generations, with the collection-time theory
that predicts its throughput, Monte Carlo validation, and a CLI."""

__version__ = "0.1.0"

from .codec import (
    CodedPacket,
    DecoderState,
    GenerationConfig,
    InnovationReport,
    SourceBlock,
    TrialRecord,
    encode_next,
    partition,
    random_source,
    run_trial,
)
from .errors import NotDecodableError, ResourceLimitError
from .gf import GF256_REDUCTION, FieldSpec
from .quadrature import IntegralTask, QuadratureError, integrate, majorant_tail, truncation_point
from .simulate import (
    SamplePlan,
    TrialSummary,
    empirical_failure_curve,
    markov_expected_time,
    sample_codec_times,
    sample_collection_times,
    sample_threshold_times,
    trial_rng,
)
from .theory import (
    EULER_GAMMA,
    TheoryResult,
    ThresholdSpec,
    alpha_binary_limit,
    alpha_constant,
    collection_time_asymptotic,
    collection_time_many_copies_limit,
    decoding_failure_lower_bound,
    draws_to_full_rank_ccdf_bounds,
    draws_to_full_rank_cdf,
    exp_partial_sum,
    expected_collection_time,
    expected_draws_to_full_rank,
    expected_draws_to_full_rank_approx,
    expected_partial_collection_time,
    expected_threshold_time,
    limit_law_cdf,
    poisson_tail,
)

__all__ = [
    "CodedPacket",
    "DecoderState",
    "EULER_GAMMA",
    "FieldSpec",
    "GF256_REDUCTION",
    "GenerationConfig",
    "InnovationReport",
    "IntegralTask",
    "NotDecodableError",
    "QuadratureError",
    "ResourceLimitError",
    "SamplePlan",
    "SourceBlock",
    "TheoryResult",
    "ThresholdSpec",
    "TrialRecord",
    "TrialSummary",
    "alpha_binary_limit",
    "alpha_constant",
    "collection_time_asymptotic",
    "collection_time_many_copies_limit",
    "decoding_failure_lower_bound",
    "draws_to_full_rank_ccdf_bounds",
    "draws_to_full_rank_cdf",
    "empirical_failure_curve",
    "encode_next",
    "exp_partial_sum",
    "expected_collection_time",
    "expected_draws_to_full_rank",
    "expected_draws_to_full_rank_approx",
    "expected_partial_collection_time",
    "expected_threshold_time",
    "integrate",
    "limit_law_cdf",
    "majorant_tail",
    "markov_expected_time",
    "partition",
    "poisson_tail",
    "random_source",
    "run_trial",
    "sample_codec_times",
    "sample_collection_times",
    "sample_threshold_times",
    "trial_rng",
    "truncation_point",
]
