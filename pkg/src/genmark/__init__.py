"""Generalized Markowitz preference relations on finite portfolio domains."""

from .domain import DomainSpec, ObjectiveConfig, ball_grid, build_preorder, random_sample, simplex_grid
from .errors import (
    CapOverflow,
    CertificationError,
    DegenerateDistribution,
    GenmarkError,
    NotAChain,
    SamplingError,
    ValidationError,
)
from .kernel import KernelInstance, kernel_maximal_certify, kernel_relate
from .market import (
    Ball,
    DiscreteDistribution,
    Portfolio,
    ScenarioMarket,
    SDVerdict,
    build_market,
    cdf_value,
    central_moment,
    excess_kurtosis,
    expected_return,
    return_distribution,
    sd_compare,
    sd_integral,
    skewness,
    variance,
)
from .preorder import (
    ChainReport,
    DominanceVerdict,
    FrontierResult,
    Kind,
    ObjectiveSpec,
    PreorderInstance,
    Relation,
    ascend_to_maximal,
    chain_report,
    chain_upper_bound,
    evaluate,
    is_markowitz_efficient,
    is_maximal,
    maximal_set,
    relate,
    verify_chain,
)

__version__ = "0.1.0"
