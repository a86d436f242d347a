"""Block bootstrap estimators of the variance of a sample mean for stationary time series."""

__version__ = "0.1.0"

from ._exceptions import (  # noqa: E402
    BlockBootError,
    InvalidSpecError,
    NumericalIntegrityError,
    UndefinedOptimumError,
    UnsupportedMethodError,
)
from .series import (  # noqa: E402
    Ar1Model,
    TimeSeries,
    ar1_autocov,
    ar1_long_run_G,
    ar1_sigma2_n,
    ar1_spectral_density,
    circular_autocov,
    cov_product_sum,
    read_series,
    sample_autocov,
    sample_autocovariances,
    sample_mean,
    simulate_ar1,
    substream,
    write_series,
)
from .estimators import (  # noqa: E402
    BlockSpec,
    Kind,
    Method,
    TaperWindow,
    block_resample,
    cbb_estimate,
    conditional_variance_mc,
    estimate,
    mbb_estimate,
    nbb_estimate,
    rectangular_taper,
    sb_estimate,
    sb_resample,
    sb_weight,
    tbb_estimate,
    trapezoid_taper,
)
from .lagweights import (  # noqa: E402
    WeightScheme,
    capital_A,
    capital_B,
    fejer_convolution,
    fejer_kernel,
    kernel_K,
    kernel_spectral_integral,
    l0n,
    theorem2_Mn,
    weighted_sum_Tn,
    weights_for,
    window_H,
)
from .asymptotics import (  # noqa: E402
    AsymptoticSummary,
    are_sb_vs_cbb,
    asymptotic_bias,
    asymptotic_mse,
    asymptotic_variance,
    optimal_block,
    plugin_optimal_block,
)
