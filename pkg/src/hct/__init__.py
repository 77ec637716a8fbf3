"""Studentised-mean tail analysis, bootstrap-t calibration and higher criticism."""

__version__ = "0.1.0"

from .bootstrap import BootstrapDraws, bootstrap_quantile, bootstrap_t_draws, min_resamples  # noqa: E402
from .distributions import (  # noqa: E402
    ChiSquared,
    DistSpec,
    FisherF,
    MaStreamSpec,
    NormalAbsPow,
    Pareto,
    StdNormal,
    sample_iid,
    sample_ma_matrix,
    sample_signal_matrix,
    standardizing_moments,
)
from .estimators import BootstrapTQuantiles, HigherCriticism  # noqa: E402
from .hc import AlphaGrid, HcResult, alpha_grid, hc_bootstrap, hc_from_indicators, hc_normal, hc_oracle  # noqa: E402
from .normal import mills_ratio, std_normal_cdf, std_normal_quantile  # noqa: E402
from .phase import (  # noqa: E402
    PhaseRegion,
    SignalConfig,
    classify_region,
    delta_exponent,
    make_signal_config,
    rho_std,
    rho_theta,
)
from .prng import Stream, StreamKey, derive_stream, uniform01  # noqa: E402
from .stats import MomentSummary, shifted_t_statistic, summarize, t_statistic, z_statistic  # noqa: E402
from .tail_approx import (  # noqa: E402
    ApproxInput,
    noncentral_tail_approx,
    power_approx,
    skew_corrected_quantile,
    standardized_tail_approx,
    studentized_tail_approx,
)
