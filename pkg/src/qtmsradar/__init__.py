"""Correlation-coefficient target detection for QTMS and noise radars."""

from .covariance import ModelParams, RadarFamily, build_cov, check_psd, q1_flip
from .detection import (
    OperatingPoint,
    RocCurve,
    empirical_roc,
    pd_at,
    prob_exceed_one_bound,
    roc_curve,
    threshold_for_pfa,
)
from .errors import ConvergenceError, DataError, DegenerateInput, InvalidParams
from .estimator import FitResult, fit_closed_form, fit_numeric, rho_series
from .harness import (
    CampaignConfig,
    CampaignResult,
    analyze_iq,
    ingest_iq,
    roc_report,
    run_campaign,
    table1_report,
)
from .rice import (
    RhoModel,
    RiceParams,
    normal_limit_check,
    rho_model_params,
    rice_cdf,
    rice_mle,
    rice_pdf,
)
from .sampling import (
    RngStream,
    SampleCov,
    draw_snapshots,
    draw_wishart_sample_cov,
    sample_covariance,
)
from .special import bessel_i0, bessel_i0e, log_marcum_q1, marcum_q1

__version__ = "0.1.0"
