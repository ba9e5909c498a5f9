"""Locally adaptive online forecasting of bounded-variation trends.

ARROWS restarts online averaging whenever soft-thresholded Haar coefficients of
the current bin certify enough variation. Restarting OGD and moving averages
are provided as linear baselines, along with trend generators and regret tools.
"""
from .baselines import (
    MaConfig,
    OgdConfig,
    ma_window_tv,
    ogd_batch_size_sobolev,
    ogd_batch_size_tv,
    run_ma,
    run_ogd,
)
from .evaluation import (
    RegretReport,
    TrialTrace,
    aggregate_seeds,
    dynamic_regret,
    run_algorithm,
    scaling_slope,
    sweep,
)
from .haar import (
    HaarState,
    ThresholdConfig,
    estimate_sigma_mad,
    haar_forward,
    incremental_append,
    pad_and_recenter,
    restart_statistic,
    soft_threshold,
)
from .policy import ArrowsConfig, ArrowsForecaster, run_arrows, run_horizon
from .sequences import (
    GroundTruth,
    NoiseSpec,
    add_noise,
    gen_constant,
    gen_doppler,
    gen_hybrid,
    gen_linear,
    gen_step,
)

__version__ = "0.1.0"
