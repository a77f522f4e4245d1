"""Self-excited threshold Poisson autoregression for count time series.

Simulation, exact likelihood and score recursions, two-step threshold
maximum likelihood estimation with asymptotic standard errors, residual
diagnostics, and a reproducible Monte Carlo study harness.
"""

__version__ = "0.1.0"

from .diagnostics import (
    AcfReport,
    OverdispersionSummary,
    ResidualReport,
    acf,
    in_sample_mse,
    one_step_forecasts,
    overdispersion_summary,
    pearson_residuals,
)
from .errors import (
    DataFormatError,
    EstimationError,
    IllPosedRegimeError,
    InfeasibleStartError,
    NumericObjectiveError,
    SetparError,
)
from .estimate import (
    FitConfig,
    FitResult,
    ProfileRow,
    fit,
    fit_fixed_threshold,
    fit_par,
    fit_setpar_b2_zero,
    quantile_bounds,
)
from .likelihood import (
    ScoreState,
    g_hat,
    iter_score_states,
    log_likelihood,
    observed_information,
    score,
)
from .mc import (
    CellSummary,
    ErgodicMomentReport,
    McDesign,
    McSummary,
    ergodic_moment_check,
    replication_seed,
    run_mc,
)
from .model import (
    default_lambda_init,
    intensity_path,
    intensity_step,
    intensity_step_multi,
    simulate,
    simulate_multi,
)
from .optimize import FeasibleRegion, OptimResult, maximize
from .params import (
    CountSeries,
    IntensityPath,
    MultiRegimeParams,
    RegimeParams,
    SetparParams,
)

__all__ = [
    "__version__",
    # params
    "RegimeParams",
    "SetparParams",
    "MultiRegimeParams",
    "CountSeries",
    "IntensityPath",
    # model
    "intensity_step",
    "intensity_step_multi",
    "intensity_path",
    "default_lambda_init",
    "simulate",
    "simulate_multi",
    # likelihood
    "ScoreState",
    "log_likelihood",
    "score",
    "g_hat",
    "observed_information",
    "iter_score_states",
    # optimize
    "FeasibleRegion",
    "OptimResult",
    "maximize",
    # estimate
    "FitConfig",
    "FitResult",
    "ProfileRow",
    "quantile_bounds",
    "fit",
    "fit_fixed_threshold",
    "fit_par",
    "fit_setpar_b2_zero",
    # diagnostics
    "ResidualReport",
    "AcfReport",
    "OverdispersionSummary",
    "pearson_residuals",
    "acf",
    "one_step_forecasts",
    "in_sample_mse",
    "overdispersion_summary",
    # mc
    "McDesign",
    "McSummary",
    "CellSummary",
    "ErgodicMomentReport",
    "run_mc",
    "replication_seed",
    "ergodic_moment_check",
    # errors
    "SetparError",
    "InfeasibleStartError",
    "NumericObjectiveError",
    "IllPosedRegimeError",
    "EstimationError",
    "DataFormatError",
]
