"""WIKS: a Bayesian nonparametric index for the two-sample problem.

The index is the posterior expectation of ``W(d(P1, P2))``, where ``P1``
and ``P2`` carry independent Dirichlet-process priors, ``d`` is the
Kolmogorov distance and ``W`` a cumulative weight function on ``[0, 1]``.
"""
from .baselines import TestReport, classical_ks_test, wilcoxon_test
from .calibration import (
    CalibrationConfig,
    CalibrationResult,
    PowerRow,
    PowerTable,
    calibrate_wiks_null,
    calibrate_z_quantile,
    order_statistic_quantile,
    power_study,
)
from .core import (
    Decision,
    DecisionRule,
    PowerComplement,
    TabulatedCDF,
    UniformWeight,
    WiksEstimate,
    cumulative_weight,
    decide,
    threshold_from_losses,
    wiks,
    wiks_from_distances,
    wiks_survival_form,
)
from .distributions import (
    Beta,
    BivariateNormal,
    Gamma,
    LogNormal,
    Normal,
    NormalMixture,
    SeedSpec,
    StudentT,
    Uniform,
    cdf_univariate,
    sample_univariate,
    scenario,
    scenario_grid,
    true_ks_distance,
)
from .dp_posterior import (
    AtomicDistribution,
    DPPrior,
    PosteriorState,
    draw,
    draw_batch,
    posterior,
    posterior_mean_cdf,
)
from .exceptions import (
    ConfigurationError,
    DegenerateDataError,
    InputError,
    ParameterError,
    ParseError,
    ResourceError,
    UsageError,
    WiksError,
)
from .metrics import ks_atomic, ks_atomic_bivariate, ks_mean_measures, z_statistic

__version__ = "0.1.0"
