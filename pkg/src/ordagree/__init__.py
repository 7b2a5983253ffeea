"""Interrater absolute agreement on ordinal scales via the normalized Leti index."""

__version__ = "0.1.0"

from .index import (
    AgreementEstimate,
    CategoryDistribution,
    DomainError,
    RatingMatrix,
    d_max,
    empirical_distribution,
    estimate_agreement,
    gini_mean_difference,
    j_functional,
    leti_dispersion,
    normalize_d,
    per_target_dispersion,
    pooled_distribution,
    sigma_squared,
    theoretical_d,
    variance_dhat,
    variance_dhat_asymptotic,
)
from .inference import IntervalEstimate, TestResult, normal_interval, test_d_leq
from .resampling import (
    BootstrapReplicates,
    BootstrapScheme,
    bootstrap_distribution,
    bootstrap_t_interval,
    build_pseudo_population,
    percentile_interval,
    pivotal_interval,
    resample_nonparametric,
    resample_parametric,
    resample_pseudo,
)
from .comparison import ComparisonReport, compare, cv_percent, icc_a1, r_wg
from .simulation import (
    CoverageReport,
    PopulationSpec,
    StudyConfig,
    draw_two_stage_sample,
    export_report,
    generate_population,
    mix_to_dispersion,
    run_study,
)
