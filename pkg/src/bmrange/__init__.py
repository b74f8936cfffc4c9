"""Range and terminal-value densities of Brownian motion, and the s-stat built from them."""

from .densities import (
    Barriers,
    ProcessParams,
    SeriesControl,
    joint_range_terminal_density,
    psi_kernel,
    terminal_density,
    trivariate_density,
    trivariate_density_douady_form,
)
from .empirical import (
    OhlcBar,
    SampleReport,
    analyze_ohlc_csv,
    bar_s_stat,
    ingest_ohlc_csv,
    ks_test,
    qq_points,
    structural_quality_score,
    two_sample_qq,
)
from .errors import (
    ConvergenceError,
    DegeneratePathError,
    DomainError,
    FormatError,
    InsufficientSampleError,
)
from .kernels import g, g_prime, g_second
from .sdensity import (
    SDensityTable,
    convergence_bound_check,
    default_table,
    s_cdf,
    s_density,
    s_density_one_sided,
    s_density_two_sided,
    s_quantile,
)
from .simulation import (
    EnsembleSpec,
    PathSpec,
    PathSummary,
    mc_joint_histogram,
    sample_s_stats,
    s_stat,
    simulate_ensemble,
    simulate_path,
)

__version__ = "0.1.0"
