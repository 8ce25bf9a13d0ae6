"""Two-stage model order reduction of LTI systems from samples of the
transfer function on the imaginary axis: regularized greedy barycentric
rational fitting (stage I) followed by cluster-tolerant Hankel norm
approximation (stage II), with a diagnostics suite for the error analysis.
"""

from .aaa import (
    AaaOptions,
    AaaResult,
    BarycentricRational,
    aaa_fit,
    aaa_two_pass,
    eval_barycentric,
    realize,
    solve_weights,
    tune_lambda,
)
from .core import (
    BalancedSystem,
    SampleSet,
    StateSpaceSystem,
    balanced_realization,
    eval_transfer,
    gramians,
    hankel_error,
    hankel_singular_values,
    hinf_norm_grid,
    solve_lyapunov,
)
from .diagnostics import (
    HnaDiagnostics,
    full_diagnostics,
    lemma_residuals,
    qe_qu,
    qequ_bounds,
    rank_criteria,
    xz_probe,
)
from .hna import (
    AllPassDilation,
    ClusterSelection,
    HnaPartition,
    build_U,
    glover_U,
    hna_reduce,
    partition,
    select_cluster,
)
from .pipeline import PipelineConfig, ReductionReport, error_report, reduce_two_stage
from .sampling import (
    hermitian_test_system,
    hilbert_example,
    hilbert_samples,
    sample_log,
    sample_moebius_uniform,
    sample_system,
)
from .stabilize import StabilizationResult, split_stable

__version__ = "0.1.0"

__all__ = [
    "AaaOptions",
    "AaaResult",
    "AllPassDilation",
    "BalancedSystem",
    "BarycentricRational",
    "ClusterSelection",
    "HnaDiagnostics",
    "HnaPartition",
    "PipelineConfig",
    "ReductionReport",
    "SampleSet",
    "StabilizationResult",
    "StateSpaceSystem",
    "aaa_fit",
    "aaa_two_pass",
    "balanced_realization",
    "build_U",
    "error_report",
    "eval_barycentric",
    "eval_transfer",
    "full_diagnostics",
    "glover_U",
    "gramians",
    "hankel_error",
    "hankel_singular_values",
    "hermitian_test_system",
    "hilbert_example",
    "hilbert_samples",
    "hinf_norm_grid",
    "hna_reduce",
    "lemma_residuals",
    "partition",
    "qe_qu",
    "qequ_bounds",
    "rank_criteria",
    "realize",
    "reduce_two_stage",
    "sample_log",
    "sample_moebius_uniform",
    "sample_system",
    "select_cluster",
    "solve_lyapunov",
    "solve_weights",
    "split_stable",
    "tune_lambda",
    "xz_probe",
]
