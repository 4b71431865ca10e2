"""Scale-free inhomogeneous random graphs: generation, degree-tail
estimation, and alignment of upper order statistics.

The public surface is re-exported here; submodules stay importable for
the long tail of helpers.
"""

__version__ = "0.1.0"

from .weights import (
    Burr,
    Frechet,
    HalfCauchy,
    MixedPolyTail,
    Pareto,
    QuadratureError,
    SecondOrderUnavailable,
    TailParams,
    WeightDistribution,
    WeightVector,
    check_u_lower_condition,
    mixed_poisson_pmf,
    parse_distribution,
    sample_weights,
    second_order_scale,
)
from .graphs import (
    MODEL_CL,
    MODEL_NR,
    EdgeList,
    GraphSample,
    NaiveCapError,
    generate_cl_fast,
    generate_cl_naive,
    generate_nr_fast,
    generate_nr_naive,
    permute_labels,
    read_degrees_csv,
    write_degrees_csv,
    write_edges_csv,
)
from .alignment import (
    AlignmentRecord,
    admissible_k,
    alignment_index,
    check_event_c,
    check_event_m,
    check_event_s,
    evaluate_alignment,
    is_fully_aligned,
    ranks,
    top_m_tie_free,
)
from .estimators import (
    DegenerateSampleError,
    EstimatorOutput,
    hill,
    pickands,
    pwm,
    pwm_covariance,
    pwm_moments,
    scaling_a,
    tau_hill,
    tau_pickands,
    tau_pwm,
    variance_crossover,
)
from .harness import (
    ExperimentConfig,
    HistogramResult,
    NormalitySummary,
    PowerLawFit,
    config_from_mapping,
    derive_seed,
    fit_power_law,
    histogram,
    ks_statistic,
    read_config_file,
    replicate_rng,
    run_alignment_experiment,
    run_normality_experiment,
    write_alignment_outputs,
    write_normality_outputs,
)
from ._dispatch import BACKEND, get_backend

__all__ = [
    "__version__",
    # weights
    "Burr", "Frechet", "HalfCauchy", "MixedPolyTail", "Pareto",
    "QuadratureError", "SecondOrderUnavailable", "TailParams",
    "WeightDistribution", "WeightVector", "check_u_lower_condition",
    "mixed_poisson_pmf", "parse_distribution", "sample_weights",
    "second_order_scale",
    # graphs
    "MODEL_CL", "MODEL_NR", "EdgeList", "GraphSample", "NaiveCapError",
    "generate_cl_fast", "generate_cl_naive", "generate_nr_fast",
    "generate_nr_naive", "permute_labels", "read_degrees_csv",
    "write_degrees_csv", "write_edges_csv",
    # alignment
    "AlignmentRecord", "admissible_k", "alignment_index", "check_event_c",
    "check_event_m", "check_event_s", "evaluate_alignment",
    "is_fully_aligned", "ranks", "top_m_tie_free",
    # estimators
    "DegenerateSampleError", "EstimatorOutput", "hill", "pickands", "pwm",
    "pwm_covariance", "pwm_moments", "scaling_a", "tau_hill",
    "tau_pickands", "tau_pwm", "variance_crossover",
    # harness
    "ExperimentConfig", "HistogramResult", "NormalitySummary",
    "PowerLawFit", "config_from_mapping", "derive_seed", "fit_power_law",
    "histogram", "ks_statistic", "read_config_file", "replicate_rng",
    "run_alignment_experiment", "run_normality_experiment",
    "write_alignment_outputs", "write_normality_outputs",
    # backend
    "BACKEND", "get_backend",
]
