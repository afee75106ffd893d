"""Robust offline change-point detection under adversarial contamination.

The scan statistic compares soft-truncation (bounded influence) mean
estimates over sliding windows; detections are its thresholded local
maximizers.  Ships with a shortest-interval baseline detector, a seeded
contaminated-data generator, a benchmark harness, and a CLI (``rccat``).
"""

__version__ = "0.1.0"

from .baseline import RumeConfig, arc_detect, arc_trace, rume_estimate
from .datagen import (
    ContaminationSpec,
    CustomOutliers,
    FixedOutliers,
    FixedSymmetricOutliers,
    Gaussian,
    MartingaleGarch,
    ParetoOutliers,
    SignalSpec,
    StudentT,
    apply_contamination,
    check_budget,
    derived_rng,
    gen_signal,
)
from .detector import (
    AssumptionReport,
    DetectionReport,
    DetectorConfig,
    ScanTrace,
    compute_trace,
    compute_trace_brute,
    compute_trace_shifted,
    default_threshold,
    detect,
    local_maximizers,
    report_from_trace,
    scan_alpha,
    scan_statistic,
    validate_assumptions,
)
from .estimators import (
    DeviationBound,
    EstimatorConfig,
    asymptotic_bias,
    bias_constant,
    catoni_estimate,
    centering_radius,
    deviation_radius,
    huber_to_eta,
    psi,
    select_alpha,
    shifted_deviation_radius,
    shifting_device_estimate,
)
from .harness import (
    BenchmarkResult,
    BenchmarkScenario,
    CellResult,
    DataError,
    detection_error,
    format_table,
    hausdorff_distance,
    load_csv,
    read_report,
    result_to_csv,
    run_benchmark,
    setting_outliers,
    write_csv,
    write_report,
)
from .series import GroundTruth, TimeSeries

__all__ = [
    "AssumptionReport",
    "BenchmarkResult",
    "BenchmarkScenario",
    "CellResult",
    "ContaminationSpec",
    "CustomOutliers",
    "DataError",
    "DetectionReport",
    "DetectorConfig",
    "DeviationBound",
    "EstimatorConfig",
    "FixedOutliers",
    "FixedSymmetricOutliers",
    "Gaussian",
    "GroundTruth",
    "MartingaleGarch",
    "ParetoOutliers",
    "RumeConfig",
    "ScanTrace",
    "SignalSpec",
    "StudentT",
    "TimeSeries",
    "apply_contamination",
    "arc_detect",
    "arc_trace",
    "asymptotic_bias",
    "bias_constant",
    "catoni_estimate",
    "centering_radius",
    "check_budget",
    "compute_trace",
    "compute_trace_brute",
    "compute_trace_shifted",
    "default_threshold",
    "derived_rng",
    "detect",
    "detection_error",
    "deviation_radius",
    "format_table",
    "gen_signal",
    "hausdorff_distance",
    "huber_to_eta",
    "load_csv",
    "local_maximizers",
    "psi",
    "read_report",
    "report_from_trace",
    "result_to_csv",
    "rume_estimate",
    "run_benchmark",
    "scan_alpha",
    "scan_statistic",
    "select_alpha",
    "setting_outliers",
    "shifted_deviation_radius",
    "shifting_device_estimate",
    "validate_assumptions",
    "write_csv",
    "write_report",
]
