//! Change-point detection for sequences of metric-space valued objects.
//!
//! The test compares Fréchet variances and contaminated Fréchet variances of
//! the two segments on either side of every admissible split, standardises the
//! result by a pooled variance-of-variance estimate, and calibrates the maximum
//! either against the squared standardized Brownian bridge or by bootstrap.
//!
//! Modules:
//! * [`metric_spaces`]: quantile functions under 2-Wasserstein, symmetric
//!   matrices under Frobenius, Euclidean vectors.
//! * [`scan`]: segment statistics, the scan function and `tau_hat`.
//! * [`inference`]: critical values, p-values and [`ChangePointReport`].
//! * [`segmentation`]: binary segmentation for multiple change points.
//! * [`simulation`]: synthetic scenarios and power/MAE studies.
//! * [`io`]: ingestion, export and report files.

pub mod error;
pub mod inference;
pub mod io;
pub mod metric_spaces;
pub mod rng;
pub mod scan;
pub mod segmentation;
pub mod simulation;

pub use error::{CpdError, Result};
pub use inference::{
    asymptotic_critical_value, bootstrap_critical_value, bridge_sup_replicate, run_test,
    BootstrapSize, CalibrationConfig, CalibrationMethod, ChangePointReport,
};
pub use metric_spaces::{
    distance, frechet_mean, frechet_variance, laplacian_from_adjacency, EuclideanObject,
    MatrixKind, MetricObject, ObjectSequence, QuantileObject, Space, SymMatrixObject,
};
pub use scan::{pooled_moments, scan, scan_statistic, segment_stats, ScanProfile, SegmentStats};
pub use segmentation::{binary_segmentation, SegmentationOptions, SegmentationResult};
pub use simulation::{gen_sequence, run_study, Family, ScenarioSpec, StudyResult};
