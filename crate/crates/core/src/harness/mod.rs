//! Randomized verification against independent oracles.

pub mod dump;
pub mod fd_curvature;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod suites;

pub use fd_curvature::{fd_curvature, FdCurvature};
pub use oracle::{
    cap_epsilons, first_order_convergence, fit_slope, perturbed_metric_pack, OracleConfig,
    PerturbedPack, SlopeFit, SlopeVerdict,
};
pub use report::{
    emit_report, Bound, Check, CheckBuilder, Format, ReportBundle, SlopeCheck, Status,
    VerificationReport,
};
pub use suites::{resolve_backgrounds, run_one, run_suite, Suite};
pub use dump::{emit_classifications, ClassificationDump, CurvatureDump, TensorDump};
