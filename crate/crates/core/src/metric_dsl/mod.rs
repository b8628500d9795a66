//! Metric-definition language, builtin backgrounds, and pointwise evaluation.

mod builtin;
mod expr;
mod parse;
mod point;
mod spec;

pub use builtin::{
    builtin_background, builtin_catalog, default_params, documented_status, DocumentedStatus,
    Params, BUILTIN_NAMES,
};
pub use expr::{jet_of_expression, parse_expression, BinOp, Expr, Func, Symbol};
pub use parse::parse_metric_file;
pub use point::{evaluate_metric_jet, inertia, invert_jet_matrix, MetricAtPoint, NONDEGENERACY_FLOOR};
pub use spec::MetricSpec;
