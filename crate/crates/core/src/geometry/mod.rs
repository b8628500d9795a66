//! Levi-Civita connection, curvature, background classification and Lie
//! derivatives of the metric.

mod classify;
mod connection;
mod curvature;
mod lie;

pub use classify::{classify_background, EinsteinCertificate, SCALE_FLOOR};
pub use connection::{christoffel, covariant_derivative};
pub use curvature::{curvature_from_metric, curvature_pack, CurvaturePack, DEFAULT_METRIC_ORDER};
pub use lie::{covector_jets, lie_derivative_expressions, lie_derivative_metric, lie_derivative_metric_jet};

#[cfg(test)]
mod tests;
