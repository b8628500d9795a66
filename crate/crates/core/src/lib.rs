//! Killing, Calabi and Einstein-deformation operators on explicit
//! (semi-)Riemannian metrics.
//!
//! Derivatives come from truncated Taylor jets, so every operator is exact to
//! roundoff on the chart; the [`harness`] module recomputes curvature of
//! `g + εh` from scratch and checks the first-order formulas against it.
//!
//! ```
//! use einstein_deform::geometry::curvature_pack;
//! use einstein_deform::metric_dsl::{builtin_background, default_params, parse_expression};
//! use einstein_deform::operators::{killing_with_pack, operator_p};
//!
//! # fn main() -> einstein_deform::Result<()> {
//! let spec = builtin_background("sphere", 3, &default_params("sphere"))?;
//! let pack = curvature_pack::<f64>(&spec, &[1.0, 0.7, 0.3], 4)?;
//!
//! // any covector field, written in the chart's coordinates
//! let coords: Vec<&str> = spec.coord_names.iter().map(String::as_str).collect();
//! let x = ["sin(theta)", "psi*phi", "cos(psi)"]
//!     .map(|s| parse_expression(s, &coords, &[]).unwrap());
//!
//! let k = killing_with_pack(&x, &spec, &pack)?;
//! let p = operator_p(&k.perturbation(&pack.m)?, &pack)?;
//! assert!(p.value.max_abs::<f64>() < 1e-10 * p.scale);
//! # Ok(())
//! # }
//! ```

pub mod error;
pub mod geometry;
pub mod harness;
pub mod jets;
pub mod metric_dsl;
pub mod operators;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Jet64 = jets::Jet<f64>;
pub type Jet32 = jets::Jet<f32>;
pub type Tensor64 = tensor::ComponentTensor<f64>;
pub type JetTensor64 = tensor::ComponentTensor<Jet64>;
pub type MetricAtPoint64 = metric_dsl::MetricAtPoint<f64>;




pub type CurvaturePack64 = geometry::CurvaturePack<f64>;
pub type Perturbation64 = operators::Perturbation<f64>;
pub type KillingData64 = operators::KillingData<f64>;
