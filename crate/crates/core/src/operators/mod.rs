//! Killing and Calabi operators, the first-order curvature of `g + εh`, and
//! the deformation operator `P`.
//!
//! Operators return the ε-coefficient only; nothing here knows about a
//! finite ε.

mod calabi;
mod fields;

pub use calabi::{
    calabi_c, ck_formula, linearised_ricci, linearised_riemann, linearised_riemann_opposite_sign,
    operator_p, operator_p_paths, trace_identity_check, OperatorOutput, TraceResiduals, TwoPath,
    OUTPUT_SCALE_FLOOR, PATH_TOLERANCE,
};
pub use fields::{
    killing_from_parts, killing_k, killing_with_pack, KillingData, Perturbation,
    PerturbationSource, FIELD_ORDER,
};
