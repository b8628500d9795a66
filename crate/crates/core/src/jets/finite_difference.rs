//! Central-difference derivative estimates from plain real evaluation.
//!
//! This path never touches jet arithmetic, so it serves as an independent
//! check on it.

use crate::error::{Error, Result};
use crate::metric_dsl::Expr;

/// Default step for [`fd_derivative`].
pub const DEFAULT_STEP: f64 = 1e-3;

/// 1-D central stencil `(offset, weight)` for the `k`-th derivative at unit
/// step, accurate to second order.
fn stencil(k: u8) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!(),
    }
}

/// Tensor-product central-difference estimate of `∂^α f` at `point`, with
/// error `O(step²)`.
pub fn finite_difference_oracle(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    point: &[f64],
    alpha: &[u8],
    step: f64,
) -> Result<f64> {
    assert_eq!(point.len(), alpha.len());
    let total: u32 = alpha.iter().map(|&a| a as u32).sum();
    if total > 4 || alpha.iter().any(|&a| a > 4) {
        return Err(Error::InsufficientJetOrder {
            needed: total as usize,
            have: 4,
        });
    }
    let stencils: Vec<&[(i32, f64)]> = alpha.iter().map(|&a| stencil(a)).collect();
    let mut sum = 0.0;
    let mut x = point.to_vec();
    let mut pick = vec![0usize; point.len()];
    'outer: loop {
        let mut w = 1.0;
        for (i, s) in stencils.iter().enumerate() {
            let (off, wi) = s[pick[i]];
            x[i] = point[i] + off as f64 * step;
            w *= wi;
        }
        sum += w * f(&x)?;
        for i in (0..pick.len()).rev() {
            pick[i] += 1;
            if pick[i] < stencils[i].len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        break;
    }
    Ok(sum / step.powi(total as i32))
}

/// One Richardson halving on top of [`finite_difference_oracle`], error
/// `O(step⁴)`.
pub fn richardson(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    point: &[f64],
    alpha: &[u8],
    step: f64,
) -> Result<f64> {
    let coarse = finite_difference_oracle(f, point, alpha, step)?;
    let fine = finite_difference_oracle(f, point, alpha, step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Estimate of `∂^α expr` with the default step and one Richardson halving.
pub fn fd_derivative(expr: &Expr, params: &[f64], point: &[f64], alpha: &[u8]) -> Result<f64> {
    richardson(&mut |x| expr.eval(x, params), point, alpha, DEFAULT_STEP)
}

/// [`finite_difference_oracle`] applied to an expression.
pub fn fd_expression(
    expr: &Expr,
    params: &[f64],
    point: &[f64],
    alpha: &[u8],
    step: f64,
) -> Result<f64> {
    finite_difference_oracle(&mut |x| expr.eval(x, params), point, alpha, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_dsl::parse_expression;

    #[test]
    fn cubic_second_derivative() {
        let e = parse_expression("x^3", &["x"], &[]).unwrap();
        let d = fd_expression(&e, &[], &[1.0], &[2], 1e-3).unwrap();
        assert!((d - 6.0).abs() < 1e-5);
    }

    #[test]
    fn sine_slope_at_origin() {
        let e = parse_expression("sin(x)", &["x"], &[]).unwrap();
        let d = fd_expression(&e, &[], &[0.0], &[1], 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-7);
    }

    #[test]
    fn sphere_component_theta_derivative() {
        let e = parse_expression("r^2 * sin(theta)^2", &["theta", "phi"], &["r"]).unwrap();
        let r = 1.7f64;
        let d = fd_derivative(&e, &[r], &[1.0, 0.0], &[1, 0]).unwrap();
        let exact = 2.0 * r * r * 1.0f64.sin() * 1.0f64.cos();
        assert!((d - exact).abs() < 1e-6);
    }

    #[test]
    fn singular_stencil_node() {
        let e = parse_expression("1/x", &["x"], &[]).unwrap();
        assert!(matches!(
            fd_expression(&e, &[], &[1e-3], &[1], 1e-3),
            Err(Error::EvaluationSingular(_))
        ));
    }

    #[test]
    fn mixed_fourth_derivative() {
        let e = parse_expression("x^2*y^2 + x^3", &["x", "y"], &[]).unwrap();
        let d = fd_expression(&e, &[], &[0.3, 0.2], &[2, 2], 1e-2).unwrap();
        assert!((d - 4.0).abs() < 1e-6);
    }
}
