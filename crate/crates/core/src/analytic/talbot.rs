//! Fixed-Talbot numerical inversion of Laplace transforms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::AnalyticError;

/// Relative agreement required between the `terms` and `terms - 6` sums.
const AGREEMENT: f64 = 1e-7;

fn talbot_sum<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, terms: usize) -> (f64, f64) {
    let m = terms as f64;
    let r = 2.0 * m / (5.0 * t);
    let head = 0.5 * f(Complex64::new(r, 0.0)).re * (r * t).exp();
    let mut sum = head;
    let mut magnitude = head.abs();
    for k in 1..terms {
        let theta = k as f64 * PI / m;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = ((s * t).exp() * f(s) * Complex64::new(1.0, sigma)).re;
        sum += term;
        magnitude += term.abs();
    }
    (sum * r / m, magnitude * r / m)
}

/// Inverse Laplace transform of `f` at time `t > 0` along the fixed Talbot
/// contour with `terms` nodes.
///
/// The result is accepted only if a sum with six fewer nodes agrees to a
/// relative `1e-7`, measured against the larger of the value and the
/// rounding level of the sum.
pub fn talbot_invert<F: Fn(Complex64) -> Complex64>(f: F, t: f64, terms: usize) -> Result<f64, AnalyticError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(AnalyticError::Domain(format!(
            "inversion time must be positive, got {t}"
        )));
    }
    if terms < 8 {
        return Err(AnalyticError::Domain(format!(
            "at least 8 Talbot terms required, got {terms}"
        )));
    }
    let (value, magnitude) = talbot_sum(&f, t, terms);
    let (coarse, _) = talbot_sum(&f, t, terms - 6);
    let scale = value.abs().max(1e3 * f64::EPSILON * magnitude);
    if !value.is_finite() || (value - coarse).abs() > AGREEMENT * scale {
        return Err(AnalyticError::ConvergenceFailure {
            terms,
            value,
            previous: coarse,
        });
    }
    Ok(value)
}
