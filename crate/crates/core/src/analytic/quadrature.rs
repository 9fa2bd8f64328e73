//! Globally adaptive Gauss–Kronrod quadrature over `[0, W]` for the
//! oscillatory frequency integrals.
//!
//! The range is cut into panels no wider than a quarter period of the
//! fastest oscillation, and the panel with the largest error estimate is
//! bisected until the total estimate meets the tolerance. The first panel is
//! integrated in `u = √w` so that the `1/√w` singularity at the origin
//! becomes a smooth integrand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::{AnalyticError, QuadratureSpec};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    /// Panel endpoints are in `u = √w` rather than `w`.
    sqrt_map: bool,
    result: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, sqrt_map: bool) -> Panel {
    let eval = |x: f64| if sqrt_map { 2.0 * x * f(x * x) } else { f(x) };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = eval(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = f_center.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx);
        let f2 = eval(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs = res_abs * half.abs();
    let error = rescale_error((res_k - res_g) * half, abs, res_asc * half.abs());
    Panel {
        a,
        b,
        sqrt_map,
        result: res_k * half,
        error,
        abs,
    }
}

/// Upper frequency `W` such that `∫_W^∞ exp(-decay·√(w/2)) dw ≤ eps`.
///
/// With `v = √(w/2)` the tail is `4 e^{-decay·v} (v/decay + 1/decay²)`; the
/// fixed point below converges in a handful of iterations.
pub(crate) fn frequency_cutoff(decay: f64, eps: f64) -> f64 {
    assert!(decay > 0.0 && eps > 0.0);
    let mut v = 1.0f64;
    for _ in 0..64 {
        let next = (4.0 * (v / decay + 1.0 / (decay * decay)) / eps).ln().max(0.0) / decay;
        if (next - v).abs() <= 1e-12 * next {
            v = next;
            break;
        }
        v = next;
    }
    2.0 * v * v
}

/// Integrates `f` over `[0, cutoff]`, where `oscillation` is the largest
/// angular time in the integrand's `e^{jwt}` factors.
pub(crate) fn integrate_frequency<F: Fn(f64) -> f64>(
    f: F,
    oscillation: f64,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    let width = if oscillation > 0.0 {
        (PI / (4.0 * oscillation)).min(cutoff)
    } else {
        cutoff
    };
    let initial = (cutoff / width).ceil() as usize;
    if initial > spec.max_panels {
        return Err(AnalyticError::QuadratureFailure {
            reason: format!(
                "{initial} quarter-period panels needed to reach the cutoff, budget is {}",
                spec.max_panels
            ),
        });
    }

    let mut heap = BinaryHeap::with_capacity(initial * 2);
    heap.push(gauss_kronrod(&f, 0.0, width.sqrt(), true));
    for k in 1..initial {
        let a = k as f64 * width;
        let b = ((k + 1) as f64 * width).min(cutoff);
        if b > a {
            heap.push(gauss_kronrod(&f, a, b, false));
        }
    }

    let mut total: f64 = heap.iter().map(|p| p.result).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    let mut total_abs: f64 = heap.iter().map(|p| p.abs).sum();
    loop {
        // Each panel's estimate is floored at 50ε of its absolute integral,
        // so the global floor must sit above that.
        let tol = (spec.rel_tol * total.abs()).max(200.0 * f64::EPSILON * total_abs);
        if total_err <= tol {
            break;
        }
        if heap.len() >= spec.max_panels {
            return Err(AnalyticError::QuadratureFailure {
                reason: format!(
                    "error estimate {total_err:e} above tolerance {tol:e} after {} panels",
                    heap.len()
                ),
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(AnalyticError::QuadratureFailure {
                reason: format!("panel [{}, {}] cannot be bisected further", worst.a, worst.b),
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid, worst.sqrt_map);
        let right = gauss_kronrod(&f, mid, worst.b, worst.sqrt_map);
        total += left.result + right.result - worst.result;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    Ok(heap.iter().map(|p| p.result).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn smooth_polynomial() {
        let v = integrate_frequency(|x| x * x, 0.0, 3.0, &spec()).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        // ∫₀⁴ w^{-1/2} dw = 4
        let v = integrate_frequency(|x| 1.0 / x.sqrt(), 0.0, 4.0, &spec()).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn damped_oscillation() {
        // ∫₀^∞ e^{-w} cos(10 w) dw = 1/101
        let cutoff = 60.0;
        let v = integrate_frequency(|w| (-w).exp() * (10.0 * w).cos(), 10.0, cutoff, &spec()).unwrap();
        assert!((v - 1.0 / 101.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn sinc_like_kernel_with_stretched_decay() {
        // ∫₀^∞ e^{-√w} dw = 2
        let cutoff = frequency_cutoff(2f64.sqrt(), 1e-14);
        let v = integrate_frequency(|w| (-w.sqrt()).exp(), 0.0, cutoff, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn cutoff_bounds_the_tail() {
        for &(decay, eps) in &[(0.1, 1e-10), (1.0, 1e-8), (3.0, 1e-12)] {
            let w = frequency_cutoff(decay, eps);
            let v = (w / 2.0).sqrt();
            let tail = 4.0 * (-decay * v).exp() * (v / decay + 1.0 / (decay * decay));
            assert!(tail <= eps * 1.000_001, "decay {decay}: tail {tail}");
        }
    }

    #[test]
    fn panel_budget_is_enforced() {
        let tight = QuadratureSpec {
            max_panels: 4,
            ..QuadratureSpec::default()
        };
        let err = integrate_frequency(|w| (100.0 * w).cos(), 100.0, 10.0, &tight).unwrap_err();
        assert!(matches!(err, AnalyticError::QuadratureFailure { .. }));
    }
}
