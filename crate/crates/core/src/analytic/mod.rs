//! Expected channel response of the reversible adsorption receiver.
//!
//! Everything is derived from the Laplace-domain solution of the radial
//! diffusion equation with the radiation boundary condition
//! `D ∂C/∂r = k₁ C − k₋₁ C_a` at `r = rr`:
//!
//! ```text
//! r C̃(r,s) = A(s) e^{-|r-r0| q} + A(s) e^{-(r+r0-2rr) q} − Z(s; r)
//! Z(s; r)  = 2h/(h+q) · A(s) e^{-(r+r0-2rr) q}
//! A(s)     = 1 / (4π r0 √(4Ds)),   q = √(s/D),   h = 1/rr + κ(s)
//! κ(s)     = k₁ s / (D (s + k₋₁))
//! ```
//!
//! The surface reaction rate `K = 4π rr² D ∂C/∂r|rr` then has the transform
//! `K̃(s) = (rr/r0) · κ/(q + h) · e^{-(r0-rr) q}`. The `−C/r` part of the
//! radial derivative does not vanish at the surface, which is what makes
//! `K ≡ 0` when `k₁ = 0`.
//!
//! Time-domain values come from the inversion integral along the imaginary
//! axis, `f(t) = (1/π) ∫₀^∞ Re[F(jw) e^{jwt}] dw`, using the principal branch
//! of `√(jw/D)`. [`talbot`] inverts the same transforms along a deformed
//! contour and serves as an independent check.
//!
//! Internally lengths are measured in units of `rr` and times in units of
//! `rr²/D`.

mod quadrature;
pub mod talbot;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{ChannelParams, SimConfig};
use quadrature::{frequency_cutoff, integrate_frequency};
pub use talbot::talbot_invert;

/// Node count used by the Talbot cross-checks.
pub const DEFAULT_TALBOT_TERMS: usize = 24;

/// Below this value of `w·Ts` the window kernel switches to its series.
const KERNEL_SERIES_BELOW: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failed: {reason}")]
    QuadratureFailure { reason: String },
    #[error("Talbot inversion with {terms} terms did not converge ({value:e} vs {previous:e})")]
    ConvergenceFailure { terms: usize, value: f64, previous: f64 },
}

/// Controls for the improper frequency integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Largest admissible truncation frequency, rad/s. The actual cutoff is
    /// chosen from the integrand's decay; needing more than this is an error.
    pub w_max: f64,
    pub rel_tol: f64,
    /// Panel budget, counting both the initial quarter-period panels and
    /// adaptive bisections.
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            w_max: 1e8,
            rel_tol: 1e-8,
            max_panels: 400_000,
        }
    }
}

impl QuadratureSpec {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), crate::ValidationError> {
        use crate::ValidationError;
        if !(self.w_max > 0.0) {
            return Err(ValidationError::new(
                "w_max",
                format!("must be positive, got {}", self.w_max),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(ValidationError::new(
                "rel_tol",
                format!("must lie in (0, 1), got {}", self.rel_tol),
            ));
        }
        if self.max_panels == 0 {
            return Err(ValidationError::new("max_panels", "must be at least 1"));
        }
        Ok(())
    }
}

/// One value of the characteristic function on the frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFreqSample {
    /// rad/s, non-negative.
    pub w: f64,
    pub value: Complex64,
}

/// One value of a Laplace-domain expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceSample {
    pub s: Complex64,
    pub value: Complex64,
}

/// Channel parameters in units of `rr` (length) and `rr²/D` (time).
#[derive(Debug, Clone, Copy)]
struct Scaled {
    rho0: f64,
    beta: f64,
    gamma: f64,
    rr: f64,
    diffusion: f64,
    /// `rr²/D`, s.
    tau: f64,
}

impl Scaled {
    fn new(p: &ChannelParams) -> Self {
        let tau = p.rr * p.rr / p.diffusion;
        Self {
            rho0: p.r0 / p.rr,
            beta: p.k1 * p.rr / p.diffusion,
            gamma: p.km1 * tau,
            rr: p.rr,
            diffusion: p.diffusion,
            tau,
        }
    }

    /// `rr·κ`. With no desorption the `s/(s + k₋₁)` factor is exactly one.
    fn kappa(&self, sigma: Complex64) -> Complex64 {
        if self.gamma == 0.0 {
            Complex64::new(self.beta, 0.0)
        } else {
            self.beta * sigma / (sigma + self.gamma)
        }
    }

    /// `D·Z(s; r)` at `s = σ/τ`, `r = ℓ·rr`.
    fn z(&self, sigma: Complex64, ell: f64) -> Complex64 {
        let q = sigma.sqrt();
        let h = 1.0 + self.kappa(sigma);
        let decay = ell + self.rho0 - 2.0;
        h / (h + q) * (-decay * q).exp() / (4.0 * PI * self.rho0 * q)
    }

    /// `D·r·C̃(r, s)`.
    fn r_concentration(&self, sigma: Complex64, ell: f64) -> Complex64 {
        let q = sigma.sqrt();
        let free = 1.0 / (8.0 * PI * self.rho0 * q);
        let direct = (-(ell - self.rho0).abs() * q).exp();
        let mirror = (-(ell + self.rho0 - 2.0) * q).exp();
        free * (direct + mirror) - self.z(sigma, ell)
    }

    /// `K̃(s)`, dimensionless.
    fn coupling(&self, sigma: Complex64) -> Complex64 {
        let q = sigma.sqrt();
        let kappa = self.kappa(sigma);
        kappa / (q + 1.0 + kappa) * (-(self.rho0 - 1.0) * q).exp() / self.rho0
    }

    fn cutoff(&self, decay: f64, q: &QuadratureSpec) -> Result<f64, AnalyticError> {
        let cutoff = frequency_cutoff(decay, 1e-2 * q.rel_tol);
        let needed = cutoff / self.tau;
        if needed > q.w_max {
            return Err(AnalyticError::QuadratureFailure {
                reason: format!("frequency cutoff {needed:e} rad/s exceeds w_max = {:e}", q.w_max),
            });
        }
        Ok(cutoff)
    }

    fn check_radius(&self, r: f64) -> Result<f64, AnalyticError> {
        let ell = r / self.rr;
        if !(ell.is_finite() && ell >= 1.0 - crate::geometry::SURFACE_REL_TOL) {
            return Err(AnalyticError::Domain(format!(
                "radius {r} is inside the receiver (rr = {})",
                self.rr
            )));
        }
        Ok(ell.max(1.0))
    }
}

fn check_time(name: &str, t: f64, allow_zero: bool) -> Result<(), AnalyticError> {
    let ok = t.is_finite() && (t > 0.0 || (allow_zero && t == 0.0));
    if ok {
        Ok(())
    } else {
        Err(AnalyticError::Domain(format!(
            "{name} must be {}, got {t}",
            if allow_zero { "non-negative" } else { "positive" }
        )))
    }
}

/// `(e^{jwΔ} − 1)/(jw)` without cancellation: the numerator is
/// `2j sin²(wΔ/2) + sin(wΔ)` after dividing by `j`.
fn window_kernel(w: f64, width: f64) -> Complex64 {
    let x = w * width;
    if x.abs() < KERNEL_SERIES_BELOW {
        return Complex64::new(width, 0.5 * x * width);
    }
    let half = (0.5 * x).sin();
    Complex64::new(x.sin(), 2.0 * half * half) / w
}

/// Characteristic function `φ_Z(w) = Z(jw)` at radius `r`, in s/µm².
pub fn phi_z(w: f64, r: f64, params: &ChannelParams) -> Result<Complex64, AnalyticError> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(AnalyticError::Domain(format!(
            "φ_Z is singular at w = 0 and defined for w > 0, got {w}"
        )));
    }
    let sc = Scaled::new(params);
    let ell = sc.check_radius(r)?;
    Ok(sc.z(Complex64::new(0.0, w * sc.tau), ell) / sc.diffusion)
}

/// Tabulates [`phi_z`] on a frequency grid.
pub fn phi_z_samples(ws: &[f64], r: f64, params: &ChannelParams) -> Result<Vec<ComplexFreqSample>, AnalyticError> {
    ws.iter()
        .map(|&w| phi_z(w, r, params).map(|value| ComplexFreqSample { w, value }))
        .collect()
}

/// Laplace-domain `Z(s)` at radius `r`, in s/µm². Defined on the principal
/// sheet of `√s`, including the left half plane reached by Talbot contours.
pub fn z_laplace(s: Complex64, r: f64, params: &ChannelParams) -> Complex64 {
    let sc = Scaled::new(params);
    sc.z(s * sc.tau, r / sc.rr) / sc.diffusion
}

pub fn z_laplace_sample(s: Complex64, r: f64, params: &ChannelParams) -> LaplaceSample {
    LaplaceSample {
        s,
        value: z_laplace(s, r, params),
    }
}

/// Full `r·C̃(r, s)`, in s/µm².
pub fn r_concentration_laplace(s: Complex64, r: f64, params: &ChannelParams) -> Complex64 {
    let sc = Scaled::new(params);
    sc.r_concentration(s * sc.tau, r / sc.rr) / sc.diffusion
}

/// Laplace transform of the surface reaction rate, `K̃(s)` (dimensionless).
pub fn coupling_rate_laplace(s: Complex64, params: &ChannelParams) -> Complex64 {
    let sc = Scaled::new(params);
    sc.coupling(s * sc.tau)
}

/// Image and mirror Gaussians of the spatial distribution, µm⁻³.
fn gaussian_terms(r: f64, t: f64, p: &ChannelParams) -> f64 {
    let four_dt = 4.0 * p.diffusion * t;
    let norm = 1.0 / (4.0 * PI * p.r0 * r * (PI * four_dt).sqrt());
    let direct = (-(r - p.r0).powi(2) / four_dt).exp();
    let mirror = (-(r + p.r0 - 2.0 * p.rr).powi(2) / four_dt).exp();
    norm * (direct + mirror)
}

/// Probability density `C(r, t | r0)` of finding a molecule at distance `r`
/// from the receiver center at time `t`, µm⁻³.
pub fn spatial_distribution(r: f64, t: f64, params: &ChannelParams, q: &QuadratureSpec) -> Result<f64, AnalyticError> {
    check_time("t", t, false)?;
    let sc = Scaled::new(params);
    let ell = sc.check_radius(r)?;
    let t_s = t / sc.tau;
    let cutoff = sc.cutoff(ell + sc.rho0 - 2.0, q)?;
    let integral = integrate_frequency(
        |w| {
            let phase = Complex64::from_polar(1.0, w * t_s);
            (phase * sc.z(Complex64::new(0.0, w), ell)).re
        },
        t_s,
        cutoff,
        q,
    )?;
    // (1/π)∫ Re[e^{jwt} D·Z] dw in scaled units is rr²·L⁻¹{Z}.
    let inverse_z = integral / (PI * sc.rr * sc.rr);
    Ok(gaussian_terms(r, t, params) - inverse_z / r)
}

/// Reaction rate at the receiver surface, `K(t) = 4π rr² D ∂C/∂r|rr`, in 1/s.
/// Integrating it over time gives the adsorbed fraction.
pub fn coupling_rate(t: f64, params: &ChannelParams, q: &QuadratureSpec) -> Result<f64, AnalyticError> {
    check_time("t", t, false)?;
    let sc = Scaled::new(params);
    if sc.beta == 0.0 {
        return Ok(0.0);
    }
    let t_s = t / sc.tau;
    let cutoff = sc.cutoff(sc.rho0 - 1.0, q)?;
    let integral = integrate_frequency(
        |w| {
            let phase = Complex64::from_polar(1.0, w * t_s);
            (phase * sc.coupling(Complex64::new(0.0, w))).re
        },
        t_s,
        cutoff,
        q,
    )?;
    Ok(integral / (PI * sc.tau))
}

/// Fraction of the emitted molecules adsorbed at time `T`,
/// `R(T) = ∫₀^T K(t) dt`, with the time integral taken inside the
/// frequency integral.
pub fn cumulative_fraction(t: f64, params: &ChannelParams, q: &QuadratureSpec) -> Result<f64, AnalyticError> {
    check_time("T", t, true)?;
    window_fraction(0.0, t, params, q)
}

/// `R(start + width) − R(start)` as a single frequency integral.
fn window_fraction(start: f64, width: f64, params: &ChannelParams, q: &QuadratureSpec) -> Result<f64, AnalyticError> {
    let sc = Scaled::new(params);
    if sc.beta == 0.0 || width == 0.0 {
        return Ok(0.0);
    }
    let start_s = start / sc.tau;
    let width_s = width / sc.tau;
    let cutoff = sc.cutoff(sc.rho0 - 1.0, q)?;
    let integral = integrate_frequency(
        |w| {
            let phase = Complex64::from_polar(1.0, w * start_s);
            (sc.coupling(Complex64::new(0.0, w)) * phase * window_kernel(w, width_s)).re
        },
        start_s + width_s,
        cutoff,
        q,
    )?;
    Ok(integral / PI)
}

/// Expected net number of molecules newly adsorbed during `[T, T + Ts]`.
/// Negative when desorption dominates the window.
pub fn expected_net_adsorbed(
    t: f64,
    params: &ChannelParams,
    sim: &SimConfig,
    q: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    check_time("T", t, true)?;
    check_time("Ts", sim.ts, false)?;
    Ok(f64::from(params.ntx) * window_fraction(t, sim.ts, params, q)?)
}

/// Expected net adsorption for every window of `sim`.
pub fn expected_series(
    params: &ChannelParams,
    sim: &SimConfig,
    q: &QuadratureSpec,
) -> Result<crate::SampleSeries, AnalyticError> {
    let grid = sim.window_starts();
    let values = grid
        .iter()
        .map(|&t| expected_net_adsorbed(t, params, sim, q))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(crate::SampleSeries::new(grid, sim.ts, values))
}

/// Talbot inversion of `r·C̃(r, s)/r`; an independent route to
/// [`spatial_distribution`].
pub fn spatial_distribution_talbot(r: f64, t: f64, params: &ChannelParams, terms: usize) -> Result<f64, AnalyticError> {
    check_time("t", t, false)?;
    let sc = Scaled::new(params);
    let ell = sc.check_radius(r)?;
    let v = talbot_invert(|s| sc.r_concentration(s, ell), t / sc.tau, terms)?;
    // Scaled inversion of D·rC̃ returns τ⁻¹·D·rC = rC·rr⁻².
    Ok(v / (sc.rr * sc.rr * r))
}

/// Talbot inversion of `K̃(s)`.
pub fn coupling_rate_talbot(t: f64, params: &ChannelParams, terms: usize) -> Result<f64, AnalyticError> {
    check_time("t", t, false)?;
    let sc = Scaled::new(params);
    Ok(talbot_invert(|s| sc.coupling(s), t / sc.tau, terms)? / sc.tau)
}

/// Talbot inversion of `K̃(s)/s`.
pub fn cumulative_fraction_talbot(t: f64, params: &ChannelParams, terms: usize) -> Result<f64, AnalyticError> {
    check_time("T", t, false)?;
    let sc = Scaled::new(params);
    talbot_invert(|s| sc.coupling(s) / s, t / sc.tau, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(k1: f64) -> ChannelParams {
        ChannelParams::new(8.0, 11.0, 10.0, k1, 5.0, 1000).unwrap()
    }

    /// Direct transcription in physical units with an explicit polar form
    /// of `√(jw/D) = √(w/D)·e^{jπ/4}`.
    fn phi_z_reference(w: f64, r: f64, p: &ChannelParams) -> Complex64 {
        let j = Complex64::new(0.0, 1.0);
        let root = Complex64::from_polar((w / p.diffusion).sqrt(), PI / 4.0);
        let kappa = p.k1 * j * w / (p.diffusion * (j * w + p.km1));
        let h = 1.0 / p.rr + kappa;
        let sqrt_4djw = Complex64::from_polar((4.0 * p.diffusion * w).sqrt(), PI / 4.0);
        2.0 * h / (h + root) / (4.0 * PI * p.r0 * sqrt_4djw) * (-(r + p.r0 - 2.0 * p.rr) * root).exp()
    }

    #[test]
    fn phi_z_matches_direct_formula() {
        let p = fig1(40.0);
        for &w in &[1e-3, 1.0, 17.0, 1e3, 1e5] {
            for &r in &[10.0, 10.5, 13.0] {
                let got = phi_z(w, r, &p).unwrap();
                let want = phi_z_reference(w, r, &p);
                // The phase of e^{-a√(jw/D)} carries ~a√(w/D)·ε of rounding.
                assert!(
                    (got - want).norm() <= 1e-12 * want.norm(),
                    "w={w} r={r}: {got} vs {want}"
                );
            }
        }
        // The Fig. 1 point, w = 1 rad/s at the surface.
        let got = phi_z(1.0, 10.0, &p).unwrap();
        let want = phi_z_reference(1.0, 10.0, &p);
        assert!((got - want).norm() <= 1e-14 * want.norm());
    }

    #[test]
    fn phi_z_domain() {
        let p = fig1(40.0);
        assert!(matches!(phi_z(0.0, 10.0, &p), Err(AnalyticError::Domain(_))));
        assert!(matches!(phi_z(1.0, 9.0, &p), Err(AnalyticError::Domain(_))));
        let absorbing = ChannelParams::new(8.0, 11.0, 10.0, 40.0, 0.0, 1).unwrap();
        assert!(phi_z(0.0, 10.0, &absorbing).is_err());
        assert!(phi_z(1e-9, 10.0, &absorbing).unwrap().is_finite());
    }

    #[test]
    fn phi_z_is_conjugate_symmetric_and_decays() {
        let p = fig1(20.0);
        for &w in &[0.3, 4.0, 250.0] {
            let plus = z_laplace(Complex64::new(0.0, w), 10.2, &p);
            let minus = z_laplace(Complex64::new(0.0, -w), 10.2, &p);
            assert!((minus - plus.conj()).norm() <= 1e-14 * plus.norm());
            assert!((plus - phi_z(w, 10.2, &p).unwrap()).norm() <= 1e-14 * plus.norm());
        }
        let mags: Vec<f64> = [1e2, 1e4, 1e6, 1e8]
            .iter()
            .map(|&w| phi_z(w, 10.0, &p).unwrap().norm())
            .collect();
        assert!(mags.windows(2).all(|m| m[1] < m[0]));
        assert!(mags[3] < 1e-100);
    }

    #[test]
    fn z_is_real_on_the_positive_axis() {
        let p = fig1(40.0);
        for &s in &[0.01, 1.0, 300.0] {
            let z = z_laplace(Complex64::new(s, 0.0), 10.4, &p);
            assert_eq!(z.im, 0.0);
            assert!(z.re > 0.0);
        }
    }

    #[test]
    fn boundary_terms_vanish_at_high_frequency() {
        // r·C̃ tends to the direct free-space term as s grows.
        let p = fig1(40.0);
        let r = 11.5;
        let relative_boundary_part = |s: f64| {
            let s = Complex64::new(s, 0.0);
            let q = (s / p.diffusion).sqrt();
            let free = (-(r - p.r0).abs() * q).exp() / (4.0 * PI * p.r0 * (4.0 * p.diffusion * s).sqrt());
            ((r_concentration_laplace(s, r, &p) - free) / free).norm()
        };
        let parts: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&s| relative_boundary_part(s))
            .collect();
        assert!(parts.windows(2).all(|w| w[1] < w[0]), "{parts:?}");
        // Beyond this only rounding is left.
        assert!(relative_boundary_part(1e4) < 1e-12);
    }

    #[test]
    fn coupling_transform_is_surface_flux_of_concentration() {
        // K̃ = 4π rr² D ∂C̃/∂r at rr, with ∂C̃/∂r = κ C̃ from the boundary law.
        let p = fig1(20.0);
        for &s in &[
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 40.0),
            Complex64::new(-2.0, 9.0),
        ] {
            let c_surface = r_concentration_laplace(s, p.rr, &p) / p.rr;
            let kappa = p.k1 * s / (p.diffusion * (s + p.km1));
            let want = 4.0 * PI * p.rr * p.rr * p.diffusion * kappa * c_surface;
            let got = coupling_rate_laplace(s, &p);
            assert!((got - want).norm() <= 1e-12 * want.norm(), "{got} vs {want}");
            // The same value written with Z at the surface: 4π rr D q Z κ/h.
            let q = (s / p.diffusion).sqrt();
            let h = 1.0 / p.rr + kappa;
            let via_z = 4.0 * PI * p.rr * p.diffusion * q * z_laplace(s, p.rr, &p) * kappa / h;
            assert!((via_z - want).norm() <= 1e-12 * want.norm());
        }
    }

    #[test]
    fn window_kernel_limits() {
        let k = window_kernel(0.0, 0.25);
        assert_eq!(k, Complex64::new(0.25, 0.0));
        let w = 1e-3;
        let direct = (Complex64::new(0.0, w * 0.25).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((window_kernel(w, 0.25) - direct).norm() < 1e-12);
        let tiny = window_kernel(1e-12, 0.25);
        assert!((tiny.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_adsorption_means_no_rate() {
        let p = fig1(0.0);
        let q = QuadratureSpec::default();
        assert_eq!(coupling_rate(0.05, &p, &q).unwrap(), 0.0);
        assert_eq!(cumulative_fraction(0.05, &p, &q).unwrap(), 0.0);
        let sim = SimConfig::new(1e-4, 0.002, 0.01, 1, 0).unwrap();
        assert!(expected_series(&p, &sim, &q).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cumulative_fraction_starts_at_zero() {
        let q = QuadratureSpec::default();
        assert_eq!(cumulative_fraction(0.0, &fig1(40.0), &q).unwrap(), 0.0);
        assert!(cumulative_fraction(-1.0, &fig1(40.0), &q).is_err());
    }

    #[test]
    fn input_validation() {
        let q = QuadratureSpec::default();
        let p = fig1(40.0);
        assert!(matches!(
            spatial_distribution(9.0, 0.1, &p, &q),
            Err(AnalyticError::Domain(_))
        ));
        assert!(matches!(
            spatial_distribution(10.0, 0.0, &p, &q),
            Err(AnalyticError::Domain(_))
        ));
        assert!(matches!(coupling_rate(0.0, &p, &q), Err(AnalyticError::Domain(_))));
        let tiny_cap = QuadratureSpec { w_max: 1.0, ..q };
        assert!(matches!(
            coupling_rate(0.1, &p, &tiny_cap),
            Err(AnalyticError::QuadratureFailure { .. })
        ));
    }

    #[test]
    fn samples_carry_their_coordinates() {
        let p = fig1(40.0);
        let samples = phi_z_samples(&[1.0, 2.0], 10.0, &p).unwrap();
        assert_eq!(samples[1].w, 2.0);
        assert_eq!(samples[1].value, phi_z(2.0, 10.0, &p).unwrap());
        let s = Complex64::new(1.0, 1.0);
        assert_eq!(z_laplace_sample(s, 10.0, &p).value, z_laplace(s, 10.0, &p));
    }
}
