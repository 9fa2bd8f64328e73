//! Particle-based simulation of emission, Brownian propagation, adsorption
//! or reflection at the receiver, and desorption.
//!
//! Each step, in order:
//! 1. every free molecule takes an `N(0, 2DΔt)` step per axis;
//! 2. a molecule that ends inside the receiver adsorbs with probability
//!    `P_A` where its path crosses the surface, otherwise it returns to where
//!    it started the step;
//! 3. every molecule that was adsorbed at the start of the step desorbs with
//!    probability `P_D` and is pushed outward by the empirical desorption
//!    displacement.

use std::f64::consts::{PI, TAU};
use std::sync::Once;

use rand::distr::Open01;
use rand::Rng;
use thiserror::Error;

use crate::geometry::{line_sphere_intersection, GeometryError, Vec3};
use crate::params::{ChannelParams, SampleSeries, SimConfig, ValidationError};
use crate::rng::{scaled_gaussian, step_sigma, trial_rng};

static CLAMP_WARNING: Once = Once::new();

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("state corruption: {0}")]
    StateCorruption(String),
    #[error("adsorption site: {0}")]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoleculeState {
    Free,
    Adsorbed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Molecule {
    pub position: Vec3,
    pub state: MoleculeState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverGeometry {
    pub center: Vec3,
    pub rr: f64,
}

impl ReceiverGeometry {
    pub fn new(center: Vec3, rr: f64) -> Result<Self, ValidationError> {
        if !(rr > 0.0 && rr.is_finite()) {
            return Err(ValidationError::new("rr", format!("must be positive, got {rr}")));
        }
        if !center.is_finite() {
            return Err(ValidationError::new("center", "must be finite"));
        }
        Ok(Self { center, rr })
    }

    /// Receiver of radius `params.rr` at the origin.
    pub fn centered(params: &ChannelParams) -> Self {
        Self {
            center: Vec3::ZERO,
            rr: params.rr,
        }
    }
}

/// How the `ntx` molecules are placed at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Emission {
    /// Independent uniform points on the sphere of radius `r0` about the
    /// receiver center.
    #[default]
    Shell,
    /// All molecules at `center + (r0, 0, 0)`.
    Point,
}

/// `k₁ √(πΔt/D)` without clamping; values above one mean `Δt` is too large
/// for `k₁`.
pub fn unclamped_adsorption_probability(k1: f64, dt: f64, diffusion: f64) -> f64 {
    k1 * (PI * dt / diffusion).sqrt()
}

/// Probability that a molecule found inside the receiver adsorbs, clamped to
/// one. Clamping is logged once per process.
pub fn adsorption_probability(k1: f64, dt: f64, diffusion: f64) -> f64 {
    let p = unclamped_adsorption_probability(k1, dt, diffusion);
    if p > 1.0 {
        CLAMP_WARNING.call_once(|| {
            log::warn!(
                "adsorption probability k1*sqrt(pi*dt/D) = {p:.4} exceeds 1 (k1 = {k1}, dt = {dt}); \
                 clamping to 1, every collision adsorbs"
            );
        });
        1.0
    } else {
        p
    }
}

/// `1 − e^{−k₋₁Δt}`.
pub fn desorption_probability(km1: f64, dt: f64) -> f64 {
    -(-km1 * dt).exp_m1()
}

/// Empirical per-axis desorption offset in units of `√(2DΔt)`, for a
/// uniform `p ∈ (0, 1)`.
pub fn desorption_offset(p: f64) -> f64 {
    (0.571_825 * p - 0.552_246 * p * p) / (1.0 - 1.539_08 * p + 0.546_424 * p * p)
}

/// Draws the three non-negative displacement components of a desorbing
/// molecule.
pub fn desorption_displacement<R: Rng + ?Sized>(rng: &mut R, diffusion: f64, dt: f64) -> Vec3 {
    let sigma = step_sigma(diffusion, dt);
    let mut axis = || sigma * desorption_offset(rng.sample(Open01));
    Vec3::new(axis(), axis(), axis())
}

/// Moves a desorbing molecule away from the receiver coordinate by
/// coordinate: each component goes in the direction of the sign of its
/// offset from the center. A zero offset gets a random sign.
pub fn place_desorbed<R: Rng + ?Sized>(p_adsorbed: Vec3, center: Vec3, disp: Vec3, rng: &mut R) -> Vec3 {
    let mut outward = |coord: f64, c: f64, d: f64| {
        let rel = coord - c;
        let sign = if rel > 0.0 {
            1.0
        } else if rel < 0.0 {
            -1.0
        } else if rng.random::<bool>() {
            1.0
        } else {
            -1.0
        };
        coord + sign * d
    };
    Vec3::new(
        outward(p_adsorbed.x, center.x, disp.x),
        outward(p_adsorbed.y, center.y, disp.y),
        outward(p_adsorbed.z, center.z, disp.z),
    )
}

/// Per-step constants derived from the channel and the step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepKernel {
    pub sigma: f64,
    pub diffusion: f64,
    pub dt: f64,
    pub p_adsorb: f64,
    pub p_desorb: f64,
}

impl StepKernel {
    pub fn new(params: &ChannelParams, dt: f64) -> Self {
        Self {
            sigma: step_sigma(params.diffusion, dt),
            diffusion: params.diffusion,
            dt,
            p_adsorb: adsorption_probability(params.k1, dt, params.diffusion),
            p_desorb: desorption_probability(params.km1, dt),
        }
    }
}

/// Event counts of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepEvents {
    pub collided: u32,
    pub adsorbed: u32,
    pub desorbed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialState {
    pub molecules: Vec<Molecule>,
    pub step_index: u64,
    pub n_free: u32,
    pub n_adsorbed: u32,
    /// Adsorption events since the current window opened.
    pub window_adsorbed: u32,
    /// Desorption events since the current window opened.
    pub window_desorbed: u32,
    /// Adsorbed count when the current window opened.
    window_start_adsorbed: u32,
}

impl TrialState {
    /// Places `params.ntx` free molecules at distance `r0` from the center.
    pub fn emit<R: Rng + ?Sized>(
        params: &ChannelParams,
        geom: &ReceiverGeometry,
        emission: Emission,
        rng: &mut R,
    ) -> Self {
        let molecules = (0..params.ntx)
            .map(|_| {
                let offset = match emission {
                    Emission::Point => Vec3::new(params.r0, 0.0, 0.0),
                    Emission::Shell => {
                        let cos_theta: f64 = 2.0 * rng.random::<f64>() - 1.0;
                        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
                        let phi = TAU * rng.random::<f64>();
                        Vec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta) * params.r0
                    }
                };
                Molecule {
                    position: geom.center + offset,
                    state: MoleculeState::Free,
                }
            })
            .collect();
        Self::from_molecules(molecules)
    }

    pub fn from_molecules(molecules: Vec<Molecule>) -> Self {
        let n_adsorbed = molecules.iter().filter(|m| m.state == MoleculeState::Adsorbed).count() as u32;
        let n_free = molecules.len() as u32 - n_adsorbed;
        Self {
            molecules,
            step_index: 0,
            n_free,
            n_adsorbed,
            window_adsorbed: 0,
            window_desorbed: 0,
            window_start_adsorbed: n_adsorbed,
        }
    }

    pub fn total(&self) -> u32 {
        self.molecules.len() as u32
    }

    /// Advances every molecule by one step.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        kernel: &StepKernel,
        geom: &ReceiverGeometry,
        rng: &mut R,
    ) -> Result<StepEvents, SimError> {
        let rr_sq = geom.rr * geom.rr;
        let mut events = StepEvents::default();
        let mut free_after = 0u32;

        for m in &mut self.molecules {
            match m.state {
                MoleculeState::Free => {
                    let prev = m.position;
                    let next = prev + scaled_gaussian(rng, kernel.sigma);
                    if (next - geom.center).norm_squared() < rr_sq {
                        events.collided += 1;
                        let u: f64 = rng.random();
                        if u < kernel.p_adsorb {
                            m.position = line_sphere_intersection(prev, next, geom.center, geom.rr)?;
                            m.state = MoleculeState::Adsorbed;
                            events.adsorbed += 1;
                        }
                        // Otherwise the molecule bounces back to `prev`.
                    } else {
                        m.position = next;
                    }
                }
                MoleculeState::Adsorbed => {
                    let u: f64 = rng.random();
                    if u < kernel.p_desorb {
                        let disp = desorption_displacement(rng, kernel.diffusion, kernel.dt);
                        m.position = place_desorbed(m.position, geom.center, disp, rng);
                        m.state = MoleculeState::Free;
                        events.desorbed += 1;
                    }
                }
            }
            if m.state == MoleculeState::Free {
                free_after += 1;
            }
        }

        let n_adsorbed = self.n_adsorbed + events.adsorbed - events.desorbed;
        let n_free = self.n_free + events.desorbed - events.adsorbed;
        if n_free != free_after || n_free + n_adsorbed != self.total() {
            return Err(SimError::StateCorruption(format!(
                "step {}: {n_free} free (tallied {free_after}) + {n_adsorbed} adsorbed != {}",
                self.step_index,
                self.total()
            )));
        }
        self.n_free = n_free;
        self.n_adsorbed = n_adsorbed;
        self.window_adsorbed += events.adsorbed;
        self.window_desorbed += events.desorbed;
        self.step_index += 1;
        Ok(events)
    }

    /// Closes the current window and returns its net count `N_A − N_D`.
    pub fn close_window(&mut self) -> Result<i64, SimError> {
        let net = i64::from(self.window_adsorbed) - i64::from(self.window_desorbed);
        let by_level = i64::from(self.n_adsorbed) - i64::from(self.window_start_adsorbed);
        if net != by_level {
            return Err(SimError::StateCorruption(format!(
                "window ending at step {}: event count {net} != change in adsorbed {by_level}",
                self.step_index
            )));
        }
        self.window_adsorbed = 0;
        self.window_desorbed = 0;
        self.window_start_adsorbed = self.n_adsorbed;
        Ok(net)
    }
}

/// Simulates one emission and returns the net newly-adsorbed count of each
/// sampling window. The random stream depends only on `(cfg.seed, trial)`.
pub fn run_trial(
    params: &ChannelParams,
    geom: &ReceiverGeometry,
    cfg: &SimConfig,
    emission: Emission,
    trial: u64,
) -> Result<SampleSeries, SimError> {
    params.validate()?;
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let kernel = StepKernel::new(params, cfg.dt);
    let mut state = TrialState::emit(params, geom, emission, &mut rng);
    let steps_per_window = cfg.steps_per_window();
    let windows = cfg.windows();
    let mut values = Vec::with_capacity(windows);
    for _ in 0..windows {
        for _ in 0..steps_per_window {
            state.step(&kernel, geom, &mut rng)?;
        }
        values.push(state.close_window()? as f64);
    }
    Ok(SampleSeries::new(cfg.window_starts(), cfg.ts, values))
}
