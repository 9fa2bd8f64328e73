//! Physical and numerical parameter sets shared by the simulator and the
//! analytical model.

use thiserror::Error;

/// Relative slack used when checking that one duration is an integer
/// multiple of another.
const MULTIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// Physical constants of the channel. Lengths in µm, times in s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Diffusion coefficient, µm²/s.
    pub diffusion: f64,
    /// Distance of the transmitter from the receiver center, µm.
    pub r0: f64,
    /// Receiver radius, µm.
    pub rr: f64,
    /// Adsorption rate, µm/s.
    pub k1: f64,
    /// Desorption rate, 1/s.
    pub km1: f64,
    /// Molecules released per emission.
    pub ntx: u32,
}

impl ChannelParams {
    /// Builds and validates a parameter set.
    pub fn new(diffusion: f64, r0: f64, rr: f64, k1: f64, km1: f64, ntx: u32) -> Result<Self, ValidationError> {
        let p = Self {
            diffusion,
            r0,
            rr,
            k1,
            km1,
            ntx,
        };
        p.validate()?;
        Ok(p)
    }

    /// Closest distance between the transmitter and the receiver surface.
    pub fn gap(&self) -> f64 {
        self.r0 - self.rr
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ValidationError> {
        positive("diffusion", self.diffusion)?;
        positive("rr", self.rr)?;
        finite("r0", self.r0)?;
        if !(self.gap() > 0.0) {
            return Err(ValidationError::new(
                "d",
                format!(
                    "transmitter gap d = r0 - rr must be positive (r0 = {}, rr = {})",
                    self.r0, self.rr
                ),
            ));
        }
        non_negative("k1", self.k1)?;
        non_negative("km1", self.km1)?;
        if self.ntx == 0 {
            return Err(ValidationError::new("ntx", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_k1(self, k1: f64) -> Self {
        Self { k1, ..self }
    }

    pub fn with_km1(self, km1: f64) -> Self {
        Self { km1, ..self }
    }
}

/// Numerical knobs of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Simulation step, s.
    pub dt: f64,
    /// Sampling window, s.
    pub ts: f64,
    /// End of the last sampling window, s.
    pub t_end: f64,
    pub trials: u32,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(dt: f64, ts: f64, t_end: f64, trials: u32, seed: u64) -> Result<Self, ValidationError> {
        let c = Self {
            dt,
            ts,
            t_end,
            trials,
            seed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        positive("dt", self.dt)?;
        positive("ts", self.ts)?;
        positive("t_end", self.t_end)?;
        if self.dt > self.ts {
            return Err(ValidationError::new(
                "dt",
                format!("step {} exceeds the sampling time {}", self.dt, self.ts),
            ));
        }
        integer_ratio(self.ts, self.dt).ok_or_else(|| {
            ValidationError::new(
                "ts",
                format!(
                    "sampling time {} is not an integer multiple of dt = {}",
                    self.ts, self.dt
                ),
            )
        })?;
        integer_ratio(self.t_end, self.ts).ok_or_else(|| {
            ValidationError::new(
                "t_end",
                format!("end time {} is not an integer multiple of ts = {}", self.t_end, self.ts),
            )
        })?;
        if self.trials == 0 {
            return Err(ValidationError::new("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Simulation steps per sampling window.
    pub fn steps_per_window(&self) -> u64 {
        integer_ratio(self.ts, self.dt).expect("validated config")
    }

    pub fn windows(&self) -> usize {
        integer_ratio(self.t_end, self.ts).expect("validated config") as usize
    }

    /// Start times of the sampling windows, `k * ts` for `k = 0..windows`.
    pub fn window_starts(&self) -> Vec<f64> {
        (0..self.windows()).map(|k| k as f64 * self.ts).collect()
    }
}

/// Returns `num / den` when it is a positive integer up to rounding.
fn integer_ratio(num: f64, den: f64) -> Option<u64> {
    let ratio = num / den;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= MULTIPLE_TOL * rounded {
        Some(rounded as u64)
    } else {
        None
    }
}

fn finite(field: &'static str, v: f64) -> Result<(), ValidationError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ValidationError> {
    finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ValidationError> {
    finite(field, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be non-negative, got {v}")))
    }
}

/// Per-window values on a grid of window start times. Every window has the
/// same width `ts`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub t_grid: Vec<f64>,
    pub ts: f64,
    pub values: Vec<f64>,
}

impl SampleSeries {
    pub fn new(t_grid: Vec<f64>, ts: f64, values: Vec<f64>) -> Self {
        assert_eq!(t_grid.len(), values.len(), "grid and values differ in length");
        debug_assert!(t_grid.windows(2).all(|w| w[0] < w[1]), "grid must be increasing");
        Self { t_grid, ts, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Running sum of the window values, i.e. the cumulative net count at
    /// each window end.
    pub fn cumulative(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_must_be_positive() {
        let err = ChannelParams::new(8.0, 9.0, 10.0, 20.0, 5.0, 1000).unwrap_err();
        assert_eq!(err.field, "d");
        let err = ChannelParams::new(8.0, 10.0, 10.0, 20.0, 5.0, 1000).unwrap_err();
        assert_eq!(err.field, "d");
    }

    #[test]
    fn rejects_bad_channel_fields() {
        assert_eq!(
            ChannelParams::new(0.0, 11.0, 10.0, 1.0, 1.0, 1).unwrap_err().field,
            "diffusion"
        );
        assert_eq!(
            ChannelParams::new(8.0, 11.0, 10.0, -1.0, 1.0, 1).unwrap_err().field,
            "k1"
        );
        assert_eq!(
            ChannelParams::new(8.0, 11.0, 10.0, 1.0, -1.0, 1).unwrap_err().field,
            "km1"
        );
        assert_eq!(
            ChannelParams::new(8.0, 11.0, 10.0, 1.0, 1.0, 0).unwrap_err().field,
            "ntx"
        );
        assert!(ChannelParams::new(8.0, 11.0, 10.0, 0.0, 0.0, 1).is_ok());
    }

    #[test]
    fn sampling_time_must_be_a_multiple_of_dt() {
        let cfg = SimConfig::new(1e-5, 0.002, 0.1, 10, 1).unwrap();
        assert_eq!(cfg.steps_per_window(), 200);
        assert_eq!(cfg.windows(), 50);
        assert_eq!(SimConfig::new(3e-5, 0.002, 0.1, 10, 1).unwrap_err().field, "ts");
        assert_eq!(SimConfig::new(1e-4, 0.002, 0.101, 10, 1).unwrap_err().field, "t_end");
        assert_eq!(SimConfig::new(0.003, 0.002, 0.1, 10, 1).unwrap_err().field, "dt");
        assert_eq!(SimConfig::new(0.0, 0.002, 0.1, 10, 1).unwrap_err().field, "dt");
        assert_eq!(SimConfig::new(1e-4, 0.002, 0.1, 0, 1).unwrap_err().field, "trials");
    }

    #[test]
    fn single_window_grid() {
        let cfg = SimConfig::new(1e-4, 0.002, 0.002, 1, 1).unwrap();
        assert_eq!(cfg.window_starts(), vec![0.0]);
    }

    #[test]
    fn cumulative_sums_windows() {
        let s = SampleSeries::new(vec![0.0, 1.0, 2.0], 1.0, vec![1.0, -0.5, 2.0]);
        assert_eq!(s.cumulative(), vec![1.0, 0.5, 2.5]);
    }
}
