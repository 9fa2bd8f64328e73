//! Simulated-versus-expected comparison.

use adrx_core::SampleSeries;

/// Windows whose expected count is below this are left out of the relative
/// error, where the ratio is dominated by noise.
pub const RELATIVE_ERROR_FLOOR: f64 = 0.5;

/// Per-window mean and standard error over a set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trials: u32,
    pub mean: SampleSeries,
    /// Sample standard error of the mean; zero for a single trial.
    pub stderr: SampleSeries,
}

impl TrialSummary {
    /// Folds per-trial series in index order.
    pub fn from_trials(trials: &[SampleSeries]) -> Self {
        let first = trials.first().expect("at least one trial");
        let n = trials.len() as f64;
        let windows = first.len();
        let mut mean = vec![0.0; windows];
        for t in trials {
            for (m, v) in mean.iter_mut().zip(&t.values) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut stderr = vec![0.0; windows];
        if trials.len() >= 2 {
            for t in trials {
                for ((s, v), m) in stderr.iter_mut().zip(&t.values).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            stderr.iter_mut().for_each(|s| *s = (*s / (n - 1.0) / n).sqrt());
        }
        Self {
            trials: trials.len() as u32,
            mean: SampleSeries::new(first.t_grid.clone(), first.ts, mean),
            stderr: SampleSeries::new(first.t_grid.clone(), first.ts, stderr),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowComparison {
    pub t_start: f64,
    pub analytic: f64,
    pub mean: f64,
    /// Standard error used for `z`: the sample value, floored at
    /// `1/trials` (one molecule in one trial).
    pub stderr: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub windows: Vec<WindowComparison>,
    pub max_abs_z: f64,
    /// Root mean square of `(mean − analytic)/analytic` over windows with
    /// `analytic ≥ RELATIVE_ERROR_FLOOR`; `None` if there are none.
    pub rms_relative_error: Option<f64>,
}

impl ComparisonReport {
    pub fn new(analytic: &SampleSeries, sim: &TrialSummary) -> Self {
        assert_eq!(
            analytic.t_grid, sim.mean.t_grid,
            "comparison needs a shared window grid"
        );
        let floor = 1.0 / f64::from(sim.trials);
        let windows: Vec<WindowComparison> = analytic
            .t_grid
            .iter()
            .enumerate()
            .map(|(i, &t_start)| {
                let stderr = sim.stderr.values[i].max(floor);
                let mean = sim.mean.values[i];
                let expected = analytic.values[i];
                WindowComparison {
                    t_start,
                    analytic: expected,
                    mean,
                    stderr,
                    z: (mean - expected) / stderr,
                }
            })
            .collect();
        let max_abs_z = windows.iter().map(|w| w.z.abs()).fold(0.0, f64::max);
        let rel: Vec<f64> = windows
            .iter()
            .filter(|w| w.analytic >= RELATIVE_ERROR_FLOOR)
            .map(|w| ((w.mean - w.analytic) / w.analytic).powi(2))
            .collect();
        let rms_relative_error = (!rel.is_empty()).then(|| (rel.iter().sum::<f64>() / rel.len() as f64).sqrt());
        Self {
            windows,
            max_abs_z,
            rms_relative_error,
        }
    }

    /// Fraction of windows with `|z| ≤ bound`.
    pub fn fraction_within(&self, bound: f64) -> f64 {
        if self.windows.is_empty() {
            return 1.0;
        }
        self.windows.iter().filter(|w| w.z.abs() <= bound).count() as f64 / self.windows.len() as f64
    }

    pub fn summary_line(&self) -> String {
        let rms = self
            .rms_relative_error
            .map_or_else(|| "n/a".to_string(), |r| format!("{:.2}%", 100.0 * r));
        format!(
            "max |z| {:.2}, {:.1}% of windows within |z| <= 4, rms relative error {rms}",
            self.max_abs_z,
            100.0 * self.fraction_within(4.0)
        )
    }
}
