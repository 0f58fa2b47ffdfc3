use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::solvers::SolverConfig;

/// Distribution of the on-support values of each trial signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SignalPrior {
    /// `x_N ∼ N(0, variance · I)`.
    Gaussian { variance: f64 },
    /// `x_N ∼ N(μ_N, variance · I)` with `μ_i = ±known_mean` on `N ∖ Δ`
    /// and `±other_mean` on `Δ` and `Δe` (random signs).
    Mean {
        known_mean: f64,
        other_mean: f64,
        variance: f64,
    },
}

impl Default for SignalPrior {
    fn default() -> Self {
        SignalPrior::Gaussian { variance: 100.0 }
    }
}

impl SignalPrior {
    /// The RegModCS sweep prior: means `±1` / `±0.25`, variance `0.01`.
    pub fn regmodcs_default() -> Self {
        SignalPrior::Mean {
            known_mean: 1.0,
            other_mean: 0.25,
            variance: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match self {
            SignalPrior::Gaussian { variance } => *variance,
            SignalPrior::Mean {
                variance,
                known_mean,
                other_mean,
            } => {
                if !(known_mean.is_finite() && other_mean.is_finite()) {
                    return param("prior means must be finite");
                }
                *variance
            }
        };
        if !(v >= 0.0 && v.is_finite()) {
            return param(format!("prior variance must be non-negative, got {v}"));
        }
        Ok(())
    }
}

/// Grid of `(m, u, e)` cells and per-cell trial settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub s: usize,
    /// Measurement counts as fractions of `n`.
    pub m_fracs: Vec<f64>,
    /// `|Δ|` as fractions of `s`.
    pub u_fracs: Vec<f64>,
    /// `|Δe|` as fractions of `s`.
    pub e_fracs: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub prior: SignalPrior,
    /// Measurement noise variances `σ_w²`; used by the noisy experiment.
    pub noise_vars: Vec<f64>,
    /// RegModCS weights; used by the sweep.
    pub gammas: Vec<f64>,
    /// Also run plain BP on every trial.
    pub run_cs: bool,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 256,
            s: 26,
            m_fracs: vec![0.19],
            u_fracs: vec![0.08],
            e_fracs: vec![0.08],
            trials: 500,
            seed: 0,
            prior: SignalPrior::default(),
            noise_vars: vec![0.0],
            gammas: vec![0.0],
            run_cs: true,
            solver: SolverConfig::default(),
        }
    }
}

/// Nearest integer, ties away from zero (sizes are non-negative).
pub fn round_half_up(v: f64) -> usize {
    (v + 0.5).floor().max(0.0) as usize
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("n must be positive");
        }
        if self.s == 0 || self.s > self.n {
            return param(format!("need 0 < s ≤ n, got s = {}", self.s));
        }
        if self.trials == 0 {
            return param("trials must be at least 1");
        }
        for (name, list) in [
            ("m", &self.m_fracs),
            ("u", &self.u_fracs),
            ("e", &self.e_fracs),
        ] {
            if list.is_empty() {
                return param(format!("{name} fraction list is empty"));
            }
            if let Some(f) = list.iter().find(|f| !(0.0..=1.0).contains(*f)) {
                return param(format!("{name} fraction {f} is outside [0, 1]"));
            }
        }
        for &mf in &self.m_fracs {
            if self.m(mf) == 0 {
                return param(format!("m fraction {mf} gives no measurements"));
            }
        }
        for &ef in &self.e_fracs {
            if self.e(ef) > self.n - self.s {
                return param(format!("e fraction {ef} exceeds the off-support size"));
            }
        }
        if let Some(v) = self
            .noise_vars
            .iter()
            .find(|v| !(**v >= 0.0 && v.is_finite()))
        {
            return param(format!("noise variance {v} must be non-negative"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return param(format!("gamma {g} must be non-negative"));
        }
        self.prior.validate()?;
        self.solver.validate()
    }

    pub fn m(&self, frac: f64) -> usize {
        round_half_up(frac * self.n as f64)
    }

    pub fn u(&self, frac: f64) -> usize {
        round_half_up(frac * self.s as f64)
    }

    pub fn e(&self, frac: f64) -> usize {
        round_half_up(frac * self.s as f64)
    }
}
