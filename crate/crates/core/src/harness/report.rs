use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Outcome of one method on one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Outcome {
    Solved {
        exact: bool,
        err2: f64,
        sig2: f64,
        nrmse: f64,
    },
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: String,
    pub trials: usize,
    pub exact: usize,
    /// Exact-recovery probability.
    pub prob: f64,
    /// Binomial standard error `√(p(1−p)/trials)`.
    pub prob_se: f64,
    /// Pooled `√(Σ‖x − x̂‖² / Σ‖x‖²)` over solved trials.
    pub nrmse: Option<f64>,
    /// Mean of the per-trial N-RMSE.
    pub nrmse_mean: Option<f64>,
    /// Per-trial N-RMSE standard deviation over `√count`.
    pub nrmse_se: Option<f64>,
    /// Solver errors and infeasible systems; counted as inexact and left
    /// out of the error statistics.
    pub failures: usize,
}

impl MethodStats {
    pub(crate) fn from_outcomes(method: &str, outcomes: &[Outcome]) -> Self {
        let trials = outcomes.len();
        let (mut exact, mut failures, mut err2, mut sig2) = (0, 0, 0.0, 0.0);
        let mut per = Vec::with_capacity(trials);
        for o in outcomes {
            match *o {
                Outcome::Solved {
                    exact: ex,
                    err2: e,
                    sig2: s,
                    nrmse,
                } => {
                    exact += ex as usize;
                    err2 += e;
                    sig2 += s;
                    per.push(nrmse);
                }
                Outcome::Failed => failures += 1,
            }
        }
        let prob = exact as f64 / trials as f64;
        let (nrmse, nrmse_mean, nrmse_se) = if per.is_empty() {
            (None, None, None)
        } else {
            let k = per.len() as f64;
            let mean = per.iter().sum::<f64>() / k;
            let var = if per.len() > 1 {
                per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            (
                (err2 / sig2).sqrt().into(),
                Some(mean),
                Some((var / k).sqrt()),
            )
        };
        MethodStats {
            method: method.to_string(),
            trials,
            exact,
            prob,
            prob_se: (prob * (1.0 - prob) / trials as f64).sqrt(),
            nrmse,
            nrmse_mean,
            nrmse_se,
            failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub m: usize,
    pub u: usize,
    pub e: usize,
    pub noise_var: f64,
    pub gamma: f64,
    pub methods: Vec<MethodStats>,
}

impl CellResult {
    pub fn method(&self, name: &str) -> Option<&MethodStats> {
        self.methods.iter().find(|s| s.method == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// How fractional sizes were turned into counts.
    pub rounding: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// One row per cell; method columns are prefixed by the method name.
    /// The config is echoed as a leading `#` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# {}",
            serde_json::to_string(&serde_json::json!({
                "experiment": self.experiment,
                "rounding": self.rounding,
                "config": self.config,
            }))?
        )?;
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        let mut header: Vec<String> = ["m", "u", "e", "noise_var", "gamma"]
            .map(String::from)
            .to_vec();
        if let Some(first) = self.cells.first() {
            for s in &first.methods {
                for col in [
                    "prob",
                    "prob_se",
                    "nrmse",
                    "nrmse_mean",
                    "nrmse_se",
                    "failures",
                ] {
                    header.push(format!("{}_{col}", s.method));
                }
            }
        }
        out.write_record(&header)?;
        for c in &self.cells {
            let mut row = vec![
                c.m.to_string(),
                c.u.to_string(),
                c.e.to_string(),
                c.noise_var.to_string(),
                c.gamma.to_string(),
            ];
            for s in &c.methods {
                row.extend([
                    s.prob.to_string(),
                    s.prob_se.to_string(),
                    opt(s.nrmse),
                    opt(s.nrmse_mean),
                    opt(s.nrmse_se),
                    s.failures.to_string(),
                ]);
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_by_hand() {
        let o = [
            Outcome::Solved {
                exact: true,
                err2: 0.0,
                sig2: 4.0,
                nrmse: 0.0,
            },
            Outcome::Solved {
                exact: false,
                err2: 1.0,
                sig2: 4.0,
                nrmse: 0.5,
            },
            Outcome::Failed,
            Outcome::Solved {
                exact: true,
                err2: 0.0,
                sig2: 1.0,
                nrmse: 0.0,
            },
        ];
        let s = MethodStats::from_outcomes("x", &o);
        assert_eq!((s.exact, s.failures, s.trials), (2, 1, 4));
        assert_eq!(s.prob, 0.5);
        assert_eq!(s.prob_se, 0.25);
        assert!((s.nrmse.unwrap() - (1.0f64 / 9.0).sqrt()).abs() < 1e-15);
        assert!((s.nrmse_mean.unwrap() - 0.5 / 3.0).abs() < 1e-15);
        // sample variance of (0, 0.5, 0) is 1/12
        assert!((s.nrmse_se.unwrap() - (1.0f64 / 36.0).sqrt()).abs() < 1e-15);

        let none = MethodStats::from_outcomes("x", &[Outcome::Failed]);
        assert_eq!(none.nrmse, None);
        assert_eq!(none.prob, 0.0);
    }
}
