use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamic::{
    generate_sequence, measure_sequence, run_sequence, DynamicOptions, DynamicTrace, Frame, Method,
    SequenceModel, ThresholdRule,
};
use crate::error::{param, Result};
use crate::operators::{gaussian_operator, DenseOperator};
use crate::rng::{stream, Purpose};
use crate::solvers::SolverConfig;
use crate::supports::IndexSet;

fn default_method() -> Method {
    Method::Modcs
}

/// A synthetic sequence run: model, measurement sizes and method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicRunConfig {
    pub model: SequenceModel,
    /// Measurements at `t = 0`.
    pub m0: usize,
    /// Measurements at `t > 0`.
    pub m: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub threshold: ThresholdRule,
    /// RegModCS weight; `b_p / (2σ_p²)` from the model when absent.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub noise_var: f64,
    #[serde(default)]
    pub initial_known: IndexSet,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicRun {
    pub config: DynamicRunConfig,
    /// Weight actually used (0 for methods without a prior term).
    pub gamma: f64,
    pub trace: DynamicTrace,
}

impl DynamicRunConfig {
    /// `A0` and `A`: column-normalized Gaussian, drawn from the model seed.
    pub fn operators(&self) -> Result<(DenseOperator, DenseOperator)> {
        let n = self.model.n;
        if self.m == 0 || self.m > self.m0 || self.m0 > n {
            return param(format!(
                "need 0 < m ≤ m0 ≤ n, got m = {}, m0 = {}, n = {n}",
                self.m, self.m0
            ));
        }
        let seed = |k| stream(self.model.seed, Purpose::Matrix, k, 0).random::<u64>();
        let a0 = gaussian_operator(self.m0, n, seed(0))?;
        let a = gaussian_operator(self.m, n, seed(1))?;
        Ok((a0, a))
    }

    fn resolved_gamma(&self) -> f64 {
        match self.method {
            Method::Regmodcs => self
                .gamma
                .unwrap_or(self.model.b_p / (2.0 * self.model.sigma_p2)),
            _ => 0.0,
        }
    }
}

/// Generates the sequence, measures it and runs the configured method.
/// Returns the ground-truth frames alongside the run.
pub fn run_dynamic(cfg: &DynamicRunConfig) -> Result<(Vec<Frame>, DynamicRun)> {
    let frames = generate_sequence(&cfg.model)?;
    let (a0, a) = cfg.operators()?;
    let ys = measure_sequence(&a0, &a, &frames, cfg.noise_var, cfg.model.seed)?;
    let gamma = cfg.resolved_gamma();
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return param(format!("gamma {gamma} is not usable; set it explicitly"));
    }
    let opts = DynamicOptions {
        threshold: cfg.threshold,
        initial_known: cfg.initial_known.clone(),
        gamma,
        solver: cfg.solver.clone(),
    };
    let trace = run_sequence(cfg.method, &a0, &a, &ys, &opts, Some(&frames))?;
    Ok((
        frames,
        DynamicRun {
            config: cfg.clone(),
            gamma,
            trace,
        },
    ))
}

impl DynamicRun {
    /// Per-frame CSV trace with the config echoed as a `#` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# {}",
            serde_json::to_string(
                &serde_json::json!({ "config": self.config, "gamma": self.gamma })
            )?
        )?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t",
            "nrmse",
            "support_size",
            "additions",
            "removals",
            "missed",
            "extra",
            "status",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for f in &self.trace.frames {
            out.write_record([
                f.t.to_string(),
                opt(f.nrmse.map(|v| v.to_string())),
                f.support_size.to_string(),
                f.additions.to_string(),
                f.removals.to_string(),
                opt(f.missed.map(|v| v.to_string())),
                opt(f.extra.map(|v| v.to_string())),
                f.status.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
