use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::model::Frame;
use crate::error::{param, Result};
use crate::operators::LinearOperator;
use crate::solvers::{
    nrmse, solve_bp, solve_modcs, solve_regmodcs, SolverConfig, SolverResult, SolverStatus,
};
use crate::supports::{energy_support, estimate_support, support_change_stats, IndexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cs,
    CsDiff,
    Modcs,
    Regmodcs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cs => "cs",
            Method::CsDiff => "cs-diff",
            Method::Modcs => "modcs",
            Method::Regmodcs => "regmodcs",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cs" => Ok(Method::Cs),
            "cs-diff" => Ok(Method::CsDiff),
            "modcs" => Ok(Method::Modcs),
            "regmodcs" => Ok(Method::Regmodcs),
            _ => param(format!(
                "unknown method '{s}' (expected cs, cs-diff, modcs or regmodcs)"
            )),
        }
    }
}

/// How `N̂_t = {i : (x̂_t)_i² > α}` picks `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum ThresholdRule {
    Fixed(f64),
    /// Squared smallest entry of the previous estimate's `b`%-energy support.
    Energy(f64),
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Fixed(0.0)
    }
}

impl ThresholdRule {
    fn validate(&self) -> Result<()> {
        match *self {
            ThresholdRule::Fixed(a) if !(a >= 0.0 && a.is_finite()) => {
                param(format!("threshold must be non-negative, got {a}"))
            }
            ThresholdRule::Energy(b) if !(b > 0.0 && b <= 100.0) => {
                param(format!("energy percentage must lie in (0, 100], got {b}"))
            }
            _ => Ok(()),
        }
    }

    fn alpha(&self, reference: &[f64]) -> f64 {
        match *self {
            ThresholdRule::Fixed(a) => a,
            ThresholdRule::Energy(b) => match energy_support(reference, b) {
                Ok(sup) => sup
                    .iter()
                    .map(|&i| reference[i] * reference[i])
                    .fold(f64::INFINITY, f64::min),
                // an all-zero estimate has no energy support
                Err(_) => 0.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicOptions {
    pub threshold: ThresholdRule,
    /// Known set at `t = 0` (empty, or prior knowledge such as the
    /// approximation coefficients).
    pub initial_known: IndexSet,
    /// Weight of the prior term; ignored except by RegModCS.
    pub gamma: f64,
    pub solver: SolverConfig,
}

impl Default for DynamicOptions {
    fn default() -> Self {
        DynamicOptions {
            threshold: ThresholdRule::default(),
            initial_known: IndexSet::empty(),
            gamma: 0.0,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameStatus {
    Ok,
    /// The solver hit its iteration limit; its iterate was used anyway.
    NotConverged,
    /// The solve failed; the previous estimate was carried forward.
    Failed,
}

impl std::fmt::Display for FrameStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameStatus::Ok => "ok",
            FrameStatus::NotConverged => "not-converged",
            FrameStatus::Failed => "failed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: usize,
    /// Against the true frame, when known.
    pub nrmse: Option<f64>,
    pub support_size: usize,
    /// `|N̂_t ∖ N̂_{t−1}|`
    pub additions: usize,
    /// `|N̂_{t−1} ∖ N̂_t|`
    pub removals: usize,
    /// `|N_t ∖ T|` for the known set `T` used at this frame.
    pub missed: Option<usize>,
    /// `|T ∖ N_t|`
    pub extra: Option<usize>,
    pub alpha: f64,
    pub iterations: usize,
    pub status: FrameStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Output of a sequence run; one record and one estimate per input frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicTrace {
    pub method: Method,
    pub frames: Vec<FrameRecord>,
    pub estimates: Vec<Vec<f64>>,
    pub supports: Vec<IndexSet>,
    #[serde(skip)]
    pub results: Vec<Option<SolverResult>>,
}

impl DynamicTrace {
    pub fn nrmse(&self) -> Vec<Option<f64>> {
        self.frames.iter().map(|f| f.nrmse).collect()
    }

    pub fn mean_nrmse(&self) -> Option<f64> {
        let v: Option<Vec<f64>> = self.nrmse().into_iter().collect();
        v.filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn failures(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| f.status == FrameStatus::Failed)
            .count()
    }
}

/// Runs `method` over `ys`, using `a0` at `t = 0` and `a` afterwards.
pub fn run_sequence(
    method: Method,
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    ys: &[Vec<f64>],
    opts: &DynamicOptions,
    truth: Option<&[Frame]>,
) -> Result<DynamicTrace> {
    let n = a.cols();
    if a0.cols() != n {
        return param(format!("A0 has {} columns, A has {n}", a0.cols()));
    }
    if a0.rows() < a.rows() {
        return param(format!(
            "A0 has {} rows, fewer than the {} of A",
            a0.rows(),
            a.rows()
        ));
    }
    if ys.is_empty() {
        return param("empty measurement sequence");
    }
    for (t, y) in ys.iter().enumerate() {
        let want = if t == 0 { a0.rows() } else { a.rows() };
        if y.len() != want {
            return param(format!("y_{t} has {} entries, expected {want}", y.len()));
        }
    }
    if let Some(tr) = truth {
        if tr.len() != ys.len() || tr.iter().any(|f| f.x.len() != n) {
            return param("ground truth does not match the measurement sequence");
        }
    }
    opts.threshold.validate()?;
    opts.initial_known.check_bound(n, "initial known set")?;
    if !(opts.gamma >= 0.0 && opts.gamma.is_finite()) {
        return param(format!("gamma must be non-negative, got {}", opts.gamma));
    }
    opts.solver.validate()?;

    let mut trace = DynamicTrace {
        method,
        frames: Vec::with_capacity(ys.len()),
        estimates: Vec::with_capacity(ys.len()),
        supports: Vec::with_capacity(ys.len()),
        results: Vec::with_capacity(ys.len()),
    };
    let mut x_prev = vec![0.0; n];
    let mut n_prev = opts.initial_known.clone();

    for (t, y) in ys.iter().enumerate() {
        let op = if t == 0 { a0 } else { a };
        let known = match method {
            Method::Modcs | Method::Regmodcs => n_prev.clone(),
            Method::Cs | Method::CsDiff => IndexSet::empty(),
        };
        let attempt = match (method, t) {
            (Method::Cs, _) | (Method::CsDiff, 0) => solve_bp(op, y, &opts.solver),
            (Method::Modcs, _) | (Method::Regmodcs, 0) => solve_modcs(op, y, &known, &opts.solver),
            (Method::Regmodcs, _) => {
                let mu: Vec<f64> = known.iter().map(|&i| x_prev[i]).collect();
                solve_regmodcs(op, y, &known, &mu, opts.gamma, &opts.solver)
            }
            (Method::CsDiff, _) => {
                let pred = op.apply(&DVector::from_column_slice(&x_prev));
                let r: Vec<f64> = y.iter().zip(pred.iter()).map(|(a, b)| a - b).collect();
                solve_bp(op, &r, &opts.solver).map(|mut res| {
                    for (v, p) in res.x_hat.iter_mut().zip(&x_prev) {
                        *v += p;
                    }
                    res
                })
            }
        };

        let (x_hat, status, iterations, error, result) = match attempt {
            Ok(res) if res.status == SolverStatus::Infeasible => (
                x_prev.clone(),
                FrameStatus::Failed,
                res.iterations,
                Some("infeasible".to_string()),
                Some(res),
            ),
            Ok(res) => {
                let st = if res.converged() {
                    FrameStatus::Ok
                } else {
                    FrameStatus::NotConverged
                };
                (res.x_hat.clone(), st, res.iterations, None, Some(res))
            }
            Err(e) => (
                x_prev.clone(),
                FrameStatus::Failed,
                0,
                Some(e.to_string()),
                None,
            ),
        };

        let (alpha, n_hat) = if status == FrameStatus::Failed {
            (f64::NAN, n_prev.clone())
        } else {
            let reference = if t == 0 { &x_hat } else { &x_prev };
            let alpha = opts.threshold.alpha(reference);
            (alpha, estimate_support(&x_hat, alpha)?)
        };
        let change = if t == 0 {
            support_change_stats(&n_hat, &IndexSet::empty())
        } else {
            support_change_stats(&n_hat, &n_prev)
        };
        let truth_t = truth.map(|tr| &tr[t]);
        let record = FrameRecord {
            t,
            nrmse: match truth_t {
                Some(f) => Some(nrmse(&f.x, &x_hat)?),
                None => None,
            },
            support_size: n_hat.len(),
            additions: change.additions,
            removals: change.removals,
            missed: truth_t.map(|f| f.support.difference(&known).len()),
            extra: truth_t.map(|f| known.difference(&f.support).len()),
            alpha,
            iterations,
            status,
            error,
        };
        trace.frames.push(record);
        trace.estimates.push(x_hat.clone());
        trace.supports.push(n_hat.clone());
        trace.results.push(result);
        x_prev = x_hat;
        n_prev = n_hat;
    }
    Ok(trace)
}

/// Dynamic modified-CS: `T = N̂_{t−1}` at each frame.
pub fn dynamic_modcs(
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    ys: &[Vec<f64>],
    opts: &DynamicOptions,
    truth: Option<&[Frame]>,
) -> Result<DynamicTrace> {
    run_sequence(Method::Modcs, a0, a, ys, opts, truth)
}

/// Dynamic RegModCS with prior `μ_T = (x̂_{t−1})_T` and weight `opts.gamma`.
pub fn dynamic_regmodcs(
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    ys: &[Vec<f64>],
    opts: &DynamicOptions,
    truth: Option<&[Frame]>,
) -> Result<DynamicTrace> {
    run_sequence(Method::Regmodcs, a0, a, ys, opts, truth)
}

/// BP on the measurement residual `y_t − A x̂_{t−1}`.
pub fn cs_diff(
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    ys: &[Vec<f64>],
    opts: &DynamicOptions,
    truth: Option<&[Frame]>,
) -> Result<DynamicTrace> {
    run_sequence(Method::CsDiff, a0, a, ys, opts, truth)
}

/// Independent BP on every frame.
pub fn simple_cs(
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    ys: &[Vec<f64>],
    opts: &DynamicOptions,
    truth: Option<&[Frame]>,
) -> Result<DynamicTrace> {
    run_sequence(Method::Cs, a0, a, ys, opts, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::{generate_sequence, measure_sequence, SequenceModel, SequenceVariant};
    use crate::operators::{gaussian_operator, DenseOperator};

    fn setup(
        additions: usize,
        removals: usize,
        sigma_p2: f64,
        t_max: usize,
    ) -> (DenseOperator, DenseOperator, Vec<Frame>, Vec<Vec<f64>>) {
        let model = SequenceModel {
            n: 120,
            s: 10,
            additions,
            removals,
            sigma_p2,
            b_p: 5.0,
            t_max,
            initial_variance: 100.0,
            variant: SequenceVariant::Sparsified,
            seed: 11,
        };
        let frames = generate_sequence(&model).unwrap();
        let a0 = gaussian_operator(60, 120, 1).unwrap();
        let a = gaussian_operator(30, 120, 2).unwrap();
        let ys = measure_sequence(&a0, &a, &frames, 0.0, 0).unwrap();
        (a0, a, frames, ys)
    }

    #[test]
    fn modcs_tracks_a_changing_support() {
        let (a0, a, frames, ys) = setup(1, 1, 1.0, 8);
        let tr = dynamic_modcs(&a0, &a, &ys, &DynamicOptions::default(), Some(&frames)).unwrap();
        assert_eq!(tr.frames.len(), 9);
        for rec in &tr.frames {
            assert!(rec.nrmse.unwrap() < 1e-5, "{rec:?}");
            assert_eq!(rec.status, FrameStatus::Ok);
        }
        // α = 0 on exact frames recovers the support itself
        for (sup, f) in tr.supports.iter().zip(&frames) {
            assert_eq!(sup, &f.support);
        }
        assert_eq!(tr.frames[3].missed, Some(1));
        assert_eq!(tr.frames[3].extra, Some(1));
    }

    #[test]
    fn gamma_zero_matches_modcs() {
        let (a0, a, frames, ys) = setup(1, 1, 1.0, 4);
        let opts = DynamicOptions::default();
        let m = dynamic_modcs(&a0, &a, &ys, &opts, Some(&frames)).unwrap();
        let r = dynamic_regmodcs(&a0, &a, &ys, &opts, Some(&frames)).unwrap();
        assert_eq!(m.estimates, r.estimates);
        assert_eq!(m.supports, r.supports);
    }

    #[test]
    fn static_sequence_cs_diff_stays_exact() {
        let (a0, a, frames, ys) = setup(0, 0, 0.0, 5);
        let tr = cs_diff(&a0, &a, &ys, &DynamicOptions::default(), Some(&frames)).unwrap();
        assert!(tr.frames.iter().all(|f| f.nrmse.unwrap() < 1e-8));
    }

    #[test]
    fn single_frame_cs_diff_is_bp() {
        let (a0, a, _, ys) = setup(0, 0, 0.0, 0);
        let opts = DynamicOptions::default();
        let tr = cs_diff(&a0, &a, &ys, &opts, None).unwrap();
        let bp = solve_bp(&a0, &ys[0], &opts.solver).unwrap();
        assert_eq!(tr.estimates[0], bp.x_hat);
        assert_eq!(tr.frames[0].nrmse, None);
    }

    #[test]
    fn failed_frame_carries_state() {
        let (a0, a, frames, mut ys) = setup(1, 1, 1.0, 3);
        ys[2] = vec![f64::NAN; ys[2].len()];
        let tr = dynamic_modcs(&a0, &a, &ys, &DynamicOptions::default(), Some(&frames)).unwrap();
        assert_eq!(tr.frames[2].status, FrameStatus::Failed);
        assert!(tr.frames[2].error.is_some());
        assert_eq!(tr.estimates[2], tr.estimates[1]);
        assert_eq!(tr.supports[2], tr.supports[1]);
        assert_eq!(tr.frames.len(), 4);
    }

    #[test]
    fn energy_threshold_uses_previous_estimate() {
        let rule = ThresholdRule::Energy(90.0);
        // 90% of 14 is 12.6, reached by 9 + 4
        assert_eq!(rule.alpha(&[3.0, -2.0, 1.0, 0.0]), 4.0);
        assert_eq!(rule.alpha(&[0.0; 3]), 0.0);
        assert_eq!(ThresholdRule::Fixed(4.0).alpha(&[1.0]), 4.0);
        assert!(ThresholdRule::Energy(0.0).validate().is_err());
    }

    #[test]
    fn input_checks() {
        let (a0, a, _, ys) = setup(0, 0, 0.0, 2);
        let opts = DynamicOptions::default();
        assert!(dynamic_modcs(&a, &a0, &ys, &opts, None).is_err());
        assert!(dynamic_modcs(&a0, &a, &[], &opts, None).is_err());
        let bad = DynamicOptions {
            gamma: -1.0,
            ..DynamicOptions::default()
        };
        assert!(dynamic_regmodcs(&a0, &a, &ys, &bad, None).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Cs, Method::CsDiff, Method::Modcs, Method::Regmodcs] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
