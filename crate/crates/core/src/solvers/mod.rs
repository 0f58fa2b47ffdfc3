//! Equality-constrained sparse recovery programs.
//!
//! * [`solve_bp`]: `min ‖β‖₁ s.t. Aβ = y`
//! * [`solve_modcs`]: `min ‖β_{T^c}‖₁ s.t. Aβ = y`
//! * [`solve_regmodcs`]: `min ‖β_{T^c}‖₁ + γ‖β_T − μ_T‖² s.t. Aβ = y`
//! * [`solve_l0_bruteforce`]: `min ‖β_{T^c}‖₀ s.t. Aβ = y` by enumeration
//!
//! The three convex programs share one primal-dual interior-point engine.

mod ipm;
mod l0;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use l0::{solve_l0_bruteforce, L0Solution, L0_SUBSET_BUDGET};

use crate::error::{param, Error, Result};
use crate::operators::LinearOperator;
use crate::supports::IndexSet;

/// Relative error below which a reconstruction counts as exact.
pub const EXACT_THRESHOLD: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative primal feasibility tolerance `‖Ax − y‖ / ‖y‖`.
    pub feas_tol: f64,
    /// Relative surrogate duality-gap tolerance.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease fraction of the residual line search.
    pub armijo: f64,
    /// Step shrink factor of the line search.
    pub backtrack: f64,
    /// Barrier parameter growth factor.
    pub barrier_growth: f64,
    /// Re-fit on the detected support after convergence (ℓ1 programs only).
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            max_iter: 100,
            armijo: 0.01,
            backtrack: 0.5,
            barrier_growth: 10.0,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                param(format!("{name} must be positive, got {v}"))
            }
        };
        pos(self.feas_tol, "feasibility tolerance")?;
        pos(self.gap_tol, "duality-gap tolerance")?;
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return param(format!(
                "line-search fraction must lie in (0, 0.5), got {}",
                self.armijo
            ));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return param(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack
            ));
        }
        if !(self.barrier_growth > 1.0 && self.barrier_growth.is_finite()) {
            return param(format!(
                "barrier growth must exceed 1, got {}",
                self.barrier_growth
            ));
        }
        if self.max_iter == 0 {
            return param("iteration limit must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Converged,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIter => "max-iter",
            SolverStatus::Infeasible => "infeasible",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub x_hat: Vec<f64>,
    pub objective: f64,
    /// `‖A x̂ − y‖₂ / ‖y‖₂` (absolute when `y = 0`).
    pub primal_residual: f64,
    /// Surrogate duality gap at the last interior-point iterate.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    /// The program has more than one minimizer (only detected when every
    /// coordinate is known and `A` has a nullspace).
    pub nonunique: bool,
    /// The returned point came from the support re-fit.
    pub polished: bool,
    /// Dual vector `w` with `A_jᵀw = 0` on `T` and `|A_jᵀw| ≤ 1` elsewhere.
    pub certificate: Vec<f64>,
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl SolverResult {
    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}

fn check_inputs<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[f64],
    known: &IndexSet,
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    if y.len() != a.rows() {
        return param(format!(
            "measurement length {} does not match {} operator rows",
            y.len(),
            a.rows()
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return param("measurements contain non-finite values");
    }
    known.check_bound(a.cols(), "known support")
}

/// Modified-CS: ℓ1 minimization over the complement of `known`.
pub fn solve_modcs<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[f64],
    known: &IndexSet,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    check_inputs(a, y, known, cfg)?;
    let dense = a.to_dense();
    let yv = DVector::from_column_slice(y);
    let prob = ipm::Problem {
        a: dense.as_ref(),
        y: &yv,
        known,
        prior: None,
    };
    Ok(ipm::solve(&prob, cfg))
}

/// Basis pursuit.
pub fn solve_bp<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    solve_modcs(a, y, &IndexSet::empty(), cfg)
}

/// Regularized modified-CS. `mu` is indexed like the sorted entries of
/// `known`.
pub fn solve_regmodcs<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[f64],
    known: &IndexSet,
    mu: &[f64],
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    check_inputs(a, y, known, cfg)?;
    if mu.len() != known.len() {
        return param(format!(
            "prior has {} entries but the known set has {}",
            mu.len(),
            known.len()
        ));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return param(format!(
            "gamma must be a finite non-negative number, got {gamma}"
        ));
    }
    if gamma == 0.0 {
        return solve_modcs(a, y, known, cfg);
    }
    let dense = a.to_dense();
    let yv = DVector::from_column_slice(y);
    let prob = ipm::Problem {
        a: dense.as_ref(),
        y: &yv,
        known,
        prior: Some((mu, gamma)),
    };
    Ok(ipm::solve(&prob, cfg))
}

/// `‖x − x̂‖₂ / ‖x‖₂`.
pub fn nrmse(x_true: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x_true.len() != x_hat.len() {
        return param(format!(
            "length mismatch: {} vs {}",
            x_true.len(),
            x_hat.len()
        ));
    }
    let den: f64 = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::Parameter(
            "N-RMSE is undefined for a zero reference signal".into(),
        ));
    }
    let num: f64 = x_true
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// `nrmse < 1e−5`.
pub fn is_exact(x_true: &[f64], x_hat: &[f64]) -> Result<bool> {
    Ok(nrmse(x_true, x_hat)? < EXACT_THRESHOLD)
}

#[cfg(test)]
mod tests;
