//! WebAssembly bindings for the browser demo. Every entry point returns a
//! JSON string; errors come back as `{"error": "..."}`.

use modcs_core::dynamic::{Method, SequenceModel, SequenceVariant, ThresholdRule};
use modcs_core::harness::{run_dynamic, DynamicRunConfig};
use modcs_core::operators::{gaussian_operator, LinearOperator};
use modcs_core::rip::{max_sparsity_fraction, rho_curve, BoundRule};
use modcs_core::rng::{stream, Purpose};
use modcs_core::solvers::{nrmse, solve_bp, solve_modcs, SolverConfig};
use modcs_core::supports::{build_support_model, random_support, IndexSet};
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json<T: Serialize>(r: modcs_core::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
pub struct Curve {
    pub rule: &'static str,
    pub threshold: f64,
    pub max_s_over_n: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn bound_curves_value(
    m_over_n: f64,
    max_frac: f64,
    points: usize,
) -> modcs_core::Result<Vec<Curve>> {
    BoundRule::ALL
        .iter()
        .map(|&rule| {
            Ok(Curve {
                rule: rule.name(),
                threshold: rule.threshold(),
                max_s_over_n: max_sparsity_fraction(m_over_n, rule)?,
                points: rho_curve(m_over_n, rule, max_frac, points)?,
            })
        })
        .collect()
}

/// ρ curves of the Gaussian-bound sufficient conditions at one `m/n`.
#[wasm_bindgen]
pub fn bound_curves(m_over_n: f64, max_frac: f64, points: usize) -> String {
    to_json(bound_curves_value(m_over_n, max_frac, points))
}

#[derive(Serialize)]
pub struct Recovery {
    pub x: Vec<f64>,
    pub known: IndexSet,
    pub missing: IndexSet,
    pub extra: IndexSet,
    pub modcs: Vec<f64>,
    pub cs: Vec<f64>,
    pub modcs_nrmse: f64,
    pub cs_nrmse: f64,
}

pub fn recovery_value(
    n: usize,
    m: usize,
    s: usize,
    u: usize,
    e: usize,
    seed: u64,
) -> modcs_core::Result<Recovery> {
    let mut rng = stream(seed, Purpose::Trial, 0, 0);
    let support = random_support(n, s, &mut rng)?;
    let model = build_support_model(n, &support, u, e, &mut rng)?;
    let mut x = vec![0.0; n];
    for &i in support.iter() {
        let z: f64 = StandardNormal.sample(&mut rng);
        x[i] = 10.0 * z;
    }
    let a = gaussian_operator(m, n, seed)?;
    let y: Vec<f64> = a
        .apply(&DVector::from_column_slice(&x))
        .iter()
        .copied()
        .collect();
    let cfg = SolverConfig::default();
    let modcs = solve_modcs(&a, &y, model.known(), &cfg)?.x_hat;
    let cs = solve_bp(&a, &y, &cfg)?.x_hat;
    Ok(Recovery {
        modcs_nrmse: nrmse(&x, &modcs)?,
        cs_nrmse: nrmse(&x, &cs)?,
        known: model.known().clone(),
        missing: model.missing().clone(),
        extra: model.extra().clone(),
        x,
        modcs,
        cs,
    })
}

/// One random instance solved by modified-CS and by basis pursuit.
#[wasm_bindgen]
pub fn recovery_demo(n: usize, m: usize, s: usize, u: usize, e: usize, seed: u64) -> String {
    to_json(recovery_value(n, m, s, u, e, seed))
}

#[derive(Serialize)]
pub struct Tracking {
    pub method: String,
    pub nrmse: Vec<Option<f64>>,
}

pub fn tracking_value(
    n: usize,
    s: usize,
    churn: usize,
    m: usize,
    t_max: usize,
    seed: u64,
) -> modcs_core::Result<Vec<Tracking>> {
    let model = SequenceModel {
        n,
        s,
        additions: churn,
        removals: churn,
        sigma_p2: 1.0,
        b_p: 10.0,
        t_max,
        initial_variance: 100.0,
        variant: SequenceVariant::Sparsified,
        seed,
    };
    [Method::Modcs, Method::Cs]
        .into_iter()
        .map(|method| {
            let cfg = DynamicRunConfig {
                model: model.clone(),
                m0: (n / 2).max(m),
                m,
                method,
                threshold: ThresholdRule::Fixed(0.0),
                gamma: None,
                noise_var: 0.0,
                initial_known: IndexSet::empty(),
                solver: SolverConfig::default(),
            };
            let (_, run) = run_dynamic(&cfg)?;
            Ok(Tracking {
                method: method.name().to_string(),
                nrmse: run.trace.frames.iter().map(|f| f.nrmse).collect(),
            })
        })
        .collect()
}

/// Per-frame error of modified-CS and simple CS on a slowly changing
/// sparse sequence.
#[wasm_bindgen]
pub fn tracking_demo(
    n: usize,
    s: usize,
    churn: usize,
    m: usize,
    t_max: usize,
    seed: u64,
) -> String {
    to_json(tracking_value(n, s, churn, m, t_max, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_are_ordered() {
        let c = bound_curves_value(0.5, 1e-3, 5).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c[0].max_s_over_n > c[1].max_s_over_n);
        assert_eq!(c[0].points.len(), 5);
    }

    #[test]
    fn modcs_needs_fewer_measurements() {
        let r = recovery_value(128, 32, 12, 1, 1, 4).unwrap();
        assert!(r.modcs_nrmse < 1e-6);
        assert!(r.cs_nrmse > 1e-2);
    }

    #[test]
    fn tracking_has_one_row_per_method() {
        let t = tracking_value(64, 6, 1, 24, 3, 1).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|r| r.nrmse.len() == 4));
        assert!(t[0].nrmse.iter().all(|v| v.unwrap() < 1e-5));
    }

    #[test]
    fn errors_become_json() {
        let s = recovery_demo(10, 5, 20, 0, 0, 0);
        assert!(s.contains("\"error\""));
    }
}
