use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{ExperimentConfig, SignalPrior};
use super::map_indexed;
use super::report::{CellResult, ExperimentReport, MethodStats, Outcome};
use crate::error::Result;
use crate::operators::gaussian_matrix;
use crate::rng::{stream, Purpose};
use crate::solvers::{is_exact, solve_bp, solve_modcs, solve_regmodcs, SolverResult, SolverStatus};
use crate::supports::{build_support_model, random_support, SupportModel};

const ROUNDING: &str = "nearest integer, ties up";

struct Trial {
    x: Vec<f64>,
    model: SupportModel,
    /// Prior mean on `T`, in the order of `T`.
    mu_t: Vec<f64>,
}

fn draw_trial<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    u: usize,
    e: usize,
    rng: &mut R,
) -> Result<Trial> {
    let n = cfg.n;
    let support = random_support(n, cfg.s, rng)?;
    let model = build_support_model(n, &support, u, e, rng)?;
    let mut mean = vec![0.0; n];
    let var = match cfg.prior {
        SignalPrior::Gaussian { variance } => variance,
        SignalPrior::Mean {
            known_mean,
            other_mean,
            variance,
        } => {
            let mut sign = |v: f64| if rng.random::<bool>() { v } else { -v };
            for &i in support.iter() {
                mean[i] = sign(if model.missing().contains(i) {
                    other_mean
                } else {
                    known_mean
                });
            }
            for &i in model.extra().iter() {
                mean[i] = sign(other_mean);
            }
            variance
        }
    };
    let sd = var.sqrt();
    let mut x = vec![0.0; n];
    for &i in support.iter() {
        let z: f64 = StandardNormal.sample(rng);
        x[i] = mean[i] + sd * z;
    }
    let mu_t = model.known().iter().map(|&i| mean[i]).collect();
    Ok(Trial { x, model, mu_t })
}

fn classify(x: &[f64], res: Result<SolverResult>) -> Outcome {
    match res {
        Ok(r) if r.status != SolverStatus::Infeasible => {
            let err2: f64 = x.iter().zip(&r.x_hat).map(|(a, b)| (a - b).powi(2)).sum();
            let sig2: f64 = x.iter().map(|v| v * v).sum();
            match is_exact(x, &r.x_hat) {
                Ok(exact) => Outcome::Solved {
                    exact,
                    err2,
                    sig2,
                    nrmse: (err2 / sig2).sqrt(),
                },
                Err(_) => Outcome::Failed,
            }
        }
        _ => Outcome::Failed,
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Exact,
    Noisy,
    Sweep,
}

fn run(cfg: &ExperimentConfig, kind: Kind) -> Result<ExperimentReport> {
    cfg.validate()?;
    let noise_vars: Vec<f64> = match kind {
        Kind::Noisy => cfg.noise_vars.clone(),
        _ => vec![0.0],
    };
    let gammas: Vec<f64> = match kind {
        Kind::Sweep => cfg.gammas.clone(),
        _ => vec![0.0],
    };
    let primary = match kind {
        Kind::Sweep => "regmodcs",
        _ => "modcs",
    };
    let mut cells = Vec::new();
    let mut mue = 0u64;
    for (mi, &mf) in cfg.m_fracs.iter().enumerate() {
        let m = cfg.m(mf);
        // one matrix per m, shared by every trial of every cell using it
        let a = gaussian_matrix(
            m,
            cfg.n,
            true,
            &mut stream(cfg.seed, Purpose::Matrix, mi as u64, 0),
        )?;
        for &uf in &cfg.u_fracs {
            for &ef in &cfg.e_fracs {
                let (u, e) = (cfg.u(uf), cfg.e(ef));
                let trials = map_indexed(cfg.trials, |i| {
                    draw_trial(
                        cfg,
                        u,
                        e,
                        &mut stream(cfg.seed, Purpose::Trial, mue, i as u64),
                    )
                })
                .into_iter()
                .collect::<Result<Vec<Trial>>>()?;
                for &nv in &noise_vars {
                    for &gamma in &gammas {
                        cells.push(run_cell(cfg, &a, &trials, mue, (u, e), nv, gamma, primary)?);
                    }
                }
                mue += 1;
            }
        }
    }
    Ok(ExperimentReport {
        experiment: match kind {
            Kind::Exact => "exact-recon-probability",
            Kind::Noisy => "noisy-nrmse",
            Kind::Sweep => "regmodcs-sweep",
        }
        .to_string(),
        rounding: ROUNDING.to_string(),
        config: cfg.clone(),
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cfg: &ExperimentConfig,
    a: &DMatrix<f64>,
    trials: &[Trial],
    mue: u64,
    (u, e): (usize, usize),
    noise_var: f64,
    gamma: f64,
    primary: &str,
) -> Result<CellResult> {
    let sd = noise_var.sqrt();
    let outcomes: Vec<(Outcome, Option<Outcome>)> = map_indexed(trials.len(), |i| {
        let tr = &trials[i];
        let mut y = a * DVector::from_column_slice(&tr.x);
        if sd > 0.0 {
            // the same noise direction for every σ_w² of a trial
            let mut rng = stream(cfg.seed, Purpose::Noise, mue, i as u64);
            for v in y.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sd * z;
            }
        }
        let y = y.as_slice();
        let known = tr.model.known();
        let res = if gamma > 0.0 {
            solve_regmodcs(a, y, known, &tr.mu_t, gamma, &cfg.solver)
        } else {
            solve_modcs(a, y, known, &cfg.solver)
        };
        let main = classify(&tr.x, res);
        let cs = cfg
            .run_cs
            .then(|| classify(&tr.x, solve_bp(a, y, &cfg.solver)));
        (main, cs)
    });
    let main: Vec<Outcome> = outcomes.iter().map(|o| o.0).collect();
    let mut methods = vec![MethodStats::from_outcomes(primary, &main)];
    if cfg.run_cs {
        let cs: Vec<Outcome> = outcomes.iter().filter_map(|o| o.1).collect();
        methods.push(MethodStats::from_outcomes("cs", &cs));
    }
    Ok(CellResult {
        m: a.nrows(),
        u,
        e,
        noise_var,
        gamma,
        methods,
    })
}

/// Exact-recovery probability of modified-CS (and BP) per `(m, u, e)` cell.
pub fn exact_recon_probability(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(cfg, Kind::Exact)
}

/// Reconstruction error under `N(0, σ_w²)` measurement noise, one cell per
/// `(m, u, e, σ_w²)`.
pub fn noisy_nrmse(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(cfg, Kind::Noisy)
}

/// RegModCS probability and error per `(m, u, e, γ)`; `γ = 0` is
/// modified-CS.
pub fn regmodcs_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(cfg, Kind::Sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 40,
            s: 4,
            m_fracs: vec![0.5],
            u_fracs: vec![0.0, 0.25],
            e_fracs: vec![0.0],
            trials: 12,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn known_support_is_always_exact() {
        let r = exact_recon_probability(&small()).unwrap();
        assert_eq!(r.cells.len(), 2);
        let c = &r.cells[0];
        assert_eq!((c.m, c.u, c.e), (20, 0, 0));
        assert_eq!(c.method("modcs").unwrap().prob, 1.0);
        assert_eq!(c.method("modcs").unwrap().prob_se, 0.0);
        assert!(r.cells.iter().all(|c| c.methods.len() == 2));
    }

    #[test]
    fn reports_are_reproducible() {
        let a = exact_recon_probability(&small()).unwrap();
        let b = exact_recon_probability(&small()).unwrap();
        let (mut ja, mut jb) = (Vec::new(), Vec::new());
        a.write_json(&mut ja).unwrap();
        b.write_json(&mut jb).unwrap();
        assert_eq!(ja, jb);
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("# {"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn zero_noise_matches_exact_experiment() {
        let cfg = ExperimentConfig {
            noise_vars: vec![0.0, 0.01],
            ..small()
        };
        let noisy = noisy_nrmse(&cfg).unwrap();
        let exact = exact_recon_probability(&cfg).unwrap();
        assert_eq!(noisy.cells.len(), 4);
        assert_eq!(noisy.cells[0].methods, exact.cells[0].methods);
        assert!(noisy.cells[1].method("modcs").unwrap().nrmse.unwrap() > 0.0);
    }

    #[test]
    fn sweep_gamma_zero_is_modcs() {
        let cfg = ExperimentConfig {
            gammas: vec![0.0, 1.0],
            prior: SignalPrior::regmodcs_default(),
            run_cs: false,
            ..small()
        };
        let r = regmodcs_sweep(&cfg).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!(r.cells[1].gamma, 1.0);
        assert_eq!(r.cells[0].methods.len(), 1);
        let ex = exact_recon_probability(&ExperimentConfig {
            run_cs: false,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(r.cells[0].methods[0].prob, ex.cells[0].methods[0].prob);
    }
}
