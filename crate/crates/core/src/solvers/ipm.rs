//! Primal-dual interior-point engine for
//!
//! ```text
//!   min  Σ_{i∉T} |β_i| + γ ‖β_T − μ_T‖²   s.t.  A β = y
//! ```
//!
//! The ℓ1 term is split with bound variables `u_i ≥ |β_i|` on `T^c` only;
//! coordinates in `T` stay free (and quadratic when `γ > 0`). Each Newton
//! step eliminates `u` and the inequality multipliers and solves the reduced
//! symmetric system
//!
//! ```text
//!   [ A_P D⁻¹ A_Pᵀ   −A_T  ] [dν ]   [ r_p + A_P D⁻¹ b_P ]
//!   [ −A_Tᵀ          −2γ I ] [dβ_T] = [ −b_T              ]
//! ```
//!
//! with a backtracking line search on the full KKT residual.

use nalgebra::{DMatrix, DVector};

use super::{SolverConfig, SolverResult, SolverStatus};
use crate::supports::IndexSet;

pub(crate) struct Problem<'a> {
    pub a: &'a DMatrix<f64>,
    pub y: &'a DVector<f64>,
    pub known: &'a IndexSet,
    /// `(μ_T, γ)` with `μ_T` aligned to the sorted order of `known`.
    pub prior: Option<(&'a [f64], f64)>,
}

/// Equality system after dropping dependent rows.
struct Reduced {
    a: DMatrix<f64>,
    y: DVector<f64>,
    /// Maps reduced dual vectors back to the caller's rows.
    lift: Option<DMatrix<f64>>,
    gram_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    rank: usize,
}

enum Reduction {
    Ok(Reduced),
    Inconsistent { x_ls: DVector<f64>, residual: f64 },
}

fn reduce(a: &DMatrix<f64>, y: &DVector<f64>, feas_tol: f64, y_scale: f64) -> Reduction {
    let gram = a * a.transpose();
    if let Some(chol) = gram.clone().cholesky() {
        let d = chol.l_dirty().diagonal();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(v.abs()), hi.max(v.abs()))
        });
        if hi > 0.0 && (lo / hi).powi(2) > 1e-13 {
            return Reduction::Ok(Reduced {
                a: a.clone(),
                y: y.clone(),
                lift: None,
                gram_chol: chol,
                rank: a.nrows(),
            });
        }
    }
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > smax * 1e-10)
        .collect();
    let r = keep.len();
    let ur = u.select_columns(&keep);
    let ury = ur.tr_mul(y);
    let resid = (y - &ur * &ury).norm();
    let mut ra = DMatrix::zeros(r, a.ncols());
    for (row, &i) in keep.iter().enumerate() {
        ra.set_row(row, &(vt.row(i) * svd.singular_values[i]));
    }
    if resid > feas_tol * y_scale || r == 0 {
        let x_ls = svd
            .solve(y, smax * 1e-10)
            .unwrap_or_else(|_| DVector::zeros(a.ncols()));
        return Reduction::Inconsistent {
            x_ls,
            residual: resid / y_scale,
        };
    }
    let gram = &ra * ra.transpose();
    let chol = gram
        .cholesky()
        .expect("reduced Gram matrix is positive definite");
    Reduction::Ok(Reduced {
        a: ra,
        y: ury,
        lift: Some(ur),
        gram_chol: chol,
        rank: r,
    })
}

pub(crate) fn objective(
    x: &DVector<f64>,
    p_idx: &[usize],
    t_idx: &[usize],
    prior: Option<(&[f64], f64)>,
) -> f64 {
    let l1: f64 = p_idx.iter().map(|&i| x[i].abs()).sum();
    let quad = match prior {
        Some((mu, gamma)) if gamma > 0.0 => {
            gamma
                * t_idx
                    .iter()
                    .zip(mu)
                    .map(|(&i, m)| (x[i] - m).powi(2))
                    .sum::<f64>()
        }
        _ => 0.0,
    };
    l1 + quad
}

struct Iterate {
    xp: DVector<f64>,
    xt: DVector<f64>,
    u: DVector<f64>,
    l1: DVector<f64>,
    l2: DVector<f64>,
    nu: DVector<f64>,
}

struct Residuals {
    rxp: DVector<f64>,
    rxt: DVector<f64>,
    ru: DVector<f64>,
    rc1: DVector<f64>,
    rc2: DVector<f64>,
    rp: DVector<f64>,
    f1: DVector<f64>,
    f2: DVector<f64>,
}

impl Residuals {
    fn dual_norm(&self) -> f64 {
        (self.rxp.norm_squared() + self.rxt.norm_squared() + self.ru.norm_squared()).sqrt()
    }

    fn norm(&self) -> f64 {
        (self.rxp.norm_squared()
            + self.rxt.norm_squared()
            + self.ru.norm_squared()
            + self.rc1.norm_squared()
            + self.rc2.norm_squared()
            + self.rp.norm_squared())
        .sqrt()
    }

    fn surrogate_gap(&self, it: &Iterate) -> f64 {
        -(self.f1.dot(&it.l1) + self.f2.dot(&it.l2))
    }
}

struct Blocks<'a> {
    a_p: DMatrix<f64>,
    at_p: DMatrix<f64>,
    a_t: DMatrix<f64>,
    y: &'a DVector<f64>,
    mu: DVector<f64>,
    gamma: f64,
}

impl Blocks<'_> {
    fn residuals(&self, it: &Iterate, tau: f64) -> Residuals {
        let atv_p = &self.at_p * &it.nu;
        let atv_t = self.a_t.tr_mul(&it.nu);
        let f1 = &it.xp - &it.u;
        let f2 = -&it.xp - &it.u;
        let rxp = &it.l1 - &it.l2 + atv_p;
        let rxt = (&it.xt - &self.mu) * (2.0 * self.gamma) + atv_t;
        let ru = it.l1.map(|v| 1.0 - v) - &it.l2;
        let rc1 = -it.l1.component_mul(&f1).add_scalar(1.0 / tau);
        let rc2 = -it.l2.component_mul(&f2).add_scalar(1.0 / tau);
        let rp = &self.a_p * &it.xp + &self.a_t * &it.xt - self.y;
        Residuals {
            rxp,
            rxt,
            ru,
            rc1,
            rc2,
            rp,
            f1,
            f2,
        }
    }
}

pub(crate) fn solve(prob: &Problem<'_>, cfg: &SolverConfig) -> SolverResult {
    let n = prob.a.ncols();
    let y_norm = prob.y.norm();
    let y_scale = if y_norm > 0.0 { y_norm } else { 1.0 };
    let gamma = prob.prior.map(|(_, g)| g).unwrap_or(0.0);
    let t_idx: Vec<usize> = prob.known.as_slice().to_vec();
    let p_idx: Vec<usize> = prob.known.complement(n).as_slice().to_vec();
    let prior = prob.prior;

    // iterate on A/c, y/c so the path does not depend on the overall scale
    let col_max = prob.a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let c = if col_max > 0.0 && col_max.is_finite() {
        col_max
    } else {
        1.0
    };
    let (a_n, y_n) = (prob.a / c, prob.y / c);
    let y_scale_n = y_scale / c;

    let red = match reduce(&a_n, &y_n, cfg.feas_tol, y_scale_n) {
        Reduction::Ok(r) => r,
        Reduction::Inconsistent { x_ls, residual } => {
            let obj = objective(&x_ls, &p_idx, &t_idx, prior);
            return SolverResult {
                x_hat: x_ls.iter().copied().collect(),
                objective: obj,
                primal_residual: residual,
                duality_gap: f64::INFINITY,
                iterations: 0,
                status: SolverStatus::Infeasible,
                nonunique: false,
                polished: false,
                certificate: vec![0.0; prob.a.nrows()],
                objective_trace: Vec::new(),
            };
        }
    };

    // particular solution: closest point to (μ on T, 0 elsewhere)
    let mut x_tilde = DVector::zeros(n);
    if let Some((mu, g)) = prior {
        if g > 0.0 {
            for (&i, &m) in t_idx.iter().zip(mu) {
                x_tilde[i] = m;
            }
        }
    }
    let corr = red.gram_chol.solve(&(&red.y - &red.a * &x_tilde));
    let x0 = &x_tilde + red.a.tr_mul(&corr);

    let lift = |nu: &DVector<f64>| -> Vec<f64> {
        let nu = nu / c;
        match &red.lift {
            Some(ur) => (ur * nu).iter().copied().collect(),
            None => nu.iter().copied().collect(),
        }
    };
    let primal_rel = |x: &DVector<f64>| (prob.a * x - prob.y).norm() / y_scale;

    if p_idx.is_empty() {
        // every coordinate is known: the ℓ1 term vanishes
        let obj = objective(&x0, &p_idx, &t_idx, prior);
        return SolverResult {
            primal_residual: primal_rel(&x0),
            x_hat: x0.iter().copied().collect(),
            objective: obj,
            duality_gap: 0.0,
            iterations: 0,
            status: SolverStatus::Converged,
            nonunique: gamma == 0.0 && red.rank < n,
            polished: false,
            certificate: vec![0.0; prob.a.nrows()],
            objective_trace: Vec::new(),
        };
    }

    let (p, k, m) = (p_idx.len(), t_idx.len(), red.a.nrows());
    let a_p = red.a.select_columns(&p_idx);
    let blocks = Blocks {
        at_p: a_p.transpose(),
        a_p,
        a_t: red.a.select_columns(&t_idx),
        y: &red.y,
        mu: match prior {
            Some((mu, g)) if g > 0.0 => DVector::from_column_slice(mu),
            _ => DVector::zeros(k),
        },
        gamma,
    };

    let xp0 = DVector::from_iterator(p, p_idx.iter().map(|&i| x0[i]));
    let xt0 = DVector::from_iterator(k, t_idx.iter().map(|&i| x0[i]));
    let amax = xp0.amax();
    let floor = if amax > 0.0 {
        0.1 * amax
    } else {
        0.1 * y_scale_n.max(1e-300)
    };
    let u0 = xp0.map(|v| 0.95 * v.abs() + floor);
    let l1 = (&xp0 - &u0).map(|f| -1.0 / f);
    let l2 = (-&xp0 - &u0).map(|f| -1.0 / f);
    let nu = -(&blocks.a_p * (&l1 - &l2));
    let mut it = Iterate {
        xp: xp0,
        xt: xt0,
        u: u0,
        l1,
        l2,
        nu,
    };

    let mut tau = cfg.barrier_growth;
    let mut iterations = 0;
    let mut status = SolverStatus::MaxIter;
    let mut res = blocks.residuals(&it, tau);
    let mut gap = res.surrogate_gap(&it);
    let mut trace = Vec::new();

    let assemble = |it: &Iterate| {
        let mut x = DVector::zeros(n);
        for (j, &i) in p_idx.iter().enumerate() {
            x[i] = it.xp[j];
        }
        for (j, &i) in t_idx.iter().enumerate() {
            x[i] = it.xt[j];
        }
        x
    };

    loop {
        let x_now = assemble(&it);
        let obj = objective(&x_now, &p_idx, &t_idx, prior);
        trace.push(obj);
        let primal_ok = res.rp.norm() / y_scale_n <= cfg.feas_tol;
        let dual_ok = res.dual_norm() <= cfg.feas_tol * (1.0 + (p as f64).sqrt());
        let gap_ok = gap <= cfg.gap_tol * obj.abs().max(1.0);
        if primal_ok && dual_ok && gap_ok {
            status = SolverStatus::Converged;
            break;
        }
        if iterations >= cfg.max_iter || !gap.is_finite() {
            break;
        }
        iterations += 1;

        // Newton direction
        let q1 = it.l1.zip_map(&res.f1, |l, f| -l / f);
        let q2 = it.l2.zip_map(&res.f2, |l, f| -l / f);
        let s1 = &q1 + &q2;
        let s2 = &q1 - &q2;
        let inv_tau = 1.0 / tau;
        let atv_p = &blocks.at_p * &it.nu;
        let w1 = DVector::from_fn(p, |i, _| {
            -atv_p[i] + inv_tau * (1.0 / res.f1[i] - 1.0 / res.f2[i])
        });
        let w2 = DVector::from_fn(p, |i, _| {
            1.0 + inv_tau * (1.0 / res.f1[i] + 1.0 / res.f2[i])
        });
        // s1 − s2²/s1 without the cancellation
        let dvec = DVector::from_fn(p, |i, _| 4.0 * q1[i] * q2[i] / s1[i]);
        let b_p = DVector::from_fn(p, |i, _| w1[i] - s2[i] * w2[i] / s1[i]);
        let b_t = -&res.rxt;

        let mut scaled = blocks.at_p.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row /= dvec[i].sqrt();
        }
        let mut schur = DMatrix::zeros(m, m);
        schur.gemm_tr(1.0, &scaled, &scaled, 0.0);
        let dinv_bp = b_p.component_div(&dvec);
        let rhs_top = &res.rp + &blocks.a_p * &dinv_bp;

        let (dnu, dxt) = if k == 0 {
            let sol = match schur.clone().cholesky() {
                Some(c) => Some(c.solve(&rhs_top)),
                None => schur.lu().solve(&rhs_top),
            };
            match sol {
                Some(s) => (s, DVector::zeros(0)),
                None => break,
            }
        } else {
            let mut kkt = DMatrix::zeros(m + k, m + k);
            kkt.view_mut((0, 0), (m, m)).copy_from(&schur);
            kkt.view_mut((0, m), (m, k)).copy_from(&(-&blocks.a_t));
            kkt.view_mut((m, 0), (k, m))
                .copy_from(&(-blocks.a_t.transpose()));
            for j in 0..k {
                kkt[(m + j, m + j)] = -2.0 * gamma;
            }
            let mut rhs = DVector::zeros(m + k);
            rhs.rows_mut(0, m).copy_from(&rhs_top);
            rhs.rows_mut(m, k).copy_from(&(-&b_t));
            match kkt.lu().solve(&rhs) {
                Some(s) => (s.rows(0, m).into_owned(), s.rows(m, k).into_owned()),
                None => break,
            }
        };
        let dxp = (&b_p - &blocks.at_p * &dnu).component_div(&dvec);
        let du = DVector::from_fn(p, |i, _| (s2[i] * dxp[i] - w2[i]) / s1[i]);
        let dl1 = DVector::from_fn(p, |i, _| {
            -it.l1[i] - inv_tau / res.f1[i] + q1[i] * (dxp[i] - du[i])
        });
        let dl2 = DVector::from_fn(p, |i, _| {
            -it.l2[i] - inv_tau / res.f2[i] - q2[i] * (dxp[i] + du[i])
        });

        // step length: keep multipliers positive and inequalities strict
        let mut smax: f64 = 1.0;
        for i in 0..p {
            if dl1[i] < 0.0 {
                smax = smax.min(-it.l1[i] / dl1[i]);
            }
            if dl2[i] < 0.0 {
                smax = smax.min(-it.l2[i] / dl2[i]);
            }
        }
        let mut s = 0.99 * smax;
        let strictly_feasible = |s: f64| {
            (0..p).all(|i| {
                res.f1[i] + s * (dxp[i] - du[i]) < 0.0 && res.f2[i] + s * (-dxp[i] - du[i]) < 0.0
            })
        };
        let mut guard = 0;
        while !strictly_feasible(s) && guard < 60 {
            s *= cfg.backtrack;
            guard += 1;
        }
        let base = res.norm();
        let mut accepted = None;
        for _ in 0..40 {
            let trial = Iterate {
                xp: &it.xp + &dxp * s,
                xt: &it.xt + &dxt * s,
                u: &it.u + &du * s,
                l1: &it.l1 + &dl1 * s,
                l2: &it.l2 + &dl2 * s,
                nu: &it.nu + &dnu * s,
            };
            let r = blocks.residuals(&trial, tau);
            if r.norm() <= (1.0 - cfg.armijo * s) * base {
                accepted = Some((trial, r));
                break;
            }
            s *= cfg.backtrack;
        }
        let Some((next, _)) = accepted else {
            // stalled at working precision
            if primal_ok && dual_ok && gap <= 100.0 * cfg.gap_tol * obj.abs().max(1.0) {
                status = SolverStatus::Converged;
            }
            break;
        };
        it = next;

        // recenter
        let r_tmp = blocks.residuals(&it, tau);
        gap = r_tmp.surrogate_gap(&it);
        tau = cfg.barrier_growth * 2.0 * p as f64 / gap;
        res = blocks.residuals(&it, tau);
    }

    let x_ipm = assemble(&it);
    let obj_ipm = objective(&x_ipm, &p_idx, &t_idx, prior);
    let mut result = SolverResult {
        primal_residual: primal_rel(&x_ipm),
        x_hat: x_ipm.iter().copied().collect(),
        objective: obj_ipm,
        duality_gap: gap,
        iterations,
        status,
        nonunique: false,
        polished: false,
        certificate: lift(&(-&it.nu)),
        objective_trace: trace,
    };
    if cfg.polish && gamma == 0.0 && status == SolverStatus::Converged {
        if let Some((x_pol, obj_pol)) = polish(prob, &x_ipm, &p_idx, &t_idx, red.rank, cfg, y_scale)
        {
            if obj_pol <= obj_ipm + cfg.gap_tol * obj_ipm.abs().max(1.0) {
                result.primal_residual = primal_rel(&x_pol);
                result.x_hat = x_pol.iter().copied().collect();
                result.objective = obj_pol;
                result.polished = true;
            }
        }
    }
    result
}

/// Re-fits the equality constraints on the detected support so that
/// negligible off-support entries become exact zeros.
fn polish(
    prob: &Problem<'_>,
    x: &DVector<f64>,
    p_idx: &[usize],
    t_idx: &[usize],
    rank: usize,
    cfg: &SolverConfig,
    y_scale: f64,
) -> Option<(DVector<f64>, f64)> {
    let thr = 1e-6 * x.amax();
    let mut cols: Vec<usize> = t_idx.to_vec();
    cols.extend(p_idx.iter().copied().filter(|&i| x[i].abs() > thr));
    cols.sort_unstable();
    if cols.is_empty() || cols.len() > rank {
        return None;
    }
    let sub = prob.a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let z = svd.solve(prob.y, 1e-12 * svd.singular_values.max()).ok()?;
    // round-off sized coefficients (e.g. on stale known indices) become exact zeros
    let tiny = 1e-11 * z.amax();
    let mut out = DVector::zeros(x.len());
    for (j, &i) in cols.iter().enumerate() {
        if z[j].abs() > tiny {
            out[i] = z[j];
        }
    }
    let resid = (prob.a * &out - prob.y).norm() / y_scale;
    if resid > cfg.feas_tol {
        return None;
    }
    let obj = objective(&out, p_idx, t_idx, prob.prior);
    Some((out, obj))
}
