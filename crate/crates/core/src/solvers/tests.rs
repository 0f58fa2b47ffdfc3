use super::*;
use crate::operators::{gaussian_operator, DenseOperator};
use crate::rng::seeded;
use crate::supports::{build_support_model, nonzero_support, random_support};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn sparse_signal(n: usize, support: &IndexSet, rng: &mut impl Rng) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for &i in support {
        x[i] = 10.0 * Distribution::<f64>::sample(&StandardNormal, rng);
    }
    x
}

// Explicit LP in (β, t): min Σ t  s.t. Aβ = y, t ≥ ±β on T^c.
fn lp_oracle(a: &DMatrix<f64>, y: &DVector<f64>, known: &IndexSet) -> f64 {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let n = a.ncols();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let beta: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        if known.contains(i) {
            continue;
        }
        let t = lp.add_var(1.0, (0.0, f64::INFINITY));
        lp.add_constraint([(t, 1.0), (beta[i], -1.0)], ComparisonOp::Ge, 0.0);
        lp.add_constraint([(t, 1.0), (beta[i], 1.0)], ComparisonOp::Ge, 0.0);
    }
    for r in 0..a.nrows() {
        let row: Vec<_> = (0..n).map(|j| (beta[j], a[(r, j)])).collect();
        lp.add_constraint(&row, ComparisonOp::Eq, y[r]);
    }
    lp.solve().expect("oracle LP solves").objective()
}

#[test]
fn zero_measurements_give_zero() {
    let a = gaussian_operator(5, 12, 1).unwrap();
    let r = solve_bp(&a, &[0.0; 5], &cfg()).unwrap();
    assert!(r.converged());
    assert!(r.x_hat.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn known_superset_recovers_exactly() {
    let mut rng = seeded(3);
    let a = gaussian_operator(10, 30, 2).unwrap();
    let support = random_support(30, 4, &mut rng).unwrap();
    let x = sparse_signal(30, &support, &mut rng);
    let y = a.matrix() * &x;
    let known = support.union(&IndexSet::from(vec![0, 1, 2]));
    let r = solve_modcs(&a, y.as_slice(), &known, &cfg()).unwrap();
    assert!(r.converged());
    assert!(r.objective < 1e-9);
    assert!(is_exact(x.as_slice(), &r.x_hat).unwrap());
}

#[test]
fn empty_known_set_is_basis_pursuit() {
    let mut rng = seeded(8);
    let a = gaussian_operator(12, 24, 4).unwrap();
    let x = DVector::from_fn(24, |_, _| StandardNormal.sample(&mut rng));
    let y = a.matrix() * &x;
    let r1 = solve_modcs(&a, y.as_slice(), &IndexSet::empty(), &cfg()).unwrap();
    let r2 = solve_bp(&a, y.as_slice(), &cfg()).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn matches_l0_on_small_instance() {
    let (n, m) = (8, 6);
    let mut rng = seeded(21);
    let a = gaussian_operator(m, n, 5).unwrap();
    let support = random_support(n, 3, &mut rng).unwrap();
    let model = build_support_model(n, &support, 1, 0, &mut rng).unwrap();
    let x = sparse_signal(n, &support, &mut rng);
    let y = a.matrix() * &x;
    let r = solve_modcs(&a, y.as_slice(), model.known(), &cfg()).unwrap();
    let l0 = solve_l0_bruteforce(&a, y.as_slice(), model.known(), n, 1e-9)
        .unwrap()
        .unwrap();
    assert!(l0.unique);
    assert!((DVector::from_vec(r.x_hat) - DVector::from_vec(l0.x_hat)).amax() < 1e-7);
}

#[test]
fn dual_certificate() {
    let (n, m) = (60, 30);
    let mut rng = seeded(5);
    let a = gaussian_operator(m, n, 9).unwrap();
    let support = random_support(n, 10, &mut rng).unwrap();
    let model = build_support_model(n, &support, 4, 2, &mut rng).unwrap();
    let x = sparse_signal(n, &support, &mut rng);
    let y = a.matrix() * &x;
    let r = solve_modcs(&a, y.as_slice(), model.known(), &cfg()).unwrap();
    assert!(r.converged());
    let w = DVector::from_vec(r.certificate.clone());
    let corr = a.matrix().tr_mul(&w);
    let found = nonzero_support(&r.x_hat);
    for j in 0..n {
        if model.known().contains(j) {
            assert!(corr[j].abs() < 1e-6, "T column {j}: {}", corr[j]);
        } else if found.contains(j) {
            assert!(
                (corr[j] - r.x_hat[j].signum()).abs() < 1e-6,
                "support column {j}: {}",
                corr[j]
            );
        } else {
            assert!(
                corr[j].abs() <= 1.0 + 1e-6,
                "off-support column {j}: {}",
                corr[j]
            );
        }
    }
}

#[test]
fn generic_lp_agrees() {
    let mut rng = seeded(17);
    for trial in 0..8 {
        let n = 12 + trial;
        let m = n / 2;
        let a = gaussian_operator(m, n, 100 + trial as u64).unwrap();
        let y = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let known = random_support(n, trial % 4, &mut rng).unwrap();
        let r = solve_modcs(&a, y.as_slice(), &known, &cfg()).unwrap();
        let lp = lp_oracle(a.matrix(), &y, &known);
        assert!(
            (r.objective - lp).abs() <= 1e-6 * lp.abs().max(1.0),
            "{} vs {lp}",
            r.objective
        );
    }
}

#[test]
fn dependent_rows_are_reduced() {
    let mut rng = seeded(2);
    let base = gaussian_operator(6, 15, 7).unwrap().into_matrix();
    let mut a = DMatrix::zeros(8, 15);
    a.rows_mut(0, 6).copy_from(&base);
    a.set_row(6, &(base.row(0) + base.row(1)));
    a.set_row(7, &(base.row(2) * 2.0));
    let support = random_support(15, 2, &mut rng).unwrap();
    let x = sparse_signal(15, &support, &mut rng);
    let y = &a * &x;
    let r = solve_bp(&a, y.as_slice(), &cfg()).unwrap();
    assert!(r.converged());
    let lp = lp_oracle(&a, &y, &IndexSet::empty());
    assert!((r.objective - lp).abs() <= 1e-6 * lp.max(1.0));

    let mut bad = y.clone();
    bad[7] += 1.0;
    let r = solve_bp(&a, bad.as_slice(), &cfg()).unwrap();
    assert_eq!(r.status, SolverStatus::Infeasible);
}

#[test]
fn all_known_is_least_norm() {
    let a = gaussian_operator(4, 7, 3).unwrap();
    let y = [1.0, 2.0, -1.0, 0.5];
    let r = solve_modcs(&a, &y, &IndexSet::full(7), &cfg()).unwrap();
    assert!(r.nonunique);
    assert_eq!(r.objective, 0.0);
    let pinv = a.matrix().clone().pseudo_inverse(1e-12).unwrap();
    let want = pinv * DVector::from_column_slice(&y);
    assert!((DVector::from_vec(r.x_hat) - want).amax() < 1e-10);
}

#[test]
fn regmodcs_zero_gamma_and_small_gamma() {
    let mut rng = seeded(31);
    let a = gaussian_operator(20, 50, 6).unwrap();
    let support = random_support(50, 8, &mut rng).unwrap();
    let model = build_support_model(50, &support, 3, 2, &mut rng).unwrap();
    let x = sparse_signal(50, &support, &mut rng);
    let y = a.matrix() * &x;
    let mu: Vec<f64> = model.known().iter().map(|&i| x[i] + 0.1).collect();
    let m0 = solve_modcs(&a, y.as_slice(), model.known(), &cfg()).unwrap();
    let r0 = solve_regmodcs(&a, y.as_slice(), model.known(), &mu, 0.0, &cfg()).unwrap();
    assert_eq!(m0, r0);
    let tiny = solve_regmodcs(&a, y.as_slice(), model.known(), &mu, 1e-12, &cfg()).unwrap();
    assert!((DVector::from_vec(tiny.x_hat) - DVector::from_vec(m0.x_hat)).amax() < 1e-7);
}

#[test]
fn regmodcs_beats_random_feasible_points() {
    let mut rng = seeded(12);
    let a = gaussian_operator_unnorm(4, 6, 44);
    let y = DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
    let known = IndexSet::from(vec![1, 4]);
    let mu = [0.7, -1.2];
    let gamma = 0.8;
    let r = solve_regmodcs(&a, y.as_slice(), &known, &mu, gamma, &cfg()).unwrap();
    assert!(r.converged());

    let obj = |x: &DVector<f64>| {
        let l1: f64 = [0, 2, 3, 5].iter().map(|&i| x[i].abs()).sum();
        l1 + gamma * ((x[1] - mu[0]).powi(2) + (x[4] - mu[1]).powi(2))
    };
    let x_hat = DVector::from_vec(r.x_hat.clone());
    assert!((obj(&x_hat) - r.objective).abs() < 1e-12);
    let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
    let x_part = &pinv * &y;
    let proj = DMatrix::<f64>::identity(6, 6) - &pinv * &a;
    for _ in 0..200 {
        let z = DVector::from_fn(6, |_, _| {
            3.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
        });
        let x = &x_part + &proj * z;
        assert!((&a * &x - &y).norm() < 1e-10);
        assert!(r.objective <= obj(&x) + 1e-9);
    }
    // the trace ends at the reported objective up to the gap
    let last = *r.objective_trace.last().unwrap();
    assert!((last - r.objective).abs() < 1e-6);
}

fn gaussian_operator_unnorm(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    crate::operators::gaussian_operator_with(m, n, seed, false)
        .unwrap()
        .into_matrix()
}

#[test]
fn regmodcs_objective_trace_is_nonincreasing() {
    let mut rng = seeded(4);
    let a = gaussian_operator(30, 80, 2).unwrap();
    let support = random_support(80, 12, &mut rng).unwrap();
    let model = build_support_model(80, &support, 2, 2, &mut rng).unwrap();
    let x = sparse_signal(80, &support, &mut rng);
    let y = a.matrix() * &x;
    let mu: Vec<f64> = model.known().iter().map(|&i| x[i] + 0.3).collect();
    let r = solve_regmodcs(&a, y.as_slice(), model.known(), &mu, 1.0, &cfg()).unwrap();
    assert!(r.converged());
    for w in r.objective_trace.windows(2) {
        assert!(
            w[1] <= w[0] * (1.0 + 1e-9) + 1e-9,
            "{:?}",
            r.objective_trace
        );
    }
}

#[test]
fn input_validation() {
    let a = gaussian_operator(3, 6, 1).unwrap();
    assert!(solve_bp(&a, &[1.0, 2.0], &cfg()).is_err());
    assert!(solve_modcs(&a, &[1.0; 3], &IndexSet::from(vec![6]), &cfg()).is_err());
    assert!(solve_regmodcs(&a, &[1.0; 3], &IndexSet::from(vec![0]), &[], 1.0, &cfg()).is_err());
    assert!(solve_regmodcs(
        &a,
        &[1.0; 3],
        &IndexSet::from(vec![0]),
        &[0.0],
        -1.0,
        &cfg()
    )
    .is_err());
    let bad = SolverConfig {
        feas_tol: 0.0,
        ..cfg()
    };
    assert!(solve_bp(&a, &[1.0; 3], &bad).is_err());
}

#[test]
fn operator_trait_objects_work() {
    let a = DenseOperator::new(gaussian_operator(5, 10, 3).unwrap().into_matrix());
    let boxed: &dyn LinearOperator = &a;
    let r = solve_bp(boxed, &[1.0, 0.0, 0.0, 0.0, 0.0], &cfg()).unwrap();
    assert!(r.converged());
}

#[test]
fn nrmse_examples() {
    assert_eq!(nrmse(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
    assert_eq!(nrmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
    assert!((nrmse(&[3.0, 4.0], &[0.0, 4.0]).unwrap() - 0.6).abs() < 1e-15);
    assert!(nrmse(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    assert!(is_exact(&[1.0], &[1.0]).unwrap());
    assert!(!is_exact(&[1.0], &[1.0 + EXACT_THRESHOLD]).unwrap());
}

#[test]
fn result_json_round_trip() {
    let a = gaussian_operator(4, 8, 1).unwrap();
    let r = solve_bp(&a, &[1.0, 0.5, 0.0, -1.0], &cfg()).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("\"status\":\"converged\""));
    let back: SolverResult = serde_json::from_str(&s).unwrap();
    assert_eq!(back.x_hat, r.x_hat);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_equivariance(seed in 0u64..1000, c in 0.05f64..20.0) {
        let mut rng = seeded(seed);
        let a = gaussian_operator(10, 25, seed).unwrap().into_matrix();
        let support = random_support(25, 3, &mut rng).unwrap();
        let x = sparse_signal(25, &support, &mut rng);
        let y = &a * &x;
        let known = IndexSet::from(vec![support.as_slice()[0]]);
        let r1 = solve_modcs(&a, y.as_slice(), &known, &cfg()).unwrap();
        let r2 = solve_modcs(&(&a * c), (&y * c).as_slice(), &known, &cfg()).unwrap();
        let d = (DVector::from_vec(r1.x_hat) - DVector::from_vec(r2.x_hat)).amax();
        prop_assert!(d < 1e-8 * x.amax().max(1.0), "diff {}", d);
    }

    #[test]
    fn objective_never_beaten_by_lp(seed in 0u64..1000) {
        let mut rng = seeded(seed);
        let n = 10 + (seed % 8) as usize;
        let m = 4 + (seed % 5) as usize;
        let a = gaussian_operator(m, n, seed).unwrap();
        let y = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let known = random_support(n, (seed % 3) as usize, &mut rng).unwrap();
        let r = solve_modcs(&a, y.as_slice(), &known, &cfg()).unwrap();
        let lp = lp_oracle(a.matrix(), &y, &known);
        prop_assert!((r.objective - lp).abs() <= 1e-6 * lp.max(1.0));
    }
}
