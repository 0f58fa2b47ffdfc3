use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::rip::binomial;
use crate::supports::IndexSet;

/// Maximum number of subsets the ℓ0 search may visit.
pub const L0_SUBSET_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L0Solution {
    pub x_hat: Vec<f64>,
    /// Indices outside `T` used by the solution (lexicographically first).
    pub extra: IndexSet,
    /// No other vector attains the same `‖β_{T^c}‖₀` with `Aβ = y`.
    pub unique: bool,
}

// Least-squares fit on `cols`; also reports whether the columns are independent.
fn fit(a: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> (DVector<f64>, f64, bool) {
    if cols.is_empty() {
        return (DVector::zeros(0), y.norm(), true);
    }
    let sub = a.select_columns(cols);
    let svd = sub.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * cols.len().max(a.nrows()) as f64;
    let full_rank = cols.len() <= a.nrows() && svd.singular_values.iter().all(|&v| v > tol);
    let z = svd
        .solve(y, tol)
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let r = (&sub * &z - y).norm();
    (z, r, full_rank)
}

/// Sparsest solution outside `known` by exhaustive search over supports of
/// size `0..=max_card`. Returns `None` when no support of that size fits
/// within `tol · ‖y‖₂`.
pub fn solve_l0_bruteforce<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[f64],
    known: &IndexSet,
    max_card: usize,
    tol: f64,
) -> Result<Option<L0Solution>> {
    let n = a.cols();
    known.check_bound(n, "known support")?;
    if y.len() != a.rows() {
        return crate::error::param(format!(
            "measurement length {} does not match {} rows",
            y.len(),
            a.rows()
        ));
    }
    if !(tol > 0.0) {
        return crate::error::param("residual tolerance must be positive");
    }
    let free = known.complement(n);
    let p = free.len();
    let max_card = max_card.min(p);
    let required: u128 = (0..=max_card).map(|j| binomial(p, j)).sum();
    if required > L0_SUBSET_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: L0_SUBSET_BUDGET,
            hint: "lower the maximum cardinality or shrink the problem",
        });
    }

    let dense = a.to_dense();
    let a = dense.as_ref();
    let yv = DVector::from_column_slice(y);
    let thresh = tol * yv.norm().max(f64::MIN_POSITIVE);

    for j in 0..=max_card {
        let mut first: Option<(Vec<usize>, DVector<f64>, bool)> = None;
        let mut count = 0usize;
        for subset in free.as_slice().iter().copied().combinations(j) {
            let mut cols: Vec<usize> = known
                .iter()
                .copied()
                .chain(subset.iter().copied())
                .collect();
            cols.sort_unstable();
            let (z, r, full_rank) = fit(a, &yv, &cols);
            if r > thresh {
                continue;
            }
            count += 1;
            if first.is_none() {
                let mut x = DVector::zeros(n);
                for (v, &c) in z.iter().zip(&cols) {
                    x[c] = *v;
                }
                first = Some((subset, x, full_rank));
            }
        }
        if let Some((subset, x, full_rank)) = first {
            return Ok(Some(L0Solution {
                x_hat: x.iter().copied().collect(),
                extra: IndexSet::from(subset),
                unique: count == 1 && full_rank,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::gaussian_operator;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn known_support_gives_empty_extra() {
        let a = gaussian_operator(5, 9, 2).unwrap();
        let mut x = DVector::zeros(9);
        x[1] = 1.5;
        x[4] = -2.0;
        let y = a.matrix() * &x;
        let sol = solve_l0_bruteforce(&a, y.as_slice(), &IndexSet::from(vec![1, 4, 7]), 3, 1e-9)
            .unwrap()
            .unwrap();
        assert!(sol.extra.is_empty());
        assert!(sol.unique);
        assert!((DVector::from_vec(sol.x_hat) - x).amax() < 1e-10);
    }

    #[test]
    fn finds_sparsest_and_flags_ties() {
        let a = gaussian_operator(4, 8, 5).unwrap();
        let mut x = DVector::zeros(8);
        x[2] = 1.0;
        x[6] = -0.5;
        let y = a.matrix() * &x;
        let sol = solve_l0_bruteforce(&a, y.as_slice(), &IndexSet::empty(), 4, 1e-9)
            .unwrap()
            .unwrap();
        assert_eq!(sol.extra.as_slice(), &[2, 6]);
        assert!(sol.unique);

        // with m = 2 and a dense target, every 2-subset fits
        let a2 = gaussian_operator(2, 5, 1).unwrap();
        let sol = solve_l0_bruteforce(&a2, &[1.0, 2.0], &IndexSet::empty(), 2, 1e-9)
            .unwrap()
            .unwrap();
        assert_eq!(sol.extra.len(), 2);
        assert!(!sol.unique);
    }

    #[test]
    fn none_and_budget() {
        let a = gaussian_operator(6, 10, 3).unwrap();
        let y = [1.0, -1.0, 0.5, 2.0, 0.0, 1.0];
        assert!(solve_l0_bruteforce(&a, &y, &IndexSet::empty(), 2, 1e-9)
            .unwrap()
            .is_none());
        let big = gaussian_operator(10, 60, 3).unwrap();
        let err = solve_l0_bruteforce(&big, &[0.0; 10], &IndexSet::empty(), 30, 1e-9);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
