use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{param, Error, Result};

/// Exhaustive enumeration budget (number of subsets or subset pairs).
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.tr_mul(a)
}

fn sub(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

fn isometry_defect(g: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let eig = SymmetricEigen::new(sub(g, idx, idx)).eigenvalues;
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    (hi - 1.0).max(1.0 - lo)
}

fn cross_norm(g: &DMatrix<f64>, t1: &[usize], t2: &[usize]) -> f64 {
    sub(g, t1, t2).singular_values().max()
}

// Calls `f` on every `k`-subset of `pool` (lexicographic) and returns the max.
fn max_over_subsets(pool: &[usize], k: usize, f: &(dyn Fn(&[usize]) -> f64 + Sync)) -> f64 {
    if k == 0 {
        return f(&[]);
    }
    let from_first = |i: usize| {
        let mut best = f64::NEG_INFINITY;
        let mut idx: Vec<usize> = Vec::with_capacity(k);
        idx.push(pool[i]);
        let rest = &pool[i + 1..];
        if rest.len() < k - 1 {
            return best;
        }
        let mut pos: Vec<usize> = (0..k - 1).collect();
        loop {
            idx.truncate(1);
            idx.extend(pos.iter().map(|&p| rest[p]));
            best = best.max(f(&idx));
            // advance the (k−1)-combination of `rest`
            let mut j = k - 1;
            loop {
                if j == 0 {
                    return best;
                }
                j -= 1;
                if pos[j] < rest.len() - (k - 1 - j) {
                    pos[j] += 1;
                    for l in j + 1..k - 1 {
                        pos[l] = pos[l - 1] + 1;
                    }
                    break;
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..pool.len())
            .into_par_iter()
            .map(from_first)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..pool.len())
            .map(from_first)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_budget(required: u128, what: &'static str) -> Result<()> {
    if required > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: ENUMERATION_BUDGET,
            hint: what,
        });
    }
    Ok(())
}

/// Number of subsets visited by [`delta_exact`].
pub fn delta_cost(n: usize, s: usize) -> u128 {
    binomial(n, s)
}

/// Number of subset pairs visited by [`theta_exact`].
pub fn theta_cost(n: usize, s1: usize, s2: usize) -> u128 {
    binomial(n, s1).saturating_mul(binomial(n.saturating_sub(s1), s2))
}

/// Restricted isometry constant `δ_S` by enumerating every `S`-subset of
/// columns.
pub fn delta_exact(a: &DMatrix<f64>, s: usize) -> Result<f64> {
    let n = a.ncols();
    if s > n {
        return param(format!("subset size {s} exceeds {n} columns"));
    }
    if s == 0 {
        return Ok(0.0);
    }
    check_budget(delta_cost(n, s), "use delta_sampled for a lower bound")?;
    let g = gram(a);
    let pool: Vec<usize> = (0..n).collect();
    Ok(max_over_subsets(&pool, s, &|idx| isometry_defect(&g, idx)))
}

/// Restricted orthogonality constant `θ_{S1,S2}`: the largest spectral norm
/// of `A_{T1}ᵀ A_{T2}` over disjoint `T1`, `T2`.
pub fn theta_exact(a: &DMatrix<f64>, s1: usize, s2: usize) -> Result<f64> {
    let n = a.ncols();
    if s1 + s2 > n {
        return param(format!("subset sizes {s1} + {s2} exceed {n} columns"));
    }
    if s1 == 0 || s2 == 0 {
        return Ok(0.0);
    }
    check_budget(theta_cost(n, s1, s2), "use theta_sampled for a lower bound")?;
    let g = gram(a);
    let pool: Vec<usize> = (0..n).collect();
    Ok(max_over_subsets(&pool, s1, &|t1| {
        let rest: Vec<usize> = (0..n).filter(|i| !t1.contains(i)).collect();
        let mut best = f64::NEG_INFINITY;
        for t2 in itertools::Itertools::combinations(rest.iter().copied(), s2) {
            best = best.max(cross_norm(&g, t1, &t2));
        }
        best
    }))
}

/// Running maximum of the isometry defect over `trials` random subsets, a
/// lower bound on `δ_S`. Falls back to enumeration when `trials` covers
/// every subset.
pub fn delta_sampled<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let n = a.ncols();
    if s > n {
        return param(format!("subset size {s} exceeds {n} columns"));
    }
    if s == 0 {
        return Ok(0.0);
    }
    if trials as u128 >= delta_cost(n, s) {
        return delta_exact(a, s);
    }
    let g = gram(a);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let mut idx = sample(rng, n, s).into_vec();
        idx.sort_unstable();
        best = best.max(isometry_defect(&g, &idx));
    }
    Ok(best)
}

/// Sampled lower bound on `θ_{S1,S2}`.
pub fn theta_sampled<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    s1: usize,
    s2: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let n = a.ncols();
    if s1 + s2 > n {
        return param(format!("subset sizes {s1} + {s2} exceed {n} columns"));
    }
    if s1 == 0 || s2 == 0 {
        return Ok(0.0);
    }
    if trials as u128 >= theta_cost(n, s1, s2) {
        return theta_exact(a, s1, s2);
    }
    let g = gram(a);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let idx = sample(rng, n, s1 + s2).into_vec();
        best = best.max(cross_norm(&g, &idx[..s1], &idx[s1..]));
    }
    Ok(best)
}
