//! Index sets and the partially-known-support model.
//!
//! A sparse vector's true support `N` is described relative to a prior
//! estimate `T` (the known part): `N = (T ∪ Δ) ∖ Δe`, where `Δ` holds the
//! support members missing from `T` and `Δe ⊆ T` the members of `T` that are
//! not actually in the support. All indices are 0-based.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Sorted, duplicate-free list of indices. Serializes as a JSON array.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl From<Vec<usize>> for IndexSet {
    fn from(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().collect::<Vec<_>>().into()
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, 1, ..., n-1}`
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(out)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(
            self.0
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
        )
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(
            self.0
                .iter()
                .copied()
                .filter(|&i| other.contains(i))
                .collect(),
        )
    }

    /// `[0, n) ∖ self`
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet((0..n).filter(|&i| !self.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| !other.contains(i))
    }

    /// Checks that every index lies in `[0, n)`.
    pub fn check_bound(&self, n: usize, what: &str) -> Result<()> {
        match self.max() {
            Some(m) if m >= n => param(format!("{what} contains index {m} outside [0, {n})")),
            _ => Ok(()),
        }
    }
}

/// The sets `T`, `Δ`, `Δe` over a signal of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportModel {
    n: usize,
    known: IndexSet,
    missing: IndexSet,
    extra: IndexSet,
}

impl SupportModel {
    /// Validates `Δ ∩ T = ∅`, `Δe ⊆ T` and that every index is below `n`.
    pub fn new(n: usize, known: IndexSet, missing: IndexSet, extra: IndexSet) -> Result<Self> {
        if n == 0 {
            return param("signal length must be positive");
        }
        known.check_bound(n, "T")?;
        missing.check_bound(n, "Δ")?;
        extra.check_bound(n, "Δe")?;
        if !missing.is_disjoint(&known) {
            return param("Δ must be disjoint from T");
        }
        if !extra.is_subset(&known) {
            return param("Δe must be contained in T");
        }
        Ok(SupportModel {
            n,
            known,
            missing,
            extra,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Known part `T`.
    pub fn known(&self) -> &IndexSet {
        &self.known
    }

    /// Missing part `Δ`.
    pub fn missing(&self) -> &IndexSet {
        &self.missing
    }

    /// Erroneous part `Δe`.
    pub fn extra(&self) -> &IndexSet {
        &self.extra
    }

    /// `N = (T ∪ Δ) ∖ Δe`
    pub fn support(&self) -> IndexSet {
        self.known.union(&self.missing).difference(&self.extra)
    }

    pub fn k(&self) -> usize {
        self.known.len()
    }

    pub fn u(&self) -> usize {
        self.missing.len()
    }

    pub fn e(&self) -> usize {
        self.extra.len()
    }

    pub fn s(&self) -> usize {
        self.k() + self.u() - self.e()
    }
}

/// `{i : x_i² > alpha}`
pub fn estimate_support(x: &[f64], alpha: f64) -> Result<IndexSet> {
    if !(alpha >= 0.0) {
        return param(format!(
            "support threshold must be nonnegative, got {alpha}"
        ));
    }
    Ok(IndexSet(
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v * v > alpha)
            .map(|(i, _)| i)
            .collect(),
    ))
}

/// Smallest set of largest-energy coordinates holding at least `b` percent of
/// `‖x‖²`. Equal energies are taken lower index first.
pub fn energy_support(x: &[f64], b: f64) -> Result<IndexSet> {
    if !(b > 0.0 && b <= 100.0) {
        return param(format!("energy percentage must lie in (0, 100], got {b}"));
    }
    let mut order: Vec<(usize, f64)> = x.iter().map(|v| v * v).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    // summed in sorted order so that b = 100 terminates exactly at the last nonzero
    let total: f64 = order.iter().map(|(_, e)| e).sum();
    if total == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let target = b / 100.0 * total;
    let mut acc = 0.0;
    let mut picked = Vec::new();
    for (i, e) in order {
        if acc >= target {
            break;
        }
        acc += e;
        picked.push(i);
    }
    Ok(picked.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportChange {
    pub additions: usize,
    pub removals: usize,
}

/// Additions `|curr ∖ prev|` and removals `|prev ∖ curr|`.
pub fn support_change_stats(curr: &IndexSet, prev: &IndexSet) -> SupportChange {
    SupportChange {
        additions: curr.difference(prev).len(),
        removals: prev.difference(curr).len(),
    }
}

/// Draws `Δ` (size `u`) uniformly from `support` and `Δe` (size `e`)
/// uniformly from its complement, then sets `T = N ∪ Δe ∖ Δ`.
pub fn build_support_model<R: Rng + ?Sized>(
    n: usize,
    support: &IndexSet,
    u: usize,
    e: usize,
    rng: &mut R,
) -> Result<SupportModel> {
    support.check_bound(n, "N")?;
    let s = support.len();
    if u > s {
        return param(format!("u = {u} exceeds the support size {s}"));
    }
    if e > n - s {
        return param(format!("e = {e} exceeds the off-support size {}", n - s));
    }
    let missing: IndexSet = sample(rng, s, u)
        .into_iter()
        .map(|j| support.as_slice()[j])
        .collect();
    let off = support.complement(n);
    let extra: IndexSet = sample(rng, off.len(), e)
        .into_iter()
        .map(|j| off.as_slice()[j])
        .collect();
    let known = support.union(&extra).difference(&missing);
    SupportModel::new(n, known, missing, extra)
}

/// Uniform random `s`-subset of `[0, n)`.
pub fn random_support<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<IndexSet> {
    if s > n {
        return param(format!("support size {s} exceeds n = {n}"));
    }
    Ok(sample(rng, n, s).into_iter().collect())
}

/// Support of the nonzero entries.
pub fn nonzero_support(x: &[f64]) -> IndexSet {
    IndexSet(
        x.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> IndexSet {
        v.to_vec().into()
    }

    #[test]
    fn threshold_support() {
        assert_eq!(
            estimate_support(&[3.0, 0.1, -2.0], 1.0).unwrap(),
            set(&[0, 2])
        );
        assert!(estimate_support(&[0.0, 0.0, 0.0], 0.0).unwrap().is_empty());
        assert!(estimate_support(&[1.0, 1.0, 1.0], 1.0).unwrap().is_empty());
        assert!(estimate_support(&[1.0], -0.5).is_err());
    }

    #[test]
    fn energy_support_examples() {
        assert_eq!(
            energy_support(&[3.0, 2.0, 1.0], 90.0).unwrap(),
            set(&[0, 1])
        );
        assert_eq!(energy_support(&[5.0, 0.0, 0.0], 99.0).unwrap(), set(&[0]));
        assert_eq!(
            energy_support(&[1.0; 4], 100.0).unwrap(),
            set(&[0, 1, 2, 3])
        );
        assert!(matches!(
            energy_support(&[0.0, 0.0], 50.0),
            Err(Error::ZeroSignal)
        ));
        assert!(energy_support(&[1.0], 0.0).is_err());
    }

    #[test]
    fn energy_support_ties_prefer_low_index() {
        assert_eq!(
            energy_support(&[1.0, -1.0, 1.0, 1.0], 50.0).unwrap(),
            set(&[0, 1])
        );
    }

    #[test]
    fn change_stats() {
        let a = set(&[1, 2, 3]);
        let b = set(&[2, 3, 4]);
        assert_eq!(
            support_change_stats(&a, &b),
            SupportChange {
                additions: 1,
                removals: 1
            }
        );
        assert_eq!(
            support_change_stats(&a, &a),
            SupportChange {
                additions: 0,
                removals: 0
            }
        );
        assert_eq!(
            support_change_stats(&set(&[1, 2]), &IndexSet::empty()),
            SupportChange {
                additions: 2,
                removals: 0
            }
        );
    }

    #[test]
    fn support_model_examples() {
        let mut rng = seeded(1);
        let n_set = random_support(256, 26, &mut rng).unwrap();
        let exact = build_support_model(256, &n_set, 0, 0, &mut rng).unwrap();
        assert_eq!(exact.known(), &n_set);
        assert!(exact.missing().is_empty() && exact.extra().is_empty());

        let cs = build_support_model(256, &n_set, 26, 0, &mut rng).unwrap();
        assert!(cs.known().is_empty());

        let m = build_support_model(256, &n_set, 2, 2, &mut rng).unwrap();
        assert_eq!(m.k(), 26);
        assert_eq!(m.support(), n_set);

        assert!(build_support_model(256, &n_set, 27, 0, &mut rng).is_err());
        assert!(build_support_model(30, &set(&[0, 1]), 0, 29, &mut rng).is_err());
    }

    #[test]
    fn support_model_rejects_bad_sets() {
        assert!(SupportModel::new(5, set(&[0, 1]), set(&[1]), IndexSet::empty()).is_err());
        assert!(SupportModel::new(5, set(&[0, 1]), IndexSet::empty(), set(&[2])).is_err());
        assert!(SupportModel::new(5, set(&[0, 7]), IndexSet::empty(), IndexSet::empty()).is_err());
    }

    #[test]
    fn index_set_json_is_array() {
        let s = set(&[4, 1, 4]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,4]");
        let back: IndexSet = serde_json::from_str("[3,0]").unwrap();
        assert_eq!(back, set(&[0, 3]));
    }

    proptest! {
        #[test]
        fn generated_models_balance(seed in 0u64..500, n in 10usize..80, s_frac in 0.05f64..0.9, uf in 0.0f64..1.0, ef in 0.0f64..1.0) {
            let mut rng = seeded(seed);
            let s = ((n as f64 * s_frac) as usize).max(1);
            let sup = random_support(n, s, &mut rng).unwrap();
            let u = (uf * s as f64) as usize;
            let e = (ef * (n - s) as f64) as usize;
            let m = build_support_model(n, &sup, u, e, &mut rng).unwrap();
            prop_assert_eq!(m.k() + m.u() - m.e(), s);
            prop_assert_eq!(m.support(), sup);
        }

        #[test]
        fn threshold_monotone(x in prop::collection::vec(-5.0f64..5.0, 1..40), a1 in 0.0f64..10.0, a2 in 0.0f64..10.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let big = estimate_support(&x, lo).unwrap();
            let small = estimate_support(&x, hi).unwrap();
            prop_assert!(small.is_subset(&big));
        }

        #[test]
        fn energy_support_minimal(x in prop::collection::vec(-5.0f64..5.0, 1..40), b in 1.0f64..100.0) {
            prop_assume!(x.iter().any(|v| *v != 0.0));
            let sup = energy_support(&x, b).unwrap();
            let total: f64 = x.iter().map(|v| v * v).sum();
            let kept: f64 = sup.iter().map(|&i| x[i] * x[i]).sum();
            prop_assert!(kept >= b / 100.0 * total * (1.0 - 1e-12));
            let smallest = sup.iter().map(|&i| x[i] * x[i]).fold(f64::INFINITY, f64::min);
            prop_assert!(kept - smallest < b / 100.0 * total * (1.0 + 1e-12));
        }

        #[test]
        fn change_stats_antisymmetric(a in prop::collection::vec(0usize..30, 0..20), b in prop::collection::vec(0usize..30, 0..20)) {
            let (a, b): (IndexSet, IndexSet) = (a.into(), b.into());
            let ab = support_change_stats(&a, &b);
            let ba = support_change_stats(&b, &a);
            prop_assert_eq!(ab.additions, ba.removals);
            prop_assert_eq!(ab.removals, ba.additions);
        }
    }
}
