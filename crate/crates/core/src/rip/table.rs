use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::constants::{
    delta_cost, delta_exact, delta_sampled, theta_cost, theta_exact, theta_sampled,
    ENUMERATION_BUDGET,
};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantMode {
    Exact,
    /// Monte Carlo maximum over sampled subsets; the true constant is at
    /// least this large.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub mode: ConstantMode,
}

impl Constant {
    pub fn exact(value: f64) -> Self {
        Constant {
            value,
            mode: ConstantMode::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub s: usize,
    pub value: f64,
    pub mode: ConstantMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub s1: usize,
    pub s2: usize,
    pub value: f64,
    pub mode: ConstantMode,
}

/// Values of `δ_S` and `θ_{S1,S2}` for one matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RipTable {
    /// Fingerprint of the source matrix, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_hash: Option<String>,
    #[serde(default)]
    pub delta: Vec<DeltaEntry>,
    #[serde(default)]
    pub theta: Vec<ThetaEntry>,
    /// Value reported for any constant not listed (e.g. an all-zero table).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<f64>,
}

/// FNV-1a over the dimensions and entry bits.
pub fn matrix_hash(a: &DMatrix<f64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(a.nrows() as u64);
    eat(a.ncols() as u64);
    for v in a.iter() {
        eat(v.to_bits());
    }
    format!("{h:016x}")
}

/// Sizes whose constants a set of condition checks needs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RequiredConstants {
    pub delta: Vec<usize>,
    pub theta: Vec<(usize, usize)>,
}

impl RequiredConstants {
    fn push_delta(&mut self, s: usize) {
        if s > 0 && !self.delta.contains(&s) {
            self.delta.push(s);
        }
    }

    fn push_theta(&mut self, a: usize, b: usize) {
        let key = (a.min(b), a.max(b));
        if key.0 > 0 && !self.theta.contains(&key) {
            self.theta.push(key);
        }
    }

    /// Everything used by the modified-CS checks for `(k, u)`.
    pub fn for_modcs(k: usize, u: usize) -> Self {
        let mut r = RequiredConstants::default();
        for s in [u, 2 * u, 3 * u, k, k + u, k + 2 * u] {
            r.push_delta(s);
        }
        for (a, b) in [(u, u), (u, 2 * u), (k, u), (k, 2 * u)] {
            r.push_theta(a, b);
        }
        r
    }

    /// Everything used by the CS checks at sparsity `s`.
    pub fn for_cs(s: usize) -> Self {
        let mut r = RequiredConstants::default();
        for d in [2 * s, 3 * s] {
            r.push_delta(d);
        }
        for (a, b) in [(s, s), (s, 2 * s)] {
            r.push_theta(a, b);
        }
        r
    }

    pub fn merge(mut self, other: RequiredConstants) -> Self {
        for s in other.delta {
            self.push_delta(s);
        }
        for (a, b) in other.theta {
            self.push_theta(a, b);
        }
        self
    }
}

fn budget_error(required: u128) -> Error {
    Error::BudgetExceeded {
        required,
        budget: ENUMERATION_BUDGET,
        hint: "allow sampled lower bounds",
    }
}

impl RipTable {
    /// Table answering every lookup with `value`.
    pub fn uniform(value: f64) -> Self {
        RipTable {
            fill: Some(value),
            ..Default::default()
        }
    }

    pub fn set_delta(&mut self, s: usize, c: Constant) {
        self.delta.retain(|e| e.s != s);
        self.delta.push(DeltaEntry {
            s,
            value: c.value,
            mode: c.mode,
        });
        self.delta.sort_by_key(|e| e.s);
    }

    pub fn set_theta(&mut self, s1: usize, s2: usize, c: Constant) {
        let (a, b) = (s1.min(s2), s1.max(s2));
        self.theta.retain(|e| (e.s1, e.s2) != (a, b));
        self.theta.push(ThetaEntry {
            s1: a,
            s2: b,
            value: c.value,
            mode: c.mode,
        });
        self.theta.sort_by_key(|e| (e.s1, e.s2));
    }

    pub fn delta(&self, s: usize) -> Result<Constant> {
        if s == 0 {
            return Ok(Constant::exact(0.0));
        }
        if let Some(e) = self.delta.iter().find(|e| e.s == s) {
            return Ok(Constant {
                value: e.value,
                mode: e.mode,
            });
        }
        self.fill
            .map(Constant::exact)
            .ok_or_else(|| Error::MissingConstant(format!("δ_{s}")))
    }

    pub fn theta(&self, s1: usize, s2: usize) -> Result<Constant> {
        if s1 == 0 || s2 == 0 {
            return Ok(Constant::exact(0.0));
        }
        let (a, b) = (s1.min(s2), s1.max(s2));
        if let Some(e) = self.theta.iter().find(|e| (e.s1, e.s2) == (a, b)) {
            return Ok(Constant {
                value: e.value,
                mode: e.mode,
            });
        }
        self.fill
            .map(Constant::exact)
            .ok_or_else(|| Error::MissingConstant(format!("θ_{{{a},{b}}}")))
    }

    /// Computes the requested constants for `a`: exactly where the
    /// enumeration fits the budget, otherwise by sampling `sample_trials`
    /// subsets (an error if sampling is disabled).
    pub fn compute(
        a: &DMatrix<f64>,
        req: &RequiredConstants,
        sample_trials: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        let mut table = RipTable {
            matrix_hash: Some(matrix_hash(a)),
            ..Default::default()
        };
        let n = a.ncols();
        for (i, &s) in req.delta.iter().enumerate() {
            let c = if delta_cost(n, s) <= ENUMERATION_BUDGET {
                Constant::exact(delta_exact(a, s)?)
            } else if let Some(trials) = sample_trials {
                let mut rng = stream(seed, Purpose::Probe, 0, i as u64);
                Constant {
                    value: delta_sampled(a, s, trials, &mut rng)?,
                    mode: ConstantMode::LowerBound,
                }
            } else {
                return Err(budget_error(delta_cost(n, s)));
            };
            table.set_delta(s, c);
        }
        for (i, &(s1, s2)) in req.theta.iter().enumerate() {
            let c = if theta_cost(n, s1, s2) <= ENUMERATION_BUDGET {
                Constant::exact(theta_exact(a, s1, s2)?)
            } else if let Some(trials) = sample_trials {
                let mut rng = stream(seed, Purpose::Probe, 1, i as u64);
                Constant {
                    value: theta_sampled(a, s1, s2, trials, &mut rng)?,
                    mode: ConstantMode::LowerBound,
                }
            } else {
                return Err(budget_error(theta_cost(n, s1, s2)));
            };
            table.set_theta(s1, s2, c);
        }
        Ok(table)
    }

    /// Checks the structural invariants among exact entries: `δ` is
    /// non-decreasing in `S` and `θ_{S1,S2} ≤ δ_{S1+S2}`. Returns a list of
    /// violations.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let exact: Vec<&DeltaEntry> = self
            .delta
            .iter()
            .filter(|e| e.mode == ConstantMode::Exact)
            .collect();
        for w in exact.windows(2) {
            if w[1].value < w[0].value - 1e-12 {
                out.push(format!(
                    "δ_{} = {} < δ_{} = {}",
                    w[1].s, w[1].value, w[0].s, w[0].value
                ));
            }
        }
        for t in self.theta.iter().filter(|e| e.mode == ConstantMode::Exact) {
            if let Some(d) = exact.iter().find(|d| d.s == t.s1 + t.s2) {
                if t.value > d.value + 1e-12 {
                    out.push(format!(
                        "θ_{{{},{}}} = {} > δ_{} = {}",
                        t.s1, t.s2, t.value, d.s, d.value
                    ));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::gaussian_matrix;
    use crate::rng::seeded;

    #[test]
    fn lookups_and_fill() {
        let mut t = RipTable::default();
        t.set_delta(2, Constant::exact(0.3));
        t.set_theta(3, 1, Constant::exact(0.2));
        assert_eq!(t.delta(2).unwrap().value, 0.3);
        assert_eq!(t.theta(1, 3).unwrap().value, 0.2);
        assert_eq!(t.delta(0).unwrap().value, 0.0);
        assert!(matches!(t.delta(5), Err(Error::MissingConstant(_))));
        let z = RipTable::uniform(0.0);
        assert_eq!(z.theta(4, 7).unwrap().value, 0.0);
    }

    #[test]
    fn computed_table_is_consistent_and_serializes() {
        let a = gaussian_matrix(6, 12, true, &mut seeded(5)).unwrap();
        let req = RequiredConstants::for_modcs(3, 1).merge(RequiredConstants::for_cs(2));
        let t = RipTable::compute(&a, &req, None, 0).unwrap();
        assert!(t.violations().is_empty());
        assert_eq!(t.delta(4).unwrap().value, delta_exact(&a, 4).unwrap());
        let json = serde_json::to_string(&t).unwrap();
        let back: RipTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.matrix_hash, Some(matrix_hash(&a)));
    }

    #[test]
    fn falls_back_to_sampling() {
        let a = gaussian_matrix(20, 80, true, &mut seeded(6)).unwrap();
        let req = RequiredConstants {
            delta: vec![2, 6],
            theta: vec![],
        };
        assert!(RipTable::compute(&a, &req, None, 0).is_err());
        let t = RipTable::compute(&a, &req, Some(200), 0).unwrap();
        assert_eq!(t.delta(2).unwrap().mode, ConstantMode::Exact);
        assert_eq!(t.delta(6).unwrap().mode, ConstantMode::LowerBound);
    }

    #[test]
    fn violations_are_reported() {
        let mut t = RipTable::default();
        t.set_delta(1, Constant::exact(0.5));
        t.set_delta(2, Constant::exact(0.4));
        t.set_theta(1, 1, Constant::exact(0.6));
        assert_eq!(t.violations().len(), 2);
    }
}
