use serde::{Deserialize, Serialize};

use super::table::{ConstantMode, RipTable};
use crate::error::{param, Error, Result};

/// `(k, u)` with `k = |T|` and `u = |Δ|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSizes {
    pub k: usize,
    pub u: usize,
}

impl SupportSizes {
    pub fn new(k: usize, u: usize) -> Self {
        SupportSizes { k, u }
    }

    /// From `(s, e, u)` via `k = s + e − u`.
    pub fn from_sparsity(s: usize, e: usize, u: usize) -> Result<Self> {
        if u > s + e {
            return param(format!("u = {u} exceeds s + e = {}", s + e));
        }
        Ok(SupportSizes { k: s + e - u, u })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Passed only with lower-bound constants, which cannot certify it.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combinator {
    All,
    Any,
}

/// One strict inequality `lhs < threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub expression: String,
    /// `None` when the expression is undefined (a coefficient denominator
    /// is not positive); the clause then fails.
    pub lhs: Option<f64>,
    pub threshold: f64,
    pub holds: bool,
}

impl Clause {
    fn new(expression: impl Into<String>, lhs: Result<f64>, threshold: f64) -> Result<Self> {
        let lhs = match lhs {
            Ok(v) => Some(v),
            Err(Error::ConditionViolated(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Clause {
            expression: expression.into(),
            holds: lhs.is_some_and(|v| v < threshold),
            lhs,
            threshold,
        })
    }

    fn flag(expression: impl Into<String>, holds: bool) -> Self {
        Clause {
            expression: expression.into(),
            lhs: Some(if holds { 0.0 } else { 1.0 }),
            threshold: 1.0,
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UsedConstant {
    pub name: String,
    pub value: f64,
    pub mode: ConstantMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: String,
    pub verdict: Verdict,
    pub combinator: Combinator,
    pub clauses: Vec<Clause>,
    pub sizes: SupportSizes,
    pub constants: Vec<UsedConstant>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Left-hand side of the last (main) clause.
    pub fn lhs(&self) -> Option<f64> {
        self.clauses.last().and_then(|c| c.lhs)
    }

    pub fn threshold(&self) -> f64 {
        self.clauses.last().map(|c| c.threshold).unwrap_or(f64::NAN)
    }
}

// Records every constant read so reports carry their inputs.
struct Reader<'a> {
    rip: &'a RipTable,
    used: Vec<UsedConstant>,
}

impl<'a> Reader<'a> {
    fn new(rip: &'a RipTable) -> Self {
        Reader {
            rip,
            used: Vec::new(),
        }
    }

    fn note(&mut self, name: String, value: f64, mode: ConstantMode) {
        if !self.used.iter().any(|c| c.name == name) {
            self.used.push(UsedConstant { name, value, mode });
        }
    }

    fn d(&mut self, s: usize) -> Result<f64> {
        let c = self.rip.delta(s)?;
        self.note(format!("delta_{s}"), c.value, c.mode);
        Ok(c.value)
    }

    fn t(&mut self, a: usize, b: usize) -> Result<f64> {
        let c = self.rip.theta(a, b)?;
        let (a, b) = (a.min(b), a.max(b));
        self.note(format!("theta_{a}_{b}"), c.value, c.mode);
        Ok(c.value)
    }

    fn report(
        self,
        id: &str,
        combinator: Combinator,
        clauses: Vec<Clause>,
        sizes: SupportSizes,
    ) -> ConditionReport {
        let truth = match combinator {
            Combinator::All => clauses.iter().all(|c| c.holds),
            Combinator::Any => clauses.iter().any(|c| c.holds),
        };
        let bounded = self.used.iter().any(|c| c.mode == ConstantMode::LowerBound);
        // every expression is non-decreasing in the constants, so larger
        // true constants can only turn a pass into a fail
        let verdict = match (truth, bounded) {
            (false, _) => Verdict::Fail,
            (true, false) => Verdict::Pass,
            (true, true) => Verdict::Inconclusive,
        };
        ConditionReport {
            id: id.to_string(),
            verdict,
            combinator,
            clauses,
            sizes,
            constants: self.used,
        }
    }
}

fn lemma_hypothesis(delta_s: f64, delta_k: f64, theta_sk: f64) -> Result<()> {
    let lhs = delta_s + delta_k + theta_sk * theta_sk;
    if lhs < 1.0 && delta_k < 1.0 {
        Ok(())
    } else {
        Err(Error::ConditionViolated(format!(
            "δ_S + δ_k + θ_{{k,S}}² = {lhs} is not below 1"
        )))
    }
}

/// `a_k(S, Š)` from raw constant values.
pub fn a_value(
    delta_k: f64,
    delta_s: f64,
    theta_sk: f64,
    theta_check_s: f64,
    theta_check_k: f64,
) -> Result<f64> {
    lemma_hypothesis(delta_s, delta_k, theta_sk)?;
    let num = theta_check_s + theta_check_k * theta_sk / (1.0 - delta_k);
    let den = 1.0 - delta_s - theta_sk * theta_sk / (1.0 - delta_k);
    Ok(num / den)
}

/// `K_k(S)` from raw constant values.
pub fn k_value(delta_k: f64, delta_s: f64, theta_sk: f64) -> Result<f64> {
    lemma_hypothesis(delta_s, delta_k, theta_sk)?;
    let den = 1.0 - delta_s - theta_sk * theta_sk / (1.0 - delta_k);
    Ok((1.0 + delta_s).sqrt() / den)
}

/// `a_k(S, Š) = (θ_{Š,S} + θ_{Š,k} θ_{S,k} / (1 − δ_k)) / (1 − δ_S − θ_{S,k}² / (1 − δ_k))`.
pub fn a_coeff(k: usize, s: usize, s_check: usize, rip: &RipTable) -> Result<f64> {
    a_value(
        rip.delta(k)?.value,
        rip.delta(s)?.value,
        rip.theta(s, k)?.value,
        rip.theta(s_check, s)?.value,
        rip.theta(s_check, k)?.value,
    )
}

/// `K_k(S) = √(1 + δ_S) / (1 − δ_S − θ_{S,k}² / (1 − δ_k))`.
pub fn k_coeff(k: usize, s: usize, rip: &RipTable) -> Result<f64> {
    k_value(
        rip.delta(k)?.value,
        rip.delta(s)?.value,
        rip.theta(s, k)?.value,
    )
}

fn a_read(r: &mut Reader<'_>, k: usize, s: usize, s_check: usize) -> Result<Result<f64>> {
    let (dk, ds, tsk, tcs, tck) = (
        r.d(k)?,
        r.d(s)?,
        r.t(s, k)?,
        r.t(s_check, s)?,
        r.t(s_check, k)?,
    );
    Ok(a_value(dk, ds, tsk, tcs, tck))
}

/// Exact-recovery conditions for modified-CS with `|T| = k`, `|Δ| = u`.
pub fn check_theorem1(sizes: SupportSizes, rip: &RipTable) -> Result<ConditionReport> {
    let SupportSizes { k, u } = sizes;
    let mut r = Reader::new(rip);
    let c1 = Clause::new(format!("delta_{}", k + u), Ok(r.d(k + u)?), 1.0)?;
    let (d2u, dk, tk2u) = (r.d(2 * u)?, r.d(k)?, r.t(k, 2 * u)?);
    let c2 = Clause::new(
        format!("delta_{} + delta_{k} + theta_{k}_{}^2", 2 * u, 2 * u),
        Ok(d2u + dk + tk2u * tk2u),
        1.0,
    )?;
    let a1 = a_read(&mut r, k, 2 * u, u)?;
    let a2 = a_read(&mut r, k, u, u)?;
    let sum = match (a1, a2) {
        (Ok(x), Ok(y)) => Ok(x + y),
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    let c3 = Clause::new(format!("a_{k}({},{u}) + a_{k}({u},{u})", 2 * u), sum, 1.0)?;
    Ok(r.report("theorem1", Combinator::All, vec![c1, c2, c3], sizes))
}

/// The three sufficient conditions, each on its own.
pub fn check_corollary1(sizes: SupportSizes, rip: &RipTable) -> Result<[ConditionReport; 3]> {
    let SupportSizes { k, u } = sizes;

    let mut r = Reader::new(rip);
    let c0 = Clause::new(format!("delta_{}", k + u), Ok(r.d(k + u)?), 1.0)?;
    let lhs = (r.d(2 * u)? + r.t(u, u)? + r.t(u, 2 * u)?)
        + (r.d(k)? + r.t(k, u)?.powi(2) + 2.0 * r.t(k, 2 * u)?.powi(2));
    let c1 = Clause::new(
        format!(
            "(delta_{0} + theta_{u}_{u} + theta_{u}_{0}) + (delta_{k} + theta_{k}_{u}^2 + 2 theta_{k}_{0}^2)",
            2 * u
        ),
        Ok(lhs),
        1.0,
    )?;
    let first = r.report("corollary1.1", Combinator::All, vec![c0, c1], sizes);

    let mut r = Reader::new(rip);
    let lhs = 2.0 * r.d(2 * u)?
        + r.d(3 * u)?
        + r.d(k)?
        + r.d(k + u)?.powi(2)
        + 2.0 * r.d(k + 2 * u)?.powi(2);
    let c = Clause::new(
        format!(
            "2 delta_{} + delta_{} + delta_{k} + delta_{}^2 + 2 delta_{}^2",
            2 * u,
            3 * u,
            k + u,
            k + 2 * u
        ),
        Ok(lhs),
        1.0,
    )?;
    let second = r.report("corollary1.2", Combinator::All, vec![c], sizes);

    let mut r = Reader::new(rip);
    let c0 = Clause::flag(format!("u = {u} <= k = {k}"), u <= k);
    let c1 = Clause::new(format!("delta_{}", k + 2 * u), Ok(r.d(k + 2 * u)?), 0.2)?;
    let third = r.report("corollary1.3", Combinator::All, vec![c0, c1], sizes);

    Ok([first, second, third])
}

/// Uniqueness of the `ℓ0` solution: `δ_{k+2u} < 1`.
pub fn check_prop1(sizes: SupportSizes, rip: &RipTable) -> Result<ConditionReport> {
    let SupportSizes { k, u } = sizes;
    let mut r = Reader::new(rip);
    let c = Clause::new(format!("delta_{}", k + 2 * u), Ok(r.d(k + 2 * u)?), 1.0)?;
    Ok(r.report("prop1", Combinator::All, vec![c], sizes))
}

/// Basis-pursuit recovery conditions at sparsity `s`: the orthogonality
/// form and the isometry form (either of its two inequalities suffices).
pub fn check_cs_conditions(s: usize, rip: &RipTable) -> Result<[ConditionReport; 2]> {
    let sizes = SupportSizes { k: 0, u: s };
    let mut r = Reader::new(rip);
    let lhs = r.d(2 * s)? + r.t(s, s)? + r.t(s, 2 * s)?;
    let c = Clause::new(
        format!("delta_{} + theta_{s}_{s} + theta_{s}_{}", 2 * s, 2 * s),
        Ok(lhs),
        1.0,
    )?;
    let orth = r.report("cs.orthogonality", Combinator::All, vec![c], sizes);

    let mut r = Reader::new(rip);
    let d2 = r.d(2 * s)?;
    let d3 = r.d(3 * s)?;
    let c1 = Clause::new(format!("delta_{}", 2 * s), Ok(d2), 2f64.sqrt() - 1.0)?;
    let c2 = Clause::new(
        format!("delta_{} + delta_{}", 2 * s, 3 * s),
        Ok(d2 + d3),
        1.0,
    )?;
    let iso = r.report("cs.isometry", Combinator::Any, vec![c1, c2], sizes);
    Ok([orth, iso])
}

/// Proposition, theorem and corollary checks for one `(k, u)`, in that order.
pub fn check_all_modcs(sizes: SupportSizes, rip: &RipTable) -> Result<Vec<ConditionReport>> {
    let mut out = vec![check_prop1(sizes, rip)?, check_theorem1(sizes, rip)?];
    out.extend(check_corollary1(sizes, rip)?);
    Ok(out)
}
