//! High-probability RIP bounds for Gaussian matrices and the resulting
//! sufficient-condition curves for modified-CS and basis pursuit.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Natural-log binary entropy with `H(0) = H(1) = 0`.
pub fn entropy(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return param(format!("entropy argument must lie in [0, 1], got {r}"));
    }
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    Ok(term(r) + term(1.0 - r))
}

/// `g_{n/m}(r) = (1 + f)² − 1` with `f = √(n/m) (√r + √(2 H(r)))`.
pub fn g_bound(n_over_m: f64, frac: f64) -> Result<f64> {
    if !(n_over_m > 0.0 && n_over_m.is_finite()) {
        return param(format!("n/m must be positive, got {n_over_m}"));
    }
    let f = n_over_m.sqrt() * (frac.sqrt() + (2.0 * entropy(frac)?).sqrt());
    Ok((1.0 + f).powi(2) - 1.0)
}

/// `ρ_modCS` at fractional sizes (`s`, `u`, `e` divided by `n`).
pub fn rho_modcs_frac(m_over_n: f64, s: f64, u: f64, e: f64) -> Result<f64> {
    let r = 1.0 / m_over_n;
    let g = |x: f64| g_bound(r, x);
    Ok(2.0 * g(2.0 * u)?
        + g(3.0 * u)?
        + g(s + e - u)?
        + g(s + e)?.powi(2)
        + 2.0 * g(s + e + u)?.powi(2))
}

pub fn rho_cs_frac(m_over_n: f64, s: f64) -> Result<f64> {
    let r = 1.0 / m_over_n;
    Ok(g_bound(r, 2.0 * s)? + g_bound(r, 3.0 * s)?)
}

pub fn rho_cs2_frac(m_over_n: f64, s: f64) -> Result<f64> {
    g_bound(1.0 / m_over_n, 2.0 * s)
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 || m > n {
        return param(format!("need 0 < m ≤ n, got m = {m}, n = {n}"));
    }
    Ok(())
}

/// `ρ_modCS = 2g(2u/n) + g(3u/n) + g((s+e−u)/n) + g((s+e)/n)² + 2g((s+e+u)/n)²`.
pub fn rho_modcs(m: usize, n: usize, s: usize, u: usize, e: usize) -> Result<f64> {
    check_dims(m, n)?;
    if u > s + e {
        return param(format!("u = {u} exceeds s + e = {}", s + e));
    }
    let nf = n as f64;
    rho_modcs_frac(m as f64 / nf, s as f64 / nf, u as f64 / nf, e as f64 / nf)
}

/// `ρ_CS = g(2s/n) + g(3s/n)`.
pub fn rho_cs(m: usize, n: usize, s: usize) -> Result<f64> {
    check_dims(m, n)?;
    rho_cs_frac(m as f64 / n as f64, s as f64 / n as f64)
}

/// `ρ_CS,2 = g(2s/n)`.
pub fn rho_cs2(m: usize, n: usize, s: usize) -> Result<f64> {
    check_dims(m, n)?;
    rho_cs2_frac(m as f64 / n as f64, s as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundRule {
    /// `ρ_modCS < 1`
    ModCs,
    /// `ρ_CS < 1`
    Cs,
    /// `ρ_CS,2 < √2 − 1`
    Cs2,
}

impl BoundRule {
    pub const ALL: [BoundRule; 3] = [BoundRule::ModCs, BoundRule::Cs, BoundRule::Cs2];

    pub fn threshold(self) -> f64 {
        match self {
            BoundRule::Cs2 => 2f64.sqrt() - 1.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundRule::ModCs => "modcs",
            BoundRule::Cs => "cs",
            BoundRule::Cs2 => "cs2",
        }
    }

    /// `ρ` at sparsity fraction `s`, with `u = e = s · churn` for modified-CS.
    pub fn rho(self, m_over_n: f64, s: f64, churn: f64) -> Result<f64> {
        match self {
            BoundRule::ModCs => rho_modcs_frac(m_over_n, s, churn * s, churn * s),
            BoundRule::Cs => rho_cs_frac(m_over_n, s),
            BoundRule::Cs2 => rho_cs2_frac(m_over_n, s),
        }
    }
}

impl std::str::FromStr for BoundRule {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modcs" => Ok(BoundRule::ModCs),
            "cs" => Ok(BoundRule::Cs),
            "cs2" => Ok(BoundRule::Cs2),
            _ => param(format!(
                "unknown bound rule '{s}' (expected modcs, cs or cs2)"
            )),
        }
    }
}

/// Ratio `u/s = e/s` used for the sparsity curves.
pub const CURVE_CHURN: f64 = 1.0 / 50.0;

/// Largest sparsity fraction `s/n` satisfying `rule` at `m/n`, found by
/// bisection on a continuous `s/n` axis.
pub fn max_sparsity_fraction(m_over_n: f64, rule: BoundRule) -> Result<f64> {
    if !(m_over_n > 0.0 && m_over_n <= 1.0) {
        return param(format!("m/n must lie in (0, 1], got {m_over_n}"));
    }
    let ok =
        |s: f64| -> Result<bool> { Ok(rule.rho(m_over_n, s, CURVE_CHURN)? < rule.threshold()) };
    // every argument of g stays inside [0, 1] up to s/n = 1/3
    let (mut lo, mut hi) = (0.0, 1.0 / 3.0);
    if ok(hi)? {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(s/n, ρ)` samples on `points` evenly spaced fractions in `[0, max_frac]`.
pub fn rho_curve(
    m_over_n: f64,
    rule: BoundRule,
    max_frac: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return param("a curve needs at least two points");
    }
    if !(max_frac > 0.0 && max_frac <= 1.0 / 3.0) {
        return param(format!(
            "maximum fraction must lie in (0, 1/3], got {max_frac}"
        ));
    }
    (0..points)
        .map(|i| {
            let s = max_frac * i as f64 / (points - 1) as f64;
            Ok((s, rule.rho(m_over_n, s, CURVE_CHURN)?))
        })
        .collect()
}
