use nalgebra::DVector;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::operators::LinearOperator;
use crate::rng::{stream, Purpose};
use crate::supports::{random_support, IndexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceVariant {
    /// Exact zeros off the support.
    Sparsified,
    /// Laplace(b_p) entries off the support.
    Compressible,
}

/// Generative model for a slowly changing sparse sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceModel {
    pub n: usize,
    /// Support size at `t = 0`.
    pub s: usize,
    /// Indices added to the support at every step.
    pub additions: usize,
    /// Indices removed from the support at every step.
    pub removals: usize,
    /// Variance of the on-support random walk.
    pub sigma_p2: f64,
    /// Laplace scale of off-support entries and of new support members.
    pub b_p: f64,
    /// Last time index; the sequence has `t_max + 1` frames.
    pub t_max: usize,
    #[serde(default = "default_initial_variance")]
    pub initial_variance: f64,
    #[serde(default = "default_variant")]
    pub variant: SequenceVariant,
    #[serde(default)]
    pub seed: u64,
}

fn default_initial_variance() -> f64 {
    100.0
}

fn default_variant() -> SequenceVariant {
    SequenceVariant::Sparsified
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x: Vec<f64>,
    pub support: IndexSet,
}

impl SequenceModel {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("signal length must be positive");
        }
        if !(self.sigma_p2 >= 0.0 && self.sigma_p2.is_finite()) {
            return param(format!(
                "random-walk variance must be non-negative, got {}",
                self.sigma_p2
            ));
        }
        if !(self.b_p > 0.0 && self.b_p.is_finite()) {
            return param(format!("Laplace scale must be positive, got {}", self.b_p));
        }
        if !(self.initial_variance >= 0.0 && self.initial_variance.is_finite()) {
            return param("initial variance must be non-negative");
        }
        // support size after every step must stay in [1, n]
        let mut size = self.s as i64;
        for t in 0..=self.t_max {
            if t > 0 {
                if (self.removals as i64) > size {
                    return Err(Error::Model(format!(
                        "cannot remove {} of {size} entries at t = {t}",
                        self.removals
                    )));
                }
                size -= self.removals as i64;
                if size + self.additions as i64 > self.n as i64 {
                    return Err(Error::Model(format!(
                        "support overflows n = {} at t = {t}",
                        self.n
                    )));
                }
                size += self.additions as i64;
            }
            if size < 1 || size > self.n as i64 {
                return Err(Error::Model(format!(
                    "support size {size} leaves [1, {}] at t = {t}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

fn laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    let mag = Exp::new(1.0 / b).expect("positive scale").sample(rng);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

/// Frames `t = 0..=t_max`.
pub fn generate_sequence(model: &SequenceModel) -> Result<Vec<Frame>> {
    model.validate()?;
    let n = model.n;
    let mut rng = stream(model.seed, Purpose::Sequence, 0, 0);
    let init =
        Normal::new(0.0, model.initial_variance.sqrt()).map_err(|e| Error::Model(e.to_string()))?;
    let walk = model.sigma_p2.sqrt();

    let mut support = random_support(n, model.s, &mut rng)?;
    let mut on = vec![0.0; n];
    for &i in &support {
        on[i] = init.sample(&mut rng);
    }
    let mut frames = Vec::with_capacity(model.t_max + 1);
    let emit = |on: &[f64], support: &IndexSet, rng: &mut crate::rng::Rng| {
        let mut x = on.to_vec();
        if model.variant == SequenceVariant::Compressible {
            for (i, v) in x.iter_mut().enumerate() {
                if !support.contains(i) {
                    *v = laplace(model.b_p, rng);
                }
            }
        }
        Frame {
            x,
            support: support.clone(),
        }
    };
    frames.push(emit(&on, &support, &mut rng));

    for _ in 1..=model.t_max {
        let members = support.as_slice();
        let removed: IndexSet = sample(&mut rng, members.len(), model.removals)
            .into_iter()
            .map(|j| members[j])
            .collect();
        let outside = support.complement(n);
        let added: IndexSet = sample(&mut rng, outside.len(), model.additions)
            .into_iter()
            .map(|j| outside.as_slice()[j])
            .collect();
        for &i in &support {
            if removed.contains(i) {
                on[i] = 0.0;
            } else if walk > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                on[i] += walk * z;
            }
        }
        for &i in &added {
            on[i] = laplace(model.b_p, &mut rng);
        }
        support = support.difference(&removed).union(&added);
        frames.push(emit(&on, &support, &mut rng));
    }
    Ok(frames)
}

/// `y_0 = A_0 x_0`, `y_t = A x_t`, plus i.i.d. `N(0, noise_var)` noise.
pub fn measure_sequence(
    a0: &dyn LinearOperator,
    a: &dyn LinearOperator,
    frames: &[Frame],
    noise_var: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if !(noise_var >= 0.0) {
        return param("noise variance must be non-negative");
    }
    let sd = noise_var.sqrt();
    frames
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let op = if t == 0 { a0 } else { a };
            if op.cols() != f.x.len() {
                return param(format!(
                    "operator has {} columns, signal has {}",
                    op.cols(),
                    f.x.len()
                ));
            }
            let mut y = op.apply(&DVector::from_column_slice(&f.x));
            if sd > 0.0 {
                let mut rng = stream(seed, Purpose::Trial, 1, t as u64);
                for v in y.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += sd * z;
                }
            }
            Ok(y.iter().copied().collect())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleParams {
    pub b_p: f64,
    pub sigma_p2: f64,
}

impl MleParams {
    /// `γ = b_p / (2 σ_p²)`.
    pub fn gamma(&self) -> f64 {
        self.b_p / (2.0 * self.sigma_p2)
    }
}

/// Smallest reported Laplace scale.
pub const B_P_FLOOR: f64 = 1e-12;

/// Maximum-likelihood `(b_p, σ_p²)` from a training sequence and its
/// supports, summing over `t = 1..=t_max`.
pub fn mle_params(signals: &[Vec<f64>], supports: &[IndexSet]) -> Result<MleParams> {
    if signals.len() < 2 {
        return param("at least two frames are needed");
    }
    if supports.len() != signals.len() {
        return param(format!(
            "{} supports for {} frames",
            supports.len(),
            signals.len()
        ));
    }
    let n = signals[0].len();
    if signals.iter().any(|x| x.len() != n) {
        return param("frames differ in length");
    }
    let (mut l1, mut off, mut sq, mut on) = (0.0, 0usize, 0.0, 0usize);
    for t in 1..signals.len() {
        let prev = &supports[t - 1];
        prev.check_bound(n, "support")?;
        for (i, (&cur, &old)) in signals[t].iter().zip(&signals[t - 1]).enumerate() {
            if prev.contains(i) {
                sq += (cur - old).powi(2);
                on += 1;
            } else {
                l1 += cur.abs();
                off += 1;
            }
        }
    }
    if off == 0 {
        return param("supports cover every index; b_p has no data");
    }
    if on == 0 {
        return param("supports are empty; σ_p² has no data");
    }
    Ok(MleParams {
        b_p: (l1 / off as f64).max(B_P_FLOOR),
        sigma_p2: sq / on as f64,
    })
}
