//! Measurement and sparsity operators.
//!
//! Every operator is an `m × n` real linear map with forward application,
//! adjoint application and column extraction. Structured operators (partial
//! Fourier, wavelet synthesis, compositions) never store their matrix; the
//! solvers materialize one on demand through [`LinearOperator::to_dense`].
//!
//! Images are vectorized column-major (`i = row + side * col`), matching
//! `nalgebra` storage; 2D frequencies use the same convention.

mod compose;
mod dense;
mod fourier;
mod wavelet;

use std::borrow::Cow;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use compose::{compose_measurement, ComposedOperator, IdentityOperator};
pub use dense::{gaussian_matrix, gaussian_operator, gaussian_operator_with, DenseOperator};
pub use fourier::{partial_fourier_operator, random_frequency_mask, PartialFourierOperator};
pub use wavelet::{dwt2_db4, idwt2_db4, sparsify, WaveletBasis, DB4_LOWPASS};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Dense,
    PartialFourier,
    Wavelet,
    Identity,
    Composition,
}

/// Serializable recipe from which an operator can be rebuilt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorSpec {
    Gaussian {
        m: usize,
        n: usize,
        seed: u64,
        normalize: bool,
    },
    /// Explicit matrix supplied by the caller (e.g. loaded from CSV).
    Dense {
        rows: usize,
        cols: usize,
    },
    PartialFourier {
        side: usize,
        mask: Vec<usize>,
    },
    Wavelet {
        side: usize,
        levels: usize,
    },
    Identity {
        n: usize,
    },
    Composition {
        outer: Box<OperatorSpec>,
        inner: Box<OperatorSpec>,
    },
}

impl OperatorSpec {
    /// Rebuilds the operator. Explicit dense matrices carry no data in their
    /// spec and cannot be rebuilt.
    pub fn build(&self) -> Result<Arc<dyn LinearOperator>> {
        Ok(match self {
            OperatorSpec::Gaussian {
                m,
                n,
                seed,
                normalize,
            } => Arc::new(gaussian_operator_with(*m, *n, *seed, *normalize)?),
            OperatorSpec::Dense { .. } => {
                return crate::error::param("a dense spec carries no matrix data; load it from CSV")
            }
            OperatorSpec::PartialFourier { side, mask } => {
                Arc::new(partial_fourier_operator(*side, mask.clone())?)
            }
            OperatorSpec::Wavelet { side, levels } => Arc::new(WaveletBasis::new(*side, *levels)?),
            OperatorSpec::Identity { n } => Arc::new(IdentityOperator::new(*n)),
            OperatorSpec::Composition { outer, inner } => {
                Arc::new(compose_measurement(outer.build()?, inner.build()?)?)
            }
        })
    }
}

pub trait LinearOperator: Send + Sync + Debug {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn kind(&self) -> OperatorKind;
    fn spec(&self) -> OperatorSpec;

    /// `A x`
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `Aᵀ y`
    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64>;

    /// `A e_j`
    fn column(&self, j: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.cols());
        e[j] = 1.0;
        self.apply(&e)
    }

    /// Column-by-column materialization.
    fn to_dense(&self) -> Cow<'_, DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.rows(), self.cols());
        for j in 0..self.cols() {
            out.set_column(j, &self.column(j));
        }
        Cow::Owned(out)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Arc<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn kind(&self) -> OperatorKind {
        (**self).kind()
    }
    fn spec(&self) -> OperatorSpec {
        (**self).spec()
    }
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).apply(x)
    }
    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        (**self).adjoint(y)
    }
    fn column(&self, j: usize) -> DVector<f64> {
        (**self).column(j)
    }
    fn to_dense(&self) -> Cow<'_, DMatrix<f64>> {
        (**self).to_dense()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, StandardNormal};

    /// Largest relative mismatch `|⟨Ax, y⟩ − ⟨x, Aᵀy⟩| / (‖Ax‖‖y‖)` over
    /// random probes.
    pub fn adjoint_mismatch(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
        let mut rng = seeded(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let x = DVector::from_fn(op.cols(), |_, _| StandardNormal.sample(&mut rng));
            let y = DVector::from_fn(op.rows(), |_, _| StandardNormal.sample(&mut rng));
            let ax = op.apply(&x);
            let aty = op.adjoint(&y);
            let lhs = ax.dot(&y);
            let rhs = x.dot(&aty);
            let scale = (ax.norm() * y.norm())
                .max(x.norm() * aty.norm())
                .max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        worst
    }

    /// Largest relative mismatch between dense materialization and `apply`.
    pub fn dense_mismatch(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
        let dense = op.to_dense().into_owned();
        let mut rng = seeded(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let x = DVector::from_fn(op.cols(), |_, _| StandardNormal.sample(&mut rng));
            let a = op.apply(&x);
            let b = &dense * &x;
            worst = worst.max((a - b).norm() / x.norm());
        }
        worst
    }
}
