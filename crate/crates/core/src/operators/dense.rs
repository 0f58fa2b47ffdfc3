use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{LinearOperator, OperatorKind, OperatorSpec};
use crate::error::{param, Result};
use crate::rng::seeded;

/// An explicitly stored matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    spec: Option<OperatorSpec>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        DenseOperator { matrix, spec: None }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Dense
    }

    fn spec(&self) -> OperatorSpec {
        self.spec.clone().unwrap_or(OperatorSpec::Dense {
            rows: self.rows(),
            cols: self.cols(),
        })
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(y)
    }

    fn column(&self, j: usize) -> DVector<f64> {
        self.matrix.column(j).into_owned()
    }

    fn to_dense(&self) -> Cow<'_, DMatrix<f64>> {
        Cow::Borrowed(&self.matrix)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn rows(&self) -> usize {
        self.nrows()
    }

    fn cols(&self) -> usize {
        self.ncols()
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Dense
    }

    fn spec(&self) -> OperatorSpec {
        OperatorSpec::Dense {
            rows: self.nrows(),
            cols: self.ncols(),
        }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        self.tr_mul(y)
    }

    fn column(&self, j: usize) -> DVector<f64> {
        DMatrix::column(self, j).into_owned()
    }

    fn to_dense(&self) -> Cow<'_, DMatrix<f64>> {
        Cow::Borrowed(self)
    }
}

/// I.i.d. standard normal `m × n` matrix drawn from `rng`, optionally with
/// each column scaled to unit ℓ2 norm.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    normalize: bool,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if m == 0 || m > n {
        return param(format!("need 0 < m ≤ n, got m = {m}, n = {n}"));
    }
    // filled column by column so that the draw order is storage order
    let mut a = DMatrix::<f64>::zeros(m, n);
    for v in a.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    if normalize {
        for mut col in a.column_iter_mut() {
            let norm = col.norm();
            col /= norm;
        }
    }
    Ok(a)
}

/// Column-normalized Gaussian measurement matrix.
pub fn gaussian_operator(m: usize, n: usize, seed: u64) -> Result<DenseOperator> {
    gaussian_operator_with(m, n, seed, true)
}

pub fn gaussian_operator_with(
    m: usize,
    n: usize,
    seed: u64,
    normalize: bool,
) -> Result<DenseOperator> {
    let matrix = gaussian_matrix(m, n, normalize, &mut seeded(seed))?;
    Ok(DenseOperator {
        matrix,
        spec: Some(OperatorSpec::Gaussian {
            m,
            n,
            seed,
            normalize,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::*;

    #[test]
    fn unit_columns_and_determinism() {
        let a = gaussian_operator(4, 8, 7).unwrap();
        for col in a.matrix().column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let b = gaussian_operator(4, 8, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = gaussian_operator(4, 8, 8).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn unnormalized_switch() {
        let a = gaussian_operator_with(5, 9, 3, false).unwrap();
        assert!(a
            .matrix()
            .column_iter()
            .any(|c| (c.norm() - 1.0).abs() > 1e-3));
    }

    #[test]
    fn rejects_overdetermined() {
        assert!(gaussian_operator(9, 8, 1).is_err());
        assert!(gaussian_operator(0, 8, 1).is_err());
    }

    #[test]
    fn adjoint_and_spec_round_trip() {
        let a = gaussian_operator(12, 30, 5).unwrap();
        assert!(adjoint_mismatch(&a, 20, 1) < 1e-12);
        let rebuilt = a.spec().build().unwrap();
        assert_eq!(rebuilt.to_dense().as_ref(), a.matrix());
        let json = serde_json::to_string(&a.spec()).unwrap();
        assert!(json.contains("\"kind\":\"gaussian\""));
    }
}
