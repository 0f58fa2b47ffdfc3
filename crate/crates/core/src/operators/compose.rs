use std::sync::Arc;

use nalgebra::DVector;

use super::{LinearOperator, OperatorKind, OperatorSpec};
use crate::error::{param, Result};

/// `A = H Φ`: measurement operator applied after a sparsity basis.
#[derive(Clone, Debug)]
pub struct ComposedOperator {
    outer: Arc<dyn LinearOperator>,
    inner: Arc<dyn LinearOperator>,
}

/// Builds `A = H Φ`. `basis` maps sparse coefficients to the signal domain.
pub fn compose_measurement(
    h: Arc<dyn LinearOperator>,
    basis: Arc<dyn LinearOperator>,
) -> Result<ComposedOperator> {
    if h.cols() != basis.rows() {
        return param(format!(
            "cannot compose a {}×{} operator with a {}×{} basis",
            h.rows(),
            h.cols(),
            basis.rows(),
            basis.cols()
        ));
    }
    Ok(ComposedOperator {
        outer: h,
        inner: basis,
    })
}

impl LinearOperator for ComposedOperator {
    fn rows(&self) -> usize {
        self.outer.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Composition
    }

    fn spec(&self) -> OperatorSpec {
        OperatorSpec::Composition {
            outer: Box::new(self.outer.spec()),
            inner: Box::new(self.inner.spec()),
        }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.outer.apply(&self.inner.apply(x))
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        self.inner.adjoint(&self.outer.adjoint(y))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator {
    n: usize,
}

impl IdentityOperator {
    pub fn new(n: usize) -> Self {
        IdentityOperator { n }
    }
}

impl LinearOperator for IdentityOperator {
    fn rows(&self) -> usize {
        self.n
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Identity
    }

    fn spec(&self) -> OperatorSpec {
        OperatorSpec::Identity { n: self.n }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::*;
    use crate::operators::{
        gaussian_operator, idwt2_db4, partial_fourier_operator, random_frequency_mask, WaveletBasis,
    };
    use crate::rng::seeded;
    use nalgebra::DMatrix;

    #[test]
    fn identity_basis_is_transparent() {
        let h: Arc<dyn LinearOperator> = Arc::new(gaussian_operator(6, 10, 1).unwrap());
        let a = compose_measurement(h.clone(), Arc::new(IdentityOperator::new(10))).unwrap();
        assert_eq!(a.to_dense().as_ref(), h.to_dense().as_ref());
    }

    #[test]
    fn dimension_mismatch() {
        let h: Arc<dyn LinearOperator> = Arc::new(gaussian_operator(6, 10, 1).unwrap());
        assert!(compose_measurement(h, Arc::new(IdentityOperator::new(9))).is_err());
    }

    #[test]
    fn fourier_wavelet_composition() {
        let side = 8;
        let mask = random_frequency_mask(side, 20, &mut seeded(4)).unwrap();
        let mf = partial_fourier_operator(side, mask.clone()).unwrap();
        let w = WaveletBasis::new(side, 2).unwrap();
        let a = compose_measurement(Arc::new(mf.clone()), Arc::new(w)).unwrap();
        assert!(adjoint_mismatch(&a, 20, 5) < 1e-12);
        assert!(dense_mismatch(&a, 5, 6) < 1e-12);

        // a 1-sparse coefficient vector measures the spectrum of its atom
        let dense = a.to_dense().into_owned();
        let j = 37;
        let mut coeffs = DMatrix::zeros(side, side);
        coeffs[(j % side, j / side)] = 1.0;
        let atom = idwt2_db4(&coeffs, 2).unwrap();
        let spectrum = mf.apply(&DVector::from_column_slice(atom.as_slice()));
        assert!((dense.column(j) - spectrum).amax() < 1e-12);
        assert_eq!(a.spec().build().unwrap().rows(), 40);
    }
}
