//! Orthonormal 2D Daubechies-4 (8-tap) wavelet transform with periodic
//! boundaries. Coefficients use the nested-quadrant layout: after `L` levels
//! the `side/2^L` approximation block sits in the top-left corner.

use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, OperatorKind, OperatorSpec};
use crate::error::{param, Result};
use crate::supports::energy_support;

/// db4 scaling (reconstruction low-pass) filter.
pub const DB4_LOWPASS: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_6,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

/// Levels used by the image experiments.
pub const DEFAULT_LEVELS: usize = 2;

fn highpass() -> [f64; 8] {
    let mut g = [0.0; 8];
    for (i, gi) in g.iter_mut().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        *gi = sign * DB4_LOWPASS[7 - i];
    }
    g
}

fn analyze_1d(x: &[f64], out: &mut [f64], hi: &[f64; 8]) {
    let n = x.len();
    let half = n / 2;
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for i in 0..8 {
            let v = x[(2 * k + i) % n];
            a += DB4_LOWPASS[i] * v;
            d += hi[i] * v;
        }
        out[k] = a;
        out[half + k] = d;
    }
}

fn synthesize_1d(c: &[f64], out: &mut [f64], hi: &[f64; 8]) {
    let n = c.len();
    let half = n / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let (a, d) = (c[k], c[half + k]);
        for i in 0..8 {
            out[(2 * k + i) % n] += DB4_LOWPASS[i] * a + hi[i] * d;
        }
    }
}

fn check_dims(rows: usize, cols: usize, levels: usize) -> Result<()> {
    if rows != cols {
        return param(format!(
            "wavelet transform expects a square image, got {rows}×{cols}"
        ));
    }
    if levels == 0 {
        return param("at least one decomposition level is required");
    }
    let block = 1usize << levels;
    if rows == 0 || !rows.is_multiple_of(block) {
        return param(format!("image side {rows} is not divisible by 2^{levels}"));
    }
    Ok(())
}

// Applies `f` to every column then every row of the top-left `cur × cur` block.
fn pass(m: &mut DMatrix<f64>, cur: usize, f: impl Fn(&[f64], &mut [f64])) {
    let mut src = vec![0.0; cur];
    let mut dst = vec![0.0; cur];
    for c in 0..cur {
        for r in 0..cur {
            src[r] = m[(r, c)];
        }
        f(&src, &mut dst);
        for r in 0..cur {
            m[(r, c)] = dst[r];
        }
    }
    for r in 0..cur {
        for c in 0..cur {
            src[c] = m[(r, c)];
        }
        f(&src, &mut dst);
        for c in 0..cur {
            m[(r, c)] = dst[c];
        }
    }
}

/// Forward transform of a square image.
pub fn dwt2_db4(image: &DMatrix<f64>, levels: usize) -> Result<DMatrix<f64>> {
    check_dims(image.nrows(), image.ncols(), levels)?;
    let hi = highpass();
    let mut out = image.clone();
    let mut cur = image.nrows();
    for _ in 0..levels {
        pass(&mut out, cur, |x, y| analyze_1d(x, y, &hi));
        cur /= 2;
    }
    Ok(out)
}

/// Inverse of [`dwt2_db4`].
pub fn idwt2_db4(coeffs: &DMatrix<f64>, levels: usize) -> Result<DMatrix<f64>> {
    check_dims(coeffs.nrows(), coeffs.ncols(), levels)?;
    let hi = highpass();
    let mut out = coeffs.clone();
    let side = coeffs.nrows();
    for level in (0..levels).rev() {
        let cur = side >> level;
        // separable, so rows-then-columns order of the forward pass need not be mirrored
        pass(&mut out, cur, |x, y| synthesize_1d(x, y, &hi));
    }
    Ok(out)
}

/// Keeps the wavelet coefficients in the `b`%-energy support and inverts.
pub fn sparsify(image: &DMatrix<f64>, b: f64) -> Result<DMatrix<f64>> {
    let mut coeffs = dwt2_db4(image, DEFAULT_LEVELS)?;
    let keep = energy_support(coeffs.as_slice(), b)?;
    for (i, v) in coeffs.iter_mut().enumerate() {
        if !keep.contains(i) {
            *v = 0.0;
        }
    }
    idwt2_db4(&coeffs, DEFAULT_LEVELS)
}

/// Wavelet synthesis `W'` as an `n × n` operator on column-major vectors:
/// `apply` maps coefficients to an image, `adjoint` an image to coefficients.
#[derive(Clone, Debug)]
pub struct WaveletBasis {
    side: usize,
    levels: usize,
}

impl WaveletBasis {
    pub fn new(side: usize, levels: usize) -> Result<Self> {
        check_dims(side, side, levels)?;
        Ok(WaveletBasis { side, levels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Indices of the approximation-block coefficients.
    pub fn approximation_indices(&self) -> Vec<usize> {
        let a = self.side >> self.levels;
        (0..a)
            .flat_map(|c| (0..a).map(move |r| r + self.side * c))
            .collect()
    }

    fn reshape(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.side, self.side, v.as_slice())
    }
}

impl LinearOperator for WaveletBasis {
    fn rows(&self) -> usize {
        self.side * self.side
    }

    fn cols(&self) -> usize {
        self.side * self.side
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Wavelet
    }

    fn spec(&self) -> OperatorSpec {
        OperatorSpec::Wavelet {
            side: self.side,
            levels: self.levels,
        }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let img =
            idwt2_db4(&self.reshape(x), self.levels).expect("dimensions checked at construction");
        DVector::from_column_slice(img.as_slice())
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        let c =
            dwt2_db4(&self.reshape(y), self.levels).expect("dimensions checked at construction");
        DVector::from_column_slice(c.as_slice())
    }
}
