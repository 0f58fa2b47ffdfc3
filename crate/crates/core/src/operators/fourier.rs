use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{LinearOperator, OperatorKind, OperatorSpec};
use crate::error::{param, Result};

/// Rows of the unitary 2D DFT of a `side × side` image selected by a
/// frequency mask, realified as `[Re; Im]` so the output has `2·|mask|` rows.
#[derive(Clone)]
pub struct PartialFourierOperator {
    side: usize,
    mask: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PartialFourierOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialFourierOperator")
            .field("side", &self.side)
            .field("mask", &self.mask)
            .finish()
    }
}

/// `mask` lists frequency indices `k_row + side * k_col` in `[0, side²)`;
/// entries must be distinct. Output row `r < |mask|` is the real part of the
/// `r`-th selected coefficient, row `|mask| + r` its imaginary part.
pub fn partial_fourier_operator(side: usize, mask: Vec<usize>) -> Result<PartialFourierOperator> {
    if side == 0 {
        return param("image side must be positive");
    }
    let n = side * side;
    if mask.is_empty() {
        return param("frequency mask is empty");
    }
    let mut seen = vec![false; n];
    for &k in &mask {
        if k >= n {
            return param(format!("mask frequency {k} outside [0, {n})"));
        }
        if std::mem::replace(&mut seen[k], true) {
            return param(format!("duplicate mask frequency {k}"));
        }
    }
    let mut planner = FftPlanner::new();
    Ok(PartialFourierOperator {
        side,
        mask,
        forward: planner.plan_fft_forward(side),
        inverse: planner.plan_fft_inverse(side),
    })
}

/// `count` distinct frequencies drawn uniformly from `[0, side²)`.
pub fn random_frequency_mask<R: Rng + ?Sized>(
    side: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = side * side;
    if count == 0 || count > n {
        return param(format!("mask size must lie in [1, {n}], got {count}"));
    }
    Ok(sample(rng, n, count).into_vec())
}

impl PartialFourierOperator {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn mask(&self) -> &[usize] {
        &self.mask
    }

    // In-place unnormalized 2D transform of a column-major buffer.
    fn transform(&self, buf: &mut [Complex<f64>], fft: &dyn Fft<f64>) {
        let b = self.side;
        // along each column (contiguous)
        fft.process(buf);
        // along each row
        let mut row = vec![Complex::new(0.0, 0.0); b];
        for r in 0..b {
            for c in 0..b {
                row[c] = buf[r + b * c];
            }
            fft.process(&mut row);
            for c in 0..b {
                buf[r + b * c] = row[c];
            }
        }
    }
}

impl LinearOperator for PartialFourierOperator {
    fn rows(&self) -> usize {
        2 * self.mask.len()
    }

    fn cols(&self) -> usize {
        self.side * self.side
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::PartialFourier
    }

    fn spec(&self) -> OperatorSpec {
        OperatorSpec::PartialFourier {
            side: self.side,
            mask: self.mask.clone(),
        }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform(&mut buf, self.forward.as_ref());
        let scale = 1.0 / self.side as f64;
        let p = self.mask.len();
        let mut out = DVector::zeros(2 * p);
        for (r, &k) in self.mask.iter().enumerate() {
            out[r] = buf[k].re * scale;
            out[p + r] = buf[k].im * scale;
        }
        out
    }

    fn adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        let p = self.mask.len();
        let mut buf = vec![Complex::new(0.0, 0.0); self.cols()];
        for (r, &k) in self.mask.iter().enumerate() {
            buf[k] = Complex::new(y[r], y[p + r]);
        }
        self.transform(&mut buf, self.inverse.as_ref());
        let scale = 1.0 / self.side as f64;
        DVector::from_iterator(self.cols(), buf.iter().map(|c| c.re * scale))
    }
}
