//! 2-D complex FFTs and FFT-based linear convolution with a vector kernel.
//!
//! Spectra are kept in transposed layout (`x` major) so a forward/inverse pair
//! needs one transpose each way; callers never look at spectra directly.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const BLOCK: usize = 32;

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Complex 2-D FFT on a row-major `ny × nx` buffer.
#[derive(Clone)]
pub struct Fft2 {
    pub nx: usize,
    pub ny: usize,
    row_f: Arc<dyn Fft<f64>>,
    row_i: Arc<dyn Fft<f64>>,
    col_f: Arc<dyn Fft<f64>>,
    col_i: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let row_f = planner.plan_fft_forward(nx);
        let row_i = planner.plan_fft_inverse(nx);
        let col_f = planner.plan_fft_forward(ny);
        let col_i = planner.plan_fft_inverse(ny);
        let scratch_len =
            [&row_f, &row_i, &col_f, &col_i].iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        Fft2 {
            nx,
            ny,
            row_f,
            row_i,
            col_f,
            col_i,
            scratch: vec![Complex64::default(); scratch_len],
            tmp: vec![Complex64::default(); nx * ny],
        }
    }

    /// Forward transform; the result is left in transposed layout.
    pub fn forward_t(&mut self, data: &mut [Complex64]) {
        self.row_f.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.tmp, self.ny, self.nx);
        self.col_f.process_with_scratch(&mut self.tmp, &mut self.scratch);
        data.copy_from_slice(&self.tmp);
    }

    /// Unnormalized inverse of [`Fft2::forward_t`]; output in row-major layout.
    pub fn inverse_t(&mut self, data: &mut [Complex64]) {
        self.col_i.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.tmp, self.nx, self.ny);
        self.row_i.process_with_scratch(&mut self.tmp, &mut self.scratch);
        data.copy_from_slice(&self.tmp);
    }
}

/// Circular convolution on a `px × py` buffer with a packed kernel
/// `hx + i·hy`. Kernel lag `d` is stored at `d mod p`, for `d` in
/// `[dmin, dmin + p)` on each axis, so any output/input pairs whose lags fall
/// in that window convolve exactly (a linear convolution).
#[derive(Clone)]
pub struct ConvPlan {
    pub px: usize,
    pub py: usize,
    fft: Fft2,
    spectrum: Arc<Vec<Complex64>>,
}

impl ConvPlan {
    pub fn new(px: usize, py: usize, dmin: (isize, isize), kernel: impl Fn(isize, isize) -> (f64, f64)) -> Self {
        let mut fft = Fft2::new(px, py);
        let mut k = vec![Complex64::default(); px * py];
        let lag = |i: usize, p: usize, d0: isize| d0 + (i as isize - d0).rem_euclid(p as isize);
        let scale = 1.0 / (px * py) as f64;
        for iy in 0..py {
            let dy = lag(iy, py, dmin.1);
            for ix in 0..px {
                let (hx, hy) = kernel(lag(ix, px, dmin.0), dy);
                k[iy * px + ix] = Complex64::new(hx * scale, hy * scale);
            }
        }
        fft.forward_t(&mut k);
        ConvPlan { px, py, fft, spectrum: Arc::new(k) }
    }

    pub fn len(&self) -> usize {
        self.px * self.py
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Convolves `buf` (real charges in the real part, row-major `py × px`)
    /// in place. Afterwards `re` holds the x component and `im` the y
    /// component at each output position. One forward and one inverse FFT.
    pub fn apply(&mut self, buf: &mut [Complex64]) {
        self.fft.forward_t(buf);
        for (b, k) in buf.iter_mut().zip(self.spectrum.iter()) {
            *b *= *k;
        }
        self.fft.inverse_t(buf);
    }
}
