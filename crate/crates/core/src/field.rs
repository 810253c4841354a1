//! Reference field solvers: direct pairwise summation and the exact
//! zero-padded fine-grid FFT convolution.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::density::{ChargeGrid, GridSpec};
use crate::fft::ConvPlan;
use crate::netlist::Point;

/// Coulomb vector kernel `k_e·Δ/|Δ|³` sampled on a lattice with the given
/// spacing; zero at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorKernel {
    pub k_e: f64,
    pub dx: f64,
    pub dy: f64,
}

impl VectorKernel {
    pub fn eval(k_e: f64, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            return (0.0, 0.0);
        }
        let s = k_e / (r2 * r2.sqrt());
        (x * s, y * s)
    }

    /// Kernel at a lattice lag of `(i, j)` sites.
    pub fn at(&self, i: isize, j: isize) -> (f64, f64) {
        Self::eval(self.k_e, i as f64 * self.dx, j as f64 * self.dy)
    }
}

pub fn build_kernel(spec: &GridSpec, k_e: f64) -> VectorKernel {
    VectorKernel { k_e, dx: spec.bin_w, dy: spec.bin_h }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub xi_x: Vec<f64>,
    pub xi_y: Vec<f64>,
    pub spec: GridSpec,
}

impl FieldMap {
    pub fn zeros(spec: GridSpec) -> Self {
        FieldMap { xi_x: vec![0.0; spec.bins()], xi_y: vec![0.0; spec.bins()], spec }
    }

    pub fn is_finite(&self) -> bool {
        self.xi_x.iter().chain(&self.xi_y).all(|v| v.is_finite())
    }
}

/// Exact field at each evaluation point from point charges. Sources that
/// coincide with the evaluation point are skipped.
pub fn direct_field(charges: &[(Point, f64)], eval: &[Point], k_e: f64) -> Vec<Point> {
    eval.par_iter()
        .map(|p| {
            let (mut fx, mut fy) = (0.0, 0.0);
            for (s, q) in charges {
                let (hx, hy) = VectorKernel::eval(k_e, p.x - s.x, p.y - s.y);
                fx += q * hx;
                fy += q * hy;
            }
            Point::new(fx, fy)
        })
        .collect()
}

/// Bin charges as point charges at bin centers (zero bins omitted).
pub fn grid_point_charges(cg: &ChargeGrid) -> Vec<(Point, f64)> {
    let s = &cg.spec;
    let mut out = Vec::new();
    for iy in 0..s.ny {
        for ix in 0..s.nx {
            let q = cg.q[s.idx(ix, iy)];
            if q != 0.0 {
                out.push((s.bin_center(ix, iy), q));
            }
        }
    }
    out
}

pub fn bin_centers(spec: &GridSpec) -> Vec<Point> {
    (0..spec.ny).flat_map(|iy| (0..spec.nx).map(move |ix| spec.bin_center(ix, iy))).collect()
}

/// O(K²) oracle: the field of every bin charge at every bin center.
pub fn direct_grid_field(cg: &ChargeGrid, k_e: f64) -> FieldMap {
    let f = direct_field(&grid_point_charges(cg), &bin_centers(&cg.spec), k_e);
    FieldMap { xi_x: f.iter().map(|p| p.x).collect(), xi_y: f.iter().map(|p| p.y).collect(), spec: cg.spec }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    /// Open boundary: linear convolution on a 2M × 2N buffer.
    #[default]
    Zero,
    /// Periodic boundary with minimum-image lags on an M × N buffer.
    Periodic,
}

/// Fine-grid FFT solver: one forward FFT of the charges and one inverse FFT
/// give both field components.
#[derive(Clone)]
pub struct FineFftSolver {
    spec: GridSpec,
    plan: ConvPlan,
    buf: Vec<Complex64>,
}

impl FineFftSolver {
    pub fn new(spec: &GridSpec, kernel: VectorKernel, padding: Padding) -> Self {
        let (nx, ny) = (spec.nx as isize, spec.ny as isize);
        let plan = match padding {
            Padding::Zero => ConvPlan::new(2 * spec.nx, 2 * spec.ny, (-nx, -ny), |i, j| kernel.at(i, j)),
            Padding::Periodic => ConvPlan::new(spec.nx, spec.ny, (-nx / 2, -ny / 2), |i, j| kernel.at(i, j)),
        };
        let buf = vec![Complex64::default(); plan.len()];
        FineFftSolver { spec: *spec, plan, buf }
    }

    pub fn solve(&mut self, cg: &ChargeGrid) -> FieldMap {
        let (nx, ny, px) = (self.spec.nx, self.spec.ny, self.plan.px);
        self.buf.fill(Complex64::default());
        for iy in 0..ny {
            for ix in 0..nx {
                self.buf[iy * px + ix].re = cg.q[iy * nx + ix];
            }
        }
        self.plan.apply(&mut self.buf);
        let mut out = FieldMap::zeros(self.spec);
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.buf[iy * px + ix];
                out.xi_x[iy * nx + ix] = v.re;
                out.xi_y[iy * nx + ix] = v.im;
            }
        }
        out
    }
}

/// Convenience wrapper around [`FineFftSolver`] with zero padding.
pub fn fft_field_fine(cg: &ChargeGrid, kernel: VectorKernel) -> FieldMap {
    FineFftSolver::new(&cg.spec, kernel, Padding::Zero).solve(cg)
}
