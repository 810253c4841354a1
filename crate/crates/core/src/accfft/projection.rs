//! Collocation-based projection of fine charges onto coarse stencils.
//!
//! For a unit charge at a fine bin, the weights on the surrounding coarse
//! points are the least-squares solution that reproduces the charge's field
//! at test points on a ring around it. Interpolation is the transpose.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::layout::CoarseLayout;
use crate::error::{Error, Result};
use crate::field::VectorKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Match `|E|` at each test point (one row per point).
    Magnitude,
    /// Match both field components (two rows per point).
    Components,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    pub test_points: usize,
    /// Ring radius in coarse pitches.
    pub ring_radius: f64,
    /// Stencil half-width in coarse points (1 gives 3×3).
    pub stencil_radius: usize,
    pub matching: Matching,
    /// Highest multipole order pinned to the point source's moments by
    /// heavily weighted rows: 0 none, 1 charge and dipole, 2 also quadrupole.
    pub moment_order: usize,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            test_points: 32,
            ring_radius: 4.0,
            stencil_radius: 2,
            matching: Matching::Components,
            moment_order: 0,
        }
    }
}

const MOMENT_WEIGHT: f64 = 1e3;
const SV_CUTOFF: f64 = 1e-10;

/// Per-axis stencil class: intra-cell offset plus the clipped coarse range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct AxisClass {
    off: usize,
    lo: isize,
    hi: isize,
}

#[derive(Debug, Clone)]
pub struct Stencil {
    /// Coarse offsets relative to the bin's own coarse cell.
    pub lo: (isize, isize),
    pub hi: (isize, isize),
    /// Row-major over `(b, a)` for `b in lo.1..=hi.1`, `a in lo.0..=hi.0`.
    pub weights: Vec<f64>,
    /// Relative collocation residual at the test points.
    pub residual: f64,
}

impl Stencil {
    pub fn iter(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let nx = (self.hi.0 - self.lo.0 + 1) as usize;
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.lo.0 + (k % nx) as isize, self.lo.1 + (k / nx) as isize, w))
    }
}

/// Projection matrix `M` stored by stencil class.
#[derive(Debug, Clone)]
pub struct ProjectionStencil {
    pub layout: CoarseLayout,
    pub params: ProjectionParams,
    xclass: Vec<usize>,
    yclass: Vec<usize>,
    n_yclass: usize,
    pub stencils: Vec<Stencil>,
}

fn axis_classes(n_fine: usize, c: usize, m: usize, r: isize) -> (Vec<usize>, Vec<AxisClass>) {
    let mut ids: HashMap<AxisClass, usize> = HashMap::new();
    let mut list = Vec::new();
    let mut map = Vec::with_capacity(n_fine);
    for i in 0..n_fine {
        let cell = (i / c) as isize;
        let k = AxisClass { off: i % c, lo: (-r).max(-cell), hi: r.min(m as isize - 1 - cell) };
        let id = *ids.entry(k).or_insert_with(|| {
            list.push(k);
            list.len() - 1
        });
        map.push(id);
    }
    (map, list)
}

fn solve_stencil(lay: &CoarseLayout, p: &ProjectionParams, cx: AxisClass, cy: AxisClass) -> Result<Stencil> {
    let (bw, bh) = (lay.spec.bin_w, lay.spec.bin_h);
    let (px, py) = (lay.pitch_x(), lay.pitch_y());
    let half = (lay.c / 2) as f64;
    // Source position relative to its coarse point.
    let sx = (cx.off as f64 - half) * bw;
    let sy = (cy.off as f64 - half) * bh;
    let pts: Vec<(f64, f64)> =
        (cy.lo..=cy.hi).flat_map(|b| (cx.lo..=cx.hi).map(move |a| (a as f64 * px, b as f64 * py))).collect();
    let n = pts.len();

    let per = if p.matching == Matching::Components { 2 } else { 1 };
    // Boundary-clipped stencils cannot carry moments beyond their extent.
    let span = (cx.hi - cx.lo).min(cy.hi - cy.lo) as usize;
    let order = p.moment_order.min(span) as i32;
    let exps: Vec<(i32, i32)> = (0..=order).flat_map(|o| (0..=o).map(move |k| (o - k, k))).collect();
    let n_moment = exps.len();
    let rows = per * p.test_points + n_moment;
    if p.test_points * per < n {
        return Err(Error::invalid(format!("{} test points cannot determine {n} weights", p.test_points)));
    }
    let mut a = DMatrix::<f64>::zeros(rows, n);
    let mut rhs = DVector::<f64>::zeros(rows);
    for t in 0..p.test_points {
        let th = 2.0 * PI * (t as f64 + 0.5) / p.test_points as f64;
        let tx = sx + p.ring_radius * px * th.cos();
        let ty = sy + p.ring_radius * py * th.sin();
        let (ex, ey) = VectorKernel::eval(1.0, tx - sx, ty - sy);
        let scale = 1.0 / ex.hypot(ey);
        for (j, &(gx, gy)) in pts.iter().enumerate() {
            let (hx, hy) = VectorKernel::eval(1.0, tx - gx, ty - gy);
            match p.matching {
                Matching::Components => {
                    a[(2 * t, j)] = hx * scale;
                    a[(2 * t + 1, j)] = hy * scale;
                }
                Matching::Magnitude => a[(t, j)] = hx.hypot(hy) * scale,
            }
        }
        match p.matching {
            Matching::Components => {
                rhs[2 * t] = ex * scale;
                rhs[2 * t + 1] = ey * scale;
            }
            Matching::Magnitude => rhs[t] = 1.0,
        }
    }
    let r0 = per * p.test_points;
    for (k, &(ex, ey)) in exps.iter().enumerate() {
        for (j, &(gx, gy)) in pts.iter().enumerate() {
            a[(r0 + k, j)] = MOMENT_WEIGHT * ((gx - sx) / px).powi(ex) * ((gy - sy) / py).powi(ey);
        }
    }
    rhs[r0] = MOMENT_WEIGHT;

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = SV_CUTOFF * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < n {
        let smin = svd.singular_values.min();
        return Err(Error::Numerical(format!(
            "projection stencil rank {rank} < {n} (condition {:.3e})",
            smax / smin.max(f64::MIN_POSITIVE)
        )));
    }
    let wts = svd.solve(&rhs, cutoff).map_err(|e| Error::Numerical(e.to_string()))?;

    let m = per * p.test_points;
    let fit = &a * &wts;
    let res = (fit.rows(0, m) - rhs.rows(0, m)).norm() / rhs.rows(0, m).norm();
    Ok(Stencil { lo: (cx.lo, cy.lo), hi: (cx.hi, cy.hi), weights: wts.iter().copied().collect(), residual: res })
}

pub fn build_projection(layout: &CoarseLayout, params: ProjectionParams) -> Result<ProjectionStencil> {
    let r = params.stencil_radius as isize;
    let (xclass, xl) = axis_classes(layout.spec.nx, layout.c, layout.mx, r);
    let (yclass, yl) = axis_classes(layout.spec.ny, layout.c, layout.my, r);
    let mut stencils = Vec::with_capacity(xl.len() * yl.len());
    for &cx in &xl {
        for &cy in &yl {
            stencils.push(solve_stencil(layout, &params, cx, cy)?);
        }
    }
    Ok(ProjectionStencil { layout: *layout, params, xclass, yclass, n_yclass: yl.len(), stencils })
}

impl ProjectionStencil {
    /// Stencil used by fine bin `(ix, iy)`.
    pub fn stencil(&self, ix: usize, iy: usize) -> &Stencil {
        &self.stencils[self.xclass[ix] * self.n_yclass + self.yclass[iy]]
    }

    pub fn max_residual(&self) -> f64 {
        self.stencils.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Largest residual over unclipped stencils, i.e. bins at least the
    /// stencil radius away from the coarse-grid edge.
    pub fn interior_residual(&self) -> f64 {
        let r = self.params.stencil_radius as isize;
        self.stencils.iter().filter(|s| s.lo == (-r, -r) && s.hi == (r, r)).map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Calls `f(coarse x, coarse y, weight)` for each stencil entry of a bin.
    #[inline]
    pub fn for_each(&self, ix: usize, iy: usize, mut f: impl FnMut(usize, usize, f64)) {
        let c = self.layout.c;
        let (gx, gy) = ((ix / c) as isize, (iy / c) as isize);
        for (a, b, w) in self.stencil(ix, iy).iter() {
            f((gx + a) as usize, (gy + b) as usize, w);
        }
    }
}

/// Coarse charges `q_g = M q_s`, row-major `my × mx`.
pub fn project_charges(q: &[f64], st: &ProjectionStencil) -> Vec<f64> {
    let lay = &st.layout;
    let mut out = vec![0.0; lay.mx * lay.my];
    for iy in 0..lay.spec.ny {
        for ix in 0..lay.spec.nx {
            let v = q[iy * lay.spec.nx + ix];
            if v != 0.0 {
                st.for_each(ix, iy, |gx, gy, w| out[gy * lay.mx + gx] += w * v);
            }
        }
    }
    out
}

/// Fine values `Mᵀ f_g` for a coarse field component pair.
pub fn interpolate(fx: &[f64], fy: &[f64], st: &ProjectionStencil) -> (Vec<f64>, Vec<f64>) {
    let lay = &st.layout;
    let n = lay.spec.bins();
    let (mut ox, mut oy) = (vec![0.0; n], vec![0.0; n]);
    for iy in 0..lay.spec.ny {
        for ix in 0..lay.spec.nx {
            let (mut sx, mut sy) = (0.0, 0.0);
            st.for_each(ix, iy, |gx, gy, w| {
                sx += w * fx[gy * lay.mx + gx];
                sy += w * fy[gy * lay.mx + gx];
            });
            ox[iy * lay.spec.nx + ix] = sx;
            oy[iy * lay.spec.nx + ix] = sy;
        }
    }
    (ox, oy)
}
