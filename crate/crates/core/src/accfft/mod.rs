//! Accelerated field solver.
//!
//! The field is split into a long-range part, computed on a coarse grid
//! (project → FFT convolution → interpolate), and a short-range correction
//! computed per window: the exact fine-grid field of the window's charges
//! minus the coarse path's version of the same interaction. Because the
//! subtraction uses the identical projection, every pair inside a window ends
//! up with the exact fine kernel; pairs in different windows keep the coarse
//! approximation.

mod layout;
mod projection;
mod window;

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

pub use layout::{coarsen, isqrt, CoarseLayout};
pub use projection::{
    build_projection, interpolate, project_charges, Matching, ProjectionParams, ProjectionStencil, Stencil,
};
pub use window::{build_window_plan, shifted_fft_count, Family, Window, WindowPlan};

use crate::density::ChargeGrid;
use crate::error::Result;
use crate::fft::ConvPlan;
use crate::field::{FieldMap, VectorKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortRangeMode {
    /// Windowed local FFTs.
    #[default]
    Fft,
    /// Dense pairwise sums inside each window.
    Direct,
}

/// Transform counts and phase timings accumulated over evaluations. One
/// "FFT" here is one 2-D transform, forward or inverse.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AccStats {
    pub evaluations: u64,
    pub aligned_window_ffts: u64,
    pub shifted_window_ffts: u64,
    pub patch_ffts: u64,
    pub coarse_ffts: u64,
    pub project_secs: f64,
    pub coarse_secs: f64,
    pub interpolate_secs: f64,
    pub short_range_secs: f64,
}

impl AccStats {
    pub fn total_secs(&self) -> f64 {
        self.project_secs + self.coarse_secs + self.interpolate_secs + self.short_range_secs
    }
}

/// Smallest `2^a·3^b` that is at least `n`.
fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p3 = 1;
    while p3 < best {
        let mut v = p3;
        while v < n {
            v *= 2;
        }
        best = best.min(v);
        p3 *= 3;
    }
    best
}

/// Plan geometry for inputs at `[0, span)` and outputs at `[lo, hi)`.
fn conv_dims(span: usize, lo: usize, hi: usize) -> (usize, isize) {
    (fast_len(hi - lo + span - 1), lo as isize - (span as isize - 1))
}

#[derive(Debug, Clone, Copy)]
struct WindowJob {
    win: Window,
    fine_plan: usize,
    patch_plan: usize,
    /// Lower corner of the coarse patch holding the window's projected charges.
    patch_lo: (usize, usize),
}

#[derive(Default)]
struct PlanCache {
    keys: HashMap<(usize, isize, usize, isize), usize>,
    plans: Vec<ConvPlan>,
}

impl PlanCache {
    fn get(&mut self, x: (usize, isize), y: (usize, isize), kernel: VectorKernel) -> usize {
        let key = (x.0, x.1, y.0, y.1);
        if let Some(&k) = self.keys.get(&key) {
            return k;
        }
        self.plans.push(ConvPlan::new(x.0, y.0, (x.1, y.1), |i, j| kernel.at(i, j)));
        self.keys.insert(key, self.plans.len() - 1);
        self.plans.len() - 1
    }
}

pub struct AccFftSolver {
    pub layout: CoarseLayout,
    pub stencil: ProjectionStencil,
    pub plan: WindowPlan,
    pub mode: ShortRangeMode,
    pub stats: AccStats,
    coarse: ConvPlan,
    coarse_buf: Vec<Complex64>,
    fine_plans: Vec<ConvPlan>,
    patch_plans: Vec<ConvPlan>,
    jobs: Vec<WindowJob>,
    /// Fine kernel for lags in `(-w, w)` per axis, used by the direct mode.
    lag_table: Vec<(f64, f64)>,
}

impl AccFftSolver {
    pub fn new(layout: CoarseLayout, k_e: f64, params: ProjectionParams, mode: ShortRangeMode) -> Result<Self> {
        let stencil = build_projection(&layout, params)?;
        let plan = build_window_plan(&layout);
        let fine_k = VectorKernel { k_e, dx: layout.spec.bin_w, dy: layout.spec.bin_h };
        let coarse_k = VectorKernel { k_e, dx: layout.pitch_x(), dy: layout.pitch_y() };
        let (mx, my) = (layout.mx, layout.my);
        let coarse = ConvPlan::new(2 * mx, 2 * my, (-(mx as isize), -(my as isize)), |i, j| coarse_k.at(i, j));

        let (w, c) = (layout.w, layout.c);
        let r = params.stencil_radius;
        let mut fine = PlanCache::default();
        let mut patch = PlanCache::default();
        let mut jobs = Vec::with_capacity(plan.windows.len());
        for win in &plan.windows {
            let (ox, oy) = win.origin;
            let fx = conv_dims(w, win.own_lo.0 - ox, win.own_hi.0 - ox);
            let fy = conv_dims(w, win.own_lo.1 - oy, win.own_hi.1 - oy);
            let fine_plan = fine.get(fx, fy, fine_k);

            let crange = |lo: usize, hi: usize, m: usize| ((lo / c).saturating_sub(r), ((hi - 1) / c + r + 1).min(m));
            let (plx, phx) = crange(ox, ox + w, mx);
            let (ply, phy) = crange(oy, oy + w, my);
            let (tlx, thx) = crange(win.own_lo.0, win.own_hi.0, mx);
            let (tly, thy) = crange(win.own_lo.1, win.own_hi.1, my);
            let px = conv_dims(phx - plx, tlx - plx, thx - plx);
            let py = conv_dims(phy - ply, tly - ply, thy - ply);
            let patch_plan = patch.get(px, py, coarse_k);
            jobs.push(WindowJob { win: *win, fine_plan, patch_plan, patch_lo: (plx, ply) });
        }

        let n = 2 * w - 1;
        let mut lag_table = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                lag_table.push(fine_k.at(i as isize - (w as isize - 1), j as isize - (w as isize - 1)));
            }
        }
        let coarse_buf = vec![Complex64::default(); coarse.len()];
        log::debug!(
            "accfft: {}x{} coarse, {} windows, {} fine plans, {} patch plans, residual {:.2e}",
            mx,
            my,
            jobs.len(),
            fine.plans.len(),
            patch.plans.len(),
            stencil.max_residual()
        );
        Ok(AccFftSolver {
            layout,
            stencil,
            plan,
            mode,
            stats: AccStats::default(),
            coarse,
            coarse_buf,
            fine_plans: fine.plans,
            patch_plans: patch.plans,
            jobs,
            lag_table,
        })
    }

    /// Long-range part `Mᵀ H M q` on its own.
    pub fn long_range(&mut self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t = Instant::now();
        let qg = project_charges(q, &self.stencil);
        self.stats.project_secs += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (fx, fy) = self.coarse_convolve(&qg);
        self.stats.coarse_secs += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let out = interpolate(&fx, &fy, &self.stencil);
        self.stats.interpolate_secs += t.elapsed().as_secs_f64();
        out
    }

    /// Per-coarse-cell projected charges: for each source cell, the summed
    /// stencil contributions of its fine bins, `(2r+1)²` values per cell.
    fn cell_projection(&self, q: &[f64]) -> Vec<f64> {
        let lay = &self.layout;
        let r = self.stencil.params.stencil_radius as isize;
        let side = (2 * r + 1) as usize;
        let taps = side * side;
        let mut out = vec![0.0; lay.mx * lay.my * taps];
        let (c, nx) = (lay.c, lay.spec.nx);
        for iy in 0..lay.spec.ny {
            for ix in 0..nx {
                let v = q[iy * nx + ix];
                if v == 0.0 {
                    continue;
                }
                let base = ((iy / c) * lay.mx + ix / c) * taps;
                for (a, b, wt) in self.stencil.stencil(ix, iy).iter() {
                    out[base + ((b + r) as usize) * side + (a + r) as usize] += wt * v;
                }
            }
        }
        out
    }

    fn coarse_convolve(&mut self, qg: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mx, my) = (self.layout.mx, self.layout.my);
        let px = self.coarse.px;
        self.coarse_buf.fill(Complex64::default());
        for gy in 0..my {
            for gx in 0..mx {
                self.coarse_buf[gy * px + gx].re = qg[gy * mx + gx];
            }
        }
        self.coarse.apply(&mut self.coarse_buf);
        self.stats.coarse_ffts += 2;
        let mut fx = vec![0.0; mx * my];
        let mut fy = vec![0.0; mx * my];
        for gy in 0..my {
            for gx in 0..mx {
                let v = self.coarse_buf[gy * px + gx];
                fx[gy * mx + gx] = v.re;
                fy[gy * mx + gx] = v.im;
            }
        }
        (fx, fy)
    }

    fn run_windows(
        &mut self,
        q: &[f64],
        mode: ShortRangeMode,
        cell_proj: Option<&[f64]>,
        global: Option<(&[f64], &[f64])>,
    ) -> (Vec<f64>, Vec<f64>) {
        let lay = self.layout;
        let nx = lay.spec.nx;
        let ctx = WindowCtx { q, lay, stencil: &self.stencil, lag_table: &self.lag_table, cell_proj, global };
        let jobs = &self.jobs;
        let results: Vec<WindowResult> = jobs
            .par_iter()
            .map_init(
                || (self.fine_plans.clone(), self.patch_plans.clone()),
                |(fp, pp), job| ctx.run(job, mode, &mut fp[job.fine_plan], &mut pp[job.patch_plan]),
            )
            .collect();

        let n = lay.spec.bins();
        let (mut sx, mut sy) = (vec![0.0; n], vec![0.0; n]);
        for (job, res) in jobs.iter().zip(results) {
            let Some((vals, transformed)) = res else { continue };
            if transformed {
                if mode == ShortRangeMode::Fft {
                    if job.win.family.is_shifted() {
                        self.stats.shifted_window_ffts += 2;
                    } else {
                        self.stats.aligned_window_ffts += 2;
                    }
                }
                self.stats.patch_ffts += 2;
            }
            let w = &job.win;
            let mut k = 0;
            for iy in w.own_lo.1..w.own_hi.1 {
                for ix in w.own_lo.0..w.own_hi.0 {
                    sx[iy * nx + ix] = vals[k].0;
                    sy[iy * nx + ix] = vals[k].1;
                    k += 1;
                }
            }
        }
        (sx, sy)
    }

    /// Short-range correction at every fine bin: for each window, the exact
    /// fine field of its charges minus their coarse-path field, at the bins
    /// the window owns. Windows without charge contribute zero and perform no
    /// transforms.
    pub fn short_range(&mut self, q: &[f64], mode: ShortRangeMode) -> (Vec<f64>, Vec<f64>) {
        let t = Instant::now();
        let out = self.run_windows(q, mode, None, None);
        self.stats.short_range_secs += t.elapsed().as_secs_f64();
        out
    }

    /// Full field. The per-cell projection is shared between the global
    /// coarse grid and the window patches, and each owned bin interpolates the
    /// difference of the global and patch coarse fields once, so the result
    /// equals `long_range + short_range` without evaluating them separately.
    pub fn solve_with(&mut self, cg: &ChargeGrid, mode: ShortRangeMode) -> FieldMap {
        let lay = self.layout;
        let t = Instant::now();
        let aligned = lay.w.is_multiple_of(2 * lay.c);
        let cell_proj = aligned.then(|| self.cell_projection(&cg.q));
        let qg = match &cell_proj {
            Some(cp) => {
                let r = self.stencil.params.stencil_radius as isize;
                let side = 2 * r + 1;
                let taps = (side * side) as usize;
                let mut qg = vec![0.0; lay.mx * lay.my];
                for ky in 0..lay.my as isize {
                    for kx in 0..lay.mx as isize {
                        let base = (ky as usize * lay.mx + kx as usize) * taps;
                        for s in 0..taps {
                            let v = cp[base + s];
                            if v != 0.0 {
                                let gx = kx + (s as isize % side) - r;
                                let gy = ky + (s as isize / side) - r;
                                qg[gy as usize * lay.mx + gx as usize] += v;
                            }
                        }
                    }
                }
                qg
            }
            None => project_charges(&cg.q, &self.stencil),
        };
        self.stats.project_secs += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (gx, gy) = self.coarse_convolve(&qg);
        self.stats.coarse_secs += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (xi_x, xi_y) = self.run_windows(&cg.q, mode, cell_proj.as_deref(), Some((&gx, &gy)));
        self.stats.short_range_secs += t.elapsed().as_secs_f64();
        self.stats.evaluations += 1;
        FieldMap { xi_x, xi_y, spec: cg.spec }
    }

    pub fn solve(&mut self, cg: &ChargeGrid) -> FieldMap {
        self.solve_with(cg, self.mode)
    }
}

/// Field at a window's owned bins and whether its transforms ran; `None`
/// for a window without charge.
type WindowResult = Option<(Vec<(f64, f64)>, bool)>;

struct WindowCtx<'a> {
    q: &'a [f64],
    lay: CoarseLayout,
    stencil: &'a ProjectionStencil,
    lag_table: &'a [(f64, f64)],
    /// Per-cell projections; only valid when windows align with coarse cells.
    cell_proj: Option<&'a [f64]>,
    /// Global coarse field; when present the output is the full field.
    global: Option<(&'a [f64], &'a [f64])>,
}

impl WindowCtx<'_> {
    /// Values for the window's owned bins in row-major order, plus whether
    /// transforms were run. `None` when there is nothing to contribute.
    fn run(&self, job: &WindowJob, mode: ShortRangeMode, fine: &mut ConvPlan, patch: &mut ConvPlan) -> WindowResult {
        let lay = &self.lay;
        let (w, nx, c, mx, q) = (lay.w, lay.spec.nx, lay.c, lay.mx, self.q);
        let (ox, oy) = job.win.origin;
        let win = &job.win;
        let charged: Vec<(usize, usize, f64)> = (oy..oy + w)
            .flat_map(|iy| (ox..ox + w).map(move |ix| (ix, iy)))
            .filter_map(|(ix, iy)| {
                let v = q[iy * nx + ix];
                (v != 0.0).then_some((ix, iy, v))
            })
            .collect();

        if charged.is_empty() {
            let (gx, gy) = self.global?;
            let mut out = Vec::with_capacity(win.owned_count());
            for iy in win.own_lo.1..win.own_hi.1 {
                for ix in win.own_lo.0..win.own_hi.0 {
                    let (mut sx, mut sy) = (0.0, 0.0);
                    self.stencil.for_each(ix, iy, |x, y, wt| {
                        sx += wt * gx[y * mx + x];
                        sy += wt * gy[y * mx + x];
                    });
                    out.push((sx, sy));
                }
            }
            return Some((out, false));
        }

        // Coarse-path interaction of the window's own charges.
        let (plx, ply) = job.patch_lo;
        let ppx = patch.px;
        let mut pbuf = vec![Complex64::default(); patch.len()];
        match self.cell_proj {
            Some(cp) => {
                let r = self.stencil.params.stencil_radius as isize;
                let side = 2 * r + 1;
                let taps = (side * side) as usize;
                for ky in oy / c..(oy + w) / c {
                    for kx in ox / c..(ox + w) / c {
                        let base = (ky * mx + kx) * taps;
                        for s in 0..taps {
                            let v = cp[base + s];
                            if v != 0.0 {
                                let gx = kx as isize + (s as isize % side) - r - plx as isize;
                                let gy = ky as isize + (s as isize / side) - r - ply as isize;
                                pbuf[gy as usize * ppx + gx as usize].re += v;
                            }
                        }
                    }
                }
            }
            None => {
                for &(ix, iy, v) in &charged {
                    self.stencil.for_each(ix, iy, |gx, gy, wt| pbuf[(gy - ply) * ppx + (gx - plx)].re += wt * v);
                }
            }
        }
        patch.apply(&mut pbuf);
        // Coarse field to interpolate at owned bins: either minus the patch
        // field (correction only) or global minus patch (full field).
        if let Some((gx, gy)) = self.global {
            for iy in 0..patch.py {
                let y = ply + iy;
                if y >= lay.my {
                    break;
                }
                for ix in 0..ppx {
                    let x = plx + ix;
                    if x >= mx {
                        break;
                    }
                    let v = &mut pbuf[iy * ppx + ix];
                    *v = Complex64::new(gx[y * mx + x] - v.re, gy[y * mx + x] - v.im);
                }
            }
        } else {
            for v in pbuf.iter_mut() {
                *v = -*v;
            }
        }

        let fine_out: Option<Vec<Complex64>> = match mode {
            ShortRangeMode::Fft => {
                let mut fbuf = vec![Complex64::default(); fine.len()];
                for &(ix, iy, v) in &charged {
                    fbuf[(iy - oy) * fine.px + (ix - ox)].re = v;
                }
                fine.apply(&mut fbuf);
                Some(fbuf)
            }
            ShortRangeMode::Direct => None,
        };

        let mut out = Vec::with_capacity(win.owned_count());
        let n = 2 * w - 1;
        for iy in win.own_lo.1..win.own_hi.1 {
            for ix in win.own_lo.0..win.own_hi.0 {
                let (fx, fy) = match &fine_out {
                    Some(b) => {
                        let v = b[(iy - oy) * fine.px + (ix - ox)];
                        (v.re, v.im)
                    }
                    None => {
                        let (mut sx, mut sy) = (0.0, 0.0);
                        for &(jx, jy, v) in &charged {
                            let (hx, hy) = self.lag_table[(iy + w - 1 - jy) * n + (ix + w - 1 - jx)];
                            sx += v * hx;
                            sy += v * hy;
                        }
                        (sx, sy)
                    }
                };
                let (mut cx, mut cy) = (fx, fy);
                self.stencil.for_each(ix, iy, |gx, gy, wt| {
                    let v = pbuf[(gy - ply) * ppx + (gx - plx)];
                    cx += wt * v.re;
                    cy += wt * v.im;
                });
                out.push((cx, cy));
            }
        }
        Some((out, true))
    }
}
