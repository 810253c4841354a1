//! Accuracy and timing comparison of the field solvers on random charges.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::accfft::ShortRangeMode;
use crate::density::{build_grid, ChargeGrid, GridSpec};
use crate::error::Result;
use crate::field::{direct_grid_field, FieldMap};
use crate::netlist::Region;
use crate::solver::{FieldSolver, SolverConfig, SolverMode};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub grid: usize,
    pub alpha: usize,
    pub window: Option<usize>,
    pub charges: usize,
    pub seed: u64,
    pub modes: Vec<SolverMode>,
    pub short_range: ShortRangeMode,
    /// Timed evaluations per mode; the fastest is reported.
    pub repeats: usize,
    /// The direct oracle is skipped above this many bins.
    pub oracle_limit: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid: 64,
            alpha: 4,
            window: None,
            charges: 200,
            seed: 1,
            modes: vec![SolverMode::Direct, SolverMode::FineFft, SolverMode::AccFft],
            short_range: ShortRangeMode::Fft,
            repeats: 1,
            oracle_limit: 256 * 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub mode: SolverMode,
    pub secs: f64,
    /// Transforms per evaluation.
    pub ffts: u64,
    pub aligned_window_ffts: u64,
    pub shifted_window_ffts: u64,
    pub rms_error: Option<f64>,
    pub max_error: Option<f64>,
    /// Fraction of field time in the short-range correction.
    pub short_range_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub grid: usize,
    pub alpha: usize,
    pub window: Option<usize>,
    pub charges: usize,
    pub short_range: ShortRangeMode,
    pub rows: Vec<BenchRow>,
}

/// Unit-pitch grid with `count` random positive charges on distinct bins.
/// A count at or above the bin total fills every bin.
pub fn random_charges(spec: &GridSpec, count: usize, seed: u64) -> ChargeGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cg = ChargeGrid::zeros(*spec);
    let n = spec.bins();
    if count >= n {
        cg.q.iter_mut().for_each(|q| *q = rng.gen_range(0.05..1.0));
    } else {
        for b in rand::seq::index::sample(&mut rng, n, count) {
            cg.q[b] = rng.gen_range(0.05..1.0);
        }
    }
    cg
}

/// `(rms, max)` relative error of `f` against `reference`: the RMS is
/// normalized by the RMS reference magnitude, the max by the largest one.
pub fn field_error(f: &FieldMap, reference: &FieldMap) -> (f64, f64) {
    let (mut num, mut den, mut worst, mut peak) = (0.0, 0.0, 0.0f64, 0.0f64);
    for b in 0..reference.xi_x.len() {
        let e = (f.xi_x[b] - reference.xi_x[b]).hypot(f.xi_y[b] - reference.xi_y[b]);
        let m = reference.xi_x[b].hypot(reference.xi_y[b]);
        num += e * e;
        den += m * m;
        worst = worst.max(e);
        peak = peak.max(m);
    }
    ((num / den.max(f64::MIN_POSITIVE)).sqrt(), worst / peak.max(f64::MIN_POSITIVE))
}

pub fn unit_grid(n: usize) -> Result<GridSpec> {
    build_grid(Region::new(0.0, 0.0, n as f64, n as f64, 1.0), n, n)
}

pub fn field_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let spec = unit_grid(cfg.grid)?;
    let cg = random_charges(&spec, cfg.charges, cfg.seed);
    let oracle = (spec.bins() <= cfg.oracle_limit).then(|| direct_grid_field(&cg, 1.0));
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        if mode == SolverMode::Direct && oracle.is_none() {
            log::warn!("skipping direct mode above {} bins", cfg.oracle_limit);
            continue;
        }
        let sc = SolverConfig {
            mode,
            alpha: cfg.alpha,
            window: cfg.window,
            short_range: cfg.short_range,
            ..Default::default()
        };
        let mut solver = FieldSolver::new(&spec, &sc)?;
        let mut best = f64::INFINITY;
        let mut field = None;
        for _ in 0..cfg.repeats.max(1) {
            let t = Instant::now();
            let f = solver.solve(&cg);
            best = best.min(t.elapsed().as_secs_f64());
            field = Some(f);
        }
        let field = field.expect("at least one evaluation");
        let stats = solver.stats();
        let evals = stats.evaluations.max(1);
        let (rms, max) = match &oracle {
            Some(o) => {
                let (r, m) = field_error(&field, o);
                (Some(r), Some(m))
            }
            None => (None, None),
        };
        let acc = stats.acc.as_ref();
        rows.push(BenchRow {
            mode,
            secs: best,
            ffts: stats.total_ffts() / evals,
            aligned_window_ffts: acc.map_or(0, |a| a.aligned_window_ffts / evals),
            shifted_window_ffts: acc.map_or(0, |a| a.shifted_window_ffts / evals),
            rms_error: rms,
            max_error: max,
            short_range_share: acc.map(|a| a.short_range_secs / a.total_secs().max(f64::MIN_POSITIVE)),
        });
    }
    Ok(BenchReport {
        grid: cfg.grid,
        alpha: cfg.alpha,
        window: cfg.window,
        charges: cfg.charges,
        short_range: cfg.short_range,
        rows,
    })
}
