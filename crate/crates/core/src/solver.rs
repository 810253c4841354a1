//! Interchangeable field solvers behind one interface.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::accfft::{coarsen, AccFftSolver, AccStats, ProjectionParams, ShortRangeMode};
use crate::density::{ChargeGrid, GridSpec};
use crate::error::{Error, Result};
use crate::field::{build_kernel, direct_grid_field, FieldMap, FineFftSolver, Padding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Direct,
    FineFft,
    AccFft,
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverMode::Direct),
            "fine-fft" => Ok(SolverMode::FineFft),
            "accfft" => Ok(SolverMode::AccFft),
            _ => Err(Error::invalid(format!("unknown solver {s:?} (direct, fine-fft, accfft)"))),
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::Direct => "direct",
            SolverMode::FineFft => "fine-fft",
            SolverMode::AccFft => "accfft",
        })
    }
}

impl FromStr for ShortRangeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fft" => Ok(ShortRangeMode::Fft),
            "direct" => Ok(ShortRangeMode::Direct),
            _ => Err(Error::invalid(format!("unknown short-range mode {s:?} (fft, direct)"))),
        }
    }
}

/// Default window side: a near zone of about four coarse pitches around each
/// owned bin (`w = 16c`), capped by the grid.
pub fn default_window(spec: &GridSpec, alpha: usize) -> usize {
    let c = crate::accfft::isqrt(alpha).unwrap_or(2);
    let mut w = (16 * c).next_power_of_two();
    while w > 2 && (!spec.nx.is_multiple_of(w) || !spec.ny.is_multiple_of(w)) {
        w /= 2;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub alpha: usize,
    /// Window side in fine bins; `None` picks [`default_window`].
    pub window: Option<usize>,
    pub short_range: ShortRangeMode,
    pub k_e: f64,
    pub padding: Padding,
    pub projection: ProjectionParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::AccFft,
            alpha: 16,
            window: None,
            short_range: ShortRangeMode::Fft,
            k_e: 1.0,
            padding: Padding::Zero,
            projection: ProjectionParams::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub evaluations: u64,
    /// Fine-grid transforms of the baseline solver.
    pub fine_ffts: u64,
    pub acc: Option<AccStats>,
}

impl SolverStats {
    pub fn total_ffts(&self) -> u64 {
        self.fine_ffts
            + self
                .acc
                .as_ref()
                .map_or(0, |a| a.aligned_window_ffts + a.shifted_window_ffts + a.patch_ffts + a.coarse_ffts)
    }
}

pub enum FieldSolver {
    Direct { k_e: f64, evaluations: u64 },
    FineFft { solver: Box<FineFftSolver>, evaluations: u64 },
    AccFft(Box<AccFftSolver>),
}

impl FieldSolver {
    pub fn new(spec: &GridSpec, cfg: &SolverConfig) -> Result<Self> {
        Ok(match cfg.mode {
            SolverMode::Direct => FieldSolver::Direct { k_e: cfg.k_e, evaluations: 0 },
            SolverMode::FineFft => FieldSolver::FineFft {
                solver: Box::new(FineFftSolver::new(spec, build_kernel(spec, cfg.k_e), cfg.padding)),
                evaluations: 0,
            },
            SolverMode::AccFft => {
                let w = cfg.window.unwrap_or_else(|| default_window(spec, cfg.alpha));
                let layout = coarsen(spec, cfg.alpha, w)?;
                FieldSolver::AccFft(Box::new(AccFftSolver::new(layout, cfg.k_e, cfg.projection, cfg.short_range)?))
            }
        })
    }

    pub fn solve(&mut self, cg: &ChargeGrid) -> FieldMap {
        match self {
            FieldSolver::Direct { k_e, evaluations } => {
                *evaluations += 1;
                direct_grid_field(cg, *k_e)
            }
            FieldSolver::FineFft { solver, evaluations } => {
                *evaluations += 1;
                solver.solve(cg)
            }
            FieldSolver::AccFft(s) => s.solve(cg),
        }
    }

    pub fn stats(&self) -> SolverStats {
        match self {
            FieldSolver::Direct { evaluations, .. } => SolverStats { evaluations: *evaluations, ..Default::default() },
            FieldSolver::FineFft { evaluations, .. } => {
                SolverStats { evaluations: *evaluations, fine_ffts: 2 * *evaluations, acc: None }
            }
            FieldSolver::AccFft(s) => {
                SolverStats { evaluations: s.stats.evaluations, fine_ffts: 0, acc: Some(s.stats.clone()) }
            }
        }
    }
}
