//! Deterministic synthetic netlists for desk-scale experiments.
//!
//! Cell widths are uniform integers in [1, 8] sites and every cell is one row
//! tall. Nets have a uniform degree in [2, 6] over distinct, uniformly chosen
//! cells; pin offsets are random multiples of half a site inside the cell.
//! Initial positions are scattered in a small box around the region center.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netlist::{Cell, CellKind, Net, Netlist, Pin, Point, Region};

pub const MAX_UTILIZATION: f64 = 0.8;
const MEAN_WIDTH: f64 = 4.5;

/// Square region with unit rows sized for roughly `util` utilization.
pub fn default_region(n_cells: usize, util: f64) -> Region {
    let side = (n_cells as f64 * MEAN_WIDTH / util).sqrt().ceil().max(8.0);
    Region::new(0.0, 0.0, side, side, 1.0)
}

pub fn gen_synthetic(n_cells: usize, n_nets: usize, region: Region, seed: u64) -> Result<Netlist> {
    if n_cells < 2 {
        return Err(Error::invalid(format!("need at least 2 cells, got {n_cells}")));
    }
    if !region.is_valid() || region.row_height <= 0.0 {
        return Err(Error::invalid("degenerate region"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = region.row_height;
    let c = region.center();
    let (bx, by) = (0.05 * region.width(), 0.05 * region.height());

    let mut cells = Vec::with_capacity(n_cells);
    for i in 0..n_cells {
        let w = rng.gen_range(1..=8) as f64;
        let x = c.x - 0.5 * w + rng.gen_range(-bx..=bx);
        let y = c.y - 0.5 * h + rng.gen_range(-by..=by);
        cells.push(Cell { name: format!("o{i}"), width: w, height: h, kind: CellKind::Movable, pos: Point::new(x, y) });
    }
    let area: f64 = cells.iter().map(Cell::area).sum();
    if area > MAX_UTILIZATION * region.area() {
        return Err(Error::invalid(format!(
            "cell area {area} exceeds {MAX_UTILIZATION} of region area {}",
            region.area()
        )));
    }

    let mut nets = Vec::with_capacity(n_nets);
    for k in 0..n_nets {
        let degree = rng.gen_range(2..=6).min(n_cells);
        let pins = sample(&mut rng, n_cells, degree)
            .into_iter()
            .map(|cell| {
                let cw = cells[cell].width;
                let dx = 0.5 * rng.gen_range(0..=(2.0 * cw) as u32) as f64;
                let dy = 0.5 * rng.gen_range(0..=(2.0 * h).floor() as u32) as f64;
                Pin { cell, dx, dy }
            })
            .collect();
        nets.push(Net { name: format!("n{k}"), pins });
    }
    Ok(Netlist::new(cells, nets, region))
}
