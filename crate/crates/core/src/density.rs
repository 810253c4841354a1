//! Fine bin grid, exact-overlap density, overflow, fillers and charges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netlist::{Cell, CellKind, Netlist, Point, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bin_w: f64,
    pub bin_h: f64,
    pub region: Region,
}

impl GridSpec {
    pub fn bins(&self) -> usize {
        self.nx * self.ny
    }

    pub fn bin_area(&self) -> f64 {
        self.bin_w * self.bin_h
    }

    /// Geometric mean of the bin sides, used as "one bin" length scale.
    pub fn bin_pitch(&self) -> f64 {
        (self.bin_w * self.bin_h).sqrt()
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn bin_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.region.x0 + (ix as f64 + 0.5) * self.bin_w, self.region.y0 + (iy as f64 + 0.5) * self.bin_h)
    }

    /// Calls `f(bin index, overlap area)` for every bin the rectangle
    /// `[x, x+w) × [y, y+h)` intersects; parts outside the region are dropped.
    pub fn for_each_overlap(&self, x: f64, y: f64, w: f64, h: f64, mut f: impl FnMut(usize, f64)) {
        let r = &self.region;
        let (xl, xh) = (x.max(r.x0), (x + w).min(r.x1));
        let (yl, yh) = (y.max(r.y0), (y + h).min(r.y1));
        if xl >= xh || yl >= yh {
            return;
        }
        let span = |lo: f64, hi: f64, o: f64, b: f64, n: usize| {
            let a = (((lo - o) / b).floor().max(0.0) as usize).min(n - 1);
            let z = (((hi - o) / b).ceil().max(1.0) as usize).min(n);
            (a, z)
        };
        let (ix0, ix1) = span(xl, xh, r.x0, self.bin_w, self.nx);
        let (iy0, iy1) = span(yl, yh, r.y0, self.bin_h, self.ny);
        for iy in iy0..iy1 {
            let by = r.y0 + iy as f64 * self.bin_h;
            let oy = yh.min(by + self.bin_h) - yl.max(by);
            if oy <= 0.0 {
                continue;
            }
            for ix in ix0..ix1 {
                let bx = r.x0 + ix as f64 * self.bin_w;
                let ox = xh.min(bx + self.bin_w) - xl.max(bx);
                if ox > 0.0 {
                    f(iy * self.nx + ix, ox * oy);
                }
            }
        }
    }
}

impl GridSpec {
    /// Like [`GridSpec::for_each_overlap`], but dimensions below `√2` bins
    /// are stretched to that size around the same center and the overlap
    /// scaled down so the total stays the cell's area. Small cells then see
    /// a field that varies smoothly with their position inside a bin.
    pub fn for_each_smoothed(&self, x: f64, y: f64, w: f64, h: f64, mut f: impl FnMut(usize, f64)) {
        let ws = w.max(std::f64::consts::SQRT_2 * self.bin_w);
        let hs = h.max(std::f64::consts::SQRT_2 * self.bin_h);
        let scale = (w * h) / (ws * hs);
        let (xs, ys) = (x + (w - ws) / 2.0, y + (h - hs) / 2.0);
        self.for_each_overlap(xs, ys, ws, hs, |b, a| f(b, a * scale));
    }
}

/// Uniform `nx × ny` bins over `region`; both counts must be powers of two
/// and at least 4.
pub fn build_grid(region: Region, nx: usize, ny: usize) -> Result<GridSpec> {
    for n in [nx, ny] {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::invalid(format!("grid size {n} is not a power of two >= 4")));
        }
    }
    if !region.is_valid() {
        return Err(Error::invalid("degenerate region"));
    }
    Ok(GridSpec { nx, ny, bin_w: region.width() / nx as f64, bin_h: region.height() / ny as f64, region })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    /// Occupied area per bin.
    pub rho: Vec<f64>,
    pub target: f64,
    pub spec: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeGrid {
    /// Area per bin divided by the bin area.
    pub q: Vec<f64>,
    pub spec: GridSpec,
}

impl ChargeGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        ChargeGrid { q: vec![0.0; spec.bins()], spec }
    }
}

pub fn compute_density(cells: &[Cell], pos: &[Point], spec: &GridSpec, target: f64) -> DensityMap {
    let mut rho = vec![0.0; spec.bins()];
    for (c, p) in cells.iter().zip(pos) {
        spec.for_each_overlap(p.x, p.y, c.width, c.height, |b, a| rho[b] += a);
    }
    DensityMap { rho, target, spec: *spec }
}

/// Density with small cells spread over `√2`-bin footprints; this is the
/// map the field is computed from.
pub fn compute_smoothed_density(cells: &[Cell], pos: &[Point], spec: &GridSpec, target: f64) -> DensityMap {
    let mut rho = vec![0.0; spec.bins()];
    for (c, p) in cells.iter().zip(pos) {
        spec.for_each_smoothed(p.x, p.y, c.width, c.height, |b, a| rho[b] += a);
    }
    DensityMap { rho, target, spec: *spec }
}

/// Total area above `target · bin_area`, normalized by `movable_area`.
pub fn compute_overflow(dm: &DensityMap, movable_area: f64) -> f64 {
    if movable_area <= 0.0 {
        return 0.0;
    }
    let cap = dm.target * dm.spec.bin_area();
    dm.rho.iter().map(|&r| (r - cap).max(0.0)).sum::<f64>() / movable_area
}

pub fn to_charges(dm: &DensityMap) -> ChargeGrid {
    let inv = 1.0 / dm.spec.bin_area();
    ChargeGrid { q: dm.rho.iter().map(|r| r * inv).collect(), spec: dm.spec }
}

/// Side of the square filler: mean width of the middle 80% of movable cells.
pub fn filler_side(netlist: &Netlist) -> Option<f64> {
    let mut widths: Vec<f64> = netlist.cells.iter().filter(|c| c.is_movable()).map(|c| c.width).collect();
    if widths.is_empty() {
        return None;
    }
    widths.sort_by(f64::total_cmp);
    let n = widths.len();
    let (lo, hi) = (n / 10, n - n / 10);
    let mid = &widths[lo..hi.max(lo + 1)];
    Some(mid.iter().sum::<f64>() / mid.len() as f64)
}

/// Filler cells bringing total cell area up to `rho_t` of the free area,
/// scattered uniformly over the region.
pub fn insert_fillers(netlist: &Netlist, rho_t: f64, seed: u64) -> Result<Vec<Cell>> {
    if !(rho_t > 0.0 && rho_t <= 1.0) {
        return Err(Error::invalid(format!("target density {rho_t} outside (0, 1]")));
    }
    let r = &netlist.region;
    let free = r.area() - netlist.fixed_area();
    let need = (rho_t * free - netlist.movable_area()).max(0.0);
    let Some(side) = filler_side(netlist) else { return Ok(Vec::new()) };
    let side = side.min(r.width()).min(r.height());
    let count = (need / (side * side)).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|k| Cell {
            name: format!("__filler{k}"),
            width: side,
            height: side,
            kind: CellKind::Filler,
            pos: Point::new(rng.gen_range(r.x0..=r.x1 - side), rng.gen_range(r.y0..=r.y1 - side)),
        })
        .collect())
}
