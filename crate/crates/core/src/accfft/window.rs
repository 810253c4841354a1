//! Window tiling for the short-range correction.
//!
//! Aligned windows tile the grid; x-, y- and xy-shifted families are offset by
//! half a window and only placed where they fit inside the grid. Window
//! centers then form a lattice with spacing `w/2`, and each bin is owned by
//! the nearest center. On a square lattice the Euclidean nearest center is
//! the per-axis nearest one, and the family tie-break (aligned first)
//! reduces to preferring the aligned position on each axis.

use super::layout::CoarseLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Aligned,
    ShiftX,
    ShiftY,
    ShiftXY,
}

impl Family {
    pub fn is_shifted(self) -> bool {
        self != Family::Aligned
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub family: Family,
    /// Fine-bin origin of the `w × w` window.
    pub origin: (usize, usize),
    /// Owned bins `[own_lo, own_hi)` per axis, absolute fine indices.
    pub own_lo: (usize, usize),
    pub own_hi: (usize, usize),
}

impl Window {
    pub fn owned_count(&self) -> usize {
        (self.own_hi.0 - self.own_lo.0) * (self.own_hi.1 - self.own_lo.1)
    }

    pub fn owns(&self, ix: usize, iy: usize) -> bool {
        (self.own_lo.0..self.own_hi.0).contains(&ix) && (self.own_lo.1..self.own_hi.1).contains(&iy)
    }
}

#[derive(Debug, Clone)]
pub struct WindowPlan {
    pub w: usize,
    pub windows: Vec<Window>,
}

impl WindowPlan {
    pub fn count(&self, shifted: bool) -> usize {
        self.windows.iter().filter(|w| w.family.is_shifted() == shifted).count()
    }

    /// Owning window index for every fine bin (row-major).
    pub fn owner_map(&self, nx: usize, ny: usize) -> Vec<Option<usize>> {
        let mut own = vec![None; nx * ny];
        for (k, w) in self.windows.iter().enumerate() {
            for iy in w.own_lo.1..w.own_hi.1 {
                for ix in w.own_lo.0..w.own_hi.0 {
                    own[iy * nx + ix] = Some(k);
                }
            }
        }
        own
    }
}

/// Window-center positions along one axis (in bins, doubled to stay
/// integral), with whether each is an aligned position, and each one's owned
/// interval of fine indices.
fn axis_owners(n: usize, w: usize) -> Vec<(usize, bool, usize, usize)> {
    let nwin = n / w;
    // Doubled coordinates: aligned centers at (2k+1)·w, shifted at 2(k+1)·w.
    let mut centers: Vec<(usize, bool)> = (0..nwin).map(|k| ((2 * k + 1) * w, true)).collect();
    centers.extend((0..nwin.saturating_sub(1)).map(|k| (2 * (k + 1) * w, false)));
    centers.sort();
    let mut owner = Vec::with_capacity(n);
    for i in 0..n {
        let p = 2 * i + 1;
        let mut best = 0;
        for (k, &(c, aligned)) in centers.iter().enumerate() {
            let d = c.abs_diff(p);
            let bd = centers[best].0.abs_diff(p);
            if d < bd || (d == bd && aligned && !centers[best].1) {
                best = k;
            }
        }
        owner.push(best);
    }
    centers
        .iter()
        .enumerate()
        .filter_map(|(k, &(c, aligned))| {
            let lo = owner.iter().position(|&o| o == k)?;
            let hi = owner.iter().rposition(|&o| o == k)? + 1;
            Some((c / 2 - w / 2, aligned, lo, hi))
        })
        .collect()
}

pub fn build_window_plan(layout: &CoarseLayout) -> WindowPlan {
    let w = layout.w;
    let xs = axis_owners(layout.spec.nx, w);
    let ys = axis_owners(layout.spec.ny, w);
    let mut windows = Vec::new();
    for &(oy, ay, ly, hy) in &ys {
        for &(ox, ax, lx, hx) in &xs {
            let family = match (ax, ay) {
                (true, true) => Family::Aligned,
                (false, true) => Family::ShiftX,
                (true, false) => Family::ShiftY,
                (false, false) => Family::ShiftXY,
            };
            windows.push(Window { family, origin: (ox, oy), own_lo: (lx, ly), own_hi: (hx, hy) });
        }
    }
    windows.sort_by_key(|w| (w.family, w.origin.1, w.origin.0));
    WindowPlan { w, windows }
}

/// Shifted-window FFT+IFFT count for a `wx × wy` window grid.
pub fn shifted_fft_count(wx: usize, wy: usize) -> usize {
    let (a, b) = (wx.saturating_sub(1), wy.saturating_sub(1));
    2 * (a * b + a * wy + wx * b)
}
