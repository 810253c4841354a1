use crate::density::GridSpec;
use crate::error::{Error, Result};

/// Coarse grid and window geometry derived from a fine grid.
///
/// Coarse point `(I, J)` sits on the center of fine bin `(I·c + c/2, J·c + c/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseLayout {
    pub spec: GridSpec,
    pub alpha: usize,
    /// Linear coarsening factor, `c² = alpha`.
    pub c: usize,
    pub mx: usize,
    pub my: usize,
    /// Window side in fine bins.
    pub w: usize,
    pub wx: usize,
    pub wy: usize,
}

impl CoarseLayout {
    pub fn pitch_x(&self) -> f64 {
        self.c as f64 * self.spec.bin_w
    }

    pub fn pitch_y(&self) -> f64 {
        self.c as f64 * self.spec.bin_h
    }

    /// Fine bin index on which coarse point `coarse` sits.
    pub fn anchor(&self, coarse: usize) -> usize {
        coarse * self.c + self.c / 2
    }
}

pub fn isqrt(alpha: usize) -> Option<usize> {
    let c = (alpha as f64).sqrt().round() as usize;
    (c * c == alpha).then_some(c)
}

pub fn coarsen(spec: &GridSpec, alpha: usize, w: usize) -> Result<CoarseLayout> {
    let c = isqrt(alpha)
        .filter(|&c| c >= 2)
        .ok_or_else(|| Error::invalid(format!("alpha={alpha} is not a square of an integer >= 2")))?;
    if !spec.nx.is_multiple_of(c) || !spec.ny.is_multiple_of(c) {
        return Err(Error::invalid(format!("c={c} does not divide the {}x{} grid", spec.nx, spec.ny)));
    }
    let (mx, my) = (spec.nx / c, spec.ny / c);
    if mx < 2 || my < 2 {
        return Err(Error::invalid(format!("coarse grid {mx}x{my} is smaller than 2x2")));
    }
    if w < 2 || !w.is_multiple_of(2) || !spec.nx.is_multiple_of(w) || !spec.ny.is_multiple_of(w) {
        return Err(Error::invalid(format!("window side {w} must be even and divide the grid")));
    }
    Ok(CoarseLayout { spec: *spec, alpha, c, mx, my, w, wx: spec.nx / w, wy: spec.ny / w })
}
