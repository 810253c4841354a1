use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Placement area. `row_height` comes from the `.scl` rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub row_height: f64,
}

impl Region {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, row_height: f64) -> Self {
        Region { x0, y0, x1, y1, row_height }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn is_valid(&self) -> bool {
        self.x1 > self.x0 && self.y1 > self.y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Movable,
    /// Fixed macro or terminal. `ni` marks Bookshelf `terminal_NI` nodes.
    Fixed {
        ni: bool,
    },
    Filler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub kind: CellKind,
    /// Lower-left corner.
    pub pos: Point,
}

impl Cell {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_movable(&self) -> bool {
        self.kind == CellKind::Movable
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.kind, CellKind::Fixed { .. })
    }

    /// Area of the cell rectangle at `pos` clipped to `region`.
    pub fn clipped_area_at(&self, pos: Point, region: &Region) -> f64 {
        let w = (pos.x + self.width).min(region.x1) - pos.x.max(region.x0);
        let h = (pos.y + self.height).min(region.y1) - pos.y.max(region.y0);
        w.max(0.0) * h.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub cell: usize,
    /// Offset from the cell's lower-left corner.
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub pins: Vec<Pin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub cells: Vec<Cell>,
    pub nets: Vec<Net>,
    pub region: Region,
}

impl Netlist {
    pub fn new(cells: Vec<Cell>, nets: Vec<Net>, region: Region) -> Self {
        Netlist { cells, nets, region }
    }

    pub fn index_by_name(&self) -> HashMap<&str, usize> {
        self.cells.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.cells.iter().map(|c| c.pos).collect()
    }

    pub fn movable_indices(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].is_movable()).collect()
    }

    pub fn movable_area(&self) -> f64 {
        self.cells.iter().filter(|c| c.is_movable()).map(Cell::area).sum()
    }

    /// Fixed area clipped to the region.
    pub fn fixed_area(&self) -> f64 {
        self.cells.iter().filter(|c| c.is_fixed()).map(|c| c.clipped_area_at(c.pos, &self.region)).sum()
    }

    /// Number of pins attached to each cell.
    pub fn pin_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cells.len()];
        for net in &self.nets {
            for p in &net.pins {
                counts[p.cell] += 1;
            }
        }
        counts
    }

    pub fn pin_position(&self, pin: &Pin, positions: &[Point]) -> Point {
        let p = positions[pin.cell];
        Point::new(p.x + pin.dx, p.y + pin.dy)
    }
}
