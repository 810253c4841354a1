//! SVG snapshots of a placement: standard cells as red points, macros as
//! blue rectangles, fillers as green points.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netlist::{Cell, CellKind, Point, Region};

pub const STD_COLOR: &str = "red";
pub const MACRO_COLOR: &str = "blue";
pub const FILLER_COLOR: &str = "green";

const CANVAS: f64 = 800.0;

/// How a cell is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    StdCell,
    Macro,
    Filler,
}

/// Fixed cells and cells taller than a row are macros.
pub fn glyph(cell: &Cell, region: &Region) -> Glyph {
    match cell.kind {
        CellKind::Filler => Glyph::Filler,
        CellKind::Fixed { .. } => Glyph::Macro,
        CellKind::Movable if cell.height > region.row_height * 1.5 => Glyph::Macro,
        CellKind::Movable => Glyph::StdCell,
    }
}

/// Renders the placement. Output depends only on the inputs.
pub fn render_svg(cells: &[Cell], pos: &[Point], region: &Region) -> String {
    let (w, h) = (region.width(), region.height());
    let scale = CANVAS / w.max(h);
    let (cw, ch) = (w * scale, h * scale);
    let r = (0.002 * CANVAS).max(0.5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{cw:.1}" height="{ch:.1}" viewBox="0 0 {cw:.1} {ch:.1}" style="background:white">"#
    );
    // Macros first so points stay visible on top of them.
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| glyph(&cells[i], region) != Glyph::Macro);
    for i in order {
        let (c, p) = (&cells[i], pos[i]);
        let x = (p.x - region.x0) * scale;
        let y = (region.y1 - p.y - c.height) * scale;
        match glyph(c, region) {
            Glyph::Macro => {
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{MACRO_COLOR}" fill-opacity="0.5" stroke="{MACRO_COLOR}"/>"#,
                    c.width * scale,
                    c.height * scale
                );
            }
            g => {
                let color = if g == Glyph::Filler { FILLER_COLOR } else { STD_COLOR };
                let (cx, cy) = (x + c.width * scale / 2.0, y + c.height * scale / 2.0);
                let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.2}" fill="{color}"/>"#);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, cells: &[Cell], pos: &[Point], region: &Region) -> Result<()> {
    std::fs::write(path, render_svg(cells, pos, region)).map_err(|e| Error::io(path, e))
}
