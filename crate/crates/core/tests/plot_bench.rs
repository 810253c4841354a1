use accplace::bench::{field_bench, BenchConfig};
use accplace::plot::{glyph, render_svg, write_svg, Glyph, FILLER_COLOR, MACRO_COLOR, STD_COLOR};
use accplace::solver::SolverMode;
use accplace::{Cell, CellKind, Point, Region};

fn cell(name: &str, w: f64, h: f64, kind: CellKind) -> Cell {
    Cell { name: name.into(), width: w, height: h, kind, pos: Point::default() }
}

#[test]
fn two_cell_plot() {
    let region = Region::new(0.0, 0.0, 100.0, 50.0, 1.0);
    let cells = vec![cell("a", 2.0, 1.0, CellKind::Movable), cell("m", 20.0, 10.0, CellKind::Fixed { ni: false })];
    let pos = vec![Point::new(10.0, 10.0), Point::new(50.0, 20.0)];
    let svg = render_svg(&cells, &pos, &region);
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("<rect").count(), 1);
    assert!(svg.contains(&format!("fill=\"{STD_COLOR}\"")));
    assert!(svg.contains(&format!("fill=\"{MACRO_COLOR}\"")));
    // Macros are drawn before points.
    assert!(svg.find("<rect").unwrap() < svg.find("<circle").unwrap());
    assert_eq!(svg, render_svg(&cells, &pos, &region));
}

#[test]
fn glyph_kinds() {
    let r = Region::new(0.0, 0.0, 10.0, 10.0, 1.0);
    assert_eq!(glyph(&cell("f", 1.0, 1.0, CellKind::Filler), &r), Glyph::Filler);
    assert_eq!(glyph(&cell("s", 3.0, 1.0, CellKind::Movable), &r), Glyph::StdCell);
    assert_eq!(glyph(&cell("t", 3.0, 4.0, CellKind::Movable), &r), Glyph::Macro);
    assert_eq!(glyph(&cell("p", 0.0, 0.0, CellKind::Fixed { ni: true }), &r), Glyph::Macro);
    let svg = render_svg(&[cell("f", 1.0, 1.0, CellKind::Filler)], &[Point::new(1.0, 1.0)], &r);
    assert!(svg.contains(&format!("fill=\"{FILLER_COLOR}\"")));
}

#[test]
fn empty_canvas() {
    let svg = render_svg(&[], &[], &Region::new(0.0, 0.0, 10.0, 20.0, 1.0));
    assert!(!svg.contains("<circle") && !svg.contains("<rect"));
    assert!(svg.contains("width=\"400.0\" height=\"800.0\""));
}

#[test]
fn svg_written_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.svg");
    let r = Region::new(0.0, 0.0, 10.0, 10.0, 1.0);
    let cells = [cell("a", 1.0, 1.0, CellKind::Movable)];
    write_svg(&path, &cells, &[Point::new(2.0, 2.0)], &r).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), render_svg(&cells, &[Point::new(2.0, 2.0)], &r));
    assert!(write_svg(&dir.path().join("no/such/dir.svg"), &cells, &[Point::new(2.0, 2.0)], &r).is_err());
}

#[test]
fn bench_rows() {
    let cfg = BenchConfig { window: Some(32), ..Default::default() };
    let rep = field_bench(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 3);
    let by = |m: SolverMode| rep.rows.iter().find(|r| r.mode == m).unwrap();
    let direct = by(SolverMode::Direct);
    assert!(direct.rms_error.unwrap() == 0.0 && direct.ffts == 0);
    assert!(by(SolverMode::FineFft).rms_error.unwrap() <= 1e-10);
    let acc = by(SolverMode::AccFft);
    assert!(acc.rms_error.unwrap() <= 0.05);
    assert_eq!(acc.shifted_window_ffts, 10);
    assert!(acc.short_range_share.unwrap() > 0.0);
}

#[test]
fn bench_skips_oracle_on_large_grids() {
    let cfg =
        BenchConfig { oracle_limit: 16, modes: vec![SolverMode::Direct, SolverMode::FineFft], ..Default::default() };
    let rep = field_bench(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.rows[0].rms_error, None);
}
