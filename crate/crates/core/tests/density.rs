use accplace::density::{
    build_grid, compute_density, compute_overflow, compute_smoothed_density, filler_side, insert_fillers, to_charges,
};
use accplace::synth::{default_region, gen_synthetic};
use accplace::{Cell, CellKind, Netlist, Point, Region};
use proptest::prelude::*;

fn cell(w: f64, h: f64) -> Cell {
    Cell { name: "c".into(), width: w, height: h, kind: CellKind::Movable, pos: Point::default() }
}

#[test]
fn grid_geometry() {
    let g = build_grid(Region::new(0.0, 0.0, 1024.0, 1024.0, 1.0), 1024, 1024).unwrap();
    assert_eq!((g.bin_w, g.bin_h), (1.0, 1.0));
    let g = build_grid(Region::new(0.0, 0.0, 100.0, 100.0, 1.0), 4, 4).unwrap();
    assert_eq!((g.bin_w, g.bin_h), (25.0, 25.0));
    assert!(build_grid(Region::new(0.0, 0.0, 100.0, 100.0, 1.0), 3, 4).is_err());
    assert!(build_grid(Region::new(0.0, 0.0, 100.0, 100.0, 1.0), 2, 2).is_err());
}

#[test]
fn cell_inside_one_bin() {
    let g = build_grid(Region::new(0.0, 0.0, 8.0, 8.0, 1.0), 8, 8).unwrap();
    let dm = compute_density(&[cell(1.0, 1.0)], &[Point::new(3.0, 5.0)], &g, 1.0);
    for (b, &r) in dm.rho.iter().enumerate() {
        assert_eq!(r, if b == g.idx(3, 5) { 1.0 } else { 0.0 });
    }
    let cg = to_charges(&dm);
    assert_eq!(cg.q[g.idx(3, 5)], 1.0);
}

#[test]
fn cell_on_bin_corner() {
    let g = build_grid(Region::new(0.0, 0.0, 8.0, 8.0, 1.0), 8, 8).unwrap();
    let dm = compute_density(&[cell(2.0, 2.0)], &[Point::new(3.0, 3.0)], &g, 1.0);
    for (ix, iy) in [(3, 3), (4, 3), (3, 4), (4, 4)] {
        assert_eq!(dm.rho[g.idx(ix, iy)], 1.0);
    }
    assert_eq!(dm.rho.iter().sum::<f64>(), 4.0);
}

#[test]
fn conservation_on_synthetic() {
    let region = default_region(5000, 0.7);
    let nl = gen_synthetic(5000, 10, region, 1).unwrap();
    let g = build_grid(region, 128, 128).unwrap();
    // Scatter some cells past the boundary so clipping is exercised.
    let pos: Vec<Point> = nl
        .positions()
        .iter()
        .enumerate()
        .map(|(i, p)| if i % 7 == 0 { Point::new(p.x * 2.1 - region.x1 * 0.6, p.y * 1.9 - 40.0) } else { *p })
        .collect();
    let dm = compute_density(&nl.cells, &pos, &g, 1.0);
    let clipped: f64 = nl.cells.iter().zip(&pos).map(|(c, p)| c.clipped_area_at(*p, &region)).sum();
    let total: f64 = dm.rho.iter().sum();
    assert!((total - clipped).abs() <= 1e-9 * clipped);
    let cg = to_charges(&dm);
    let q: f64 = cg.q.iter().sum::<f64>() * g.bin_area();
    assert!((q - clipped).abs() <= 1e-9 * clipped);
}

#[test]
fn overflow_examples() {
    let g = build_grid(Region::new(0.0, 0.0, 4.0, 4.0, 1.0), 4, 4).unwrap();
    // Uniform at the target: no overflow.
    let dm = compute_density(&[cell(4.0, 4.0)], &[Point::new(0.0, 0.0)], &g, 1.0);
    assert_eq!(compute_overflow(&dm, 16.0), 0.0);
    // Everything in one bin with a tiny target.
    let dm = compute_density(&[cell(1.0, 1.0)], &[Point::new(2.0, 2.0)], &g, 1e-6);
    assert!((compute_overflow(&dm, 1.0) - 1.0).abs() < 1e-5);
}

#[test]
fn translation_by_one_bin() {
    let g = build_grid(Region::new(0.0, 0.0, 32.0, 32.0, 1.0), 16, 16).unwrap();
    let cells = vec![cell(3.0, 1.0), cell(1.5, 2.5), cell(0.7, 0.7)];
    let pos = vec![Point::new(10.3, 11.1), Point::new(12.2, 9.7), Point::new(14.9, 13.0)];
    let moved: Vec<Point> = pos.iter().map(|p| Point::new(p.x + g.bin_w, p.y + g.bin_h)).collect();
    let a = compute_density(&cells, &pos, &g, 1.0);
    let b = compute_density(&cells, &moved, &g, 1.0);
    for iy in 2..14 {
        for ix in 2..14 {
            assert!((a.rho[g.idx(ix, iy)] - b.rho[g.idx(ix + 1, iy + 1)]).abs() < 1e-12);
        }
    }
}

#[test]
fn smoothing_conserves_area() {
    let g = build_grid(Region::new(0.0, 0.0, 64.0, 64.0, 1.0), 16, 16).unwrap();
    let cells = vec![cell(1.0, 1.0), cell(0.5, 6.0), cell(9.0, 9.0)];
    let pos = vec![Point::new(20.0, 20.0), Point::new(33.3, 40.1), Point::new(5.0, 44.0)];
    let sharp: f64 = compute_density(&cells, &pos, &g, 1.0).rho.iter().sum();
    let smooth: f64 = compute_smoothed_density(&cells, &pos, &g, 1.0).rho.iter().sum();
    assert!((sharp - smooth).abs() < 1e-9 * sharp);
}

proptest! {
    #[test]
    fn overlap_conserves_clipped_area(
        x in -10.0f64..40.0, y in -10.0f64..40.0, w in 0.01f64..20.0, h in 0.01f64..20.0
    ) {
        let region = Region::new(0.0, 0.0, 32.0, 32.0, 1.0);
        let g = build_grid(region, 8, 8).unwrap();
        let c = cell(w, h);
        let p = Point::new(x, y);
        let dm = compute_density(std::slice::from_ref(&c), &[p], &g, 1.0);
        let want = c.clipped_area_at(p, &region);
        let got: f64 = dm.rho.iter().sum();
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!(dm.rho.iter().all(|&r| r >= 0.0));
    }
}

fn movable_design(n: usize, side: f64) -> Netlist {
    let cells = (0..n)
        .map(|i| Cell {
            name: format!("m{i}"),
            width: 1.0 + (i % 4) as f64,
            height: 1.0,
            kind: CellKind::Movable,
            pos: Point::default(),
        })
        .collect();
    Netlist::new(cells, vec![], Region::new(0.0, 0.0, side, side, 1.0))
}

#[test]
fn no_fillers_when_target_met() {
    let nl = movable_design(40, 10.0);
    let rho = nl.movable_area() / nl.region.area();
    assert!(insert_fillers(&nl, rho, 1).unwrap().is_empty());
}

#[test]
fn filler_area_fills_the_gap() {
    let mut nl = movable_design(40, 20.0);
    // Free area 400 minus a 40-unit macro; movable area is 100.
    nl.cells.push(Cell {
        name: "mac".into(),
        width: 8.0,
        height: 5.0,
        kind: CellKind::Fixed { ni: false },
        pos: Point::new(0.0, 0.0),
    });
    let free = nl.region.area() - nl.fixed_area();
    let fillers = insert_fillers(&nl, 1.0, 3).unwrap();
    let side = filler_side(&nl).unwrap();
    let area: f64 = fillers.iter().map(|c| c.area()).sum();
    let want = free - nl.movable_area();
    assert!((area - want).abs() <= side * side);
    for f in &fillers {
        assert_eq!(f.kind, CellKind::Filler);
        assert!(f.pos.x >= 0.0 && f.pos.x + f.width <= 20.0 && f.pos.y >= 0.0 && f.pos.y + f.height <= 20.0);
    }
}

#[test]
fn fillers_are_deterministic_and_netless() {
    let nl = gen_synthetic(500, 600, default_region(500, 0.6), 2).unwrap();
    let a = insert_fillers(&nl, 0.9, 17).unwrap();
    let b = insert_fillers(&nl, 0.9, 17).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
    for net in &nl.nets {
        assert!(net.pins.iter().all(|p| p.cell < nl.cells.len()));
    }
    assert!(insert_fillers(&nl, 0.0, 1).is_err());
    assert!(insert_fillers(&nl, 1.5, 1).is_err());
}

#[test]
fn filler_side_uses_middle_widths() {
    let mut nl = movable_design(10, 30.0);
    for (i, c) in nl.cells.iter_mut().enumerate() {
        c.width = if i == 0 {
            100.0
        } else if i == 1 {
            0.01
        } else {
            2.0
        };
    }
    assert_eq!(filler_side(&nl), Some(2.0));
}
