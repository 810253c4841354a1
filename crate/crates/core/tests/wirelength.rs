use accplace::synth::{default_region, gen_synthetic};
use accplace::wirelength::{fast_exp, hpwl, wa_gradient, wa_wirelength, WaParams};
use accplace::{Cell, CellKind, Net, Netlist, Pin, Point, Region};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(name: &str, kind: CellKind) -> Cell {
    Cell { name: name.into(), width: 1.0, height: 1.0, kind, pos: Point::default() }
}

/// Unit cells with one center pin each, all on one net.
fn one_net(n: usize) -> Netlist {
    let cells = (0..n).map(|i| dot(&format!("c{i}"), CellKind::Movable)).collect();
    let pins = (0..n).map(|cell| Pin { cell, dx: 0.5, dy: 0.5 }).collect();
    Netlist::new(cells, vec![Net { name: "n".into(), pins }], Region::new(-100.0, -100.0, 100.0, 100.0, 1.0))
}

fn at_centers(pts: &[(f64, f64)]) -> Vec<Point> {
    pts.iter().map(|&(x, y)| Point::new(x - 0.5, y - 0.5)).collect()
}

#[test]
fn hpwl_examples() {
    let nl = one_net(2);
    assert_eq!(hpwl(&nl, &at_centers(&[(0.0, 0.0), (3.0, 4.0)])), 7.0);
    assert_eq!(hpwl(&nl, &at_centers(&[(2.0, 2.0), (2.0, 2.0)])), 0.0);
}

#[test]
fn hpwl_matches_independent_scan() {
    let nl = gen_synthetic(5000, 5500, default_region(5000, 0.7), 1).unwrap();
    let pos = nl.positions();
    let mut total = 0.0;
    for net in &nl.nets {
        let xs: Vec<f64> = net.pins.iter().map(|p| pos[p.cell].x + p.dx).collect();
        let ys: Vec<f64> = net.pins.iter().map(|p| pos[p.cell].y + p.dy).collect();
        let span = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        total += span(&xs) + span(&ys);
    }
    let h = hpwl(&nl, &pos);
    assert!((h - total).abs() <= 1e-9 * total);
}

#[test]
fn symmetric_pair_closed_form() {
    let nl = one_net(2);
    for (a, gamma) in [(1.0, 1.0), (3.0, 0.5), (0.2, 2.0)] {
        let pos = at_centers(&[(-a, 0.0), (a, 0.0)]);
        let wa = wa_wirelength(&nl, &pos, &WaParams::new(gamma));
        let expect = 2.0 * a * (a / gamma).tanh();
        assert!((wa - expect).abs() <= 1e-12 * expect.max(1.0), "{wa} vs {expect}");
        assert!(wa <= 2.0 * a);
    }
}

#[test]
fn coincident_pins_have_zero_wa() {
    let nl = one_net(4);
    let pos = at_centers(&[(1.0, 2.0); 4]);
    assert!(wa_wirelength(&nl, &pos, &WaParams::new(0.7)).abs() < 1e-12);
}

#[test]
fn small_gamma_approaches_hpwl() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let nl = one_net(rng.gen_range(2..8));
        let pts: Vec<(f64, f64)> =
            (0..nl.cells.len()).map(|_| (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0))).collect();
        let pos = at_centers(&pts);
        let h = hpwl(&nl, &pos);
        let wa = wa_wirelength(&nl, &pos, &WaParams::new(h / 1000.0));
        assert!((h - wa).abs() <= 0.01 * h);
    }
}

proptest! {
    #[test]
    fn wa_bounded_by_hpwl_and_monotone_in_gamma(
        pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..8)
    ) {
        let nl = one_net(pts.len());
        let pos = at_centers(&pts);
        let h = hpwl(&nl, &pos);
        let mut prev = f64::INFINITY;
        for gamma in [20.0, 10.0, 5.0, 2.0, 1.0, 0.5, 0.1] {
            let wa = wa_wirelength(&nl, &pos, &WaParams::new(gamma));
            prop_assert!(wa <= h + 1e-9 * h.max(1.0));
            let gap = h - wa;
            prop_assert!(gap <= prev + 1e-9 * h.max(1.0));
            prev = gap;
        }
    }

    #[test]
    fn fast_exp_is_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0, clamp in any::<bool>()) {
        let p = WaParams { clamp_active: clamp, ..WaParams::new(1.0) };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(fast_exp(lo, &p) <= fast_exp(hi, &p));
    }

    #[test]
    fn fast_exp_error_within_two_percent(x in -20.0f64..20.0) {
        let p = WaParams::new(1.0);
        let r = fast_exp(x, &p) / x.exp();
        prop_assert!((r - 1.0).abs() <= 0.02);
    }
}

#[test]
fn fast_exp_identity_and_clamp() {
    let p = WaParams { clamp_active: true, ..WaParams::new(1.0) };
    assert!((fast_exp(0.0, &p) - 1.0).abs() <= 0.02);
    assert_eq!(fast_exp(25.0, &p), 20f64.exp());
    assert_eq!(fast_exp(1e6, &p), 20f64.exp());
}

#[test]
fn fast_exp_monotone_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = WaParams { clamp_active: true, ..WaParams::new(1.0) };
    for _ in 0..10_000 {
        let a: f64 = rng.gen_range(-30.0..30.0);
        let b: f64 = rng.gen_range(-30.0..30.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        assert!(fast_exp(lo, &p) <= fast_exp(hi, &p));
    }
}

#[test]
fn symmetric_pair_attracts() {
    let nl = one_net(2);
    let g = wa_gradient(&nl, &at_centers(&[(-2.0, 0.0), (2.0, 0.0)]), &WaParams::new(1.0));
    assert!(g[0].x < 0.0 && g[1].x > 0.0);
    assert!((g[0].x + g[1].x).abs() < 1e-12);
}

#[test]
fn single_pin_net_has_no_gradient() {
    let nl = one_net(1);
    let pos = at_centers(&[(3.0, 3.0)]);
    let p = WaParams::new(1.0);
    assert_eq!(wa_wirelength(&nl, &pos, &p), 0.0);
    assert_eq!(wa_gradient(&nl, &pos, &p)[0], Point::default());
}

#[test]
fn fixed_cells_get_no_gradient() {
    let mut nl = one_net(3);
    nl.cells[1].kind = CellKind::Fixed { ni: false };
    let g = wa_gradient(&nl, &at_centers(&[(0.0, 0.0), (5.0, 1.0), (2.0, 7.0)]), &WaParams::new(1.0));
    assert_eq!(g[1], Point::default());
    assert!(g[0].x != 0.0 && g[2].y != 0.0);
}

#[test]
fn gradient_matches_finite_differences() {
    let region = Region::new(0.0, 0.0, 40.0, 40.0, 1.0);
    let nl = gen_synthetic(50, 60, region, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pos: Vec<Point> = (0..50).map(|_| Point::new(rng.gen_range(0.0..32.0), rng.gen_range(0.0..39.0))).collect();
    let p = WaParams::new(2.0);
    let g = wa_gradient(&nl, &pos, &p);
    let h = 1e-3 * p.gamma;
    let mut num = vec![Point::default(); 50];
    for i in 0..50 {
        for axis in 0..2 {
            let mut a = pos.clone();
            let mut b = pos.clone();
            if axis == 0 {
                a[i].x += h;
                b[i].x -= h;
            } else {
                a[i].y += h;
                b[i].y -= h;
            }
            let d = (wa_wirelength(&nl, &a, &p) - wa_wirelength(&nl, &b, &p)) / (2.0 * h);
            if axis == 0 {
                num[i].x = d;
            } else {
                num[i].y = d;
            }
        }
    }
    let err: f64 = g.iter().zip(&num).map(|(a, b)| (a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = num.iter().map(|b| b.x * b.x + b.y * b.y).sum::<f64>().sqrt();
    assert!(err <= 1e-4 * norm, "relative error {}", err / norm);
}

#[test]
fn clamped_gradient_is_finite_for_wild_spreads() {
    let nl = one_net(3);
    let pos = at_centers(&[(-1e4, 0.0), (0.0, 5e3), (1e4, -3.0)]);
    let p = WaParams { clamp_active: true, ..WaParams::new(0.5) };
    let wa = wa_wirelength(&nl, &pos, &p);
    assert!(wa.is_finite());
    assert!(wa_gradient(&nl, &pos, &p).iter().all(|g| g.x.is_finite() && g.y.is_finite()));
}
