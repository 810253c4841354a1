use accplace::bench::{random_charges, unit_grid};
use accplace::density::{build_grid, ChargeGrid};
use accplace::field::{
    build_kernel, direct_field, direct_grid_field, fft_field_fine, FieldMap, FineFftSolver, Padding, VectorKernel,
};
use accplace::{Point, Region};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_rel(a: &FieldMap, b: &FieldMap) -> f64 {
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for k in 0..a.xi_x.len() {
        err = err.max((a.xi_x[k] - b.xi_x[k]).hypot(a.xi_y[k] - b.xi_y[k]));
        peak = peak.max(b.xi_x[k].hypot(b.xi_y[k]));
    }
    err / peak
}

#[test]
fn kernel_values() {
    let k = 2.5;
    let (x, y) = VectorKernel::eval(k, 3.0, 0.0);
    assert!((x - k / 9.0).abs() < 1e-15 && y == 0.0);
    assert_eq!(VectorKernel::eval(k, 0.0, 0.0), (0.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (dx, dy) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let (hx, hy) = VectorKernel::eval(k, dx, dy);
        let m = hx.hypot(hy) * (dx * dx + dy * dy);
        assert!((m - k).abs() < 1e-12 * k);
        // Odd in the matching component, even in the other.
        assert_eq!(VectorKernel::eval(k, -dx, dy), (-hx, hy));
        assert_eq!(VectorKernel::eval(k, dx, -dy), (hx, -hy));
    }
}

#[test]
fn direct_field_basics() {
    let f = direct_field(&[(Point::new(0.0, 0.0), 1.0)], &[Point::new(4.0, 0.0)], 1.0);
    assert!((f[0].x - 1.0 / 16.0).abs() < 1e-15 && f[0].y == 0.0);
    let pair = [(Point::new(-2.0, 1.0), 0.7), (Point::new(2.0, -1.0), 0.7)];
    let f = direct_field(&pair, &[Point::new(0.0, 0.0)], 1.0);
    assert!(f[0].x.abs() < 1e-15 && f[0].y.abs() < 1e-15);
}

#[test]
fn superposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pts = |n: usize| -> Vec<(Point, f64)> {
        (0..n)
            .map(|_| (Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)), rng.gen_range(0.1..2.0)))
            .collect()
    };
    let (a, b) = (pts(30), pts(40));
    let eval: Vec<Point> = pts(50).into_iter().map(|p| p.0).collect();
    let both: Vec<_> = a.iter().chain(&b).cloned().collect();
    let (fa, fb, fab) = (direct_field(&a, &eval, 1.0), direct_field(&b, &eval, 1.0), direct_field(&both, &eval, 1.0));
    for k in 0..eval.len() {
        let (sx, sy) = (fa[k].x + fb[k].x, fa[k].y + fb[k].y);
        assert!((sx - fab[k].x).abs() <= 1e-12 * fab[k].x.hypot(fab[k].y));
        assert!((sy - fab[k].y).abs() <= 1e-12 * fab[k].x.hypot(fab[k].y));
    }
}

#[test]
fn action_reaction() {
    let (p1, p2) = (Point::new(1.5, 2.5), Point::new(6.5, 0.5));
    let (q1, q2) = (0.8, 1.7);
    let f1 = direct_field(&[(p2, q2)], &[p1], 1.0)[0];
    let f2 = direct_field(&[(p1, q1)], &[p2], 1.0)[0];
    assert!((q1 * f1.x + q2 * f2.x).abs() < 1e-12);
    assert!((q1 * f1.y + q2 * f2.y).abs() < 1e-12);
}

#[test]
fn single_charge_fft_matches_direct() {
    let g = unit_grid(32).unwrap();
    let mut cg = ChargeGrid::zeros(g);
    cg.q[g.idx(7, 20)] = 1.0;
    let f = fft_field_fine(&cg, build_kernel(&g, 1.0));
    assert!(max_rel(&f, &direct_grid_field(&cg, 1.0)) <= 1e-10);
}

#[test]
fn random_map_fft_matches_direct() {
    // Non-square bins check that lags are scaled per axis.
    let g = build_grid(Region::new(0.0, 0.0, 128.0, 64.0, 1.0), 64, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cg = ChargeGrid::zeros(g);
    cg.q.iter_mut().for_each(|q| *q = rng.gen_range(0.0..1.0));
    let f = fft_field_fine(&cg, build_kernel(&g, 1.0));
    assert!(max_rel(&f, &direct_grid_field(&cg, 1.0)) <= 1e-10);
}

#[test]
fn uniform_charge_has_no_field_at_center() {
    let g = unit_grid(16).unwrap();
    let mut cg = ChargeGrid::zeros(g);
    cg.q.fill(1.0);
    let f = fft_field_fine(&cg, build_kernel(&g, 1.0));
    // The exact center lies on the shared corner of the four middle bins;
    // their fields cancel by symmetry.
    let (sx, sy) = [(7, 7), (8, 7), (7, 8), (8, 8)]
        .iter()
        .fold((0.0, 0.0), |(x, y), &(i, j)| (x + f.xi_x[g.idx(i, j)], y + f.xi_y[g.idx(i, j)]));
    assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
    // Middle bins point outwards.
    assert!(f.xi_x[g.idx(8, 8)] > 0.0 && f.xi_x[g.idx(7, 8)] < 0.0);
}

#[test]
fn reflection_flips_field() {
    let g = unit_grid(32).unwrap();
    let cg = random_charges(&g, 60, 4);
    let mut mirror = ChargeGrid::zeros(g);
    for iy in 0..32 {
        for ix in 0..32 {
            mirror.q[g.idx(31 - ix, 31 - iy)] = cg.q[g.idx(ix, iy)];
        }
    }
    let k = build_kernel(&g, 1.0);
    let (a, b) = (fft_field_fine(&cg, k), fft_field_fine(&mirror, k));
    for iy in 0..32 {
        for ix in 0..32 {
            let (i, j) = (g.idx(ix, iy), g.idx(31 - ix, 31 - iy));
            assert!((a.xi_x[i] + b.xi_x[j]).abs() < 1e-10);
            assert!((a.xi_y[i] + b.xi_y[j]).abs() < 1e-10);
        }
    }
}

#[test]
fn periodic_padding_is_translation_invariant() {
    let g = unit_grid(16).unwrap();
    let k = build_kernel(&g, 1.0);
    let mut s = FineFftSolver::new(&g, k, Padding::Periodic);
    let mut a = ChargeGrid::zeros(g);
    a.q[g.idx(1, 2)] = 1.0;
    let mut b = ChargeGrid::zeros(g);
    b.q[g.idx(14, 15)] = 1.0;
    let (fa, fb) = (s.solve(&a), s.solve(&b));
    // Shift by (13, 13) with wrap-around.
    for iy in 0..16 {
        for ix in 0..16 {
            let j = g.idx((ix + 13) % 16, (iy + 13) % 16);
            assert!((fa.xi_x[g.idx(ix, iy)] - fb.xi_x[j]).abs() < 1e-12);
        }
    }
}
