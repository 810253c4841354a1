//! HPWL and the weighted-average (WA) smooth wirelength with its gradient.

use crate::netlist::{Net, Netlist, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaParams {
    pub gamma: f64,
    pub clamp_beta: f64,
    /// When set, exponentials use [`fast_exp`] and saturate at `e^clamp_beta`.
    pub clamp_active: bool,
}

impl WaParams {
    pub fn new(gamma: f64) -> Self {
        WaParams { gamma, clamp_beta: 20.0, clamp_active: false }
    }
}

/// Coefficients of `2^f ≈ 1 + (1-B) f + B f²` on [0, 1). With `B = 2 ln 2 - 1`
/// the quadratic meets `2^f` at both ends with slopes that keep it below
/// `2^f` everywhere, so the approximation is continuous, monotone and never
/// overestimates. Worst relative error is about 0.8%.
const EXP2_B: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;

fn fast_exp2(t: f64) -> f64 {
    if t >= 1024.0 {
        return f64::INFINITY;
    }
    if t < -1022.0 {
        return 0.0;
    }
    let n = t.floor();
    let f = t - n;
    let p = 1.0 + f * ((1.0 - EXP2_B) + EXP2_B * f);
    p * f64::from_bits(((n as i64 + 1023) as u64) << 52)
}

/// Approximate `e^x`, relative error below 1% and monotone nondecreasing.
/// With the clamp active, arguments above β return exactly `e^β`.
pub fn fast_exp(x: f64, p: &WaParams) -> f64 {
    if p.clamp_active && x > p.clamp_beta {
        return p.clamp_beta.exp();
    }
    fast_exp2(x * std::f64::consts::LOG2_E)
}

pub fn net_hpwl(net: &Net, netlist: &Netlist, pos: &[Point]) -> f64 {
    if net.pins.len() < 2 {
        return 0.0;
    }
    let (mut lx, mut hx, mut ly, mut hy) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for pin in &net.pins {
        let p = netlist.pin_position(pin, pos);
        lx = lx.min(p.x);
        hx = hx.max(p.x);
        ly = ly.min(p.y);
        hy = hy.max(p.y);
    }
    (hx - lx) + (hy - ly)
}

pub fn hpwl(netlist: &Netlist, pos: &[Point]) -> f64 {
    netlist.nets.iter().map(|n| net_hpwl(n, netlist, pos)).sum()
}

/// WA value along one axis and, optionally, d(WA)/d(coord) for each pin.
fn wa_axis(xs: &[f64], p: &WaParams, grad: Option<&mut [f64]>) -> f64 {
    let g = p.gamma;
    let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
    // Exact mode shifts by the extreme pin so every argument is <= 0. The
    // clamped mode shifts by the span center, which leaves positive arguments
    // for far-out pins; those saturate at e^β and stop contributing slope.
    let (sp, sn) = if p.clamp_active { (0.5 * (lo + hi), 0.5 * (lo + hi)) } else { (hi, lo) };
    let ex = |t: f64| if p.clamp_active { fast_exp(t, p) } else { t.exp() };
    let slope = |t: f64| !(p.clamp_active && t > p.clamp_beta);

    let (mut s_p, mut n_p, mut s_n, mut n_n) = (0.0, 0.0, 0.0, 0.0);
    for &x in xs {
        let ep = ex((x - sp) / g);
        let en = ex((sn - x) / g);
        s_p += ep;
        n_p += x * ep;
        s_n += en;
        n_n += x * en;
    }
    let wp = n_p / s_p;
    let wn = n_n / s_n;
    if let Some(grad) = grad {
        for (gi, &x) in grad.iter_mut().zip(xs) {
            let tp = (x - sp) / g;
            let tn = (sn - x) / g;
            let ep = ex(tp);
            let en = ex(tn);
            let dp = if slope(tp) { ep / g } else { 0.0 };
            let dn = if slope(tn) { -en / g } else { 0.0 };
            let d_wp = (ep + (x - wp) * dp) / s_p;
            let d_wn = (en + (x - wn) * dn) / s_n;
            *gi = d_wp - d_wn;
        }
    }
    wp - wn
}

pub fn wa_wirelength(netlist: &Netlist, pos: &[Point], p: &WaParams) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut total = 0.0;
    for net in netlist.nets.iter().filter(|n| n.pins.len() >= 2) {
        xs.clear();
        ys.clear();
        for pin in &net.pins {
            let q = netlist.pin_position(pin, pos);
            xs.push(q.x);
            ys.push(q.y);
        }
        total += wa_axis(&xs, p, None) + wa_axis(&ys, p, None);
    }
    total
}

/// Per-cell gradient of [`wa_wirelength`]. Only movable cells receive a
/// gradient; everything else stays zero.
pub fn wa_gradient(netlist: &Netlist, pos: &[Point], p: &WaParams) -> Vec<Point> {
    let mut out = vec![Point::default(); netlist.cells.len()];
    let (mut xs, mut ys, mut gx, mut gy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for net in netlist.nets.iter().filter(|n| n.pins.len() >= 2) {
        xs.clear();
        ys.clear();
        for pin in &net.pins {
            let q = netlist.pin_position(pin, pos);
            xs.push(q.x);
            ys.push(q.y);
        }
        gx.resize(xs.len(), 0.0);
        gy.resize(ys.len(), 0.0);
        wa_axis(&xs, p, Some(&mut gx));
        wa_axis(&ys, p, Some(&mut gy));
        for (k, pin) in net.pins.iter().enumerate() {
            if netlist.cells[pin.cell].is_movable() {
                out[pin.cell].x += gx[k];
                out[pin.cell].y += gy[k];
            }
        }
    }
    out
}
