//! Nesterov's accelerated gradient with inverse-Lipschitz step estimation,
//! the penalty and smoothing schedules, and boundary clamping.

use serde::Serialize;

use crate::density::GridSpec;
use crate::error::{Error, Result};
use crate::field::{direct_field, FieldMap};
use crate::netlist::{Cell, Point, Region};

/// Penalty update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuRule {
    /// `μ = base^(-ΔHPWL / ΔH_ref)`.
    Relative,
    /// `μ = base^(1 - ΔHPWL / ΔH_ref)`: λ keeps growing while HPWL is flat.
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleParams {
    pub mu_rule: MuRule,
    pub mu_base: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Reference HPWL change per iteration, in length units for a design
    /// whose current HPWL is `hpwl_norm`; scaled linearly for other values.
    pub delta_hpwl_ref: f64,
    pub hpwl_norm: f64,
    /// γ at τ = 0.1 is `gamma_coef / 10` bin pitches, at τ = 1 it is `10 · gamma_coef`.
    pub gamma_coef: f64,
    /// The exponential clamp stays on for this fraction of the iteration cap
    /// or until τ drops below `clamp_tau`, whichever comes first.
    pub clamp_fraction: f64,
    pub clamp_tau: f64,
    /// Largest coordinate move per step, in bin pitches.
    pub step_min: f64,
    pub step_max: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            mu_rule: MuRule::Growth,
            mu_base: 1.05,
            mu_min: 0.75,
            mu_max: 1.1,
            delta_hpwl_ref: 3.5e5,
            hpwl_norm: 1e7,
            gamma_coef: 8.0,
            clamp_fraction: 0.3,
            clamp_tau: 0.6,
            step_min: 1e-4,
            step_max: 0.3,
        }
    }
}

impl ScheduleParams {
    /// WA smoothing for overflow `tau`.
    pub fn gamma(&self, tau: f64, bin_pitch: f64) -> f64 {
        self.gamma_coef * bin_pitch * 10f64.powf((tau - 0.1) * 20.0 / 9.0 - 1.0)
    }

    /// Penalty multiplier for an HPWL change, clipped to `[mu_min, mu_max]`.
    pub fn mu(&self, delta_hpwl: f64, delta_ref: f64) -> f64 {
        let r = if delta_ref > 0.0 { delta_hpwl / delta_ref } else { 0.0 };
        let e = match self.mu_rule {
            MuRule::Relative => -r,
            MuRule::Growth => 1.0 - r,
        };
        self.mu_base.powf(e).clamp(self.mu_min, self.mu_max)
    }

    /// `ΔH_ref` scaled to a current wirelength of `hpwl`.
    pub fn delta_ref(&self, hpwl: f64) -> f64 {
        self.delta_hpwl_ref * hpwl / self.hpwl_norm
    }

    pub fn clamp_active(&self, iter: usize, max_iters: usize, tau: f64) -> bool {
        (iter as f64) < self.clamp_fraction * max_iters as f64 && tau >= self.clamp_tau
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacerState {
    pub lambda: f64,
    pub gamma: f64,
    pub tau: f64,
    pub iter: usize,
    pub hpwl_prev: f64,
    pub delta_ref: f64,
}

impl PlacerState {
    pub fn new(lambda: f64, tau: f64, hpwl0: f64, sched: &ScheduleParams, bin_pitch: f64) -> Self {
        PlacerState {
            lambda,
            gamma: sched.gamma(tau, bin_pitch),
            tau,
            iter: 0,
            hpwl_prev: hpwl0,
            delta_ref: sched.delta_ref(hpwl0),
        }
    }
}

/// Applies one schedule update after an iteration that reached overflow
/// `tau` and wirelength `hpwl_now`.
pub fn update_schedules(state: &mut PlacerState, sched: &ScheduleParams, tau: f64, hpwl_now: f64, bin_pitch: f64) {
    let mu = sched.mu(hpwl_now - state.hpwl_prev, state.delta_ref);
    state.lambda *= mu;
    state.tau = tau;
    state.gamma = sched.gamma(tau, bin_pitch);
    state.hpwl_prev = hpwl_now;
    // Track the current wirelength: a stacked start has a tiny HPWL that
    // would make every later change look huge.
    state.delta_ref = sched.delta_ref(hpwl_now);
    state.iter += 1;
}

fn l1(g: &[Point]) -> f64 {
    g.iter().map(|p| p.x.abs() + p.y.abs()).sum()
}

/// Initial penalty: ratio of total wirelength to total density gradient
/// magnitude, so both terms start at equal weight.
pub fn init_lambda(g_w: &[Point], g_n: &[Point]) -> f64 {
    let (w, n) = (l1(g_w), l1(g_n));
    if n > 0.0 && n.is_finite() && w > 0.0 && w.is_finite() {
        w / n
    } else {
        log::warn!("degenerate initial gradients (|gW|={w:e}, |gN|={n:e}); starting with lambda = 1");
        1.0
    }
}

/// Density gradient `-A_i · ξ_i`, with ξ the overlap-weighted mean of the
/// field over the bins a cell's smoothed footprint covers. Only cells with `moves[i]` get a value.
pub fn density_gradient(cells: &[Cell], pos: &[Point], moves: &[bool], field: &FieldMap) -> Vec<Point> {
    let spec = &field.spec;
    cells
        .iter()
        .zip(pos)
        .zip(moves)
        .map(|((c, p), &m)| {
            if !m {
                return Point::default();
            }
            let (mut fx, mut fy, mut a) = (0.0, 0.0, 0.0);
            spec.for_each_smoothed(p.x, p.y, c.width, c.height, |b, o| {
                fx += o * field.xi_x[b];
                fy += o * field.xi_y[b];
                a += o;
            });
            if a <= 0.0 {
                return Point::default();
            }
            let s = -c.area() / a;
            Point::new(s * fx, s * fy)
        })
        .collect()
}

/// Density energy of cells modeled as point charges of their area at their
/// centers: `½ Σ_{i≠j} A_i A_j k_e / |c_i - c_j|`.
pub fn point_charge_energy(cells: &[Cell], pos: &[Point], k_e: f64) -> f64 {
    let ch = point_charges(cells, pos);
    let mut e = 0.0;
    for i in 0..ch.len() {
        for j in i + 1..ch.len() {
            let d = (ch[i].0.x - ch[j].0.x).hypot(ch[i].0.y - ch[j].0.y);
            if d > 0.0 {
                e += ch[i].1 * ch[j].1 * k_e / d;
            }
        }
    }
    e
}

/// Exact gradient of [`point_charge_energy`] for cells with `moves[i]`.
pub fn point_charge_gradient(cells: &[Cell], pos: &[Point], moves: &[bool], k_e: f64) -> Vec<Point> {
    let ch = point_charges(cells, pos);
    let centers: Vec<Point> = ch.iter().map(|c| c.0).collect();
    let xi = direct_field(&ch, &centers, k_e);
    xi.iter()
        .zip(&ch)
        .zip(moves)
        .map(|((f, &(_, a)), &m)| if m { Point::new(-a * f.x, -a * f.y) } else { Point::default() })
        .collect()
}

fn point_charges(cells: &[Cell], pos: &[Point]) -> Vec<(Point, f64)> {
    cells.iter().zip(pos).map(|(c, p)| (Point::new(p.x + c.width / 2.0, p.y + c.height / 2.0), c.area())).collect()
}

/// Moves every cell with `moves[i]` by the minimal translation that puts
/// its rectangle inside the region. Cells larger than the region are
/// aligned to its lower-left corner.
pub fn clamp_to_region(cells: &[Cell], pos: &mut [Point], moves: &[bool], region: &Region) {
    for ((c, p), &m) in cells.iter().zip(pos.iter_mut()).zip(moves) {
        if m {
            p.x = p.x.min(region.x1 - c.width).max(region.x0);
            p.y = p.y.min(region.y1 - c.height).max(region.y0);
        }
    }
}

/// Clamp with the region taken from a grid.
pub fn clamp_to_grid(cells: &[Cell], pos: &mut [Point], moves: &[bool], spec: &GridSpec) {
    clamp_to_region(cells, pos, moves, &spec.region);
}

fn dist(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sum::<f64>().sqrt()
}

fn max_abs(g: &[Point]) -> f64 {
    g.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max)
}

fn check_finite(g: &[Point]) -> Result<()> {
    match g.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
        Some(i) => Err(Error::Numerical(format!("non-finite gradient at cell {i}: {:?}", g[i]))),
        None => Ok(()),
    }
}

/// Next Nesterov momentum coefficient.
pub fn next_momentum(a: f64) -> f64 {
    (1.0 + (4.0 * a * a + 1.0).sqrt()) / 2.0
}

/// Two-sequence Nesterov iteration. `u` is the major solution, `v` the
/// extrapolated reference point where gradients are taken.
#[derive(Debug, Clone)]
pub struct Nesterov {
    pub u: Vec<Point>,
    pub v: Vec<Point>,
    pub a: f64,
    pub step: f64,
    pub backtracks: u64,
    /// Bounds on the largest coordinate move per step, in length units.
    pub move_bounds: (f64, f64),
    g: Vec<Point>,
    v_prev: Vec<Point>,
    g_prev: Vec<Point>,
}

impl Nesterov {
    /// Starts at `v0`. A trial point a hundredth of `bin` along the negative
    /// gradient seeds the first Lipschitz estimate.
    pub fn start(
        v0: Vec<Point>,
        bin: f64,
        move_bounds: (f64, f64),
        grad: &mut dyn FnMut(&[Point]) -> Result<Vec<Point>>,
        project: &dyn Fn(&mut [Point]),
    ) -> Result<Self> {
        let g0 = grad(&v0)?;
        check_finite(&g0)?;
        let gmax = max_abs(&g0);
        let mut trial = v0.clone();
        if gmax > 0.0 {
            let s = 0.01 * bin / gmax;
            for (t, g) in trial.iter_mut().zip(&g0) {
                t.x -= s * g.x;
                t.y -= s * g.y;
            }
            project(&mut trial);
        }
        let gt = grad(&trial)?;
        check_finite(&gt)?;
        Ok(Nesterov {
            u: v0.clone(),
            v: v0,
            a: 1.0,
            step: 0.0,
            backtracks: 0,
            move_bounds,
            g: g0,
            v_prev: trial,
            g_prev: gt,
        })
    }

    /// Gradient at the current reference point.
    pub fn gradient(&self) -> &[Point] {
        &self.g
    }

    /// Inverse Lipschitz estimate from two iterates, clamped so a step along
    /// `g_step` moves no coordinate outside the move bounds.
    fn lipschitz_step(&self, v: &[Point], g: &[Point], v_prev: &[Point], g_prev: &[Point], g_step: &[Point]) -> f64 {
        let gmax = max_abs(g_step);
        if gmax == 0.0 {
            return 0.0;
        }
        let (lo, hi) = (self.move_bounds.0 / gmax, self.move_bounds.1 / gmax);
        let dg = dist(g, g_prev);
        let raw = if dg > 0.0 { dist(v, v_prev) / dg } else { hi };
        raw.clamp(lo, hi)
    }

    fn advance(&self, step: f64, project: &dyn Fn(&mut [Point])) -> (Vec<Point>, Vec<Point>, f64) {
        let mut u: Vec<Point> =
            self.v.iter().zip(&self.g).map(|(v, g)| Point::new(v.x - step * g.x, v.y - step * g.y)).collect();
        project(&mut u);
        let a_next = next_momentum(self.a);
        let coef = (self.a - 1.0) / a_next;
        let mut v: Vec<Point> = u
            .iter()
            .zip(&self.u)
            .map(|(n, o)| Point::new(n.x + coef * (n.x - o.x), n.y + coef * (n.y - o.y)))
            .collect();
        project(&mut v);
        (u, v, a_next)
    }

    /// One iteration. If the Lipschitz estimate at the new point calls for a
    /// step below 95% of the one taken, the iteration is redone once with
    /// the smaller step.
    pub fn iterate(
        &mut self,
        grad: &mut dyn FnMut(&[Point]) -> Result<Vec<Point>>,
        project: &dyn Fn(&mut [Point]),
    ) -> Result<()> {
        let mut step = self.lipschitz_step(&self.v, &self.g, &self.v_prev, &self.g_prev, &self.g);
        let (mut u, mut v, a_next) = self.advance(step, project);
        let mut g = grad(&v)?;
        check_finite(&g)?;
        let est = self.lipschitz_step(&v, &g, &self.v, &self.g, &self.g);
        if est > 0.0 && est < 0.95 * step {
            self.backtracks += 1;
            step = est;
            (u, v, _) = self.advance(step, project);
            g = grad(&v)?;
            check_finite(&g)?;
        }
        self.v_prev = std::mem::replace(&mut self.v, v);
        self.g_prev = std::mem::replace(&mut self.g, g);
        self.u = u;
        self.a = a_next;
        self.step = step;
        Ok(())
    }
}
