//! The global placement loop and its run report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{
    build_grid, compute_density, compute_overflow, compute_smoothed_density, insert_fillers, to_charges, GridSpec,
};
use crate::error::{Error, Result};
use crate::netlist::{Cell, Netlist, Point};
use crate::optimizer::{
    clamp_to_region, density_gradient, init_lambda, update_schedules, Nesterov, PlacerState, ScheduleParams,
};
use crate::solver::{FieldSolver, SolverConfig, SolverStats};
use crate::wirelength::{hpwl, wa_gradient, wa_wirelength, WaParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub target_density: f64,
    pub tau_min: f64,
    pub max_iters: usize,
    pub seed: u64,
    #[serde(skip)]
    pub solver: SolverConfig,
    pub schedule: ScheduleParams,
    /// Divide each cell's gradient by `max(1, pins + λ·area)`.
    pub precondition: bool,
    /// Solve for the field of the density excess over the target, so a
    /// uniform spread at the target density is force-free.
    pub neutralize: bool,
    /// Movable cells start displaced by up to this many bin pitches per axis,
    /// so a perfectly symmetric initial stack does not sit in equilibrium.
    pub init_jitter: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nx: 1024,
            ny: 1024,
            target_density: 1.0,
            tau_min: 0.10,
            max_iters: 3000,
            seed: 1,
            solver: SolverConfig::default(),
            schedule: ScheduleParams::default(),
            precondition: true,
            neutralize: true,
            init_jitter: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub tau: f64,
    pub hpwl: f64,
    pub wa: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub step: f64,
    /// Field solves in this iteration, including a backtracking retry.
    pub solves: u32,
    pub field_secs: f64,
    /// Wall clock since the start of the loop when the iteration finished.
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub solver: String,
    pub grid: [usize; 2],
    pub cells: usize,
    pub fillers: usize,
    pub nets: usize,
    pub iterations: usize,
    pub converged: bool,
    pub initial_hpwl: f64,
    pub final_hpwl: f64,
    pub final_tau: f64,
    pub backtracks: u64,
    pub total_secs: f64,
    /// Sum of per-iteration field time.
    pub field_secs: f64,
    /// Field time spent before the first iteration.
    pub setup_field_secs: f64,
    pub solver_stats: SolverStats,
    pub records: Vec<IterRecord>,
}

const JITTER_STREAM: u64 = 0x6a69_7474_6572;

/// Called after every iteration with all cells (fillers last) and their
/// positions. Returning an error aborts the run.
pub type IterHook<'a> = dyn FnMut(&IterRecord, &[Cell], &[Point]) -> Result<()> + 'a;

struct Evaluator<'a> {
    netlist: &'a Netlist,
    cells: Vec<Cell>,
    moves: Vec<bool>,
    pins: Vec<f64>,
    spec: GridSpec,
    solver: FieldSolver,
    wa: WaParams,
    lambda: f64,
    precondition: bool,
    neutralize: bool,
    target: f64,
    // Filled by the last evaluation.
    tau: f64,
    solves: u32,
    field_secs: f64,
}

impl Evaluator<'_> {
    fn density_grad(&mut self, v: &[Point]) -> Result<Vec<Point>> {
        let dm = compute_smoothed_density(&self.cells, v, &self.spec, self.target);
        let mut cg = to_charges(&dm);
        if self.neutralize {
            cg.q.iter_mut().for_each(|q| *q -= self.target);
        }
        let t = Instant::now();
        let field = self.solver.solve(&cg);
        self.field_secs += t.elapsed().as_secs_f64();
        self.solves += 1;
        if !field.is_finite() {
            return Err(Error::Numerical("field solve produced non-finite values".into()));
        }
        let n = self.netlist.cells.len();
        let real = compute_density(&self.cells[..n], &v[..n], &self.spec, self.target);
        self.tau = compute_overflow(&real, self.netlist.movable_area());
        Ok(density_gradient(&self.cells, v, &self.moves, &field))
    }

    fn wire_grad(&self, v: &[Point]) -> Vec<Point> {
        let mut g = wa_gradient(self.netlist, &v[..self.netlist.cells.len()], &self.wa);
        g.resize(self.cells.len(), Point::default());
        g
    }

    fn grad(&mut self, v: &[Point]) -> Result<Vec<Point>> {
        let gn = self.density_grad(v)?;
        let gw = self.wire_grad(v);
        let lambda = self.lambda;
        Ok(gw
            .iter()
            .zip(&gn)
            .zip(self.cells.iter().zip(&self.pins))
            .map(|((w, d), (c, &p))| {
                let h = if self.precondition { (p + lambda * c.area()).max(1.0) } else { 1.0 };
                Point::new((w.x + lambda * d.x) / h, (w.y + lambda * d.y) / h)
            })
            .collect())
    }
}

/// Runs global placement from the netlist's current positions. Returns the
/// final positions of the netlist's cells (fixed cells unchanged) and the
/// report. Reaching the iteration cap is not an error; the report's
/// `converged` flag is false instead.
pub fn run_global_placement(
    netlist: &Netlist,
    cfg: &RunConfig,
    mut hook: Option<&mut IterHook<'_>>,
) -> Result<(Vec<Point>, RunReport)> {
    let spec = build_grid(netlist.region, cfg.nx, cfg.ny)?;
    if cfg.tau_min.is_nan() || cfg.tau_min <= 0.0 {
        return Err(Error::invalid(format!("tau_min must be positive, got {}", cfg.tau_min)));
    }
    let fillers = insert_fillers(netlist, cfg.target_density, cfg.seed)?;
    let n = netlist.cells.len();
    let mut cells = netlist.cells.clone();
    cells.extend(fillers);
    let moves: Vec<bool> = cells.iter().map(|c| !c.is_fixed()).collect();
    let mut pins: Vec<f64> = netlist.pin_counts().into_iter().map(|p| p as f64).collect();
    pins.resize(cells.len(), 0.0);
    let region = netlist.region;
    let project = |p: &mut [Point]| clamp_to_region(&cells, p, &moves, &region);

    let bin = spec.bin_pitch();
    let mut v0: Vec<Point> = cells.iter().map(|c| c.pos).collect();
    if cfg.init_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ JITTER_STREAM);
        let r = cfg.init_jitter * bin;
        for (p, c) in v0[..n].iter_mut().zip(&netlist.cells) {
            if c.is_movable() {
                p.x += rng.gen_range(-r..=r);
                p.y += rng.gen_range(-r..=r);
            }
        }
    }
    project(&mut v0);

    let solver = FieldSolver::new(&spec, &cfg.solver)?;
    let sched = cfg.schedule;
    let start = Instant::now();
    let mut ev = Evaluator {
        netlist,
        cells: cells.clone(),
        moves: moves.clone(),
        pins,
        spec,
        solver,
        wa: WaParams::new(1.0),
        lambda: 0.0,
        precondition: cfg.precondition,
        neutralize: cfg.neutralize,
        target: cfg.target_density,
        tau: 0.0,
        solves: 0,
        field_secs: 0.0,
    };

    let gn0 = ev.density_grad(&v0)?;
    let tau0 = ev.tau;
    ev.wa.gamma = sched.gamma(tau0, bin);
    ev.wa.clamp_active = sched.clamp_active(0, cfg.max_iters, tau0);
    let gw0 = ev.wire_grad(&v0);
    let lambda0 = init_lambda(&gw0, &gn0);
    ev.lambda = lambda0;
    let hpwl0 = hpwl(netlist, &v0[..n]);
    let mut state = PlacerState::new(lambda0, tau0, hpwl0, &sched, bin);
    log::info!(
        "start: {} cells, {} fillers, hpwl {hpwl0:.4e}, tau {tau0:.4}, lambda {lambda0:.4e}",
        n,
        cells.len() - n
    );

    let bounds = (sched.step_min * bin, sched.step_max * bin);
    let mut nest = Nesterov::start(v0, bin, bounds, &mut |v| ev.grad(v), &project)?;

    let mut records = Vec::new();
    let mut converged = false;
    let setup_field_secs = ev.field_secs;
    let mut field_total = 0.0;
    for iter in 0..cfg.max_iters {
        ev.solves = 0;
        ev.field_secs = 0.0;
        nest.iterate(&mut |v| ev.grad(v), &project)?;
        let v = &nest.v;
        let h = hpwl(netlist, &v[..n]);
        let wa = wa_wirelength(netlist, &v[..n], &ev.wa);
        let tau = ev.tau;
        let rec = IterRecord {
            iter,
            tau,
            hpwl: h,
            wa,
            lambda: state.lambda,
            gamma: state.gamma,
            step: nest.step,
            solves: ev.solves,
            field_secs: ev.field_secs,
            elapsed_secs: start.elapsed().as_secs_f64(),
        };
        field_total += ev.field_secs;
        if iter % 50 == 0 {
            log::debug!("iter {iter}: tau {tau:.4} hpwl {h:.4e} lambda {:.3e} step {:.3e}", state.lambda, nest.step);
        }
        if let Some(hk) = hook.as_deref_mut() {
            hk(&rec, &cells, v)?;
        }
        records.push(rec);
        if tau < cfg.tau_min {
            converged = true;
            break;
        }
        update_schedules(&mut state, &sched, tau, h, bin);
        ev.lambda = state.lambda;
        ev.wa.gamma = state.gamma;
        ev.wa.clamp_active = sched.clamp_active(iter + 1, cfg.max_iters, tau);
    }

    let mut out: Vec<Point> = nest.v[..n].to_vec();
    for (p, c) in out.iter_mut().zip(&netlist.cells) {
        if c.is_fixed() {
            *p = c.pos;
        }
    }
    let last = records.last();
    let report = RunReport {
        solver: cfg.solver.mode.to_string(),
        grid: [cfg.nx, cfg.ny],
        cells: n,
        fillers: cells.len() - n,
        nets: netlist.nets.len(),
        iterations: records.len(),
        converged,
        initial_hpwl: hpwl0,
        final_hpwl: hpwl(netlist, &out),
        final_tau: last.map_or(tau0, |r| r.tau),
        backtracks: nest.backtracks,
        total_secs: start.elapsed().as_secs_f64(),
        field_secs: field_total,
        setup_field_secs,
        solver_stats: ev.solver.stats(),
        records,
    };
    log::info!(
        "done: {} iterations, converged {}, hpwl {:.4e}, tau {:.4}",
        report.iterations,
        report.converged,
        report.final_hpwl,
        report.final_tau
    );
    Ok((out, report))
}
