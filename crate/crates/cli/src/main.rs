//! `accplace`: global placement, evaluation, solver benchmarks, synthetic
//! netlists and placement plots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accplace::accfft::ShortRangeMode;
use accplace::bench::{field_bench, BenchConfig};
use accplace::bookshelf::{parse_bookshelf, read_positions, write_bookshelf, write_pl};
use accplace::config::load_config;
use accplace::placer::{run_global_placement, IterRecord, RunConfig};
use accplace::plot::write_svg;
use accplace::solver::SolverMode;
use accplace::synth::{default_region, gen_synthetic};
use accplace::wirelength::hpwl;
use accplace::{Cell, Error, Point};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "accplace", version, about = "Electrostatic global placer with an accelerated FFT field solver")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run global placement on a Bookshelf design.
    Place(PlaceArgs),
    /// Print the HPWL of a placement.
    Eval {
        #[arg(long)]
        aux: PathBuf,
        #[arg(long)]
        pl: PathBuf,
    },
    /// Compare field solvers on random charges.
    FieldBench(BenchArgs),
    /// Write a synthetic Bookshelf design.
    Gen {
        #[arg(long)]
        cells: usize,
        #[arg(long)]
        nets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Cell area over region area.
        #[arg(long, default_value_t = 0.7)]
        utilization: f64,
        #[arg(long, default_value = "synth")]
        name: String,
    },
    /// Render a placement as SVG.
    Plot {
        #[arg(long)]
        aux: PathBuf,
        #[arg(long)]
        pl: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PlaceArgs {
    #[arg(long)]
    aux: PathBuf,
    /// Flat key = value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    target_density: Option<f64>,
    #[arg(long)]
    tau_min: Option<f64>,
    /// direct, fine-fft or accfft.
    #[arg(long)]
    solver: Option<SolverMode>,
    /// fft or direct.
    #[arg(long)]
    short_range: Option<ShortRangeMode>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write an SVG snapshot every N iterations next to the output.
    #[arg(long)]
    every: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 4)]
    alpha: usize,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 200)]
    charges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "direct,fine-fft,accfft")]
    modes: Vec<SolverMode>,
    #[arg(long, default_value = "fft")]
    short_range: ShortRangeMode,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    threads: Option<usize>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = Result<T, Failure>;

fn set_threads(threads: Option<usize>) -> Res<()> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn snapshot_path(out: &Path, iter: usize) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "place".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.iter{iter}.svg"))
}

fn place(a: PlaceArgs) -> Res<()> {
    set_threads(a.threads)?;
    let mut cfg = RunConfig::default();
    if let Some(p) = &a.config {
        load_config(p, &mut cfg)?;
    }
    if let Some(g) = a.grid {
        cfg.nx = g;
        cfg.ny = g;
    }
    macro_rules! set {
        ($($field:expr => $val:expr),*) => { $(if let Some(v) = $val { $field = v; })* };
    }
    set!(cfg.solver.alpha => a.alpha, cfg.target_density => a.target_density, cfg.tau_min => a.tau_min,
         cfg.solver.mode => a.solver, cfg.solver.short_range => a.short_range,
         cfg.max_iters => a.max_iters, cfg.seed => a.seed);
    if a.window.is_some() {
        cfg.solver.window = a.window;
    }
    if a.every == Some(0) {
        return Err(Failure::Usage("--every must be at least 1".into()));
    }

    let netlist = parse_bookshelf(&a.aux)?;
    let region = netlist.region;
    let out = a.out.clone();
    let mut hook = |r: &IterRecord, cells: &[Cell], pos: &[Point]| -> accplace::Result<()> {
        match a.every {
            Some(n) if (r.iter + 1).is_multiple_of(n) => {
                write_svg(&snapshot_path(&out, r.iter + 1), cells, pos, &region)
            }
            _ => Ok(()),
        }
    };
    let (pos, report) = run_global_placement(&netlist, &cfg, Some(&mut hook))?;
    write_pl(&netlist, &pos, &a.out)?;
    if let Some(r) = &a.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_text(r, &json)?;
    }
    println!(
        "iterations {} converged {} tau {:.4} hpwl {:.6e} time {:.2}s field {:.2}s",
        report.iterations, report.converged, report.final_tau, report.final_hpwl, report.total_secs, report.field_secs
    );
    Ok(())
}

fn eval(aux: &Path, pl: &Path) -> Res<()> {
    let netlist = parse_bookshelf(aux)?;
    let pos = read_positions(&netlist, pl)?;
    let h = hpwl(&netlist, &pos);
    println!("HPWL {h}");
    println!("{}", serde_json::json!({ "hpwl": h, "cells": netlist.cells.len(), "nets": netlist.nets.len() }));
    Ok(())
}

fn opt(v: Option<f64>, pct: bool) -> String {
    match v {
        Some(x) if pct => format!("{:.4}%", 100.0 * x),
        Some(x) => format!("{x:.3}"),
        None => "-".into(),
    }
}

fn bench(a: BenchArgs) -> Res<()> {
    set_threads(a.threads)?;
    let cfg = BenchConfig {
        grid: a.grid,
        alpha: a.alpha,
        window: a.window,
        charges: a.charges,
        seed: a.seed,
        modes: a.modes,
        short_range: a.short_range,
        repeats: a.repeats,
        ..Default::default()
    };
    let rep = field_bench(&cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
        return Ok(());
    }
    println!(
        "{:<9} {:>11} {:>6} {:>8} {:>8} {:>10} {:>10} {:>7}",
        "mode", "time_ms", "ffts", "aligned", "shifted", "rms_err", "max_err", "sr_share"
    );
    for r in &rep.rows {
        println!(
            "{:<9} {:>11.3} {:>6} {:>8} {:>8} {:>10} {:>10} {:>7}",
            r.mode.to_string(),
            r.secs * 1e3,
            r.ffts,
            r.aligned_window_ffts,
            r.shifted_window_ffts,
            opt(r.rms_error, true),
            opt(r.max_error, true),
            opt(r.short_range_share, false)
        );
    }
    Ok(())
}

fn gen(cells: usize, nets: usize, seed: u64, out: &Path, util: f64, name: &str) -> Res<()> {
    if !(util > 0.0 && util <= accplace::synth::MAX_UTILIZATION) {
        return Err(Failure::Usage(format!("--utilization must be in (0, {}]", accplace::synth::MAX_UTILIZATION)));
    }
    let nl = gen_synthetic(cells, nets, default_region(cells, util), seed)?;
    let aux = write_bookshelf(&nl, out, name)?;
    println!("{}", aux.display());
    Ok(())
}

fn plot(aux: &Path, pl: &Path, out: &Path) -> Res<()> {
    let netlist = parse_bookshelf(aux)?;
    let pos = read_positions(&netlist, pl)?;
    write_svg(out, &netlist.cells, &pos, &netlist.region)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let res = match cli.cmd {
        Cmd::Place(a) => place(a),
        Cmd::Eval { aux, pl } => eval(&aux, &pl),
        Cmd::FieldBench(a) => bench(a),
        Cmd::Gen { cells, nets, seed, out, utilization, name } => gen(cells, nets, seed, &out, utilization, &name),
        Cmd::Plot { aux, pl, out } => plot(&aux, &pl, &out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
