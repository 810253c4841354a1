//! Flat `key = value` run configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys are the snake_case names accepted by [`apply`]. Unknown keys and
//! malformed values are errors that carry the line number.

use std::path::Path;
use std::str::FromStr;

use crate::accfft::Matching;
use crate::error::{Error, Result};
use crate::field::Padding;
use crate::optimizer::MuRule;
use crate::placer::RunConfig;

/// Every key [`apply`] understands.
pub const KEYS: &[&str] = &[
    "grid",
    "grid_x",
    "grid_y",
    "alpha",
    "window",
    "target_density",
    "tau_min",
    "max_iters",
    "seed",
    "solver",
    "short_range",
    "k_e",
    "padding",
    "precondition",
    "neutralize",
    "init_jitter",
    "test_points",
    "ring_radius",
    "stencil_radius",
    "matching",
    "moment_order",
    "mu_rule",
    "mu_base",
    "mu_min",
    "mu_max",
    "delta_hpwl_ref",
    "hpwl_norm",
    "gamma_coef",
    "clamp_fraction",
    "clamp_tau",
    "step_min",
    "step_max",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
}

fn parse_with<T>(key: &str, value: &str, f: impl Fn(&str) -> Option<T>) -> Result<T> {
    f(value).ok_or_else(|| Error::invalid(format!("bad value {value:?} for {key}")))
}

/// Sets one configuration key.
pub fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    let s = &mut cfg.schedule;
    let p = &mut cfg.solver.projection;
    match key {
        "grid" => {
            cfg.nx = parse(key, value)?;
            cfg.ny = cfg.nx;
        }
        "grid_x" => cfg.nx = parse(key, value)?,
        "grid_y" => cfg.ny = parse(key, value)?,
        "alpha" => cfg.solver.alpha = parse(key, value)?,
        "window" => cfg.solver.window = Some(parse(key, value)?),
        "target_density" => cfg.target_density = parse(key, value)?,
        "tau_min" => cfg.tau_min = parse(key, value)?,
        "max_iters" => cfg.max_iters = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        "solver" => cfg.solver.mode = value.parse()?,
        "short_range" => cfg.solver.short_range = value.parse()?,
        "k_e" => cfg.solver.k_e = parse(key, value)?,
        "padding" => {
            cfg.solver.padding = parse_with(key, value, |v| match v {
                "zero" => Some(Padding::Zero),
                "periodic" => Some(Padding::Periodic),
                _ => None,
            })?
        }
        "precondition" => cfg.precondition = parse(key, value)?,
        "neutralize" => cfg.neutralize = parse(key, value)?,
        "init_jitter" => cfg.init_jitter = parse(key, value)?,
        "test_points" => p.test_points = parse(key, value)?,
        "ring_radius" => p.ring_radius = parse(key, value)?,
        "stencil_radius" => p.stencil_radius = parse(key, value)?,
        "matching" => {
            p.matching = parse_with(key, value, |v| match v {
                "components" => Some(Matching::Components),
                "magnitude" => Some(Matching::Magnitude),
                _ => None,
            })?
        }
        "moment_order" => p.moment_order = parse(key, value)?,
        "mu_rule" => {
            s.mu_rule = parse_with(key, value, |v| match v {
                "relative" => Some(MuRule::Relative),
                "growth" => Some(MuRule::Growth),
                _ => None,
            })?
        }
        "mu_base" => s.mu_base = parse(key, value)?,
        "mu_min" => s.mu_min = parse(key, value)?,
        "mu_max" => s.mu_max = parse(key, value)?,
        "delta_hpwl_ref" => s.delta_hpwl_ref = parse(key, value)?,
        "hpwl_norm" => s.hpwl_norm = parse(key, value)?,
        "gamma_coef" => s.gamma_coef = parse(key, value)?,
        "clamp_fraction" => s.clamp_fraction = parse(key, value)?,
        "clamp_tau" => s.clamp_tau = parse(key, value)?,
        "step_min" => s.step_min = parse(key, value)?,
        "step_max" => s.step_max = parse(key, value)?,
        _ => return Err(Error::invalid(format!("unknown config key {key:?}"))),
    }
    Ok(())
}

/// Splits config text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: "<config>".into(),
            line: i + 1,
            msg: "expected key = value".into(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Parse { path: "<config>".into(), line: i + 1, msg: "empty key or value".into() });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Applies config text on top of `cfg`.
pub fn apply_text(cfg: &mut RunConfig, text: &str, origin: &str) -> Result<()> {
    for (line, k, v) in parse_pairs(text).map_err(|e| relabel(e, origin))? {
        apply(cfg, &k, &v).map_err(|e| Error::Parse { path: origin.into(), line, msg: e.to_string() })?;
    }
    Ok(())
}

pub fn load_config(path: &Path, cfg: &mut RunConfig) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    apply_text(cfg, &text, &path.display().to_string())
}

fn relabel(e: Error, origin: &str) -> Error {
    match e {
        Error::Parse { line, msg, .. } => Error::Parse { path: origin.into(), line, msg },
        other => other,
    }
}
