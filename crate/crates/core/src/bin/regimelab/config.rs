use std::path::Path;

use regimelab::{FitConfig, ModelParams};
use serde_json::{Map, Value};

use crate::args::{FitFlags, ParamFlags};
use crate::fail::{CliError, CliResult};

pub const SEED_ENV: &str = "REGIMELAB_SEED";

pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

pub fn seed_or_env(flag: Option<u64>) -> CliResult<u64> {
    Ok(match flag {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

fn number(key: &str, v: &Value) -> CliResult<f64> {
    v.as_f64().ok_or_else(|| CliError::usage(format!("config key {key:?} must be a number")))
}

fn integer(key: &str, v: &Value) -> CliResult<u64> {
    v.as_u64().ok_or_else(|| CliError::usage(format!("config key {key:?} must be a non-negative integer")))
}

fn apply_file(cfg: &mut FitConfig, map: &Map<String, Value>) -> CliResult<()> {
    if map.contains_key("lambda") && map.contains_key("sig_rw") {
        return Err(CliError::usage("config sets both lambda and sig_rw"));
    }
    for (key, v) in map {
        match key.as_str() {
            "lambda" => cfg.lambda = number(key, v)?,
            "sig_rw" => cfg.lambda = FitConfig::lambda_from_sig_rw(number(key, v)?),
            "beta_fixed" => cfg.beta_fixed = number(key, v)?,
            "tau_a_hat" => cfg.tau_a_hat = number(key, v)?,
            "tau_p_hat" => cfg.tau_p_hat = number(key, v)?,
            "lam_alpha" => cfg.lam_alpha = number(key, v)?,
            "lam_gamma" => cfg.lam_gamma = number(key, v)?,
            "lam_kappa" => cfg.lam_kappa = number(key, v)?,
            "gauge_w" => cfg.gauge_w = number(key, v)?,
            "eps_p" => cfg.eps_p = number(key, v)?,
            "max_iterations" => cfg.optimizer.max_iterations = integer(key, v)? as usize,
            "gradient_tolerance" => cfg.optimizer.gradient_tolerance = number(key, v)?,
            "seed" => cfg.optimizer.seed = integer(key, v)?,
            other => return Err(CliError::usage(format!("unknown config key {other:?}"))),
        }
    }
    Ok(())
}

fn read_config_file(path: &Path) -> CliResult<Map<String, Value>> {
    let raw = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    match serde_json::from_slice::<Value>(&raw) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::usage(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(CliError::usage(format!("{}: {e}", path.display()))),
    }
}

/// Defaults, then `REGIMELAB_SEED`, then the config file, then flags.
pub fn resolve_fit_config(flags: &FitFlags) -> CliResult<FitConfig> {
    let mut cfg = FitConfig::default();
    if let Some(seed) = env_seed()? {
        cfg.optimizer.seed = seed;
    }
    if let Some(path) = &flags.config {
        apply_file(&mut cfg, &read_config_file(path)?)?;
    }
    if let Some(v) = flags.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = flags.sig_rw {
        cfg.lambda = FitConfig::lambda_from_sig_rw(v);
    }
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.beta_fixed, flags.beta_fixed);
    set(&mut cfg.tau_a_hat, flags.tau_a_hat);
    set(&mut cfg.tau_p_hat, flags.tau_p_hat);
    set(&mut cfg.lam_alpha, flags.lam_alpha);
    set(&mut cfg.lam_gamma, flags.lam_gamma);
    set(&mut cfg.lam_kappa, flags.lam_kappa);
    set(&mut cfg.gauge_w, flags.gauge_w);
    set(&mut cfg.eps_p, flags.eps_p);
    set(&mut cfg.optimizer.gradient_tolerance, flags.gradient_tolerance);
    if let Some(v) = flags.max_iterations {
        cfg.optimizer.max_iterations = v;
    }
    if let Some(v) = flags.seed {
        cfg.optimizer.seed = v;
    }
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn resolve_params(flags: &ParamFlags) -> CliResult<ModelParams> {
    let d = ModelParams::default();
    let p = ModelParams {
        beta: flags.beta.unwrap_or(d.beta),
        alpha: flags.alpha.unwrap_or(d.alpha),
        gamma: flags.gamma.unwrap_or(d.gamma),
        tau_a: flags.tau_a.unwrap_or(d.tau_a),
        tau_p: flags.tau_p.unwrap_or(d.tau_p),
        kappa: flags.kappa.unwrap_or(d.kappa),
        eps_p: flags.eps_p.unwrap_or(d.eps_p),
    };
    p.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(p)
}

/// `start:stop:count`, count ≥ 1; a single point is `start`.
pub fn parse_linear_grid(spec: &str) -> CliResult<Vec<f64>> {
    let (start, stop, count) = split_grid(spec)?;
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
        .collect())
}

pub fn parse_log_grid(spec: &str) -> CliResult<Vec<f64>> {
    let (lo, hi, count) = split_grid(spec)?;
    regimelab::log_grid(lo, hi, count).map_err(|e| CliError::usage(format!("grid {spec:?}: {e}")))
}

fn split_grid(spec: &str) -> CliResult<(f64, f64, usize)> {
    let bad = || CliError::usage(format!("grid {spec:?} must look like start:stop:count with count >= 1"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}
