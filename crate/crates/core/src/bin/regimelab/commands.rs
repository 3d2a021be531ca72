use std::io::Write;
use std::path::{Path, PathBuf};

use regimelab::report::{fit_json, probs_csv, sensitivity_csv, sweep_csv, to_rounded_json, trajectory_csv};
use regimelab::{
    dynamics_csv, fit_map, format::fmt_sig, gradient_oracle, lambda_sweep, lambda_sweep_cold, load_corpus,
    synthesize, FitResult, LabeledCorpus, RegimeError, Scenario, SynthSpec,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{CheckgradArgs, DynamicsArgs, FitArgs, ProbsArgs, SensArgs, SweepArgs, SynthArgs};
use crate::config::{parse_linear_grid, parse_log_grid, resolve_fit_config, resolve_params, seed_or_env};
use crate::fail::{CliError, CliResult, EXIT_NUMERIC, EXIT_SCHEMA};

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_digest: String,
    input_digest: Option<String>,
    tool_version: &'static str,
    timestamp: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest<C: Serialize>(command: &str, config: &C, input: Option<&[u8]>) -> String {
    let config_json = serde_json::to_string(&serde_json::to_value(config).expect("config serializes"))
        .expect("config serializes");
    let m = RunManifest {
        command: command.to_string(),
        config_digest: sha256_hex(config_json.as_bytes()),
        input_digest: input.map(sha256_hex),
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
    s.push('\n');
    s
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn out_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn read_corpus(path: &Path) -> CliResult<(LabeledCorpus, Vec<u8>)> {
    let raw = read(path)?;
    let corpus = load_corpus(&raw).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })?;
    Ok((corpus, raw))
}

pub fn probs(a: &ProbsArgs) -> CliResult<()> {
    let grid = parse_linear_grid(&a.grid)?;
    let params = resolve_params(&a.params)?;
    emit(a.out.as_ref(), &probs_csv(&grid, &params)?)
}

pub fn dynamics(a: &DynamicsArgs) -> CliResult<()> {
    let (corpus, _) = read_corpus(&a.corpus)?;
    emit(a.out.as_ref(), &dynamics_csv(&corpus, a.window)?)
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let cfg = resolve_fit_config(&a.fit)?;
    let (corpus, raw) = read_corpus(&a.corpus)?;
    let fit = fit_map(&corpus, &cfg)?;
    out_dir(&a.out_dir)?;
    write(&a.out_dir.join("fit.json"), &fit_json(&fit))?;
    write(&a.out_dir.join("trajectory.csv"), &trajectory_csv(&fit))?;
    write(&a.out_dir.join("manifest.json"), &manifest("fit", &cfg, Some(&raw)))?;
    if !fit.converged {
        eprintln!(
            "warning: optimizer stopped after {} iterations without meeting the gradient tolerance",
            fit.iterations
        );
    }
    println!("{}", fmt_sig(fit.objective.neg_logpost));
    Ok(())
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    fit: &'a regimelab::FitConfig,
    grid: &'a [f64],
    cold: bool,
    lambda_fallback: Option<f64>,
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let cfg = resolve_fit_config(&a.fit)?;
    let grid = parse_log_grid(&a.grid_log)?;
    let (corpus, raw) = read_corpus(&a.corpus)?;
    let result = if a.cold {
        lambda_sweep_cold(&corpus, &cfg, &grid, a.threads)?
    } else {
        lambda_sweep(&corpus, &cfg, &grid)?
    };
    out_dir(&a.out_dir)?;
    write(&a.out_dir.join("sweep.csv"), &sweep_csv(&result))?;
    let record = SweepConfig { fit: &cfg, grid: &grid, cold: a.cold, lambda_fallback: a.fit.lambda };
    write(&a.out_dir.join("manifest.json"), &manifest("sweep", &record, Some(&raw)))?;
    let selected = match (result.selected_lambda, a.fit.lambda) {
        (Some(l), _) => l,
        (None, Some(l)) => l,
        (None, None) => return Err(RegimeError::CalibrationUnavailable.into()),
    };
    println!("{}", fmt_sig(selected));
    Ok(())
}

pub fn sens(a: &SensArgs) -> CliResult<()> {
    let raw = read(&a.fit)?;
    let fit: FitResult = serde_json::from_slice(&raw)
        .map_err(|e| CliError::new(EXIT_SCHEMA, format!("{}: not a fit result: {e}", a.fit.display())))?;
    let n = fit.gaps().len();
    if fit.turns.len() != n || fit.labels.len() != n || fit.probs.len() != n {
        return Err(CliError::new(EXIT_SCHEMA, format!("{}: per-turn arrays differ in length", a.fit.display())));
    }
    if let Some(t) = fit.gaps().iter().position(|g| !g.is_finite()) {
        return Err(CliError::new(EXIT_NUMERIC, format!("{}: G_hat at position {} is not finite", a.fit.display(), t + 1)));
    }
    emit(a.out.as_ref(), &sensitivity_csv(&fit))
}

pub fn synth(a: &SynthArgs) -> CliResult<()> {
    let scenario: Scenario = a.scenario.parse().map_err(CliError::usage)?;
    let spec = SynthSpec {
        length: a.length,
        sig_rw: a.sig_rw,
        g0: a.g0,
        params: resolve_params(&a.params)?,
        seed: seed_or_env(a.seed)?,
        scenario,
    };
    let syn = synthesize(&spec)?;
    out_dir(&a.out_dir)?;
    write(&a.out_dir.join("corpus.json"), &syn.corpus.to_json())?;
    let mut truth = String::from("position,turn,label,G_true\n");
    for (i, (t, g)) in syn.corpus.turns().iter().zip(&syn.trajectory).enumerate() {
        truth.push_str(&format!("{},{},{},{}\n", i + 1, t.turn, t.label, fmt_sig(*g)));
    }
    write(&a.out_dir.join("truth.csv"), &truth)?;
    write(&a.out_dir.join("spec.json"), &to_rounded_json(&spec))?;
    write(&a.out_dir.join("manifest.json"), &manifest("synth", &spec, None))?;
    Ok(())
}

pub fn checkgrad(a: &CheckgradArgs) -> CliResult<()> {
    let seed = seed_or_env(a.seed)?;
    let report = gradient_oracle(a.draws, seed, a.step)?;
    println!(
        "draws {} derivative_failures {} zero_sum_failures {} worst_rel_error {} worst_zero_sum {}",
        report.draws,
        report.derivative_failures,
        report.zero_sum_failures,
        fmt_sig(report.worst_rel_error),
        fmt_sig(report.worst_zero_sum)
    );
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::new(EXIT_NUMERIC, "gradient check failed"))
    }
}
