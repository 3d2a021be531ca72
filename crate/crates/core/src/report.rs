//! Text renderings of fits, sweeps and sensitivity profiles.
//!
//! Every floating-point field is written with [`fmt_sig`] (12 significant
//! digits), so identical inputs give byte-identical files.

use serde_json::Value;

use crate::error::Result;
use crate::estimation::{trajectory_sensitivities, FitResult, SweepResult};
use crate::format::{fmt_sig, round_sig};
use crate::model::{regime_probs, ModelParams};

pub const TRAJECTORY_HEADER: &str = "position,turn,label,G_hat,p_np,p_fr,p_mn,d_p_np,d_p_fr,d_p_mn,d2_p_fr";
pub const SWEEP_HEADER: &str = "lambda,adj_rmse_prev,mn_calibration,neg_loglik,pen_rw,gauge_pen,pen_l2";
pub const SENSITIVITY_HEADER: &str =
    "position,turn,label,G_hat,d_p_np,d_p_fr,d_p_mn,d2_p_fr,d_p_fr_lat,d_p_mn_lat";
pub const PROBS_HEADER: &str = "gap,p_np,p_fr,p_mn,p_fr_lat,p_mn_lat,z_mn";

fn row(fields: impl IntoIterator<Item = String>) -> String {
    let mut line = fields.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub fn trajectory_csv(fit: &FitResult) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    let sens = trajectory_sensitivities(fit);
    for (i, ((g, p), s)) in fit.gaps().iter().zip(&fit.probs).zip(&sens).enumerate() {
        out.push_str(&row([
            (i + 1).to_string(),
            fit.turns[i].to_string(),
            fit.labels[i].to_string(),
            fmt_sig(*g),
            fmt_sig(p.p_np),
            fmt_sig(p.p_fr),
            fmt_sig(p.p_mn),
            fmt_sig(s.d_p_np),
            fmt_sig(s.d_p_fr),
            fmt_sig(s.d_p_mn),
            fmt_sig(s.d2_p_fr),
        ]));
    }
    out
}

pub fn sensitivity_csv(fit: &FitResult) -> String {
    let mut out = format!("{SENSITIVITY_HEADER}\n");
    for (i, (g, s)) in fit.gaps().iter().zip(trajectory_sensitivities(fit)).enumerate() {
        out.push_str(&row([
            (i + 1).to_string(),
            fit.turns[i].to_string(),
            fit.labels[i].to_string(),
            fmt_sig(*g),
            fmt_sig(s.d_p_np),
            fmt_sig(s.d_p_fr),
            fmt_sig(s.d_p_mn),
            fmt_sig(s.d2_p_fr),
            fmt_sig(s.d_p_fr_lat),
            fmt_sig(s.d_p_mn_lat),
        ]));
    }
    out
}

/// One row per grid value; `adj_rmse_prev` is empty on the first row and
/// `mn_calibration` is empty when the corpus has no MN turns.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for (i, (lambda, fit)) in sweep.grid.iter().zip(&sweep.fits).enumerate() {
        let adj = if i == 0 { String::new() } else { fmt_sig(sweep.adj_rmse[i - 1]) };
        let cal = sweep.mn_calibration[i].map(fmt_sig).unwrap_or_default();
        let o = &fit.objective;
        out.push_str(&row([
            fmt_sig(*lambda),
            adj,
            cal,
            fmt_sig(o.neg_loglik),
            fmt_sig(o.pen_rw),
            fmt_sig(o.gauge_pen),
            fmt_sig(o.pen_l2),
        ]));
    }
    out
}

pub fn probs_csv(gaps: &[f64], params: &ModelParams) -> Result<String> {
    let mut out = format!("{PROBS_HEADER}\n");
    for &g in gaps {
        let p = regime_probs(g, params)?;
        out.push_str(&row([
            fmt_sig(g),
            fmt_sig(p.p_np),
            fmt_sig(p.p_fr),
            fmt_sig(p.p_mn),
            fmt_sig(p.p_fr_lat),
            fmt_sig(p.p_mn_lat),
            fmt_sig(p.z_mn),
        ]));
    }
    Ok(out)
}

/// Round every floating-point number in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Pretty JSON with floats at 12 significant digits.
pub fn to_rounded_json<T: serde::Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("plain data serializes");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn fit_json(fit: &FitResult) -> String {
    to_rounded_json(fit)
}
