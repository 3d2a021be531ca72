//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p regimelab --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use regimelab::rng::{SeededRng, Stream};
use regimelab::sensitivity::oracle_draw;
use regimelab::{
    cumulative_counts, derivs_wrt_gap, fit_map, gradient_oracle, lambda_sweep, load_corpus, neg_logpost,
    recovery_report, regime_probs, select_lambda, shuffled_refit, sliding_proportions, synthesize, FitConfig,
    FitResult, Label, LabeledCorpus, ModelParams, ParamHat, SynthSpec,
};

const RAMP_SEED: u64 = 2024;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn ramp_fit() -> (Vec<f64>, LabeledCorpus, FitResult) {
    let syn = synthesize(&SynthSpec::ramp(RAMP_SEED)).unwrap();
    let fit = fit_map(&syn.corpus, &FitConfig::default()).unwrap();
    (syn.trajectory, syn.corpus, fit)
}

fn normalization() -> Outcome {
    let mut rng = SeededRng::new(1, Stream::GradCheck);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let (_, mut params) = oracle_draw(&mut rng);
        let gap = rng.uniform_in(-50.0, 50.0);
        if i % 100 == 0 {
            params.kappa = if i % 200 == 0 { 0.0 } else { 1.0 };
        }
        let p = regime_probs(gap, &params).unwrap();
        worst = worst.max((p.total() - 1.0).abs());
    }
    outcome(worst <= 4e-12, format!("worst |sum - 1| = {worst:e} over 10000 draws"))
}

fn gradient() -> Outcome {
    let r = gradient_oracle(1000, 7, 1e-5).unwrap();
    outcome(
        r.passed(),
        format!(
            "{} derivative failures, {} zero-sum failures; worst rel error {:e}, worst |sum| {:e}",
            r.derivative_failures, r.zero_sum_failures, r.worst_rel_error, r.worst_zero_sum
        ),
    )
}

fn counter_peak() -> Outcome {
    let p = ModelParams::default();
    let hits: Vec<f64> = (0..=1000)
        .map(|i| -5.0 + 0.01 * i as f64)
        .filter(|&g| {
            let b = derivs_wrt_gap(g, &p).unwrap();
            b.d_p_fr < 0.0 && b.d_p_mn > 0.0 && b.d_p_fr_lat > 0.0
        })
        .collect();
    match (hits.first(), hits.last()) {
        (Some(a), Some(b)) => outcome(true, format!("{} grid points in [{a:.2}, {b:.2}]", hits.len())),
        _ => outcome(false, "no counter-peaked point on the grid"),
    }
}

fn consumption() -> Outcome {
    let mut rng = SeededRng::new(4, Stream::GradCheck);
    let mut violations = 0;
    for _ in 0..1000 {
        let (gap, params) = oracle_draw(&mut rng);
        let (k1, k2) = {
            let (a, b) = (rng.uniform(), rng.uniform());
            (a.min(b), a.max(b))
        };
        let lo = regime_probs(gap, &ModelParams { kappa: k1, ..params }).unwrap();
        let hi = regime_probs(gap, &ModelParams { kappa: k2, ..params }).unwrap();
        if hi.p_fr > lo.p_fr || hi.p_np > lo.p_np {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} of 1000 draws violate monotonicity"))
}

fn recovery(truth: &[f64], corpus: &LabeledCorpus, fit: &FitResult) -> Outcome {
    let shuffled = shuffled_refit(corpus, &FitConfig::default(), RAMP_SEED).unwrap();
    let r = recovery_report(truth, fit, &shuffled).unwrap();
    outcome(
        r.passed(),
        format!(
            "RMSE {:.4} vs zeros {:.4}; r {:.4} vs shuffled {:.4}",
            r.rmse, r.rmse_zeros, r.correlation, r.correlation_shuffled
        ),
    )
}

fn shape(fit: &FitResult) -> Outcome {
    let g = fit.gaps();
    let third = g.len() / 3;
    let first = g[..third].iter().sum::<f64>() / third as f64;
    let last = g[g.len() - third..].iter().sum::<f64>() / third as f64;
    outcome(first < last, format!("first-third mean {first:.4}, last-third mean {last:.4}"))
}

fn calibration(corpus: &LabeledCorpus) -> Outcome {
    let sweep = lambda_sweep(corpus, &FitConfig::default(), &regimelab::default_lambda_grid()).unwrap();
    let selected = match select_lambda(&sweep, 0.5) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("selection failed: {e}")),
    };
    let idx = sweep.grid.iter().position(|l| *l == selected).unwrap();
    let cal = sweep.mn_calibration[idx].unwrap();
    let nearest = sweep
        .mn_calibration
        .iter()
        .all(|c| c.is_none_or(|c| (c - 0.5).abs() >= (cal - 0.5).abs()));
    let in_band = cal > 0.2 && cal < 0.8;
    let (lo, hi) = sweep
        .mn_calibration
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(*c), b.max(*c)));
    outcome(
        in_band && nearest,
        format!(
            "selected lambda {selected:.4} with mean P_MN on MN turns {cal:.4} (band (0.2, 0.8): {}; nearest 0.5: {nearest}); grid range [{lo:.4}, {hi:.4}]",
            if in_band { "inside" } else { "outside" }
        ),
    )
}

fn smoothing(corpus: &LabeledCorpus) -> Outcome {
    let focal = load_corpus(&std::fs::read(data("toc_focus18.json")).unwrap()).unwrap();
    let cfg = FitConfig { lambda: 1e6, ..FitConfig::default() };
    let mut worst: f64 = 0.0;
    for c in [corpus, &focal] {
        let fit = fit_map(c, &cfg).unwrap();
        let g = fit.gaps();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        worst = worst.max(g.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max));
    }
    outcome(worst <= 1e-2, format!("max |G_t - mean(G)| = {worst:e} on ramp and focal corpora"))
}

fn objective_oracle() -> Outcome {
    let raw = std::fs::read_to_string(data("objective_oracle.json")).unwrap();
    let cases: Vec<serde_json::Value> = serde_json::from_str(&raw).unwrap();
    let mut worst: f64 = 0.0;
    for case in &cases {
        let ph: ParamHat = serde_json::from_value(case.clone()).unwrap();
        let labels: Vec<Label> = serde_json::from_value(case["labels"].clone()).unwrap();
        let cfg: FitConfig = serde_json::from_value(case["config"].clone()).unwrap();
        let terms = neg_logpost(&ph, &labels, &cfg).unwrap();
        let got = [terms.neg_logpost, terms.neg_loglik, terms.pen_rw, terms.gauge_pen, terms.pen_l2];
        let keys = ["neg_logpost", "neg_loglik", "pen_rw", "gauge_pen", "pen_l2"];
        for (g, k) in got.iter().zip(keys) {
            let want: f64 = case["expected"][k].as_str().unwrap().parse().unwrap();
            let rel = if want == 0.0 { g.abs() } else { ((g - want) / want).abs() };
            worst = worst.max(rel);
        }
    }
    outcome(worst <= 1e-10, format!("worst relative error {worst:e} over {} instances", cases.len()))
}

fn brute_force_matches(corpus: &LabeledCorpus) -> bool {
    let labels = corpus.labels();
    let count = |s: &[Label], l: Label| s.iter().filter(|x| **x == l).count();
    let cum = cumulative_counts(corpus);
    for (i, c) in cum.iter().enumerate() {
        let head = &labels[..=i];
        if (c.np, c.fr, c.mn) != (count(head, Label::Np), count(head, Label::Fr), count(head, Label::Mn)) {
            return false;
        }
    }
    for w in [1usize, 2, 10, 100] {
        let props = sliding_proportions(corpus, w).unwrap();
        for (i, p) in props.iter().enumerate() {
            let win = &labels[(i + 1).saturating_sub(w)..=i];
            let n = win.len() as f64;
            let want = (
                count(win, Label::Np) as f64 / n,
                count(win, Label::Fr) as f64 / n,
                count(win, Label::Mn) as f64 / n,
            );
            if (p.np, p.fr, p.mn) != want {
                return false;
            }
        }
    }
    true
}

fn corpus_analytics() -> Outcome {
    let focal = load_corpus(&std::fs::read(data("toc_focus18.json")).unwrap()).unwrap();
    let mut ok = focal.len() == 18 && brute_force_matches(&focal);
    let mut rng = SeededRng::new(10, Stream::Labels);
    for _ in 0..100 {
        let len = 1 + rng.below(150);
        let labels: Vec<Label> = (0..len).map(|_| Label::ALL[rng.below(3)]).collect();
        ok &= brute_force_matches(&LabeledCorpus::from_labels(&labels).unwrap());
    }
    outcome(ok, "focal file plus 100 random corpora, windows 1, 2, 10, 100")
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_regimelab"))
        .args(args)
        .env_remove("REGIMELAB_SEED")
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success() || status.code() == Some(4), "regimelab {args:?} failed: {status}");
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let d = |name: &str| dir.join(name).to_string_lossy().into_owned();
        let seed = RAMP_SEED.to_string();
        run_cli(&["synth", "--seed", &seed, "--out-dir", &d("synth")]);
        let corpus = d("synth/corpus.json");
        run_cli(&["fit", "--corpus", &corpus, "--out-dir", &d("fit")]);
        run_cli(&["sweep", "--corpus", &corpus, "--grid-log", "0.1:10:25", "--out-dir", &d("sweep")]);
        let read = |p: String| std::fs::read(p).unwrap();
        outputs.push((read(d("fit/trajectory.csv")), read(d("fit/fit.json")), read(d("sweep/sweep.csv"))));
    }
    let same = outputs[0] == outputs[1];
    outcome(same, if same { "trajectory.csv, fit.json and sweep.csv byte-identical across runs" } else { "outputs differ" })
}

fn main() {
    let (truth, corpus, fit) = ramp_fit();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("normalization", Duration::from_secs(1), Box::new(normalization)),
        ("gradient oracle", Duration::from_secs(5), Box::new(gradient)),
        ("counter-peak", Duration::from_secs(1), Box::new(counter_peak)),
        ("hierarchical consumption", Duration::from_secs(1), Box::new(consumption)),
        ("MAP recovery", Duration::from_secs(30), Box::new(|| recovery(&truth, &corpus, &fit))),
        ("trajectory shape", Duration::from_secs(30), Box::new(|| shape(&fit))),
        ("calibration band", Duration::from_secs(600), Box::new(|| calibration(&corpus))),
        ("smoothing limit", Duration::from_secs(30), Box::new(|| smoothing(&corpus))),
        ("objective oracle", Duration::from_secs(5), Box::new(objective_oracle)),
        ("corpus analytics", Duration::from_secs(1), Box::new(corpus_analytics)),
        ("determinism", Duration::from_secs(600), Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = result.passed && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {:<26} {}  {} [{:.3}s of {}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
