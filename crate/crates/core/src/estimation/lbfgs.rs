//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Two-loop recursion after Nocedal (1980); line search and zoom follow
//! Nocedal & Wright, Algorithms 3.5 and 3.6, with cubic interpolation
//! safeguarded by bisection. Fully deterministic: no randomness and a fixed
//! evaluation order.
//!
//! The objective may have gradient kinks. When the zoom phase cannot meet
//! the curvature condition the best point satisfying sufficient decrease is
//! accepted, and a curvature pair is stored only if `sᵀy` is safely positive.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub max_iterations: usize,
    /// Stop when `max_i |∂f/∂x_i|` falls to this value.
    pub gradient_tolerance: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iterations: 5000, gradient_tolerance: 1e-8, memory: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 40;
const MAX_ZOOM: usize = 40;
const MAX_BACKTRACK: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Trial {
    step: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct Problem<'a, F> {
    func: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    value0: f64,
    slope0: f64,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Problem<'_, F> {
    fn eval(&mut self, step: f64) -> Trial {
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(xi, di)| xi + step * di).collect();
        let mut grad = vec![0.0; x.len()];
        let mut value = (self.func)(&x, &mut grad);
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            value = f64::INFINITY;
        }
        let slope = if value.is_finite() { dot(&grad, self.dir) } else { f64::NAN };
        Trial { step, value, slope, x, grad }
    }

    fn armijo(&self, t: &Trial) -> bool {
        t.value <= self.value0 + C1 * t.step * self.slope0
    }

    fn curvature(&self, t: &Trial) -> bool {
        t.slope.abs() <= -C2 * self.slope0
    }

    /// Returns the accepted trial, or `None` when no point with sufficient
    /// decrease was found.
    fn search(&mut self, initial: f64) -> Option<Trial> {
        let mut best: Option<Trial> = None;
        let keep = |t: &Trial, best: &mut Option<Trial>, ok: bool| {
            if ok && best.as_ref().is_none_or(|b| t.value < b.value) {
                *best = Some(Trial { x: t.x.clone(), grad: t.grad.clone(), ..*t });
            }
        };

        let mut prev = Trial { step: 0.0, value: self.value0, slope: self.slope0, x: vec![], grad: vec![] };
        let mut step = initial;
        for i in 0..MAX_BRACKET {
            let t = self.eval(step);
            if !t.value.is_finite() {
                step = 0.5 * (prev.step + step);
                continue;
            }
            let armijo = self.armijo(&t);
            keep(&t, &mut best, armijo);
            if !armijo || (i > 0 && t.value >= prev.value) {
                return self.zoom(prev, t, best);
            }
            if self.curvature(&t) {
                return Some(t);
            }
            if t.slope >= 0.0 {
                return self.zoom(t, prev, best);
            }
            step *= 2.0;
            prev = t;
        }
        best
    }

    fn zoom(&mut self, mut lo: Trial, mut hi: Trial, mut best: Option<Trial>) -> Option<Trial> {
        for _ in 0..MAX_ZOOM {
            let step = interpolate(&lo, &hi);
            if (hi.step - lo.step).abs() <= 1e-16 * lo.step.abs().max(1e-300) {
                break;
            }
            let t = self.eval(step);
            if !t.value.is_finite() {
                hi = t;
                continue;
            }
            let armijo = self.armijo(&t);
            if armijo && best.as_ref().is_none_or(|b| t.value < b.value) {
                best = Some(Trial { x: t.x.clone(), grad: t.grad.clone(), ..t });
            }
            if !armijo || t.value >= lo.value {
                hi = t;
            } else {
                if self.curvature(&t) {
                    return Some(t);
                }
                if t.slope * (hi.step - lo.step) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
        best
    }
}

/// Minimizer of the cubic through both end points, kept inside the middle
/// 80% of the bracket; bisection when the cubic is unusable.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.step, hi.step);
    let mid = 0.5 * (a + b);
    if !(hi.value.is_finite() && hi.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let c = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if c.is_finite() && c > left + margin && c < right - margin {
        c
    } else {
        mid
    }
}

/// Minimize `func`, which writes the gradient into its second argument and
/// returns the value. Always returns the best point found.
pub fn minimize<F>(mut func: F, x0: &[f64], opts: &LbfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut value = func(&x, &mut grad);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    if !value.is_finite() {
        return Minimum { x, value, gradient: grad, iterations, converged: false };
    }

    while iterations < opts.max_iterations {
        if inf_norm(&grad) <= opts.gradient_tolerance {
            return Minimum { x, value, gradient: grad, iterations, converged: true };
        }

        let mut dir = two_loop(&grad, &history);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let initial = if history.is_empty() { (1.0 / inf_norm(&grad)).min(1.0) } else { 1.0 };

        let accepted = Problem { func: &mut func, x: &x, dir: &dir, value0: value, slope0: slope }
            .search(initial);
        let Some(trial) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };

        let s: Vec<f64> = trial.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == opts.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        iterations += 1;
        let decrease = value - trial.value;
        x = trial.x;
        grad = trial.grad;
        value = trial.value;
        if decrease <= 0.0 {
            break;
        }
    }

    let converged = inf_norm(&grad) <= opts.gradient_tolerance;
    Minimum { x, value, gradient: grad, iterations, converged }
}

/// Minimize `f(x) = smooth(x) + Σ_i w_i(x)·|x_i|` in the orthant-wise style
/// of Andrew & Gao (2007), generalized to weights that vary with `x`.
///
/// `func` writes the gradient (using `sgn(0) = 0` for the `|x_i|` terms) into
/// its second argument and `w_i` into its third; coordinates with `w_i = 0`
/// are treated as smooth. At `x_i = 0` the one-sided derivatives decide
/// whether to leave the kink. Steps are projected so that no kink coordinate
/// crosses zero within one line search.
pub fn minimize_orthant<F>(mut func: F, x0: &[f64], opts: &LbfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut kink = vec![0.0; n];
    let mut value = func(&x, &mut grad, &mut kink);
    let mut pg = pseudo_gradient(&x, &grad, &kink);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    if !value.is_finite() {
        return Minimum { x, value, gradient: pg, iterations, converged: false };
    }

    let mut trial_grad = vec![0.0; n];
    let mut trial_kink = vec![0.0; n];
    while iterations < opts.max_iterations {
        if inf_norm(&pg) <= opts.gradient_tolerance {
            return Minimum { x, value, gradient: pg, iterations, converged: true };
        }

        let mut dir = two_loop(&pg, &history);
        for i in 0..n {
            if kink[i] != 0.0 && dir[i] * pg[i] >= 0.0 {
                dir[i] = 0.0;
            }
        }
        if !(dot(&pg, &dir) < 0.0) {
            history.clear();
            dir = pg.iter().map(|g| -g).collect();
        }
        let orthant: Vec<f64> = (0..n)
            .map(|i| if x[i] != 0.0 { x[i].signum() } else { -pg[i].signum() })
            .collect();

        let mut step = if history.is_empty() { (1.0 / inf_norm(&pg)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial: Vec<f64> = (0..n)
                .map(|i| {
                    let v = x[i] + step * dir[i];
                    if kink[i] != 0.0 && v * orthant[i] <= 0.0 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            let f = func(&trial, &mut trial_grad, &mut trial_kink);
            let model: f64 = (0..n).map(|i| pg[i] * (trial[i] - x[i])).sum();
            if f.is_finite() && trial_grad.iter().all(|g| g.is_finite()) && f <= value + C1 * model {
                accepted = Some((trial, f));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, f)) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };

        let trial_pg = pseudo_gradient(&trial, &trial_grad, &trial_kink);
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_pg.iter().zip(&pg).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == opts.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        iterations += 1;
        let decrease = value - f;
        x = trial;
        value = f;
        std::mem::swap(&mut grad, &mut trial_grad);
        std::mem::swap(&mut kink, &mut trial_kink);
        pg = trial_pg;
        if decrease <= 0.0 {
            break;
        }
    }

    let converged = inf_norm(&pg) <= opts.gradient_tolerance;
    Minimum { x, value, gradient: pg, iterations, converged }
}

/// Steepest one-sided slope at kink coordinates sitting exactly at zero;
/// zero when neither side descends.
fn pseudo_gradient(x: &[f64], grad: &[f64], kink: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            if x[i] != 0.0 || kink[i] == 0.0 {
                return grad[i];
            }
            let right = grad[i] + kink[i];
            let left = grad[i] - kink[i];
            match (right < 0.0, left > 0.0) {
                (true, true) => if -right >= left { right } else { left },
                (true, false) => right,
                (false, true) => left,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn two_loop(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}
