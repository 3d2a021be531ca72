//! Double-double evaluation of the unclamped probability map.
//!
//! Central differences at step `1e-5` lose about eleven digits to
//! cancellation when evaluated in `f64`, which swamps the relative error
//! being measured wherever a derivative is small. Evaluating the map with
//! ~32 significant digits leaves only the truncation error of the stencil.

use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

impl Dd {
    pub(crate) const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub(crate) fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub(crate) fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub(crate) fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub(crate) fn mul_f64(self, b: f64) -> Dd {
        self.mul(Dd::new(b))
    }

    pub(crate) fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::new(q3))
    }

    pub(crate) fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    pub(crate) fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::new(0.0);
        }
        let k = (self.hi / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(k)).ldexp(-9);

        // Taylor series for exp(r) - 1, |r| < 7e-4.
        let mut term = r;
        let mut sum = r;
        for n in 2..=14 {
            term = term.mul(r).div(Dd::new(n as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^2 - 1 = 2s + s^2, squared nine times.
        for _ in 0..9 {
            sum = sum.mul_f64(2.0).add(sum.mul(sum));
        }
        sum.add(Dd::ONE).ldexp(k as i32)
    }

    pub(crate) fn sigmoid(self) -> Dd {
        if self.hi >= 0.0 {
            Dd::ONE.div(Dd::ONE.add(self.neg().exp()))
        } else {
            let e = self.exp();
            e.div(Dd::ONE.add(e))
        }
    }
}

/// `(P_NP, P_FR, P_MN)` of the unclamped map in double-double.
pub(crate) fn unclamped(gap: Dd, p: &ModelParams) -> (Dd, Dd, Dd) {
    let s = gap.mul_f64(p.beta).sigmoid();
    let z = gap
        .abs()
        .sub(Dd::new(p.tau_a))
        .mul_f64(p.alpha)
        .add(s.sub(Dd::new(p.tau_p)).mul_f64(p.gamma));
    let m = z.sigmoid();
    let p_mn = m.mul_f64(p.kappa);
    let rest = Dd::ONE.sub(p_mn);
    (rest.mul(Dd::ONE.sub(s)), rest.mul(s), p_mn)
}

/// Central differences of the unclamped map, evaluated in double-double.
pub(crate) fn central_difference(gap: f64, p: &ModelParams, step: f64) -> (f64, f64, f64) {
    let x = Dd::new(gap);
    let h = Dd::new(step);
    let hi = unclamped(x.add(h), p);
    let lo = unclamped(x.sub(h), p);
    let h2 = h.mul_f64(2.0);
    (
        hi.0.sub(lo.0).div(h2).to_f64(),
        hi.1.sub(lo.1).div(h2).to_f64(),
        hi.2.sub(lo.2).div(h2).to_f64(),
    )
}

/// Second central difference of the unclamped `P_FR`.
pub(crate) fn second_difference_fr(gap: f64, p: &ModelParams, step: f64) -> f64 {
    let x = Dd::new(gap);
    let h = Dd::new(step);
    let up = unclamped(x.add(h), p).1;
    let mid = unclamped(x, p).1;
    let down = unclamped(x.sub(h), p).1;
    up.sub(mid.mul_f64(2.0)).add(down).div(h.mul(h)).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath at 40 digits, split into (hi, lo) pairs.
    #[test]
    fn exp_matches_reference() {
        let cases = [
            (1.0, std::f64::consts::E, 1.445_646_891_729_250_2e-16),
            (-3.7, 0.024_723_526_470_339_388, -1.294_857_794_723_138e-18),
            (20.0, 485_165_195.409_790_3, 4.880_277_289_790_406e-10),
            (-35.5, 3.824_246_628_097_135_5e-16, -1.922_627_532_362_148e-32),
        ];
        for (x, hi, lo) in cases {
            let e = Dd::new(x).exp();
            let want = Dd { hi, lo };
            let rel = e.sub(want).to_f64().abs() / hi;
            assert!(rel < 1e-28, "x={x} rel={rel}");
        }
    }

    #[test]
    fn sigmoid_is_symmetric() {
        for x in [0.3, 2.0, 11.5, 30.0] {
            let a = Dd::new(x).sigmoid();
            let b = Dd::new(-x).sigmoid();
            let resid = a.add(b).sub(Dd::ONE).to_f64().abs();
            assert!(resid < 1e-30, "x={x} resid={resid}");
        }
    }
}
