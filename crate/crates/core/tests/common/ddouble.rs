//! Double-double arithmetic (~106-bit significand), enough to resolve differences
//! around 1e-19 between quantities of order 10.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const EULER_GAMMA: Dd = Dd {
    hi: 0.5772156649015329,
    lo: -4.942915152430645e-18,
};
pub const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Natural log of a positive value representable as a single f64.
    pub fn ln_f64(x: f64) -> Self {
        assert!(x > 0.0);
        let k = x.log2().floor() as i32;
        let mut m = x / 2f64.powi(k);
        let mut k = k;
        if m >= 2.0 {
            m /= 2.0;
            k += 1;
        } else if m < 1.0 {
            m *= 2.0;
            k -= 1;
        }
        // ln m = 2 atanh(z), z = (m - 1)/(m + 1) ≤ 1/3.
        let z = Dd::from_f64(m - 1.0) / Dd::from_f64(m + 1.0);
        let z2 = z * z;
        let mut term = z;
        let mut sum = Dd::from_f64(0.0);
        let mut j = 0.0;
        while term.hi.abs() > 1e-36 {
            sum = sum + term / Dd::from_f64(2.0 * j + 1.0);
            term = term * z2;
            j += 1.0;
        }
        sum * Dd::from_f64(2.0) + LN_2 * Dd::from_f64(k as f64)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        Dd::norm(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from_f64(q2);
        let q3 = r.hi / o.hi;
        Dd::norm(q1, q2) + Dd::from_f64(q3)
    }
}

/// `(ψ(n+1), ψ(n+1) - (ln(n+1) - 1/(2(n+1)) - 1/(12(n+1)²)))` for `n = 1..=max_n`,
/// with `ψ(n+1) = Hₙ - γ` accumulated in double-double.
pub fn psi_and_bound_margins(max_n: usize) -> Vec<(Dd, Dd)> {
    let one = Dd::from_f64(1.0);
    let mut harmonic = Dd::from_f64(0.0);
    (1..=max_n)
        .map(|n| {
            harmonic = harmonic + one / Dd::from_f64(n as f64);
            let psi = harmonic - EULER_GAMMA;
            let x = Dd::from_f64(n as f64 + 1.0);
            let lower = Dd::ln_f64(n as f64 + 1.0)
                - one / (Dd::from_f64(2.0) * x)
                - one / (Dd::from_f64(12.0) * x * x);
            (psi, psi - lower)
        })
        .collect()
}
