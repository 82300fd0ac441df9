//! Log-gamma, the regularized incomplete beta function and exact binomial confidence bounds.

use crate::error::{Error, Result};
use crate::num::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        return (T::PI() / (T::PI() * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS_COEFFS[0]);
    let t = x + T::lit(LANCZOS_G + 0.5);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (x + T::from_count(i as u64));
    }
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (x + T::lit(0.5)) * t.ln() - t + a.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for `I_x(a, b)` (modified Lentz), valid for `x < (a+1)/(a+b+2)`.
fn beta_continued_fraction<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let tol = T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=10_000u64 {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= tol {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b) = B(x; a, b)/B(a, b)`.
pub fn regularized_incomplete_beta<T: Real>(x: T, a: T, b: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::domain("beta shape", a.min(b), "(0, inf)"));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x == T::one() {
        return Ok(T::one());
    }
    let one = T::one();
    let ln_front = a * x.ln() + b * (one - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    let value = if x < (a + one) / (a + b + T::lit(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        one - front * beta_continued_fraction(b, a, one - x) / b
    };
    Ok(value.max(T::zero()).min(one))
}

/// Two-sided exact (Clopper–Pearson) confidence interval for a binomial proportion at
/// confidence level `1 − alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClopperPearson {
    pub lower: f64,
    pub upper: f64,
}

impl ClopperPearson {
    pub fn new(successes: u64, trials: u64, alpha: f64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::domain("successes", successes as f64, "[0, trials] with trials ≥ 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain("alpha", alpha, "(0, 1)"));
        }
        let x = successes as f64;
        let n = trials as f64;
        let tail = alpha / 2.0;
        // upper: P(Bin(n, u) ≤ x) = tail  ⇔  I_u(x+1, n−x) = 1 − tail
        let upper = if successes == trials {
            1.0
        } else {
            beta_quantile(1.0 - tail, x + 1.0, n - x)?
        };
        // lower: P(Bin(n, l) ≥ x) = tail  ⇔  I_l(x, n−x+1) = tail
        let lower = if successes == 0 { 0.0 } else { beta_quantile(tail, x, n - x + 1.0)? };
        Ok(Self { lower, upper })
    }
}

/// Inverse of `I_x(a, b)` in `x` by bisection.
pub fn beta_quantile(prob: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::domain("probability", prob, "[0, 1]"));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if regularized_incomplete_beta(mid, a, b)? < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
