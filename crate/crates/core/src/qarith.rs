//! q-numbers, q-factorials and ordinary binomials.
//!
//! The deformation is carried as `eta = ln q`. Every q-dependent routine
//! branches to the exact classical value when `eta == 0`, so the removable
//! singularity of `(q^{n/2} - q^{-n/2}) / (q^{1/2} - q^{-1/2})` is never
//! evaluated.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Beyond this value of `|x|`, `ln sinh x` is evaluated as `x - ln 2 + ln1p(-e^{-2x})`.
const LN_SINH_ASYMPTOTIC: f64 = 30.0;

/// The deformation parameter `eta = ln q`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DeformationParam {
    eta: f64,
}

impl DeformationParam {
    pub const UNDEFORMED: DeformationParam = DeformationParam { eta: 0.0 };

    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("deformation eta must be finite, got {eta}")));
        }
        Ok(DeformationParam { eta })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!("q must be positive and finite, got {q}")));
        }
        Self::new(q.ln())
    }

    pub fn eta(self) -> f64 {
        self.eta
    }

    pub fn q(self) -> f64 {
        self.eta.exp()
    }

    pub fn is_undeformed(self) -> bool {
        self.eta == 0.0
    }

    /// `q^x = e^{eta x}`.
    pub fn q_pow(self, x: f64) -> f64 {
        (self.eta * x).exp()
    }

    /// Scales `eta` by `factor` (thermodynamic scaling uses `1/N`).
    pub fn scaled(self, factor: f64) -> Self {
        DeformationParam { eta: self.eta * factor }
    }
}

/// `[n]_q = sinh(n eta / 2) / sinh(eta / 2)`; exactly `n` when `eta == 0`.
pub fn q_number(n: f64, d: DeformationParam) -> f64 {
    if d.is_undeformed() || n == 0.0 {
        return n;
    }
    let half = 0.5 * d.eta.abs();
    let x = n * half;
    if x.abs() <= LN_SINH_ASYMPTOTIC {
        (x.sinh()) / half.sinh()
    } else {
        n.signum() * (ln_sinh(x.abs()) - ln_sinh(half)).exp()
    }
}

/// `ln [n]_q` for `n > 0`, free of overflow for large `|n eta|`.
pub fn log_q_number(n: f64, d: DeformationParam) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!("log_q_number needs n > 0, got {n}")));
    }
    if d.is_undeformed() {
        return Ok(n.ln());
    }
    let half = 0.5 * d.eta.abs();
    Ok(ln_sinh(n * half) - ln_sinh(half))
}

/// `ln sinh x` for `x > 0`.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > LN_SINH_ASYMPTOTIC {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `ln([n]_q!) = sum_{k=1}^n ln [k]_q`, with `[0]_q! = 1`.
pub fn q_factorial_log(n: u64, d: DeformationParam) -> f64 {
    if d.is_undeformed() {
        return ln_factorial(n);
    }
    (1..=n)
        .map(|k| log_q_number(k as f64, d).expect("k >= 1"))
        .sum()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln n!`; exact summation for small `n`, log-gamma beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial_exact(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::InvalidArgument(format!("binomial needs k <= n, got ({n}, {k})")));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    Ok(acc)
}

/// `ln C(n, k)` via log-gamma.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("binomial needs k <= n, got ({n}, {k})")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

/// Natural log of a big unsigned integer (`-inf` for zero).
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln sum_i e^{x_i}`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}
