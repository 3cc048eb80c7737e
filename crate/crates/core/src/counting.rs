//! Exact and logarithmic binomial / multinomial counting.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Sizes at or above this use log-gamma counting by default.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 10_000;

/// Arbitrary-precision nonnegative count. Serialized as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn one() -> Self {
        BigCount(BigUint::one())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Natural log, accurate to double precision for any magnitude.
    pub fn ln(&self) -> f64 {
        ln_biguint(&self.0)
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.0.to_u128()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        BigCount(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for BigCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for BigCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .map(BigCount)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal count: {s}")))
    }
}

pub fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

const TABLE_LEN: usize = 256;

fn ln_factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for k in 2..TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// `ln(n!)`: table below 256, Stirling series above (error far below 1e-15 relative).
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `ln(total! / prod counts_i!)`.
pub fn ln_multinomial(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let mut v = ln_factorial(total);
    for &c in counts {
        v -= ln_factorial(c);
    }
    v.max(0.0)
}

pub fn multinomial(counts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &c in counts {
        running += c;
        acc *= binomial(running, c);
    }
    acc
}

/// Counting backend for feasibility decisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counting {
    /// Instances whose total string length reaches this use log-gamma only.
    pub exact_threshold: u64,
}

impl Default for Counting {
    fn default() -> Self {
        Counting { exact_threshold: DEFAULT_EXACT_THRESHOLD }
    }
}

impl Counting {
    pub fn exact() -> Self {
        Counting { exact_threshold: u64::MAX }
    }

    pub fn is_exact_at(&self, size: u64) -> bool {
        size < self.exact_threshold
    }
}

/// Compares two logs, falling back to exact big integers when they are too
/// close to call in floating point. `exact` is only evaluated in that case.
pub fn compare_filtered<F>(ln_a: f64, ln_b: f64, exact_ok: bool, exact: F) -> Ordering
where
    F: FnOnce() -> (BigUint, BigUint),
{
    let tol = 1e-9 * (1.0 + ln_a.abs().max(ln_b.abs()));
    if exact_ok && (ln_a - ln_b).abs() <= tol {
        let (a, b) = exact();
        return a.cmp(&b);
    }
    ln_a.partial_cmp(&ln_b).unwrap_or(Ordering::Equal)
}

/// `ln(sum exp(x_i))` with the empty sum mapped to `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
