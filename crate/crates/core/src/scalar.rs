//! Scalar abstractions shared by every numeric module.
//!
//! State-level math (entropies, Gibbs weights, rates, density matrices) is
//! written against [`Real`], implemented for `f32` and `f64`. Exact
//! probability bookkeeping in the simulators goes through [`Probability`],
//! which additionally covers `BigRational`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Floating-point scalar used by the state and monotone layers.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for the state invariants (trace, hermiticity, positivity).
    fn state_tol() -> Self;

    /// Eigenvalues in `[-clamp_tol, 0)` are treated as exact zeros before logs.
    fn clamp_tol() -> Self {
        Self::state_tol()
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn usize(x: usize) -> Self {
        Self::from_usize(x).expect("count representable in scalar type")
    }
}

impl Real for f64 {
    fn state_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn state_tol() -> Self {
        2e-6
    }
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlogx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Probability weight carried through string-level simulations.
///
/// Floating modes are used for sweeps; `BigRational` keeps audits exact.
pub trait Probability: Num + Clone + Debug + PartialOrd + Send + Sync {
    fn to_f64(&self) -> f64;

    /// Nearest representable value (exact for rationals).
    fn from_f64(x: f64) -> Self;

    /// Whether arithmetic in this type is exact.
    fn is_exact() -> bool;

    /// Probability of one particular type class: `M(counts) * prod f_i^{c_i}`.
    fn type_probability(counts: &[u64], freqs: &[Self]) -> Self;

    fn complement(&self) -> Self {
        Self::one() - self.clone()
    }
}

impl Probability for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_exact() -> bool {
        false
    }
    fn type_probability(counts: &[u64], freqs: &[Self]) -> Self {
        let mut log_p = crate::counting::ln_multinomial(counts);
        for (&c, &f) in counts.iter().zip(freqs) {
            if c > 0 {
                if f <= 0.0 {
                    return 0.0;
                }
                log_p += c as f64 * f.ln();
            }
        }
        log_p.exp()
    }
}

impl Probability for f32 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn is_exact() -> bool {
        false
    }
    fn type_probability(counts: &[u64], freqs: &[Self]) -> Self {
        let wide: Vec<f64> = freqs.iter().map(|&f| f as f64).collect();
        f64::type_probability(counts, &wide) as f32
    }
}

impl Probability for BigRational {
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite probability")
    }
    fn is_exact() -> bool {
        true
    }
    fn type_probability(counts: &[u64], freqs: &[Self]) -> Self {
        let mut acc = BigRational::from_integer(BigInt::from(crate::counting::multinomial(counts)));
        for (&c, f) in counts.iter().zip(freqs) {
            acc *= num_traits::pow::pow(f.clone(), c as usize);
        }
        acc
    }
}

/// Converts a big rational to `f64` without overflowing on huge numerators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // keep the top 64 bits of each side and carry the exponent separately
    let top = |x: &BigInt| -> (f64, i64) {
        let drop = x.bits().saturating_sub(64);
        ((x >> drop as usize).to_f64().unwrap_or(f64::NAN), drop as i64)
    };
    let (n, en) = top(r.numer());
    let (d, ed) = top(r.denom());
    let e = en - ed;
    let half = (e / 2).clamp(-2000, 2000) as i32;
    let rest = (e - e / 2).clamp(-2000, 2000) as i32;
    (n / d) * 2f64.powi(half) * 2f64.powi(rest)
}

/// `p/q` as an exact rational.
pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
