//! Method of types: type descriptors, exact cardinalities, typical windows.

use serde::{Deserialize, Serialize};

use crate::counting::{self, BigCount, Counting};
use crate::error::{Error, Result};
use crate::scalar::Probability;

/// Occupation counts per level of a string ensemble.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeDescriptor {
    counts: Vec<u64>,
}

impl TypeDescriptor {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::param("type needs at least one level"));
        }
        Ok(TypeDescriptor { counts })
    }

    /// Checks the counts against a declared total.
    pub fn with_total(counts: Vec<u64>, total: u64) -> Result<Self> {
        let t = Self::new(counts)?;
        if t.total() != total {
            return Err(Error::param(format!("counts sum to {}, declared total {total}", t.total())));
        }
        Ok(t)
    }

    /// `(n - ones, ones)`.
    pub fn two_level(n: u64, ones: u64) -> Result<Self> {
        if ones > n {
            return Err(Error::param(format!("{ones} ones in a string of length {n}")));
        }
        Ok(TypeDescriptor { counts: vec![n - ones, ones] })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Number of 1s of a two-level type.
    pub fn ones(&self) -> u64 {
        debug_assert_eq!(self.dim(), 2);
        self.counts[1]
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Occupation frequencies; exact when `P` is a rational type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector<P = f64> {
    freqs: Vec<P>,
}

impl<P: Probability> FrequencyVector<P> {
    pub fn new(freqs: Vec<P>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::param("empty frequency vector"));
        }
        if freqs.iter().any(|f| *f < P::zero() || *f > P::one()) {
            return Err(Error::param("frequencies must lie in [0, 1]"));
        }
        let sum = freqs.iter().cloned().fold(P::zero(), |a, b| a + b);
        let ok = if P::is_exact() { sum == P::one() } else { (sum.to_f64() - 1.0).abs() <= 1e-12 };
        if !ok {
            return Err(Error::param(format!("frequencies sum to {}, not 1", sum.to_f64())));
        }
        Ok(FrequencyVector { freqs })
    }

    /// `(1 - p, p)`.
    pub fn two_level(p: P) -> Result<Self> {
        Self::new(vec![P::one() - p.clone(), p])
    }

    pub fn freqs(&self) -> &[P] {
        &self.freqs
    }

    pub fn dim(&self) -> usize {
        self.freqs.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.freqs.iter().map(|f| f.to_f64()).collect()
    }
}

pub fn type_cardinality(t: &TypeDescriptor) -> BigCount {
    BigCount(counting::multinomial(t.counts()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCount {
    pub value: f64,
    /// True when computed by log-gamma rather than from the exact integer.
    pub approximate: bool,
}

/// `ln` of the multinomial coefficient under the default counting switch.
pub fn log_type_cardinality(t: &TypeDescriptor) -> f64 {
    log_type_cardinality_with(t, &Counting::default()).value
}

pub fn log_type_cardinality_with(t: &TypeDescriptor, counting: &Counting) -> LogCount {
    if counting.is_exact_at(t.total()) {
        LogCount { value: type_cardinality(t).ln(), approximate: false }
    } else {
        LogCount { value: counting::ln_multinomial(t.counts()), approximate: true }
    }
}

/// Bounds `(lower, upper)` on `ln M(t)`: `n H(f) - s (ln n + 1) + 1` and
/// `n H(f) + ln n`, with `s` the number of occupied levels.
pub fn multinomial_log_bounds(t: &TypeDescriptor) -> (f64, f64) {
    let n = t.total();
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let f = t.frequencies();
    let h: f64 = f.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    let support = t.counts().iter().filter(|&&c| c > 0).count() as f64;
    let lower = nf * h - support * (nf.ln() + 1.0) + 1.0;
    let upper = nf * h + nf.ln();
    (lower, upper)
}

/// How the typical window scales with `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowScale {
    /// Half-width `width * sqrt(n)` on every level.
    RootN,
    /// Half-width `width * sqrt(n f (1 - f))`, i.e. `width` standard deviations.
    Binomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub width: f64,
    pub scale: WindowScale,
}

impl Default for Window {
    fn default() -> Self {
        Window { width: 3.0, scale: WindowScale::Binomial }
    }
}

impl Window {
    pub fn root_n(width: f64) -> Self {
        Window { width, scale: WindowScale::RootN }
    }

    pub fn binomial(width: f64) -> Self {
        Window { width, scale: WindowScale::Binomial }
    }

    pub fn half_width(&self, n: u64, f: f64) -> f64 {
        let nf = n as f64;
        match self.scale {
            WindowScale::RootN => self.width * nf.sqrt(),
            WindowScale::Binomial => self.width * (nf * f * (1.0 - f)).max(0.0).sqrt(),
        }
    }

    /// Count range `[lo, hi]` for one level with frequency `f`.
    pub fn count_range(&self, n: u64, f: f64) -> (u64, u64) {
        if f <= 0.0 {
            return (0, 0);
        }
        if f >= 1.0 {
            return (n, n);
        }
        let centre = n as f64 * f;
        let hw = self.half_width(n, f);
        let slack = 1e-9 * (1.0 + centre);
        let lo = (centre - hw - slack).ceil().max(0.0) as u64;
        let hi = ((centre + hw + slack).floor() as u64).min(n);
        (lo, hi.max(lo))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::param("window width must be positive"));
        }
        Ok(())
    }
}

/// Nearest type to `n f`: floors plus largest remainders; ties go to the
/// more probable level, then the lower index.
pub fn rounded_type(n: u64, f: &[f64]) -> TypeDescriptor {
    let nf = n as f64;
    let mut counts: Vec<u64> = f.iter().map(|&x| (nf * x).floor().max(0.0) as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..f.len()).filter(|&i| f[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let fa = nf * f[a] - (nf * f[a]).floor();
        let fb = nf * f[b] - (nf * f[b]).floor();
        fb.partial_cmp(&fa).unwrap().then(f[b].partial_cmp(&f[a]).unwrap()).then(a.cmp(&b))
    });
    if assigned <= n {
        for k in 0..(n - assigned) as usize {
            counts[order[k % order.len()]] += 1;
        }
    } else {
        let mut extra = assigned - n;
        for &i in order.iter().rev() {
            while extra > 0 && counts[i] > 0 {
                counts[i] -= 1;
                extra -= 1;
            }
        }
    }
    TypeDescriptor { counts }
}

/// Types whose every count lies within `width * sqrt(n)` of `n f_i`,
/// restricted to the support of `f`; never empty.
pub fn typical_types<P: Probability>(n: u64, probs: &FrequencyVector<P>, width: f64) -> Result<Vec<TypeDescriptor>> {
    typical_types_in(n, probs, &Window::root_n(width))
}

pub fn typical_types_in<P: Probability>(
    n: u64,
    probs: &FrequencyVector<P>,
    window: &Window,
) -> Result<Vec<TypeDescriptor>> {
    if n == 0 {
        return Err(Error::param("typical types need n >= 1"));
    }
    window.validate()?;
    let f = probs.to_f64();
    let ranges: Vec<(u64, u64)> = f.iter().map(|&x| window.count_range(n, x)).collect();
    let mut out = Vec::new();
    let mut counts = vec![0u64; f.len()];
    enumerate_window(&ranges, 0, n, &mut counts, &mut out);
    let centre = rounded_type(n, &f);
    if !out.contains(&centre) {
        out.push(centre);
    }
    out.sort_by(|a, b| a.counts.iter().rev().cmp(b.counts.iter().rev()));
    Ok(out)
}

fn enumerate_window(ranges: &[(u64, u64)], level: usize, left: u64, counts: &mut Vec<u64>, out: &mut Vec<TypeDescriptor>) {
    let (lo, hi) = ranges[level];
    if level + 1 == ranges.len() {
        if left >= lo && left <= hi {
            counts[level] = left;
            out.push(TypeDescriptor { counts: counts.clone() });
        }
        return;
    }
    // prune with the minimum and maximum the remaining levels can absorb
    let rest_min: u64 = ranges[level + 1..].iter().map(|r| r.0).sum();
    let rest_max: u64 = ranges[level + 1..].iter().map(|r| r.1).sum();
    for c in lo..=hi.min(left) {
        let rem = left - c;
        if rem < rest_min || rem > rest_max {
            continue;
        }
        counts[level] = c;
        enumerate_window(ranges, level + 1, rem, counts, out);
    }
}

/// Exact probability that an i.i.d. string of length `n` falls in `window`.
pub fn typical_mass<P: Probability>(n: u64, probs: &FrequencyVector<P>, window: &[TypeDescriptor]) -> Result<P> {
    let mut acc = P::zero();
    for t in window {
        if t.total() != n || t.dim() != probs.dim() {
            return Err(Error::param("window type does not match n and dimension"));
        }
        acc = acc + P::type_probability(t.counts(), probs.freqs());
    }
    Ok(acc)
}

/// Hoeffding lower bound `1 - 2 exp(-2 width^2)` on the mass of a root-n window.
pub fn hoeffding_bound(width: f64) -> f64 {
    1.0 - 2.0 * (-2.0 * width * width).exp()
}

/// Shannon entropy in nats.
pub fn shannon_entropy<P: Probability>(f: &FrequencyVector<P>) -> f64 {
    f.freqs().iter().map(|x| x.to_f64()).filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

/// Every type of length `n` over `d` levels.
pub fn all_types(n: u64, d: usize) -> Vec<TypeDescriptor> {
    let ranges = vec![(0, n); d];
    let mut out = Vec::new();
    let mut counts = vec![0u64; d];
    enumerate_window(&ranges, 0, n, &mut counts, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use num_bigint::BigUint;
    use num_rational::BigRational;
    use num_traits::{One, Pow};
    use proptest::prelude::*;

    fn two(p: f64) -> FrequencyVector {
        FrequencyVector::two_level(p).unwrap()
    }

    #[test]
    fn cardinality_examples() {
        let c = |v: Vec<u64>| type_cardinality(&TypeDescriptor::new(v).unwrap()).0;
        assert_eq!(c(vec![2, 2]), BigUint::from(6u32));
        assert_eq!(c(vec![7, 0]), BigUint::one());
        assert_eq!(c(vec![1, 1, 2]), BigUint::from(12u32));
        assert_eq!(log_type_cardinality(&TypeDescriptor::new(vec![0, 9]).unwrap()), 0.0);
        let l = log_type_cardinality(&TypeDescriptor::new(vec![2, 2]).unwrap());
        assert!((l - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn half_filled_hundred_against_bounds() {
        let t = TypeDescriptor::two_level(100, 50).unwrap();
        let v = log_type_cardinality(&t);
        assert!((v - 66.78384165201743).abs() < 1e-10);
        let (lo, hi) = multinomial_log_bounds(&t);
        assert!(lo <= v && v <= hi);
        assert!((hi - (100.0 * 2f64.ln() + 100f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_switch_is_flagged() {
        let t = TypeDescriptor::two_level(20_000, 7_000).unwrap();
        let exact = log_type_cardinality_with(&t, &Counting::exact());
        let approx = log_type_cardinality_with(&t, &Counting::default());
        assert!(!exact.approximate && approx.approximate);
        assert!((exact.value - approx.value).abs() < 1e-8 * exact.value);
    }

    #[test]
    fn deterministic_source_window() {
        let w = typical_types(4, &two(1.0), 3.0).unwrap();
        assert_eq!(w, vec![TypeDescriptor::two_level(4, 4).unwrap()]);
        let w = typical_types(25, &two(1.0), 3.0).unwrap();
        assert_eq!(typical_mass(25, &two(1.0), &w).unwrap(), 1.0);
    }

    #[test]
    fn half_window_at_hundred() {
        let w = typical_types(100, &two(0.5), 3.0).unwrap();
        let ones: Vec<u64> = w.iter().map(|t| t.ones()).collect();
        assert_eq!(ones, (20..=80).collect::<Vec<_>>());
        let mass = typical_mass(100, &two(0.5), &w).unwrap();
        assert!(mass >= 0.99 && mass >= hoeffding_bound(3.0));
    }

    #[test]
    fn full_window_has_unit_mass_exactly() {
        let f = FrequencyVector::new(vec![rational(1, 2), rational(1, 3), rational(1, 6)]).unwrap();
        let all = all_types(6, 3);
        assert_eq!(typical_mass(6, &f, &all).unwrap(), BigRational::one());
    }

    #[test]
    fn rounding_ties_go_to_the_mode() {
        assert_eq!(rounded_type(5, &[0.7, 0.3]).counts(), &[4, 1]);
        assert_eq!(rounded_type(10, &[0.25, 0.25, 0.5]).counts().iter().sum::<u64>(), 10);
        assert_eq!(rounded_type(4, &[0.0, 1.0]).counts(), &[0, 4]);
    }

    #[test]
    fn entropy_examples() {
        let u = FrequencyVector::new(vec![0.25; 4]).unwrap();
        assert!((shannon_entropy(&u) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&FrequencyVector::new(vec![1.0, 0.0, 0.0]).unwrap()), 0.0);
        let g = FrequencyVector::new(vec![0.665_240_955_774_821_9, 0.244_728_471_054_797_64, 0.090_030_573_170_380_46]).unwrap();
        assert!((shannon_entropy(&g) - 0.832_395_581_839_938_9).abs() < 1e-12);
    }

    #[test]
    fn frequency_validation() {
        assert!(FrequencyVector::new(vec![0.5, 0.6]).is_err());
        assert!(FrequencyVector::new(vec![rational(1, 3), rational(1, 3), rational(1, 3)]).is_ok());
        assert!(FrequencyVector::new(vec![rational(1, 3), rational(1, 3)]).is_err());
        assert!(TypeDescriptor::with_total(vec![1, 2], 4).is_err());
    }

    #[test]
    fn multinomial_theorem() {
        for d in 1..=4usize {
            for n in 0..=12u64 {
                let sum: BigUint = all_types(n, d).iter().map(|t| type_cardinality(t).0).sum();
                assert_eq!(sum, BigUint::from(d).pow(n as u32));
            }
        }
    }

    proptest! {
        #[test]
        fn sandwich_holds(counts in proptest::collection::vec(0u64..200, 1..6)) {
            let t = TypeDescriptor::new(counts).unwrap();
            prop_assume!(t.total() > 0);
            let v = log_type_cardinality(&t);
            let (lo, hi) = multinomial_log_bounds(&t);
            prop_assert!(lo <= v + 1e-9 && v <= hi + 1e-9, "{lo} {v} {hi}");
        }

        #[test]
        fn mass_grows_with_width(n in 1u64..200, p in 0.0f64..1.0, w in 0.1f64..3.0, dw in 0.0f64..2.0) {
            let f = two(p);
            let a = typical_mass(n, &f, &typical_types(n, &f, w).unwrap()).unwrap();
            let b = typical_mass(n, &f, &typical_types(n, &f, w + dw).unwrap()).unwrap();
            prop_assert!(b + 1e-12 >= a);
        }

        #[test]
        fn hoeffding_holds(n in 1u64..300, p in 0.0f64..1.0, w in 0.3f64..3.0) {
            let f = two(p);
            let mass = typical_mass(n, &f, &typical_types(n, &f, w).unwrap()).unwrap();
            prop_assert!(mass + 1e-12 >= hoeffding_bound(w));
        }
    }
}
