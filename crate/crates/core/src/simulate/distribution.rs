//! Probability distributions over bit strings, dense in the string value.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Probability;
use crate::strings::BitString;

/// Longest strings a dense distribution may hold.
pub const MAX_DIST_LEN: u32 = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringDistribution<P = f64> {
    len: u32,
    probs: Vec<P>,
}

impl<P: Probability> StringDistribution<P> {
    pub fn point(s: BitString) -> Result<Self> {
        check_len(s.len)?;
        let mut probs = vec![P::zero(); 1usize << s.len];
        probs[s.bits as usize] = P::one();
        Ok(StringDistribution { len: s.len, probs })
    }

    /// `len` independent bits, each one with probability `p_one`.
    pub fn iid(len: u32, p_one: P) -> Result<Self> {
        check_len(len)?;
        if p_one < P::zero() || p_one > P::one() {
            return Err(Error::param("bit probability outside [0, 1]"));
        }
        let p_zero = p_one.complement();
        let mut probs = vec![P::one()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(probs.len() * 2);
            for x in &probs {
                next.push(x.clone() * p_zero.clone());
                next.push(x.clone() * p_one.clone());
            }
            probs = next;
        }
        Ok(StringDistribution { len, probs })
    }

    pub fn from_probs(len: u32, probs: Vec<P>) -> Result<Self> {
        check_len(len)?;
        if probs.len() != 1usize << len {
            return Err(Error::DimensionMismatch(probs.len(), 1usize << len));
        }
        if probs.iter().any(|p| *p < P::zero()) {
            return Err(Error::param("negative probability"));
        }
        let d = StringDistribution { len, probs };
        let total = d.total().to_f64();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("probabilities sum to {total}")));
        }
        Ok(d)
    }

    /// Independent product, `self` in the leading positions.
    pub fn concat(&self, tail: &Self) -> Result<Self> {
        check_len(self.len + tail.len)?;
        let mut probs = Vec::with_capacity(self.probs.len() * tail.probs.len());
        for a in &self.probs {
            for b in &tail.probs {
                probs.push(a.clone() * b.clone());
            }
        }
        Ok(StringDistribution { len: self.len + tail.len, probs })
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn prob(&self, s: &BitString) -> P {
        self.probs[s.bits as usize].clone()
    }

    pub fn total(&self) -> P {
        self.probs.iter().cloned().fold(P::zero(), |a, b| a + b)
    }

    /// Strings with nonzero probability, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (BitString, &P)> {
        let len = self.len;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(move |(i, p)| (BitString::new(len, i as u128), p))
    }

    /// Distribution of positions `[start, start + len)`.
    pub fn marginal(&self, start: u32, len: u32) -> Result<Self> {
        if start + len > self.len {
            return Err(Error::param("marginal window exceeds the string"));
        }
        let mut probs = vec![P::zero(); 1usize << len];
        for (i, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let s = BitString::new(self.len, i as u128).slice(start, len);
            let slot = &mut probs[s.bits as usize];
            *slot = slot.clone() + p.clone();
        }
        Ok(StringDistribution { len, probs })
    }

    /// Pushes the distribution through a map on string values.
    pub fn push_forward(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut probs = vec![P::zero(); self.probs.len()];
        for (i, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                let j = f(i);
                probs[j] = probs[j].clone() + p.clone();
            }
        }
        StringDistribution { len: self.len, probs }
    }

    /// `sum_i w_i D_i` for distributions of equal length.
    pub fn mixture(parts: &[(P, Self)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::param("empty mixture"))?;
        let mut probs = vec![P::zero(); first.1.probs.len()];
        for (w, d) in parts {
            if d.len != first.1.len {
                return Err(Error::DimensionMismatch(d.len as usize, first.1.len as usize));
            }
            for (acc, p) in probs.iter_mut().zip(&d.probs) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        Ok(StringDistribution { len: first.1.len, probs })
    }

    /// Total-variation distance `(1/2) sum |p - q|` as a float.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch(self.len as usize, other.len as usize));
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a.to_f64() - b.to_f64()).abs()).sum::<f64>())
    }

    pub fn to_f64(&self) -> StringDistribution<f64> {
        StringDistribution { len: self.len, probs: self.probs.iter().map(|p| p.to_f64()).collect() }
    }
}

fn check_len(len: u32) -> Result<()> {
    if len > MAX_DIST_LEN {
        return Err(Error::UnsupportedSize(format!("dense distributions hold at most {MAX_DIST_LEN} bits")));
    }
    Ok(())
}

impl StringDistribution<BigRational> {
    /// `string,numerator,denominator` rows for the support.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("string,numerator,denominator\n");
        for (s, p) in self.support() {
            out.push_str(&format!("{s},{},{}\n", p.numer(), p.denom()));
        }
        out
    }
}

impl StringDistribution<f64> {
    /// Same layout as the rational form; floats are written as exact dyadic fractions.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("string,numerator,denominator\n");
        for (s, p) in self.support() {
            let r = BigRational::from_float(*p).unwrap_or_default();
            out.push_str(&format!("{s},{},{}\n", r.numer(), r.denom()));
        }
        out
    }
}
