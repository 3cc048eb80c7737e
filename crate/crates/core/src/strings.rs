//! Bit strings up to 127 positions with lexicographic ranking.
//!
//! Position 0 is the leftmost character and the most significant bit, so
//! numeric order on `bits` is lexicographic order with `0 < 1`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_LEN: u32 = 127;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitString {
    pub len: u32,
    pub bits: u128,
}

impl BitString {
    pub fn new(len: u32, bits: u128) -> Self {
        debug_assert!(len <= MAX_LEN && (len == 128 || bits >> len == 0));
        BitString { len, bits }
    }

    pub fn zeros(len: u32) -> Self {
        BitString { len, bits: 0 }
    }

    pub fn ones(len: u32) -> Self {
        BitString { len, bits: if len == 0 { 0 } else { (1u128 << len) - 1 } }
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Character at position `i` counted from the left.
    pub fn get(&self, i: u32) -> bool {
        (self.bits >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn concat(&self, tail: &BitString) -> BitString {
        BitString::new(self.len + tail.len, (self.bits << tail.len) | tail.bits)
    }

    /// Positions `[start, start + len)`.
    pub fn slice(&self, start: u32, len: u32) -> BitString {
        let shifted = self.bits >> (self.len - start - len);
        let mask = if len == 0 { 0 } else { (1u128 << len) - 1 };
        BitString::new(len, shifted & mask)
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > MAX_LEN as usize {
            return Err(Error::UnsupportedSize(format!("string of length {}", s.len())));
        }
        let mut bits = 0u128;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(Error::param(format!("bad character {c:?} in bit string"))),
            }
        }
        Ok(BitString::new(s.len() as u32, bits))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn pascal() -> &'static Vec<Vec<u128>> {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = MAX_LEN as usize + 1;
        let mut rows = vec![vec![0u128; n]; n];
        for i in 0..n {
            rows[i][0] = 1;
            for j in 1..=i {
                rows[i][j] = rows[i - 1][j - 1] + if j < i { rows[i - 1][j] } else { 0 };
            }
        }
        rows
    })
}

/// `C(n, k)` from a Pascal table, for `n <= 127`.
pub fn small_binomial(n: u32, k: u32) -> u128 {
    if k > n {
        0
    } else {
        pascal()[n as usize][k as usize]
    }
}

/// Lexicographic rank of `s` among strings of its length and weight.
pub fn rank(s: &BitString) -> u128 {
    let mut ones_left = s.weight();
    let mut r = 0u128;
    for i in 0..s.len {
        if s.get(i) {
            r += small_binomial(s.len - i - 1, ones_left);
            ones_left -= 1;
        }
    }
    r
}

/// Inverse of [`rank`].
pub fn unrank(len: u32, weight: u32, mut r: u128) -> Result<BitString> {
    if len > MAX_LEN || weight > len || r >= small_binomial(len, weight) {
        return Err(Error::param(format!("rank {r} out of range for C({len},{weight})")));
    }
    let mut bits = 0u128;
    let mut ones_left = weight;
    for i in 0..len {
        bits <<= 1;
        if ones_left == 0 {
            continue;
        }
        let zeros_here = small_binomial(len - i - 1, ones_left);
        if r >= zeros_here {
            r -= zeros_here;
            bits |= 1;
            ones_left -= 1;
        }
    }
    Ok(BitString::new(len, bits))
}

/// All strings of `len` with `weight` ones in lexicographic order.
pub fn enumerate(len: u32, weight: u32) -> Vec<BitString> {
    let total = small_binomial(len, weight);
    let mut out = Vec::with_capacity(total as usize);
    if weight > len {
        return out;
    }
    if weight == 0 {
        out.push(BitString::zeros(len));
        return out;
    }
    // Gosper's hack yields increasing integers with fixed popcount.
    let mut v: u128 = (1u128 << weight) - 1;
    let limit: u128 = 1u128 << len;
    while v < limit {
        out.push(BitString::new(len, v));
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_roundtrip_and_order() {
        for len in 0..10 {
            for w in 0..=len {
                let all = enumerate(len, w);
                assert_eq!(all.len() as u128, small_binomial(len, w));
                for (i, s) in all.iter().enumerate() {
                    assert_eq!(rank(s), i as u128);
                    assert_eq!(unrank(len, w, i as u128).unwrap(), *s);
                }
                assert!(all.windows(2).all(|p| p[0] < p[1]));
            }
        }
    }

    #[test]
    fn display_and_parse() {
        let s = BitString::parse("0110").unwrap();
        assert_eq!(s.to_string(), "0110");
        assert_eq!(s.concat(&BitString::ones(2)).to_string(), "011011");
        assert_eq!(s.slice(1, 2).to_string(), "11");
        assert!(BitString::parse("012").is_err());
    }

    #[test]
    fn pascal_top_row_fits() {
        assert!(small_binomial(127, 63) > 0);
        assert_eq!(small_binomial(10, 3), 120);
    }
}
