//! Brute-force check of the distillation counting condition.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::strings::{self, BitString};

/// Largest total length handled by explicit string enumeration.
pub const ENUMERATION_LIMIT: u64 = 14;
/// Largest total length handled at all.
pub const ORACLE_LIMIT: u64 = 24;

/// Largest `m` for which the composite type `(ell, g) x (n, t)` injects into
/// strings of length `ell + n` ending in `m` ones. Up to 14 qubits the
/// injection is built and checked string by string; up to 24 the two sets
/// are counted with an independent Pascal table.
pub fn oracle_max_m(ell: u64, gibbs_ones: u64, n: u64, resource_ones: u64) -> Result<u64> {
    if gibbs_ones > ell || resource_ones > n {
        return Err(Error::param("ones out of range"));
    }
    let len = ell + n;
    if len > ORACLE_LIMIT {
        return Err(Error::UnsupportedSize(format!("oracle handles ell + n <= {ORACLE_LIMIT}, got {len}")));
    }
    let w = gibbs_ones + resource_ones;
    if len <= ENUMERATION_LIMIT {
        let inputs = enumerate_inputs(ell as u32, gibbs_ones as u32, n as u32, resource_ones as u32);
        let shell = strings::enumerate(len as u32, w as u32);
        for m in (0..=w).rev() {
            let tail_mask: u128 = if m == 0 { 0 } else { (1u128 << m) - 1 };
            let outputs: Vec<BitString> = shell.iter().copied().filter(|s| s.bits & tail_mask == tail_mask).collect();
            if outputs.len() < inputs.len() {
                continue;
            }
            let image: HashSet<BitString> = inputs.iter().zip(&outputs).map(|(_, o)| *o).collect();
            if image.len() == inputs.len() && image.iter().all(|o| o.weight() as u64 == w) {
                return Ok(m);
            }
        }
        unreachable!("m = 0 always admits an injection");
    }
    let pascal = pascal(len as usize);
    let inputs = pascal[ell as usize][gibbs_ones as usize] * pascal[n as usize][resource_ones as usize];
    for m in (0..=w).rev() {
        if pascal[(len - m) as usize][(w - m) as usize] >= inputs {
            return Ok(m);
        }
    }
    unreachable!("m = 0 always admits an injection")
}

fn enumerate_inputs(ell: u32, g: u32, n: u32, t: u32) -> Vec<BitString> {
    let gibbs = strings::enumerate(ell, g);
    let resource = strings::enumerate(n, t);
    gibbs.iter().flat_map(|a| resource.iter().map(move |b| a.concat(b))).collect()
}

fn pascal(size: usize) -> Vec<Vec<u128>> {
    let mut rows: Vec<Vec<u128>> = vec![vec![1]];
    for r in 1..=size {
        let prev = &rows[r - 1];
        let mut row = vec![1u128; r + 1];
        for k in 1..r {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(oracle_max_m(4, 1, 2, 2).unwrap(), 2);
        assert_eq!(oracle_max_m(5, 0, 3, 0).unwrap(), 0);
        assert!(matches!(oracle_max_m(20, 3, 5, 2), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn enumeration_and_counting_agree_at_the_seam() {
        // 14 qubits by enumeration versus the same question asked through counting
        for g in 0..=8 {
            for t in 0..=6 {
                let by_strings = oracle_max_m(8, g, 6, t).unwrap();
                let p = pascal(14);
                let inputs = p[8][g as usize] * p[6][t as usize];
                let w = g + t;
                let by_count = (0..=w).rev().find(|&m| p[(14 - m) as usize][(w - m) as usize] >= inputs).unwrap();
                assert_eq!(by_strings, by_count);
            }
        }
    }
}
