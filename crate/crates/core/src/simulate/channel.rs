//! Plans as permutations of bit strings.

use serde::{Deserialize, Serialize};

use crate::distill::{build_string_map, DistillationPlan, PlanSource};
use crate::error::{Error, Result};
use crate::form::{build_formation_map, FormationPlan};
use crate::strings::{self, BitString};

use super::distribution::MAX_DIST_LEN;

/// Bijection on strings of length `len`, indexed by string value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    pub len: u32,
    pub table: Vec<u32>,
}

impl Permutation {
    pub fn identity(len: u32) -> Result<Self> {
        check_len(len)?;
        Ok(Permutation { len, table: (0..1u32 << len).collect() })
    }

    pub fn apply(&self, s: BitString) -> BitString {
        BitString::new(self.len, self.table[s.bits as usize] as u128)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.table.len()];
        self.table.iter().all(|&j| (j as usize) < seen.len() && !std::mem::replace(&mut seen[j as usize], true))
    }

    /// Hamming weight (energy in units of the gap) is preserved by every entry.
    pub fn conserves_weight(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &j)| (i as u32).count_ones() == j.count_ones())
    }

    /// Completes a partial weight-preserving injection: leftover inputs of each
    /// weight go to leftover outputs of that weight in lexicographic order.
    pub fn complete(len: u32, fixed: &[(BitString, BitString)]) -> Result<Self> {
        check_len(len)?;
        let size = 1usize << len;
        let mut table = vec![u32::MAX; size];
        let mut taken = vec![false; size];
        for (a, b) in fixed {
            if a.len != len || b.len != len {
                return Err(Error::param("map entry has the wrong length"));
            }
            if a.weight() != b.weight() {
                return Err(Error::AuditFailure(format!("entry {a} -> {b} changes the number of ones")));
            }
            let (i, j) = (a.bits as usize, b.bits as usize);
            if table[i] != u32::MAX || taken[j] {
                return Err(Error::AuditFailure(format!("entry {a} -> {b} collides with another entry")));
            }
            table[i] = j as u32;
            taken[j] = true;
        }
        for w in 0..=len {
            let shell = strings::enumerate(len, w);
            let free_out: Vec<_> = shell.iter().filter(|s| !taken[s.bits as usize]).collect();
            let free_in: Vec<_> = shell.iter().filter(|s| table[s.bits as usize] == u32::MAX).collect();
            for (a, b) in free_in.into_iter().zip(free_out) {
                table[a.bits as usize] = b.bits as u32;
            }
        }
        Ok(Permutation { len, table })
    }
}

fn check_len(len: u32) -> Result<()> {
    if len > MAX_DIST_LEN {
        return Err(Error::UnsupportedSize(format!("permutations act on at most {MAX_DIST_LEN} bits")));
    }
    Ok(())
}

/// Mixture of permutations; a Birkhoff-stage choice between branches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub len: u32,
    pub branches: Vec<(f64, Permutation)>,
}

impl Channel {
    pub fn is_legal(&self) -> bool {
        self.branches.iter().all(|(_, p)| p.len == self.len && p.is_bijection() && p.conserves_weight())
    }
}

/// Typical composite types through the plan's maps, everything else completed
/// within its weight shell.
pub fn distillation_permutation(plan: &DistillationPlan) -> Result<Permutation> {
    if plan.source != PlanSource::Quasiclassical {
        return Err(Error::param("only quasiclassical plans act on strings"));
    }
    let len = plan.total_len() as u32;
    check_len(len)?;
    let mut fixed = Vec::new();
    for rec in &plan.per_type_maps {
        fixed.extend(build_string_map(plan, &rec.gibbs, &rec.resource)?.entries);
    }
    Permutation::complete(len, &fixed)
}

/// One permutation per target type, weighted by the Birkhoff stage.
/// Inputs are `ell` Gibbs bits then `m` work bits; outputs are `n` target bits
/// then the exhaust.
pub fn formation_channel(plan: &FormationPlan) -> Result<Channel> {
    let len = (plan.ell + plan.m) as u32;
    check_len(len)?;
    let total: f64 = plan.birkhoff.achieved_weights.iter().sum();
    let mut branches = Vec::new();
    for (target, w) in plan.target_types.iter().zip(&plan.birkhoff.achieved_weights) {
        let mut fixed = Vec::new();
        for rec in plan.per_type_maps.iter().filter(|r| &r.target == target) {
            fixed.extend(build_formation_map(plan, &rec.gibbs, target)?.entries);
        }
        branches.push((w / total, Permutation::complete(len, &fixed)?));
    }
    Ok(Channel { len, branches })
}
