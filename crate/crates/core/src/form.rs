//! Finite-n formation of two-level resources from excited qubits.
//!
//! `m` excited qubits and `ell` Gibbs qubits are permuted into `n` target
//! qubits plus a `k = m + ell - n` qubit exhaust. A Gibbs type `g` feeds a
//! target type `t` when `C(ell, g) <= C(k, g + m - t) C(n, t)`. Which target
//! type is produced is drawn by a Birkhoff stage that conditions on a
//! separate Gibbs register.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{self, compare_filtered, BigCount, Counting};
use crate::distill::{rate_limit, StringMap, MAX_MAP_ENTRIES};
use crate::error::{Error, Result};
use crate::scalar::{ratio_to_f64, Probability};
use crate::state::two_level_excited_population;
use crate::strings::{self, BitString, MAX_LEN};
use crate::typeclass::{TypeDescriptor, Window};

fn formation_fits(n: u64, t: u64, ell: u64, g: u64, m: u64, counting: &Counting) -> bool {
    if m + ell < n || g + m < t {
        return false;
    }
    let k = m + ell - n;
    let e = g + m - t;
    if e > k {
        return false;
    }
    let ln_in = counting::ln_binomial(ell, g);
    let ln_out = counting::ln_binomial(k, e) + counting::ln_binomial(n, t);
    let ord = compare_filtered(ln_in, ln_out, counting.is_exact_at(ell + n + m), || {
        (counting::binomial(ell, g), counting::binomial(k, e) * counting::binomial(n, t))
    });
    ord != std::cmp::Ordering::Greater
}

/// Smallest `m` with `C(ell, g) <= C(m + ell - n, g + m - t) C(n, t)`, in exact arithmetic.
pub fn solve_formation_single_type(n: u64, target_ones: u64, ell: u64, gibbs_ones: u64) -> Result<u64> {
    solve_formation_single_type_with(n, target_ones, ell, gibbs_ones, &Counting::exact())
}

pub fn solve_formation_single_type_with(n: u64, t: u64, ell: u64, g: u64, counting: &Counting) -> Result<u64> {
    if t > n || g > ell {
        return Err(Error::param(format!("ones out of range: t={t} of {n}, g={g} of {ell}")));
    }
    // the exhaust needs ell - g - (n - t) zeros whatever m is
    if ell - g < n - t {
        return Err(Error::Infeasible(format!(
            "Gibbs type ({}, {g}) has fewer zeros than target type ({}, {t})",
            ell - g,
            n - t
        )));
    }
    let mut lo = (n.saturating_sub(ell)).max(t.saturating_sub(g));
    // the exhaust grows with m, so search upward for a feasible bound
    let mut hi = (ell + n).max(lo);
    while !formation_fits(n, t, ell, g, hi, counting) {
        if hi > 1 << 40 {
            return Err(Error::Infeasible(format!("no m forms ({n}, {t}) from ({ell}, {g})")));
        }
        lo = hi + 1;
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if formation_fits(n, t, ell, g, mid, counting) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Renormalized binomial weights `C(n,t) p^t (1-p)^{n-t}` over the window.
pub fn type_distribution(n: u64, p: f64, window: &[TypeDescriptor]) -> Result<Vec<f64>> {
    if window.is_empty() {
        return Err(Error::param("empty type window"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p = {p} outside [0, 1]")));
    }
    let f = [1.0 - p, p];
    let mut w = Vec::with_capacity(window.len());
    for t in window {
        if t.dim() != 2 || t.total() != n {
            return Err(Error::param("window types must be two-level of length n"));
        }
        w.push(f64::type_probability(t.counts(), &f));
    }
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return Err(Error::param("window carries no probability"));
    }
    Ok(w.into_iter().map(|x| x / s).collect())
}

/// `multiplicity` Gibbs strings sharing one probability `weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightClass {
    pub weight: f64,
    pub multiplicity: u128,
}

/// Strings `[start, start + count)` of one weight class, in lexicographic rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub class: usize,
    pub start: u128,
    pub count: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffPartition {
    pub classes: Vec<WeightClass>,
    pub sets: Vec<Vec<IndexRange>>,
    pub target_weights: Vec<f64>,
    pub achieved_weights: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub max_single_weight: f64,
    /// False when the tolerance is below the largest single weight, in which
    /// case the partition is best effort.
    pub within_tolerance: bool,
}

impl BirkhoffPartition {
    /// Every string of every class is assigned exactly once.
    pub fn is_partition(&self) -> bool {
        let mut per_class: Vec<Vec<(u128, u128)>> = vec![Vec::new(); self.classes.len()];
        for set in &self.sets {
            for r in set {
                if r.class >= self.classes.len() {
                    return false;
                }
                per_class[r.class].push((r.start, r.count));
            }
        }
        per_class.iter_mut().zip(&self.classes).all(|(ranges, c)| {
            ranges.sort();
            let mut next = 0u128;
            for &(s, n) in ranges.iter() {
                if s != next {
                    return false;
                }
                next += n;
            }
            next == c.multiplicity
        })
    }

    pub fn set_sizes(&self) -> Vec<u128> {
        self.sets.iter().map(|s| s.iter().map(|r| r.count).sum()).collect()
    }
}

fn check_distribution(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() || v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::param(format!("{what} must be nonnegative and finite")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("{what} sum to {s}, not 1")));
    }
    Ok(())
}

/// Greedy largest-first assignment of strings to target sets; each string
/// goes to the set with the largest remaining deficit. The final deviation
/// never exceeds the largest single weight.
pub fn birkhoff_partition(weights: &[f64], targets: &[f64], tolerance: f64) -> Result<BirkhoffPartition> {
    let classes: Vec<WeightClass> = weights.iter().map(|&w| WeightClass { weight: w, multiplicity: 1 }).collect();
    birkhoff_partition_classes(&classes, targets, tolerance)
}

/// Same as [`birkhoff_partition`] over strings grouped into equal-weight classes.
pub fn birkhoff_partition_classes(classes: &[WeightClass], targets: &[f64], tolerance: f64) -> Result<BirkhoffPartition> {
    if !(tolerance > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    check_distribution(targets, "targets")?;
    if classes.iter().any(|c| !(c.weight >= 0.0) || !c.weight.is_finite()) {
        return Err(Error::param("weights must be nonnegative and finite"));
    }
    let total: f64 = classes.iter().map(|c| c.weight * c.multiplicity as f64).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("weights sum to {total}, not 1")));
    }
    let kk = targets.len();
    let mut deficit = targets.to_vec();
    let mut counts: Vec<Vec<u128>> = vec![vec![0; kk]; classes.len()];
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| classes[b].weight.partial_cmp(&classes[a].weight).unwrap().then(a.cmp(&b)));

    for &ci in &order {
        let WeightClass { weight: w, multiplicity: c } = classes[ci];
        if c == 0 {
            continue;
        }
        if w == 0.0 {
            let k = argmax(&deficit);
            counts[ci][k] += c;
            continue;
        }
        if c <= 1 << 16 {
            for _ in 0..c {
                let k = argmax(&deficit);
                counts[ci][k] += 1;
                deficit[k] -= w;
            }
            continue;
        }
        let alloc = water_fill(&deficit, w, c);
        for k in 0..kk {
            counts[ci][k] = alloc[k];
            deficit[k] -= alloc[k] as f64 * w;
        }
    }

    let mut sets: Vec<Vec<IndexRange>> = vec![Vec::new(); kk];
    let mut achieved = vec![0.0f64; kk];
    for (ci, row) in counts.iter().enumerate() {
        let mut start = 0u128;
        for (k, &cnt) in row.iter().enumerate() {
            if cnt > 0 {
                sets[k].push(IndexRange { class: ci, start, count: cnt });
                achieved[k] += cnt as f64 * classes[ci].weight;
                start += cnt;
            }
        }
    }
    let max_deviation = achieved.iter().zip(targets).map(|(a, t)| (a - t).abs()).fold(0.0, f64::max);
    let max_single_weight = classes.iter().filter(|c| c.multiplicity > 0).map(|c| c.weight).fold(0.0, f64::max);
    Ok(BirkhoffPartition {
        classes: classes.to_vec(),
        sets,
        target_weights: targets.to_vec(),
        achieved_weights: achieved,
        max_deviation,
        tolerance,
        max_single_weight,
        within_tolerance: max_deviation <= tolerance && max_single_weight <= tolerance,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Allocation of `c` items of weight `w` equivalent to `c` rounds of
/// "give one item to the largest deficit": items land on the `c` largest
/// levels `deficit_k - j w`.
fn water_fill(deficit: &[f64], w: f64, c: u128) -> Vec<u128> {
    let cnt = |lambda: f64| -> Vec<u128> {
        deficit
            .iter()
            .map(|&d| if d < lambda { 0 } else { (((d - lambda) / w).floor() as u128).saturating_add(1).min(c) })
            .collect()
    };
    let sum = |v: &[u128]| v.iter().fold(0u128, |a, &b| a.saturating_add(b));
    let dmin = deficit.iter().cloned().fold(f64::INFINITY, f64::min);
    let dmax = deficit.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = dmin - (c as f64 + 1.0) * w;
    let mut hi = dmax + w;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum(&cnt(mid)) >= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut take = cnt(hi);
    let upper = cnt(lo);
    let mut rest = c - sum(&take);
    let mut idx: Vec<usize> = (0..deficit.len()).collect();
    idx.sort_by(|&a, &b| {
        let la = deficit[a] - take[a] as f64 * w;
        let lb = deficit[b] - take[b] as f64 * w;
        lb.partial_cmp(&la).unwrap().then(a.cmp(&b))
    });
    for &k in &idx {
        if rest == 0 {
            break;
        }
        let extra = (upper[k] - take[k]).min(rest);
        take[k] += extra;
        rest -= extra;
    }
    // floating point ties can leave a few items over; hand them out greedily
    while rest > 0 {
        let k = (0..deficit.len())
            .max_by(|&a, &b| {
                let la = deficit[a] - take[a] as f64 * w;
                let lb = deficit[b] - take[b] as f64 * w;
                la.partial_cmp(&lb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        take[k] += 1;
        rest -= 1;
    }
    take
}

/// Weight classes of `len` Gibbs qubits: class `j` holds the strings with `j` ones.
pub fn gibbs_string_classes(len: u32, q: f64) -> Result<Vec<WeightClass>> {
    if len > MAX_LEN {
        return Err(Error::UnsupportedSize(format!("{len} Birkhoff qubits")));
    }
    Ok((0..=len)
        .map(|j| WeightClass {
            weight: q.powi(j as i32) * (1.0 - q).powi((len - j) as i32),
            multiplicity: strings::small_binomial(len, j),
        })
        .collect())
}

/// Smallest register with `max(q, 1-q)^len <= tolerance`, capped at 127.
pub fn birkhoff_register_len(q: f64, tolerance: f64) -> u32 {
    let top = q.max(1.0 - q);
    if top >= 1.0 {
        return 0;
    }
    let len = (tolerance.ln() / top.ln()).ceil().max(0.0);
    (len as u32).min(MAX_LEN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormConfig {
    pub window: Window,
    pub counting: Counting,
    /// Overrides `ceil(m^{3/2})`.
    pub ell: Option<u64>,
    pub max_records: usize,
    /// Birkhoff tolerance; defaults to `0.01 / #target types`.
    pub birkhoff_tolerance: Option<f64>,
}

impl Default for FormConfig {
    fn default() -> Self {
        FormConfig {
            window: Window::default(),
            counting: Counting::default(),
            ell: None,
            max_records: 250_000,
            birkhoff_tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationRecord {
    pub gibbs: TypeDescriptor,
    pub target: TypeDescriptor,
    pub exhaust: TypeDescriptor,
    pub work_ones: u64,
    pub log_gibbs_cardinality: f64,
    /// `ln(C(k, e) C(n, t))`.
    pub log_capacity: f64,
    pub gibbs_cardinality: Option<BigCount>,
    pub exhaust_cardinality: Option<BigCount>,
    pub target_cardinality: Option<BigCount>,
}

/// How evenly one record spreads its Gibbs strings over the target strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentBalance {
    pub min_per_target: BigCount,
    pub max_per_target: BigCount,
    /// Exact total-variation distance of the target marginal from uniform.
    pub total_variation: f64,
    /// `#targets / #inputs`.
    pub bound: f64,
}

impl FormationRecord {
    /// Round-robin balance; `None` without exact counts.
    pub fn assignment_balance(&self) -> Option<AssignmentBalance> {
        let inputs = &self.gibbs_cardinality.as_ref()?.0;
        let targets = &self.target_cardinality.as_ref()?.0;
        let a = inputs / targets;
        let r = inputs % targets;
        let max = if r.is_zero() { a.clone() } else { &a + 1u32 };
        let num = &r * (targets - &r);
        let den = inputs * targets;
        let tv = ratio_to_f64(&BigRational::new(num.into(), den.into()));
        let bound = ratio_to_f64(&BigRational::new(targets.clone().into(), inputs.clone().into()));
        Some(AssignmentBalance { min_per_target: BigCount(a), max_per_target: BigCount(max), total_variation: tv, bound })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationPlan {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub k: u64,
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub register_bits: u32,
    pub typical_gibbs_types: usize,
    pub per_type_maps: Vec<FormationRecord>,
    pub target_types: Vec<TypeDescriptor>,
    pub type_distribution: Vec<f64>,
    pub birkhoff_register: u32,
    pub birkhoff: BirkhoffPartition,
    /// Entropy of the type distribution the Birkhoff stage injects (nats).
    pub birkhoff_entropy: f64,
    /// `m / n`; tends to the rate limit.
    pub cost_rate: f64,
    pub rate_limit: f64,
    pub free_target: bool,
    pub exact_counting: bool,
    pub window: Window,
}

impl FormationPlan {
    pub fn check_invariants(&self) -> Result<()> {
        if self.m + self.ell != self.n + self.k {
            return Err(Error::InvalidState("m + ell != n + k".into()));
        }
        let bits_needed = (self.typical_gibbs_types as f64).log2().ceil().max(0.0) as u32;
        if self.register_bits > bits_needed {
            return Err(Error::InvalidState("register larger than log2 of the Gibbs window".into()));
        }
        for r in &self.per_type_maps {
            if r.gibbs.ones() + self.m != r.exhaust.ones() + r.target.ones() {
                return Err(Error::InvalidState("record does not conserve ones".into()));
            }
            match (&r.gibbs_cardinality, &r.exhaust_cardinality, &r.target_cardinality) {
                (Some(a), Some(b), Some(c)) if a.0 > &b.0 * &c.0 => {
                    return Err(Error::InvalidState("record has more inputs than outputs".into()))
                }
                (None, _, _) if r.log_gibbs_cardinality > r.log_capacity + 1e-9 => {
                    return Err(Error::InvalidState("record has more inputs than outputs".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn record(&self, gibbs: &TypeDescriptor, target: &TypeDescriptor) -> Option<&FormationRecord> {
        self.per_type_maps.iter().find(|r| &r.gibbs == gibbs && &r.target == target)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationCost {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub cost_rate: f64,
    pub rate_limit: f64,
    pub exact_counting: bool,
}

/// `ceil(m^{3/2})`.
pub fn formation_bath_size(m: u64) -> u64 {
    crate::distill::default_bath_size(1.0, m)
}

fn worst_case_work(n: u64, tw: (u64, u64), ell: u64, gw: (u64, u64), counting: &Counting) -> Result<u64> {
    let ts: Vec<u64> = (tw.0..=tw.1).collect();
    let per_t: Vec<Result<u64>> = ts
        .par_iter()
        .map(|&t| {
            let mut worst = 0;
            for g in gw.0..=gw.1 {
                worst = worst.max(solve_formation_single_type_with(n, t, ell, g, counting)?);
            }
            Ok(worst)
        })
        .collect();
    let mut worst = 0;
    for r in per_t {
        worst = worst.max(r?);
    }
    Ok(worst)
}

struct Sized {
    ell: u64,
    m: u64,
    rate_limit: f64,
    gw: (u64, u64),
    tw: (u64, u64),
}

fn size_formation(n: u64, p: f64, beta: f64, cfg: &FormConfig) -> Result<Sized> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let r = rate_limit(p, beta)?;
    let q = two_level_excited_population(beta, 1.0);
    let tw = cfg.window.count_range(n, p);
    if let Some(ell) = cfg.ell {
        let gw = cfg.window.count_range(ell, q);
        let m = worst_case_work(n, tw, ell, gw, &cfg.counting)?;
        return Ok(Sized { ell, m, rate_limit: r, gw, tw });
    }
    let mut m = ((r * n as f64).ceil() as u64).max(1);
    let mut seen = Vec::new();
    for _ in 0..64 {
        let ell = formation_bath_size(m);
        let gw = cfg.window.count_range(ell, q);
        match worst_case_work(n, tw, ell, gw, &cfg.counting) {
            Err(Error::Infeasible(_)) => {
                m = 2 * m + 1;
                continue;
            }
            Err(e) => return Err(e),
            Ok(next) => {
                if next == m || seen.contains(&next) {
                    let m_final = next.max(m);
                    let ell = formation_bath_size(m_final);
                    let gw = cfg.window.count_range(ell, q);
                    let need = worst_case_work(n, tw, ell, gw, &cfg.counting)?;
                    return Ok(Sized { ell, m: need, rate_limit: r, gw, tw });
                }
                seen.push(m);
                m = next;
            }
        }
    }
    Err(Error::Infeasible("bath size iteration did not settle".into()))
}

/// Cost `m` and bath size without per-type records.
pub fn formation_cost(n: u64, p: f64, beta: f64, cfg: &FormConfig) -> Result<FormationCost> {
    let s = size_formation(n, p, beta, cfg)?;
    Ok(FormationCost {
        n,
        ell: s.ell,
        m: s.m,
        cost_rate: s.m as f64 / n as f64,
        rate_limit: s.rate_limit,
        exact_counting: cfg.counting.is_exact_at(s.ell + n + s.m),
    })
}

/// Builds the full formation plan for `(1-p)|0><0| + p|1><1|`.
pub fn plan_formation(n: u64, p: f64, beta: f64, cfg: &FormConfig) -> Result<FormationPlan> {
    let r = rate_limit(p, beta)?;
    let q = two_level_excited_population(beta, 1.0);
    let free_target = r.abs() <= 1e-12;
    let s = if free_target {
        // Gibbs copies pass through unchanged
        let tw = cfg.window.count_range(n, q);
        Sized { ell: n, m: 0, rate_limit: r, gw: tw, tw }
    } else {
        size_formation(n, p, beta, cfg)?
    };
    let (ell, m) = (s.ell, s.m);
    let k = m + ell - n;
    let exact = cfg.counting.is_exact_at(ell + n + m);
    let pairs: Vec<(u64, u64)> = if free_target {
        (s.gw.0..=s.gw.1).map(|g| (g, g)).collect()
    } else {
        (s.gw.0..=s.gw.1).flat_map(|g| (s.tw.0..=s.tw.1).map(move |t| (g, t))).collect()
    };
    if pairs.len() > cfg.max_records {
        return Err(Error::UnsupportedSize(format!(
            "{} type pairs exceed the record cap {}; use formation_cost",
            pairs.len(),
            cfg.max_records
        )));
    }
    let mut per_type_maps = Vec::with_capacity(pairs.len());
    for &(g, t) in &pairs {
        let e = g + m - t;
        let (gc, ec, tc) = if exact {
            (
                Some(BigCount(counting::binomial(ell, g))),
                Some(BigCount(counting::binomial(k, e))),
                Some(BigCount(counting::binomial(n, t))),
            )
        } else {
            (None, None, None)
        };
        per_type_maps.push(FormationRecord {
            gibbs: TypeDescriptor::two_level(ell, g)?,
            target: TypeDescriptor::two_level(n, t)?,
            exhaust: TypeDescriptor::two_level(k, e)?,
            work_ones: m,
            log_gibbs_cardinality: counting::ln_binomial(ell, g),
            log_capacity: counting::ln_binomial(k, e) + counting::ln_binomial(n, t),
            gibbs_cardinality: gc,
            exhaust_cardinality: ec,
            target_cardinality: tc,
        });
    }
    let target_types: Vec<TypeDescriptor> =
        (s.tw.0..=s.tw.1).map(|t| TypeDescriptor::two_level(n, t)).collect::<Result<_>>()?;
    let dist_p = if free_target { q } else { p };
    let type_dist = type_distribution(n, dist_p, &target_types)?;
    let tolerance = cfg.birkhoff_tolerance.unwrap_or(0.01 / type_dist.len() as f64);
    let birkhoff_register = birkhoff_register_len(q, tolerance);
    let classes = gibbs_string_classes(birkhoff_register, q)?;
    let birkhoff = birkhoff_partition_classes(&classes, &type_dist, tolerance)?;
    let birkhoff_entropy = type_dist.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    let typical_gibbs_types = (s.gw.1 - s.gw.0 + 1) as usize;
    Ok(FormationPlan {
        n,
        ell,
        m,
        k,
        p,
        beta,
        q,
        register_bits: (typical_gibbs_types as f64).log2().ceil() as u32,
        typical_gibbs_types,
        per_type_maps,
        target_types,
        type_distribution: type_dist,
        birkhoff_register,
        birkhoff,
        birkhoff_entropy,
        cost_rate: m as f64 / n as f64,
        rate_limit: r,
        free_target,
        exact_counting: exact,
        window: cfg.window,
    })
}

/// Round-robin injection for one `(g, t)` record: Gibbs string of rank `i`
/// (followed by `1^m`) goes to target rank `i mod C(n,t)` and exhaust rank
/// `i div C(n,t)`. Output layout is target then exhaust.
pub fn build_formation_map(plan: &FormationPlan, gibbs: &TypeDescriptor, target: &TypeDescriptor) -> Result<StringMap> {
    let rec = plan
        .record(gibbs, target)
        .ok_or_else(|| Error::param(format!("type pair {:?}/{:?} is not in the plan", gibbs.counts(), target.counts())))?;
    if plan.ell + plan.m > MAX_LEN as u64 {
        return Err(Error::UnsupportedSize(format!("strings of length {}", plan.ell + plan.m)));
    }
    let (ell, n, k, m) = (plan.ell as u32, plan.n as u32, plan.k as u32, plan.m as u32);
    let (g, t, e) = (gibbs.ones() as u32, target.ones() as u32, rec.exhaust.ones() as u32);
    let cg = strings::small_binomial(ell, g);
    let ct = strings::small_binomial(n, t);
    if cg > MAX_MAP_ENTRIES {
        return Err(Error::UnsupportedSize(format!("{cg} strings in one type class")));
    }
    let work = BitString::ones(m);
    let mut entries = Vec::with_capacity(cg as usize);
    for i in 0..cg {
        let input = strings::unrank(ell, g, i)?.concat(&work);
        let out = strings::unrank(n, t, i % ct)?.concat(&strings::unrank(k, e, i / ct)?);
        entries.push((input, out));
    }
    Ok(StringMap { entries })
}

/// Exact `C(ell, g) / C(n, t)` for reports.
pub fn inputs_per_target(rec: &FormationRecord) -> Option<f64> {
    let a: &BigUint = &rec.gibbs_cardinality.as_ref()?.0;
    let b: &BigUint = &rec.target_cardinality.as_ref()?.0;
    Some(ratio_to_f64(&BigRational::new(a.clone().into(), b.clone().into())))
}
