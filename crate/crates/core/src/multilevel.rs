//! Work extraction from `n` copies of a d-level quasiclassical state.
//!
//! Input counts `a` (system) and `b` (bath) are merged and relabelled into an
//! output type `c = a + b - delta`; the work register absorbs `H . delta`.
//! A relabelling exists whenever `M(a) M(b) <= M(c)`, `M` being the multinomial.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::counting::{self, compare_filtered, Counting};
use crate::distill::default_bath_size;
use crate::error::{Error, Result};
use crate::scalar::ratio_to_f64;
use crate::state::{gibbs_state, Hamiltonian};
use crate::typeclass::{rounded_type, FrequencyVector, Window};

/// Per-level occupation change `x`, scaled so that `n x` counts systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationShift {
    pub x: Vec<BigRational>,
    /// `n H . x` in energy units.
    pub work: f64,
}

impl OccupationShift {
    pub fn new(x: Vec<BigRational>, energies: &[f64], n: u64) -> Result<Self> {
        if x.len() != energies.len() {
            return Err(Error::DimensionMismatch(x.len(), energies.len()));
        }
        let total: BigRational = x.iter().cloned().sum();
        if !total.is_zero() {
            return Err(Error::InvalidShift(format!("shift sums to {total}, not 0")));
        }
        let work = n as f64 * x.iter().zip(energies).map(|(xi, e)| ratio_to_f64(xi) * e).sum::<f64>();
        Ok(OccupationShift { x, work })
    }

    pub fn zero(energies: &[f64]) -> Self {
        OccupationShift { x: vec![BigRational::zero(); energies.len()], work: 0.0 }
    }

    /// Shift moving `delta_i` systems out of level `i`.
    pub fn from_delta(delta: &[i64], energies: &[f64], n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        let x = delta.iter().map(|&d| BigRational::new(BigInt::from(d), BigInt::from(n))).collect();
        let mut s = Self::new(x, energies, n)?;
        s.work = delta.iter().zip(energies).map(|(&d, e)| d as f64 * e).sum();
        Ok(s)
    }

    /// `n x` as integers.
    pub fn delta(&self, n: u64) -> Result<Vec<i64>> {
        let nn = BigRational::from_integer(BigInt::from(n));
        self.x
            .iter()
            .map(|xi| {
                let v = xi * &nn;
                if !v.is_integer() {
                    return Err(Error::InvalidShift(format!("n x = {v} is not an integer")));
                }
                v.to_integer().to_i64().ok_or_else(|| Error::InvalidShift("shift out of range".into()))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarityCheck {
    pub holds: bool,
    /// `ln M(c) - ln M(a) - ln M(b)` in nats.
    pub margin: f64,
    pub output_counts: Vec<u64>,
}

fn output_counts(a: &[u64], b: &[u64], delta: &[i64]) -> Result<Vec<u64>> {
    if a.len() != b.len() || a.len() != delta.len() {
        return Err(Error::DimensionMismatch(a.len(), delta.len()));
    }
    a.iter()
        .zip(b)
        .zip(delta)
        .map(|((&x, &y), &d)| {
            let c = x as i128 + y as i128 - d as i128;
            if c < 0 {
                Err(Error::InvalidShift(format!("output occupation {c} is negative")))
            } else {
                Ok(c as u64)
            }
        })
        .collect()
}

/// Exact test of `M(a) M(b) <= M(a + b - delta)` on explicit counts.
pub fn unitarity_condition_counts(a: &[u64], b: &[u64], delta: &[i64], counting: &Counting) -> Result<UnitarityCheck> {
    if delta.iter().sum::<i64>() != 0 {
        return Err(Error::InvalidShift("shift does not conserve the number of systems".into()));
    }
    let c = output_counts(a, b, delta)?;
    let lhs = counting::ln_multinomial(a) + counting::ln_multinomial(b);
    let rhs = counting::ln_multinomial(&c);
    let size: u64 = c.iter().sum();
    let ord = compare_filtered(lhs, rhs, counting.is_exact_at(size), || {
        (counting::multinomial(a) * counting::multinomial(b), counting::multinomial(&c))
    });
    Ok(UnitarityCheck { holds: ord != std::cmp::Ordering::Greater, margin: rhs - lhs, output_counts: c })
}

/// Exact multinomial condition for the rounded types `n f_rho` and `ell f_gamma`.
pub fn unitarity_condition(
    f_rho: &FrequencyVector,
    f_gamma: &FrequencyVector,
    x: &OccupationShift,
    n: u64,
    ell: u64,
) -> Result<UnitarityCheck> {
    if f_rho.dim() != f_gamma.dim() {
        return Err(Error::DimensionMismatch(f_rho.dim(), f_gamma.dim()));
    }
    let a = rounded_type(n, f_rho.freqs());
    let b = rounded_type(ell, f_gamma.freqs());
    let delta = x.delta(n)?;
    unitarity_condition_counts(a.counts(), b.counts(), &delta, &Counting::exact())
}

/// Large-`ell` form `-x . ln f_gamma <= D(f_rho || f_gamma)`.
pub fn asymptotic_condition(f_rho: &FrequencyVector, f_gamma: &FrequencyVector, x: &OccupationShift) -> Result<bool> {
    if f_rho.dim() != f_gamma.dim() || x.x.len() != f_rho.dim() {
        return Err(Error::DimensionMismatch(f_rho.dim(), f_gamma.dim()));
    }
    if f_gamma.freqs().iter().any(|&g| g <= 0.0) {
        return Err(Error::param("f_gamma must have full support"));
    }
    let lhs: f64 = -x.x.iter().zip(f_gamma.freqs()).map(|(xi, g)| ratio_to_f64(xi) * g.ln()).sum::<f64>();
    let d = classical_relative_entropy(f_rho.freqs(), f_gamma.freqs());
    Ok(lhs <= d + 1e-12 * d.abs().max(1.0))
}

fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| if qi > 0.0 { pi * (pi / qi).ln() } else { f64::INFINITY })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    Exhaustive,
    Box { half_width: u64 },
    HillClimb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultilevelConfig {
    /// Concentration window for the probed input and bath types.
    pub window: Window,
    pub counting: Counting,
    /// Overrides `ceil(n^{3/2})`.
    pub ell: Option<u64>,
    /// Outer-coordinate evaluations allowed in box mode.
    pub box_budget: u64,
    /// Evaluate shifted input and bath types as well as the nominal ones.
    pub probe_fluctuations: bool,
}

impl Default for MultilevelConfig {
    fn default() -> Self {
        MultilevelConfig {
            window: Window::default(),
            counting: Counting::default(),
            ell: None,
            box_budget: 200_000,
            probe_fluctuations: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkLedger {
    pub n: u64,
    pub ell: u64,
    /// Work in energy units, `H . delta`.
    pub extracted: f64,
    pub per_copy: f64,
    pub per_level_delta: Vec<i64>,
    /// `ln M(c) - ln M(a) - ln M(b)` at the chosen shift (nats).
    pub feasibility_margin: f64,
    pub input_counts: Vec<u64>,
    pub bath_counts: Vec<u64>,
    pub output_counts: Vec<u64>,
    /// `D(f_rho || gamma) / beta`.
    pub bound_per_copy: f64,
    pub search: SearchMode,
    pub exhaustive: bool,
    pub probes: usize,
    pub worst_probe: usize,
    pub exact_counting: bool,
}

impl WorkLedger {
    /// Energy in minus energy out, recomputed from counts.
    pub fn energy_balance(&self, energies: &[f64]) -> f64 {
        let e = |v: &[u64]| v.iter().zip(energies).map(|(&c, h)| c as f64 * h).sum::<f64>();
        e(&self.input_counts) + e(&self.bath_counts) - e(&self.output_counts)
    }
}

/// Best shift for one pair of input and bath counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSearch {
    pub delta: Vec<i64>,
    pub work: f64,
    pub margin: f64,
    pub search: SearchMode,
    pub exhaustive: bool,
}

struct Problem<'a> {
    merged: Vec<u64>,
    energies: &'a [f64],
    /// level indices sorted by energy
    order: Vec<usize>,
    lhs: f64,
    lhs_exact: Option<num_bigint::BigUint>,
    exact: bool,
    total: u64,
}

impl<'a> Problem<'a> {
    fn new(a: &[u64], b: &[u64], energies: &'a [f64], counting: &Counting) -> Self {
        let merged: Vec<u64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let total: u64 = merged.iter().sum();
        let exact = counting.is_exact_at(total);
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&i, &j| energies[i].partial_cmp(&energies[j]).unwrap().then(i.cmp(&j)));
        Problem {
            lhs: counting::ln_multinomial(a) + counting::ln_multinomial(b),
            lhs_exact: exact.then(|| counting::multinomial(a) * counting::multinomial(b)),
            merged,
            energies,
            order,
            exact,
            total,
        }
    }

    fn feasible(&self, c: &[u64]) -> bool {
        let rhs = counting::ln_multinomial(c);
        let ord = compare_filtered(self.lhs, rhs, self.exact, || {
            (self.lhs_exact.clone().unwrap_or_default(), counting::multinomial(c))
        });
        ord != std::cmp::Ordering::Greater
    }

    fn work_of(&self, c: &[u64]) -> f64 {
        self.merged.iter().zip(c).zip(self.energies).map(|((&m, &ci), h)| (m as f64 - ci as f64) * h).sum()
    }

    /// Output counts in natural level order from the two lowest-energy
    /// occupations `(c0, c1)` and the outer ones.
    fn assemble(&self, c0: u64, c1: u64, outer: &[u64]) -> Vec<u64> {
        let mut c = vec![0; self.merged.len()];
        c[self.order[0]] = c0;
        c[self.order[1]] = c1;
        for (k, &o) in outer.iter().enumerate() {
            c[self.order[k + 2]] = o;
        }
        c
    }

    /// Smallest feasible occupation of the second-lowest level with the outer
    /// levels fixed, or `None` when the row is empty.
    fn row_min(&self, outer: &[u64]) -> Option<u64> {
        let used: u64 = outer.iter().sum();
        if used > self.total {
            return None;
        }
        let rest = self.total - used;
        let peak = rest / 2;
        if !self.feasible(&self.assemble(rest - peak, peak, outer)) {
            return None;
        }
        if self.energies[self.order[1]] == self.energies[self.order[0]] {
            return Some(peak);
        }
        let (mut lo, mut hi) = (0, peak);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.feasible(&self.assemble(rest - mid, mid, outer)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    fn candidate(&self, c1: u64, outer: &[u64]) -> (f64, Vec<u64>) {
        let used: u64 = outer.iter().sum();
        let c = self.assemble(self.total - used - c1, c1, outer);
        (self.work_of(&c), c)
    }
}

fn better(a: &(f64, Vec<u64>), b: &(f64, Vec<u64>)) -> bool {
    // larger work; ties prefer the lexicographically smaller shift, i.e. larger c
    a.0 > b.0 + 1e-12 * b.0.abs().max(1.0) || ((a.0 - b.0).abs() <= 1e-12 * b.0.abs().max(1.0) && a.1 > b.1)
}

/// Maximizes `H . delta` subject to `M(a) M(b) <= M(a + b - delta)`.
pub fn best_shift(a: &[u64], b: &[u64], energies: &[f64], counting: &Counting, box_budget: u64) -> Result<ShiftSearch> {
    let d = energies.len();
    if a.len() != d || b.len() != d {
        return Err(Error::DimensionMismatch(a.len(), d));
    }
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let pr = Problem::new(a, b, energies, counting);
    let start = (0.0, pr.merged.clone());
    let (best, search, exhaustive) = match d {
        2 => {
            let c1 = pr.row_min(&[]).expect("the merged type is always feasible");
            (pr.candidate(c1, &[]), SearchMode::Exhaustive, true)
        }
        3 => (sweep_three(&pr), SearchMode::Exhaustive, true),
        4..=6 => search_box(&pr, box_budget),
        _ => (hill_climb(&pr, &continuous_center(&pr)), SearchMode::HillClimb, false),
    };
    let best = if better(&best, &start) { best } else { start };
    let delta: Vec<i64> = pr.merged.iter().zip(&best.1).map(|(&m, &c)| m as i64 - c as i64).collect();
    let margin = counting::ln_multinomial(&best.1) - pr.lhs;
    Ok(ShiftSearch { delta, work: best.0, margin, search, exhaustive })
}

/// Every value of the top level, tracking the row minimum incrementally.
fn sweep_three(pr: &Problem) -> (f64, Vec<u64>) {
    let mut best = (f64::NEG_INFINITY, pr.merged.clone());
    let mut cur: Option<u64> = None;
    for c2 in 0..=pr.total {
        let rest = pr.total - c2;
        let peak = rest / 2;
        let fits = |c1: u64| pr.feasible(&pr.assemble(rest - c1, c1, &[c2]));
        let found = match cur {
            Some(mut c1) if c1 <= peak && pr.energies[pr.order[1]] != pr.energies[pr.order[0]] => {
                if fits(c1) {
                    while c1 > 0 && fits(c1 - 1) {
                        c1 -= 1;
                    }
                    Some(c1)
                } else {
                    while c1 < peak && !fits(c1) {
                        c1 += 1;
                    }
                    fits(c1).then_some(c1)
                }
            }
            _ => pr.row_min(&[c2]),
        };
        if let Some(c1) = found {
            let cand = pr.candidate(c1, &[c2]);
            if better(&cand, &best) {
                best = cand;
            }
        }
        cur = found;
    }
    best
}

/// Rounded maximizer of `-H . nu` at entropy `lhs / total`, a Gibbs-shaped profile.
fn continuous_center(pr: &Problem) -> Vec<u64> {
    let emin = pr.energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let profile = |mu: f64| -> Vec<f64> {
        let w: Vec<f64> = pr.energies.iter().map(|e| (-mu * (e - emin)).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    let entropy = |v: &[f64]| -> f64 { v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum() };
    let target = pr.lhs / pr.total.max(1) as f64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while entropy(&profile(hi)) > target && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy(&profile(mid)) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rounded_type(pr.total, &profile(lo)).counts().to_vec()
}

fn outer_of(pr: &Problem, c: &[u64]) -> Vec<u64> {
    pr.order[2..].iter().map(|&i| c[i]).collect()
}

fn search_box(pr: &Problem, budget: u64) -> ((f64, Vec<u64>), SearchMode, bool) {
    let dims = pr.merged.len() - 2;
    let center = outer_of(pr, &continuous_center(pr));
    let half = ((budget.max(1) as f64).powf(1.0 / dims as f64) / 2.0).floor().max(1.0) as u64;
    let exhaustive = center.iter().all(|&c| c <= half && c + half >= pr.total);
    let lo: Vec<u64> = center.iter().map(|&c| c.saturating_sub(half)).collect();
    let hi: Vec<u64> = center.iter().map(|&c| (c + half).min(pr.total)).collect();
    let mut best = (f64::NEG_INFINITY, pr.merged.clone());
    let mut outer = lo.clone();
    loop {
        if let Some(c1) = pr.row_min(&outer) {
            let cand = pr.candidate(c1, &outer);
            if better(&cand, &best) {
                best = cand;
            }
        }
        let mut k = 0;
        loop {
            if k == dims {
                let refined = hill_climb(pr, &best.1);
                let best = if better(&refined, &best) { refined } else { best };
                let mode = if exhaustive { SearchMode::Exhaustive } else { SearchMode::Box { half_width: half } };
                return (best, mode, exhaustive);
            }
            if outer[k] < hi[k] {
                outer[k] += 1;
                break;
            }
            outer[k] = lo[k];
            k += 1;
        }
    }
}

/// Pattern search over the outer occupations with shrinking steps.
fn hill_climb(pr: &Problem, start: &[u64]) -> (f64, Vec<u64>) {
    let mut outer = outer_of(pr, start);
    let eval = |o: &[u64]| pr.row_min(o).map(|c1| pr.candidate(c1, o));
    let mut best = eval(&outer).unwrap_or((f64::NEG_INFINITY, pr.merged.clone()));
    if best.0 == f64::NEG_INFINITY {
        outer = outer_of(pr, &pr.merged);
        best = eval(&outer).unwrap_or((0.0, pr.merged.clone()));
    }
    let mut step = (pr.total / 4).max(1);
    loop {
        let mut improved = false;
        for k in 0..outer.len() {
            for up in [false, true] {
                let mut o = outer.clone();
                if up {
                    o[k] = o[k].saturating_add(step);
                } else if o[k] >= step {
                    o[k] -= step;
                } else {
                    continue;
                }
                if let Some(cand) = eval(&o) {
                    if better(&cand, &best) {
                        best = cand;
                        outer = o;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            if step == 1 {
                return best;
            }
            step /= 2;
        }
    }
}

fn probe_shifts(counts: &[u64], f: &[f64], size: u64, window: &Window) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for i in 0..counts.len() {
        for j in 0..counts.len() {
            if i == j || f[i] <= 0.0 || f[j] <= 0.0 {
                continue;
            }
            let s = (window.half_width(size, f[i]).round() as u64).min(counts[j]);
            if s == 0 {
                continue;
            }
            let mut c = counts.to_vec();
            c[i] += s;
            c[j] -= s;
            out.push(c);
        }
    }
    out
}

/// Largest work from `n` copies of `f_rho` with a Gibbs bath, taken over the
/// nominal types and, when enabled, the worst of the shifted types.
pub fn max_work(
    f_rho: &FrequencyVector,
    h: &Hamiltonian<f64>,
    beta: f64,
    n: u64,
    cfg: &MultilevelConfig,
) -> Result<WorkLedger> {
    if f_rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(f_rho.dim(), h.dim()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta = {beta} must be positive and finite")));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    cfg.window.validate()?;
    let gamma = gibbs_state(h, beta)?;
    let ell = cfg.ell.unwrap_or_else(|| default_bath_size(1.0, n));
    let energies = h.energies();
    let a = rounded_type(n, f_rho.freqs()).counts().to_vec();
    let b = rounded_type(ell, gamma.probs.probs()).counts().to_vec();
    let mut probes = vec![(a.clone(), b.clone())];
    if cfg.probe_fluctuations {
        probes.extend(probe_shifts(&a, f_rho.freqs(), n, &cfg.window).into_iter().map(|x| (x, b.clone())));
        probes.extend(probe_shifts(&b, gamma.probs.probs(), ell, &cfg.window).into_iter().map(|y| (a.clone(), y)));
    }
    let mut worst: Option<(usize, ShiftSearch)> = None;
    for (idx, (x, y)) in probes.iter().enumerate() {
        let s = best_shift(x, y, energies, &cfg.counting, cfg.box_budget)?;
        if worst.as_ref().is_none_or(|(_, w)| s.work < w.work) {
            worst = Some((idx, s));
        }
    }
    let (worst_probe, s) = worst.expect("at least the nominal probe");
    let (x, y) = &probes[worst_probe];
    let out = output_counts(x, y, &s.delta)?;
    Ok(WorkLedger {
        n,
        ell,
        extracted: s.work,
        per_copy: s.work / n as f64,
        per_level_delta: s.delta,
        feasibility_margin: s.margin,
        input_counts: x.clone(),
        bath_counts: y.clone(),
        output_counts: out,
        bound_per_copy: classical_relative_entropy(f_rho.freqs(), gamma.probs.probs()) / beta,
        search: s.search,
        exhaustive: s.exhaustive,
        probes: probes.len(),
        worst_probe,
        exact_counting: cfg.counting.is_exact_at(n + ell),
    })
}

pub fn shift_to_f64(x: &OccupationShift) -> Vec<f64> {
    x.x.iter().map(ratio_to_f64).collect()
}
