//! Finite-n distillation of excited qubits from two-level resources.
//!
//! Inputs are `ell` Gibbs qubits followed by `n` resource qubits. Each
//! composite typical type `(g, t)` is injected into strings of length `ell + n`
//! ending in `m` ones, with the first `k = ell + n - m` positions (the exhaust)
//! holding `g + t - m` ones. Types sharing a total number of ones compete for
//! the same exhaust strings, so `m` is fitted shell by shell.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{self, compare_filtered, BigCount, Counting};
use crate::error::{Error, Result};
use crate::linalg;
use crate::monotone::{binary_entropy, relative_entropy, von_neumann_entropy};
use crate::state::{gibbs_state, two_level_excited_population, DensityMatrix, Hamiltonian};
use crate::strings::{self, BitString, MAX_LEN};
use crate::typeclass::{TypeDescriptor, Window};

/// Closed-form asymptotic rate `(h(q) - h(p) + beta (p - q)) / (h(q) + beta (1 - q))`
/// for distilling `|1>` from `(1-p)|0><0| + p|1><1|`.
pub fn rate_limit(p: f64, beta: f64) -> Result<f64> {
    check_p_beta(p, beta)?;
    let q = two_level_excited_population(beta, 1.0);
    let hq = binary_entropy(q)?;
    Ok((hq - binary_entropy(p)? + beta * (p - q)) / (hq + beta * (1.0 - q)))
}

fn check_p_beta(p: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p = {p} outside [0, 1]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta = {beta} must be positive and finite")));
    }
    Ok(())
}

/// `ceil((rate * n)^{3/2})`.
pub fn default_bath_size(rate: f64, n: u64) -> u64 {
    let x = (rate * n as f64).max(0.0).powf(1.5);
    // guard against values like 64.00000000001 from pow round-off
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn exact_ok(counting: &Counting, size: u64) -> bool {
    counting.is_exact_at(size)
}

/// Largest `m` with `C(ell, g) C(n, t) <= C(ell + n - m, g + t - m)`, decided
/// in exact arithmetic.
pub fn solve_single_type(ell: u64, gibbs_ones: u64, n: u64, resource_ones: u64) -> Result<u64> {
    solve_single_type_with(ell, gibbs_ones, n, resource_ones, &Counting::exact())
}

pub fn solve_single_type_with(ell: u64, g: u64, n: u64, t: u64, counting: &Counting) -> Result<u64> {
    if g > ell || t > n {
        return Err(Error::param(format!("ones out of range: g={g} of {ell}, t={t} of {n}")));
    }
    let shell = Shell {
        ones: g + t,
        log_inputs: counting::ln_binomial(ell, g) + counting::ln_binomial(n, t),
        exact_inputs: exact_ok(counting, ell + n).then(|| counting::binomial(ell, g) * counting::binomial(n, t)),
    };
    Ok(shell.max_work(ell + n))
}

/// All composite inputs with a given total number of ones.
#[derive(Clone, Debug)]
struct Shell {
    ones: u64,
    log_inputs: f64,
    exact_inputs: Option<BigUint>,
}

impl Shell {
    fn fits(&self, total_len: u64, m: u64) -> bool {
        let k = total_len - m;
        let e = self.ones - m;
        let ln_out = counting::ln_binomial(k, e);
        let ord = compare_filtered(self.log_inputs, ln_out, self.exact_inputs.is_some(), || {
            (self.exact_inputs.clone().unwrap(), counting::binomial(k, e))
        });
        ord != std::cmp::Ordering::Greater
    }

    /// Largest `m` whose exhaust class still has room for every input.
    /// Feasibility is monotone in `m` and `m = 0` always fits.
    fn max_work(&self, total_len: u64) -> u64 {
        let (mut lo, mut hi) = (0u64, self.ones);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.fits(total_len, mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }
}

/// A source register: admissible one-counts with their string multiplicities.
#[derive(Clone, Debug)]
struct Source {
    ones: Vec<u64>,
    log_counts: Vec<f64>,
    exact_counts: Option<Vec<BigUint>>,
}

impl Source {
    fn binomial_window(len: u64, lo: u64, hi: u64, exact: bool) -> Self {
        let ones: Vec<u64> = (lo..=hi).collect();
        let log_counts = ones.iter().map(|&t| counting::ln_binomial(len, t)).collect();
        let exact_counts = exact.then(|| {
            let mut v = Vec::with_capacity(ones.len());
            let mut c = counting::binomial(len, lo);
            for &t in &ones {
                if t > lo {
                    c = c * (len - t + 1) / t;
                }
                v.push(c.clone());
            }
            v
        });
        Source { ones, log_counts, exact_counts }
    }
}

fn build_shells(bath: &Source, res: &Source) -> Vec<Shell> {
    let w0 = bath.ones[0] + res.ones[0];
    let w1 = bath.ones.last().unwrap() + res.ones.last().unwrap();
    let width = (w1 - w0 + 1) as usize;
    let mut maxes = vec![f64::NEG_INFINITY; width];
    for (i, &g) in bath.ones.iter().enumerate() {
        for (j, &t) in res.ones.iter().enumerate() {
            let s = (g + t - w0) as usize;
            maxes[s] = maxes[s].max(bath.log_counts[i] + res.log_counts[j]);
        }
    }
    let mut sums = vec![0.0f64; width];
    for (i, &g) in bath.ones.iter().enumerate() {
        for (j, &t) in res.ones.iter().enumerate() {
            let s = (g + t - w0) as usize;
            sums[s] += (bath.log_counts[i] + res.log_counts[j] - maxes[s]).exp();
        }
    }
    let exact = match (&bath.exact_counts, &res.exact_counts) {
        (Some(b), Some(r)) => {
            let mut acc = vec![BigUint::zero(); width];
            for (i, &g) in bath.ones.iter().enumerate() {
                for (j, &t) in res.ones.iter().enumerate() {
                    acc[(g + t - w0) as usize] += &b[i] * &r[j];
                }
            }
            Some(acc)
        }
        _ => None,
    };
    (0..width)
        .map(|s| Shell {
            ones: w0 + s as u64,
            log_inputs: maxes[s] + sums[s].ln(),
            exact_inputs: exact.as_ref().map(|e| e[s].clone()),
        })
        .collect()
}

/// Returns `(m, binding shell ones)`.
fn fit_work(shells: &[Shell], total_len: u64) -> (u64, u64) {
    let per_shell: Vec<u64> = shells.par_iter().map(|s| s.max_work(total_len)).collect();
    let mut best = (u64::MAX, 0);
    for (s, &m) in shells.iter().zip(&per_shell) {
        if m < best.0 {
            best = (m, s.ones);
        }
    }
    best
}

fn window_mass(len: u64, f: f64, lo: u64, hi: u64) -> f64 {
    if len == 0 {
        return 1.0;
    }
    let fv = [1.0 - f, f];
    (lo..=hi).map(|t| <f64 as crate::scalar::Probability>::type_probability(&[len - t, t], &fv)).sum::<f64>().min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillConfig {
    pub window: Window,
    pub counting: Counting,
    /// Overrides the default bath size `ceil((R n)^{3/2})`.
    pub ell: Option<u64>,
    /// Refuse to materialize more per-type records than this.
    pub max_records: usize,
}

impl Default for DistillConfig {
    fn default() -> Self {
        DistillConfig { window: Window::default(), counting: Counting::default(), ell: None, max_records: 250_000 }
    }
}

impl DistillConfig {
    pub fn with_width(width: f64) -> Self {
        DistillConfig { window: Window::binomial(width), ..Default::default() }
    }
}

/// One composite type and where its strings go.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeMapRecord {
    pub gibbs: TypeDescriptor,
    pub resource: TypeDescriptor,
    pub exhaust: TypeDescriptor,
    pub work_ones: u64,
    pub log_input_cardinality: f64,
    pub log_exhaust_cardinality: f64,
    /// Present when the plan uses exact counting.
    pub input_cardinality: Option<BigCount>,
    pub exhaust_cardinality: Option<BigCount>,
    /// First exhaust rank used by this type within its shell.
    pub exhaust_offset: Option<BigCount>,
}

impl TypeMapRecord {
    pub fn input_ones(&self) -> u64 {
        self.gibbs.ones() + self.resource.ones()
    }

    /// Exhaust ranks `[offset, offset + inputs)` fit in the exhaust class.
    pub fn fits_exactly(&self) -> Option<bool> {
        let inputs = self.input_cardinality.as_ref()?;
        let offset = self.exhaust_offset.as_ref()?;
        let room = self.exhaust_cardinality.as_ref()?;
        Some(&offset.0 + &inputs.0 <= room.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanSource {
    Quasiclassical,
    /// Plan built from mean energy and entropy of a state with coherences.
    BlockDiagonalized { mean_energy: f64, entropy: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillationPlan {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub k: u64,
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub per_type_maps: Vec<TypeMapRecord>,
    pub failure_mass: f64,
    pub achieved_rate: f64,
    /// `n / ell`; absent when `ell = 0`.
    pub epsilon: Option<f64>,
    pub rate_limit: f64,
    /// Total ones of the shell that fixed `m`.
    pub binding_shell: u64,
    /// Largest composite type in the binding shell.
    pub binding_type: (TypeDescriptor, TypeDescriptor),
    pub no_resource: bool,
    pub exact_counting: bool,
    pub window: Window,
    pub source: PlanSource,
}

impl DistillationPlan {
    pub fn total_len(&self) -> u64 {
        self.ell + self.n
    }

    pub fn record(&self, gibbs: &TypeDescriptor, resource: &TypeDescriptor) -> Option<&TypeMapRecord> {
        self.per_type_maps.iter().find(|r| &r.gibbs == gibbs && &r.resource == resource)
    }

    /// Checks dimension, energy and counting invariants on every record.
    pub fn check_invariants(&self) -> Result<()> {
        if self.k + self.m != self.ell + self.n {
            return Err(Error::InvalidState("k + m != ell + n".into()));
        }
        for r in &self.per_type_maps {
            if r.input_ones() != r.exhaust.ones() + r.work_ones || r.work_ones != self.m {
                return Err(Error::InvalidState(format!("record {:?}/{:?} does not conserve ones", r.gibbs, r.resource)));
            }
            if r.exhaust.total() != self.k {
                return Err(Error::InvalidState("exhaust length differs from k".into()));
            }
            match r.fits_exactly() {
                Some(false) => return Err(Error::InvalidState("record overflows its exhaust class".into())),
                None if r.log_input_cardinality > r.log_exhaust_cardinality + 1e-9 => {
                    return Err(Error::InvalidState("record overflows its exhaust class".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Sweep-friendly summary without per-type records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YieldPoint {
    pub n: u64,
    pub ell: u64,
    pub m: u64,
    pub rate: f64,
    pub rate_limit: f64,
    pub deficit: f64,
    pub failure_mass: f64,
    pub exact_counting: bool,
}

struct Fitted {
    ell: u64,
    q: f64,
    rate_limit: f64,
    bath: Source,
    res: Source,
    shells: Vec<Shell>,
    m: u64,
    binding: u64,
    failure_mass: f64,
    exact: bool,
}

fn fit(n: u64, p: f64, beta: f64, cfg: &DistillConfig) -> Result<Fitted> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let r = rate_limit(p, beta)?;
    let q = two_level_excited_population(beta, 1.0);
    let ell = cfg.ell.unwrap_or_else(|| default_bath_size(r, n));
    let exact = exact_ok(&cfg.counting, ell + n);
    let (glo, ghi) = cfg.window.count_range(ell, q);
    let (tlo, thi) = cfg.window.count_range(n, p);
    let bath = Source::binomial_window(ell, glo, ghi, exact);
    let res = Source::binomial_window(n, tlo, thi, exact);
    let shells = build_shells(&bath, &res);
    let (m, binding) = fit_work(&shells, ell + n);
    let failure_mass = (1.0 - window_mass(ell, q, glo, ghi) * window_mass(n, p, tlo, thi)).max(0.0);
    Ok(Fitted { ell, q, rate_limit: r, bath, res, shells, m, binding, failure_mass, exact })
}

/// Work count and rate without materializing records.
pub fn distillation_yield(n: u64, p: f64, beta: f64, cfg: &DistillConfig) -> Result<YieldPoint> {
    let f = fit(n, p, beta, cfg)?;
    let rate = f.m as f64 / n as f64;
    Ok(YieldPoint {
        n,
        ell: f.ell,
        m: f.m,
        rate,
        rate_limit: f.rate_limit,
        deficit: f.rate_limit - rate,
        failure_mass: f.failure_mass,
        exact_counting: f.exact,
    })
}

fn records(fitted: &Fitted, n: u64, cfg: &DistillConfig) -> Result<(Vec<TypeMapRecord>, (TypeDescriptor, TypeDescriptor))> {
    let Fitted { ell, bath, res, shells, m, binding, .. } = fitted;
    let (ell, m) = (*ell, *m);
    let count = bath.ones.len() * res.ones.len();
    if count > cfg.max_records {
        return Err(Error::UnsupportedSize(format!(
            "{count} composite types exceed the record cap {}; use distillation_yield",
            cfg.max_records
        )));
    }
    let k = ell + n - m;
    let w0 = shells[0].ones;
    let mut offsets: Vec<Option<BigUint>> =
        shells.iter().map(|s| s.exact_inputs.as_ref().map(|_| BigUint::zero())).collect();
    let mut exhaust_exact: Vec<Option<BigUint>> = vec![None; shells.len()];
    let mut out = Vec::with_capacity(count);
    let mut binding_type = None;
    let mut binding_best = f64::NEG_INFINITY;
    for (i, &g) in bath.ones.iter().enumerate() {
        for (j, &t) in res.ones.iter().enumerate() {
            let w = g + t;
            let s = (w - w0) as usize;
            let e = w - m;
            let log_in = bath.log_counts[i] + res.log_counts[j];
            let (input_cardinality, exhaust_cardinality, exhaust_offset) =
                match (&bath.exact_counts, &res.exact_counts) {
                    (Some(b), Some(r)) => {
                        let inputs = &b[i] * &r[j];
                        let room = exhaust_exact[s].get_or_insert_with(|| counting::binomial(k, e)).clone();
                        let off = offsets[s].as_mut().unwrap();
                        let start = off.clone();
                        *off += &inputs;
                        (Some(BigCount(inputs)), Some(BigCount(room)), Some(BigCount(start)))
                    }
                    _ => (None, None, None),
                };
            let gibbs = TypeDescriptor::two_level(ell, g)?;
            let resource = TypeDescriptor::two_level(n, t)?;
            if w == *binding && log_in > binding_best {
                binding_best = log_in;
                binding_type = Some((gibbs.clone(), resource.clone()));
            }
            out.push(TypeMapRecord {
                gibbs,
                resource,
                exhaust: TypeDescriptor::two_level(k, e)?,
                work_ones: m,
                log_input_cardinality: log_in,
                log_exhaust_cardinality: counting::ln_binomial(k, e),
                input_cardinality,
                exhaust_cardinality,
                exhaust_offset,
            });
        }
    }
    Ok((out, binding_type.expect("binding shell is populated")))
}

/// Builds the full plan for `(1-p)|0><0| + p|1><1|` at inverse temperature `beta`.
pub fn plan_distillation(n: u64, p: f64, beta: f64, cfg: &DistillConfig) -> Result<DistillationPlan> {
    let fitted = fit(n, p, beta, cfg)?;
    let (per_type_maps, binding_type) = records(&fitted, n, cfg)?;
    let no_resource = fitted.rate_limit.abs() <= 1e-12;
    Ok(DistillationPlan {
        n,
        ell: fitted.ell,
        m: fitted.m,
        k: fitted.ell + n - fitted.m,
        p,
        beta,
        q: fitted.q,
        per_type_maps,
        failure_mass: fitted.failure_mass,
        achieved_rate: fitted.m as f64 / n as f64,
        epsilon: (fitted.ell > 0).then(|| n as f64 / fitted.ell as f64),
        rate_limit: fitted.rate_limit,
        binding_shell: fitted.binding,
        binding_type,
        no_resource,
        exact_counting: fitted.exact,
        window: cfg.window,
        source: PlanSource::Quasiclassical,
    })
}

/// Rank cap used for one energy block of a coherent resource.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub ones: u64,
    pub log_block_dim: f64,
    pub log_rank_cap: f64,
    pub rank_cap: Option<BigCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagonalizationRecord {
    pub mean_energy: f64,
    pub entropy: f64,
    /// Eigenbasis one-counts kept, `[lo, hi]`.
    pub eigen_window: (u64, u64),
    pub log_typical_dim: f64,
    pub blocks: Vec<BlockRecord>,
}

/// Distillation from a two-level state that may carry coherences.
///
/// Within each energy block the typical part of `rho^{(x)n}` has rank at most
/// the eigen-typical dimension, so the block contributes that many strings
/// instead of `C(n, t)`. Diagonal inputs reproduce [`plan_distillation`].
pub fn plan_distillation_general(
    rho: &DensityMatrix<f64>,
    n: u64,
    beta: f64,
    cfg: &DistillConfig,
) -> Result<(DistillationPlan, BlockDiagonalizationRecord)> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let h = Hamiltonian::<f64>::qubit();
    let mean_energy = rho.mean_energy(&h)?;
    let entropy = von_neumann_entropy(rho);
    if rho.is_diagonal() {
        let plan = plan_distillation(n, mean_energy, beta, cfg)?;
        let (tlo, thi) = cfg.window.count_range(n, mean_energy);
        let blocks = (tlo..=thi)
            .map(|t| BlockRecord {
                ones: t,
                log_block_dim: counting::ln_binomial(n, t),
                log_rank_cap: counting::ln_binomial(n, t),
                rank_cap: plan.exact_counting.then(|| BigCount(counting::binomial(n, t))),
            })
            .collect();
        let record = BlockDiagonalizationRecord {
            mean_energy,
            entropy,
            eigen_window: (tlo, thi),
            log_typical_dim: counting::log_sum_exp(&(tlo..=thi).map(|t| counting::ln_binomial(n, t)).collect::<Vec<_>>()),
            blocks,
        };
        return Ok((plan, record));
    }
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    check_p_beta(mean_energy.clamp(0.0, 1.0), beta)?;
    let gamma = gibbs_state(&h, beta)?;
    let d_rho = relative_entropy(rho, &gamma.density_matrix())?;
    let d_top = relative_entropy(&DensityMatrix::basis(2, 1)?, &gamma.density_matrix())?;
    let r = d_rho / d_top;
    let q = two_level_excited_population(beta, 1.0);
    let ell = cfg.ell.unwrap_or_else(|| default_bath_size(r, n));
    let exact = exact_ok(&cfg.counting, ell + n);

    let lambda_min = linalg::eigh(rho.entries()).values[0].clamp(0.0, 0.5);
    let (slo, shi) = cfg.window.count_range(n, lambda_min);
    let log_typ = counting::log_sum_exp(&(slo..=shi).map(|s| counting::ln_binomial(n, s)).collect::<Vec<_>>());
    let typ_exact: Option<BigUint> = exact.then(|| (slo..=shi).map(|s| counting::binomial(n, s)).sum());

    let (glo, ghi) = cfg.window.count_range(ell, q);
    let (tlo, thi) = cfg.window.count_range(n, mean_energy);
    let bath = Source::binomial_window(ell, glo, ghi, exact);
    let ones: Vec<u64> = (tlo..=thi).collect();
    let log_counts: Vec<f64> = ones.iter().map(|&t| counting::ln_binomial(n, t).min(log_typ)).collect();
    let exact_counts = typ_exact.as_ref().map(|cap| {
        ones.iter().map(|&t| std::cmp::min(counting::binomial(n, t), cap.clone())).collect::<Vec<_>>()
    });
    // block t contributes at most the eigen-typical rank
    let res = Source { ones: ones.clone(), log_counts: log_counts.clone(), exact_counts: exact_counts.clone() };
    let shells = build_shells(&bath, &res);
    let (m, binding) = fit_work(&shells, ell + n);

    let eig_mass = window_mass(n, lambda_min, slo, shi);
    let energy_mass = window_mass(n, mean_energy, tlo, thi);
    let bath_mass = window_mass(ell, q, glo, ghi);
    let failure_mass = ((1.0 - bath_mass) + (1.0 - energy_mass) + (1.0 - eig_mass)).min(1.0);

    let fitted = Fitted { ell, q, rate_limit: r, bath, res, shells, m, binding, failure_mass, exact };
    let (per_type_maps, binding_type) = records(&fitted, n, cfg)?;

    let blocks = ones
        .iter()
        .enumerate()
        .map(|(i, &t)| BlockRecord {
            ones: t,
            log_block_dim: counting::ln_binomial(n, t),
            log_rank_cap: log_counts[i],
            rank_cap: exact_counts.as_ref().map(|c| BigCount(c[i].clone())),
        })
        .collect();
    let plan = DistillationPlan {
        n,
        ell,
        m,
        k: ell + n - m,
        p: mean_energy,
        beta,
        q,
        per_type_maps,
        failure_mass,
        achieved_rate: m as f64 / n as f64,
        epsilon: (ell > 0).then(|| n as f64 / ell as f64),
        rate_limit: r,
        binding_shell: binding,
        binding_type,
        no_resource: r.abs() <= 1e-12,
        exact_counting: exact,
        window: cfg.window,
        source: PlanSource::BlockDiagonalized { mean_energy, entropy },
    };
    let record =
        BlockDiagonalizationRecord { mean_energy, entropy, eigen_window: (slo, shi), log_typical_dim: log_typ, blocks };
    Ok((plan, record))
}

/// Explicit injection for one composite type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringMap {
    pub entries: Vec<(BitString, BitString)>,
}

impl StringMap {
    pub fn is_injective(&self) -> bool {
        let mut outs: Vec<BitString> = self.entries.iter().map(|e| e.1).collect();
        outs.sort();
        outs.windows(2).all(|w| w[0] != w[1])
    }

    pub fn conserves_ones(&self) -> bool {
        self.entries.iter().all(|(a, b)| a.weight() == b.weight())
    }
}

/// Largest type class `build_string_map` will enumerate.
pub const MAX_MAP_ENTRIES: u128 = 1 << 22;

/// Lexicographic injection of the composite type into `exhaust (x) 1^m`.
pub fn build_string_map(plan: &DistillationPlan, gibbs: &TypeDescriptor, resource: &TypeDescriptor) -> Result<StringMap> {
    let rec = plan
        .record(gibbs, resource)
        .ok_or_else(|| Error::param(format!("composite type {:?}/{:?} is not in the plan", gibbs.counts(), resource.counts())))?;
    if plan.source != PlanSource::Quasiclassical {
        return Err(Error::param("string maps exist only for quasiclassical plans"));
    }
    if plan.total_len() > MAX_LEN as u64 {
        return Err(Error::UnsupportedSize(format!("strings of length {}", plan.total_len())));
    }
    let offset = rec
        .exhaust_offset
        .as_ref()
        .and_then(|o| o.to_u128())
        .ok_or_else(|| Error::UnsupportedSize("plan was built without exact counting".into()))?;
    let (ell, n, k, m) = (plan.ell as u32, plan.n as u32, plan.k as u32, plan.m as u32);
    let (g, t, e) = (gibbs.ones() as u32, resource.ones() as u32, rec.exhaust.ones() as u32);
    let cg = strings::small_binomial(ell, g);
    let ct = strings::small_binomial(n, t);
    if cg.saturating_mul(ct) > MAX_MAP_ENTRIES {
        return Err(Error::UnsupportedSize(format!("{} strings in one type class", cg.saturating_mul(ct))));
    }
    let tail = BitString::ones(m);
    let mut entries = Vec::with_capacity((cg * ct) as usize);
    for rg in 0..cg {
        let sg = strings::unrank(ell, g, rg)?;
        for rt in 0..ct {
            let input = sg.concat(&strings::unrank(n, t, rt)?);
            let exhaust = strings::unrank(k, e, offset + rg * ct + rt)?;
            entries.push((input, exhaust.concat(&tail)));
        }
    }
    Ok(StringMap { entries })
}
