//! Coherent formation with an energy reference frame.
//!
//! The frame is a flat superposition over `N` integer energies. A system
//! unitary `u` that mixes energy levels is made energy conserving by paying
//! the difference out of the frame: `|E_j>|h> -> sum_i u_ij |E_i>|h + E_j - E_i>`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::strings;

/// Uniform superposition over `[window_start, window_start + window_size)`,
/// embedded in a space with `guard` extra levels on each side and a pad level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub window_size: u64,
    pub window_start: i64,
    pub guard: u64,
    pub pad_energy: i64,
}

/// Smallest `c` with `c^3 >= n^2`, i.e. `ceil(n^{2/3})`.
fn ceil_two_thirds(n: u64) -> u64 {
    let target = (n as u128) * (n as u128);
    let mut c = (n as f64).powf(2.0 / 3.0).floor() as u128;
    while c * c * c < target {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) * (c - 1) >= target {
        c -= 1;
    }
    c as u64
}

impl ReferenceFrame {
    pub fn new(window_size: u64, window_start: i64, guard: u64, pad_energy: i64) -> Result<Self> {
        if window_size == 0 {
            return Err(Error::InvalidFrame("window must hold at least one level".into()));
        }
        let f = ReferenceFrame { window_size, window_start, guard, pad_energy };
        if (f.lowest()..=f.highest()).contains(&pad_energy) {
            return Err(Error::InvalidFrame("pad energy collides with a frame level".into()));
        }
        Ok(f)
    }

    /// Frame for `n` qubits: `N = 2 ceil(n^{2/3}) + 1`, guard `n`, levels from 0.
    pub fn for_copies(n: u64) -> Result<Self> {
        let size = 2 * ceil_two_thirds(n) + 1;
        let guard = n;
        Self::new(size, guard as i64, guard, (size + 2 * guard) as i64)
    }

    pub fn lowest(&self) -> i64 {
        self.window_start - self.guard as i64
    }

    pub fn highest(&self) -> i64 {
        self.window_start + self.window_size as i64 - 1 + self.guard as i64
    }

    /// Energy levels plus the pad.
    pub fn dim(&self) -> usize {
        (self.highest() - self.lowest() + 1) as usize + 1
    }

    pub fn pad_index(&self) -> usize {
        self.dim() - 1
    }

    pub fn index_of(&self, energy: i64) -> Option<usize> {
        (self.lowest()..=self.highest()).contains(&energy).then(|| (energy - self.lowest()) as usize)
    }

    pub fn energy_of(&self, index: usize) -> i64 {
        if index == self.pad_index() {
            self.pad_energy
        } else {
            self.lowest() + index as i64
        }
    }

    pub fn in_window(&self, energy: i64) -> bool {
        energy >= self.window_start && energy < self.window_start + self.window_size as i64
    }

    /// The frame state shifted up by `delta` energy units.
    pub fn shifted_vector(&self, delta: i64) -> Result<Vec<f64>> {
        let amp = 1.0 / (self.window_size as f64).sqrt();
        let mut v = vec![0.0; self.dim()];
        for h in self.window_start..self.window_start + self.window_size as i64 {
            let i = self
                .index_of(h + delta)
                .ok_or_else(|| Error::InvalidFrame(format!("shift {delta} leaves the guard band")))?;
            v[i] = amp;
        }
        Ok(v)
    }

    pub fn vector(&self) -> Vec<f64> {
        self.shifted_vector(0).expect("unshifted frame fits")
    }
}

/// `<H|H + delta>` for a flat window of `n` levels.
pub fn shift_overlap(window_size: u64, delta: u64) -> Result<f64> {
    if window_size == 0 {
        return Err(Error::InvalidFrame("empty window".into()));
    }
    Ok(if delta >= window_size { 0.0 } else { 1.0 - delta as f64 / window_size as f64 })
}

/// `|| |H + shift> - |H> ||`.
pub fn err_norm(shift: u64, window_size: u64) -> Result<f64> {
    if window_size == 0 {
        return Err(Error::InvalidFrame("empty window".into()));
    }
    Ok((2.0 * shift.min(window_size) as f64 / window_size as f64).sqrt())
}

/// `U^inv` for a system unitary over integer-energy basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct JointUnitary {
    pub frame: ReferenceFrame,
    pub system_energies: Vec<i64>,
    pub system_unitary: CMatrix<f64>,
}

fn sector_active(frame: &ReferenceFrame, energies: &[i64], total: i64) -> bool {
    energies.iter().all(|&e| frame.index_of(total - e).is_some())
}

/// Image of `|j>|h>` under `U^inv` given column `j` of the system unitary.
fn column_image(
    frame: &ReferenceFrame,
    energies: &[i64],
    column: &[Complex64],
    j: usize,
    frame_index: usize,
    out: &mut [Complex64],
    amp: Complex64,
) {
    let fd = frame.dim();
    if frame_index == frame.pad_index() {
        out[j * fd + frame_index] += amp;
        return;
    }
    let total = energies[j] + frame.energy_of(frame_index);
    if !sector_active(frame, energies, total) {
        out[j * fd + frame_index] += amp;
        return;
    }
    for (i, &u) in column.iter().enumerate() {
        if u != Complex64::new(0.0, 0.0) {
            let h = frame.index_of(total - energies[i]).expect("active sector");
            out[i * fd + h] += u * amp;
        }
    }
}

/// Builds `U^inv`; the guard band must cover every gap the unitary bridges.
pub fn build_uinv(system_unitary: &CMatrix<f64>, system_energies: &[i64], frame: &ReferenceFrame) -> Result<JointUnitary> {
    let d = system_energies.len();
    if system_unitary.nrows() != d || system_unitary.ncols() != d {
        return Err(Error::DimensionMismatch(system_unitary.nrows(), d));
    }
    let defect = linalg::matmul(&linalg::adjoint(system_unitary), system_unitary) - linalg::identity::<f64>(d);
    if defect.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-10 {
        return Err(Error::param("system operator is not unitary"));
    }
    for i in 0..d {
        for j in 0..d {
            let gap = (system_energies[i] - system_energies[j]).unsigned_abs();
            if system_unitary[[i, j]].norm() > 0.0 && gap > frame.guard {
                return Err(Error::InvalidFrame(format!("gap {gap} exceeds the guard band {}", frame.guard)));
            }
        }
    }
    Ok(JointUnitary { frame: frame.clone(), system_energies: system_energies.to_vec(), system_unitary: system_unitary.clone() })
}

impl JointUnitary {
    pub fn dim(&self) -> usize {
        self.system_energies.len() * self.frame.dim()
    }

    pub fn apply(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch(state.len(), self.dim()));
        }
        let fd = self.frame.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (idx, &amp) in state.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (j, h) = (idx / fd, idx % fd);
            let col: Vec<Complex64> = self.system_unitary.column(j).to_vec();
            column_image(&self.frame, &self.system_energies, &col, j, h, &mut out, amp);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> CMatrix<f64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e).expect("dimension matches");
            for r in 0..n {
                m[[r, c]] = col[r];
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        m
    }

    fn joint_energy(&self, idx: usize) -> i64 {
        let fd = self.frame.dim();
        self.system_energies[idx / fd] + self.frame.energy_of(idx % fd)
    }

    /// True when every nonzero matrix element joins states of equal total
    /// energy, i.e. `[U, H_tot] = 0` in integer arithmetic.
    pub fn commutes_with_total_hamiltonian(&self) -> bool {
        let n = self.dim();
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e).expect("dimension matches");
            e[c] = Complex64::new(0.0, 0.0);
            let ec = self.joint_energy(c);
            if col.iter().enumerate().any(|(r, z)| *z != Complex64::new(0.0, 0.0) && self.joint_energy(r) != ec) {
                return false;
            }
        }
        true
    }
}

/// `p |phi1><phi1| + (1-p) |phi2><phi2|` per qubit, `phi1 = a|0> + b|1>`,
/// `phi2 = conj(b)|0> - conj(a)|1>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentTarget {
    pub a: Complex64,
    pub b: Complex64,
    pub p: f64,
    pub n: u64,
}

impl CoherentTarget {
    pub fn new(a: Complex64, b: Complex64, p: f64, n: u64) -> Result<Self> {
        if ((a.norm_sqr() + b.norm_sqr()) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTarget("|a|^2 + |b|^2 must be 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidTarget(format!("p = {p} outside [0, 1]")));
        }
        if n == 0 || n > strings::MAX_LEN as u64 {
            return Err(Error::InvalidTarget(format!("n = {n} outside 1..={}", strings::MAX_LEN)));
        }
        Ok(CoherentTarget { a, b, p, n })
    }

    /// `<x|phi>` for `x` in {0, 1}; `second` selects `phi2`.
    fn amplitude(&self, second: bool, bit: bool) -> Complex64 {
        match (second, bit) {
            (false, false) => self.a,
            (false, true) => self.b,
            (true, false) => self.b.conj(),
            (true, true) => -self.a.conj(),
        }
    }

    /// Product state with `phi2` on the positions set in `pattern`.
    pub fn component_vector(&self, pattern: u128) -> Vec<Complex64> {
        let n = self.n as u32;
        (0..1u128 << n)
            .map(|x| {
                (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| {
                    let shift = n - 1 - i;
                    acc * self.amplitude((pattern >> shift) & 1 == 1, (x >> shift) & 1 == 1)
                })
            })
            .collect()
    }

    /// Mean energy with `k` copies of `phi2`.
    pub fn mean_energy(&self, k: u64) -> f64 {
        (self.n - k) as f64 * self.b.norm_sqr() + k as f64 * self.a.norm_sqr()
    }

    fn pattern_weight(&self, k: u64) -> f64 {
        self.p.powi((self.n - k) as i32) * (1.0 - self.p).powi(k as i32)
    }
}

fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|t| {
            if p == 0.0 {
                return if t == 0 { 1.0 } else { 0.0 };
            }
            if p == 1.0 {
                return if t == n { 1.0 } else { 0.0 };
            }
            (crate::counting::ln_binomial(n, t) + t as f64 * p.ln() + (n - t) as f64 * (1.0 - p).ln()).exp()
        })
        .collect()
}

fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Number of `phi2` factors.
    pub k: u64,
    /// Total weight of the `C(n, k)` patterns.
    pub weight: f64,
    pub input_energy: u64,
    pub mean_energy: f64,
    /// Energy distribution of the component.
    pub energy_distribution: Vec<f64>,
    /// Mass outside `Typ` (squared norm of the tail part).
    pub tail_mass: f64,
    /// `2 sqrt(tail_mass)`, the tail's contribution to the vector error.
    pub tail_error: f64,
    /// Worst frame error over `Typ`.
    pub typical_error: f64,
    pub largest_typical_shift: u64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactMethod {
    PureState,
    SpanGram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    /// `(1/2) || output - target ||_1`.
    pub trace_distance: f64,
    /// `<H| rho_frame |H>` after the protocol.
    pub frame_fidelity: f64,
    pub method: ExactMethod,
    pub commutes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentReport {
    pub target: CoherentTarget,
    pub frame: ReferenceFrame,
    pub typ_half_width: f64,
    pub typical_k: (u64, u64),
    pub nontypical_mass: f64,
    pub components: Vec<ComponentReport>,
    /// Trace-distance bound (1/2 norm convention).
    pub analytic_bound: f64,
    pub exact: Option<ExactReport>,
}

pub const MAX_EXACT_PURE: u64 = 10;
pub const MAX_EXACT_MIXED: u64 = 6;

struct Assignment {
    k: u64,
    energy: u64,
    offset: u128,
}

fn assign_inputs(target: &CoherentTarget, ks: &[u64]) -> Result<Vec<Assignment>> {
    let n = target.n;
    let mut used: std::collections::BTreeMap<u64, u128> = Default::default();
    let mut out = Vec::new();
    for &k in ks {
        let energy = target.mean_energy(k).round() as u64;
        let need = strings::small_binomial(n as u32, k as u32);
        let have = strings::small_binomial(n as u32, energy as u32);
        let offset = *used.get(&energy).unwrap_or(&0);
        if offset + need > have {
            return Err(Error::InvalidTarget(format!(
                "energy {energy} has {have} states but {} patterns need them",
                offset + need
            )));
        }
        used.insert(energy, offset + need);
        out.push(Assignment { k, energy, offset });
    }
    Ok(out)
}

/// Analytic trace-distance bound for forming `rho^{(x)n}` from energy
/// eigenstates, with optional exact simulation.
pub fn coherent_formation_error(target: &CoherentTarget, exact: bool) -> Result<CoherentReport> {
    let n = target.n;
    let frame = ReferenceFrame::for_copies(n)?;
    let half = (n as f64).sqrt();
    let centre = n as f64 * (1.0 - target.p);
    let k_lo = (centre - half).ceil().max(0.0) as u64;
    let k_hi = ((centre + half).floor() as u64).min(n);
    let ks: Vec<u64> = (k_lo..=k_hi).filter(|&k| target.pattern_weight(k) > 0.0).collect();
    let assignments = assign_inputs(target, &ks)?;

    let all_mass = |k: u64| target.pattern_weight(k) * strings::small_binomial(n as u32, k as u32) as f64;
    let nontypical_mass: f64 = (0..=n).filter(|k| !ks.contains(k)).map(all_mass).sum();
    let mut components = Vec::new();
    let mut analytic = nontypical_mass;
    for a in &assignments {
        let k = a.k;
        let dist = convolve(&binomial_pmf(n - k, target.b.norm_sqr()), &binomial_pmf(k, target.a.norm_sqr()));
        let mean = target.mean_energy(k);
        let mut tail = 0.0;
        let mut shift = 0u64;
        for (t, &pt) in dist.iter().enumerate() {
            if (t as f64 - mean).abs() <= half {
                shift = shift.max((t as i64 - a.energy as i64).unsigned_abs());
            } else {
                tail += pt;
            }
        }
        let tail = tail.clamp(0.0, 1.0);
        let typical_error = err_norm(shift, frame.window_size)?;
        let v = 2.0 * tail.sqrt() + typical_error * (1.0 - tail).sqrt();
        let bound = (std::f64::consts::SQRT_2 * v).min(1.0);
        let weight = all_mass(k);
        analytic += weight * bound;
        components.push(ComponentReport {
            k,
            weight,
            input_energy: a.energy,
            mean_energy: mean,
            energy_distribution: dist,
            tail_mass: tail,
            tail_error: 2.0 * tail.sqrt(),
            typical_error,
            largest_typical_shift: shift,
            bound,
        });
    }
    let exact = if exact { Some(simulate_exact(target, &frame, &assignments)?) } else { None };
    Ok(CoherentReport {
        target: target.clone(),
        frame,
        typ_half_width: half,
        typical_k: (k_lo, k_hi),
        nontypical_mass,
        components,
        analytic_bound: analytic.min(1.0),
        exact,
    })
}

fn input_index(n: u64, a: &Assignment, rank: u128) -> Result<usize> {
    Ok(strings::unrank(n as u32, a.energy as u32, a.offset + rank)?.bits as usize)
}

/// `U^inv (|x> (x) |H>)` where `u|x> = column`.
fn frame_protocol(frame: &ReferenceFrame, energies: &[i64], column: &[Complex64], x: usize) -> Vec<Complex64> {
    let fd = frame.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); energies.len() * fd];
    let h = frame.vector();
    for (fi, &amp) in h.iter().enumerate() {
        if amp != 0.0 {
            column_image(frame, energies, column, x, fi, &mut out, Complex64::new(amp, 0.0));
        }
    }
    out
}

fn with_frame(frame: &ReferenceFrame, psi: &[Complex64]) -> Vec<Complex64> {
    let h = frame.vector();
    psi.iter().flat_map(|&z| h.iter().map(move |&f| z * f)).collect()
}

fn frame_projection_norm_sqr(frame: &ReferenceFrame, v: &[Complex64]) -> f64 {
    let h = frame.vector();
    v.chunks(frame.dim())
        .map(|row| row.iter().zip(&h).map(|(z, f)| z * f).sum::<Complex64>().norm_sqr())
        .sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn simulate_exact(target: &CoherentTarget, frame: &ReferenceFrame, assignments: &[Assignment]) -> Result<ExactReport> {
    let n = target.n;
    let energies: Vec<i64> = (0..1u64 << n).map(|x| x.count_ones() as i64).collect();
    let patterns_total: u128 = assignments.iter().map(|a| strings::small_binomial(n as u32, a.k as u32)).sum();
    let pure = assignments.len() == 1 && patterns_total == 1 && (target.p == 0.0 || target.p == 1.0);
    if pure {
        if n > MAX_EXACT_PURE {
            return Err(Error::UnsupportedSize(format!("exact pure simulation needs n <= {MAX_EXACT_PURE}")));
        }
        let a = &assignments[0];
        let pattern = strings::unrank(n as u32, a.k as u32, 0)?.bits;
        let psi = target.component_vector(pattern);
        let x = input_index(n, a, 0)?;
        let out = frame_protocol(frame, &energies, &psi, x);
        let overlap = inner(&with_frame(frame, &psi), &out).norm_sqr();
        return Ok(ExactReport {
            trace_distance: (1.0 - overlap).max(0.0).sqrt(),
            frame_fidelity: frame_projection_norm_sqr(frame, &out),
            method: ExactMethod::PureState,
            commutes: protocol_commutes(frame, &energies, &[(x, psi)]),
        });
    }
    if n > MAX_EXACT_MIXED {
        return Err(Error::UnsupportedSize(format!("exact mixed simulation needs n <= {MAX_EXACT_MIXED}")));
    }
    let typical_mass: f64 = assignments
        .iter()
        .map(|a| target.pattern_weight(a.k) * strings::small_binomial(n as u32, a.k as u32) as f64)
        .sum();
    let mut vectors = Vec::new();
    let mut weights = Vec::new();
    let mut columns = Vec::new();
    for a in assignments {
        for (r, pattern) in strings::enumerate(n as u32, a.k as u32).into_iter().enumerate() {
            let psi = target.component_vector(pattern.bits);
            let x = input_index(n, a, r as u128)?;
            vectors.push(frame_protocol(frame, &energies, &psi, x));
            weights.push(target.pattern_weight(a.k) / typical_mass);
            columns.push((x, psi));
        }
    }
    let frame_fidelity = vectors.iter().zip(&weights).map(|(v, w)| w * frame_projection_norm_sqr(frame, v)).sum();
    for k in 0..=n {
        let w = target.pattern_weight(k);
        if w == 0.0 {
            continue;
        }
        for pattern in strings::enumerate(n as u32, k as u32) {
            vectors.push(with_frame(frame, &target.component_vector(pattern.bits)));
            weights.push(-w);
        }
    }
    Ok(ExactReport {
        trace_distance: 0.5 * weighted_trace_norm(&vectors, &weights),
        frame_fidelity,
        method: ExactMethod::SpanGram,
        commutes: protocol_commutes(frame, &energies, &columns),
    })
}

/// Nonzero amplitudes of each produced column only join equal total energies.
fn protocol_commutes(frame: &ReferenceFrame, energies: &[i64], columns: &[(usize, Vec<Complex64>)]) -> bool {
    let fd = frame.dim();
    columns.iter().all(|(x, col)| {
        (0..fd).all(|fi| {
            let mut out = vec![Complex64::new(0.0, 0.0); energies.len() * fd];
            column_image(frame, energies, col, *x, fi, &mut out, Complex64::new(1.0, 0.0));
            let e_in = energies[*x] + frame.energy_of(fi);
            out.iter()
                .enumerate()
                .all(|(r, z)| *z == Complex64::new(0.0, 0.0) || energies[r / fd] + frame.energy_of(r % fd) == e_in)
        })
    })
}

/// `|| sum_j w_j |v_j><v_j| ||_1` through the Gram matrix of the vectors.
pub fn weighted_trace_norm(vectors: &[Vec<Complex64>], weights: &[f64]) -> f64 {
    let r = vectors.len();
    let mut gram: CMatrix<f64> = Array2::zeros((r, r));
    for i in 0..r {
        for j in i..r {
            let g = inner(&vectors[i], &vectors[j]);
            gram[[i, j]] = g;
            gram[[j, i]] = g.conj();
        }
    }
    let root = linalg::hermitian_function(&gram, |x| x.max(0.0).sqrt());
    let w = linalg::diag_matrix(weights);
    let m = linalg::matmul(&linalg::matmul(&root, &w), &root);
    linalg::trace_norm_hermitian(&m)
}
