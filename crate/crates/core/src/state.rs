//! Hamiltonians, quasiclassical and general states, Gibbs states.

use ndarray::Array1;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

/// Diagonal Hamiltonian given by its energy levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian<T> {
    energies: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl<T: Real> Hamiltonian<T> {
    pub fn new(energies: Vec<T>) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::param("a Hamiltonian needs at least two levels"));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::param("energies must be finite"));
        }
        Ok(Hamiltonian { energies, labels: None })
    }

    /// Levels `(0, gap)`.
    pub fn two_level(gap: T) -> Result<Self> {
        if !(gap > T::zero()) {
            return Err(Error::param("two-level gap must be positive"));
        }
        Self::new(vec![T::zero(), gap])
    }

    /// The unit-gap qubit.
    pub fn qubit() -> Self {
        Self::two_level(T::one()).unwrap()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.energies.len() {
            return Err(Error::DimensionMismatch(labels.len(), self.energies.len()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn max_energy(&self) -> T {
        self.energies.iter().cloned().fold(T::neg_infinity(), T::max)
    }

    pub fn min_energy(&self) -> T {
        self.energies.iter().cloned().fold(T::infinity(), T::min)
    }

    pub fn index_of_max(&self) -> usize {
        let emax = self.max_energy();
        self.energies.iter().position(|&e| e == emax).unwrap()
    }

    pub fn matrix(&self) -> CMatrix<T> {
        linalg::diag_matrix(&self.energies)
    }

    /// Energies shifted so the ground level sits at zero.
    pub fn grounded(&self) -> Self {
        let e0 = self.min_energy();
        Hamiltonian { energies: self.energies.iter().map(|&e| e - e0).collect(), labels: self.labels.clone() }
    }
}

fn check_probability_vector<T: Real>(probs: &[T]) -> Result<()> {
    let tol = T::state_tol();
    if probs.iter().any(|&p| !p.is_finite() || p < -tol || p > T::one() + tol) {
        return Err(Error::InvalidState("probabilities must lie in [0, 1]".into()));
    }
    let s: T = probs.iter().cloned().sum();
    if (s - T::one()).abs() > tol {
        return Err(Error::InvalidState(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// State diagonal in the energy eigenbasis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiclassicalState<T> {
    probs: Vec<T>,
}

impl<T: Real> QuasiclassicalState<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidState("need at least two levels".into()));
        }
        check_probability_vector(&probs)?;
        Ok(QuasiclassicalState { probs: probs.into_iter().map(|p| p.max(T::zero()).min(T::one())).collect() })
    }

    /// `(1 - p)|0><0| + p|1><1|`.
    pub fn two_level(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::param(format!("excited population {p} outside [0, 1]")));
        }
        Self::new(vec![T::one() - p, p])
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn to_density_matrix(&self) -> DensityMatrix<T> {
        DensityMatrix { entries: linalg::diag_matrix(&self.probs) }
    }

    pub fn mean_energy(&self, h: &Hamiltonian<T>) -> Result<T> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), h.dim()));
        }
        Ok(self.probs.iter().zip(h.energies()).map(|(&p, &e)| p * e).sum())
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix<T> {
    entries: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(entries: CMatrix<T>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::DimensionMismatch(r, c));
        }
        if r == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        let tol = T::state_tol();
        if linalg::hermiticity_defect(&entries) > tol {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&entries);
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {} is not 1", tr.re)));
        }
        let e = linalg::eigh(&entries);
        if e.values.first().is_some_and(|&v| v < -tol) {
            return Err(Error::InvalidState("matrix has a negative eigenvalue".into()));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn from_diagonal(probs: &[T]) -> Result<Self> {
        Ok(QuasiclassicalState::new(probs.to_vec())?.to_density_matrix())
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - T::one()).abs() > T::state_tol() {
            return Err(Error::InvalidState("state vector is not normalized".into()));
        }
        let v = Array1::from(psi.to_vec());
        Ok(DensityMatrix { entries: linalg::outer(&v) })
    }

    /// Energy eigenstate `|i><i|` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::param(format!("level {i} out of range for dimension {d}")));
        }
        let mut p = vec![T::zero(); d];
        p[i] = T::one();
        Self::from_diagonal(&p)
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.entries[[i, i]].re).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::is_diagonal(&self.entries, T::state_tol())
    }

    /// Eigenvalues ascending, with tiny negatives clamped to zero.
    pub fn eigenvalues(&self) -> Vec<T> {
        let vals = if self.is_diagonal() {
            let mut d = self.diagonal();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d
        } else {
            linalg::eigh(&self.entries).values
        };
        vals.into_iter().map(|v| if v < T::zero() && v >= -T::clamp_tol() { T::zero() } else { v }).collect()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        DensityMatrix { entries: linalg::kron(&self.entries, &other.entries) }
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Self, p: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::param("mixing weight outside [0, 1]"));
        }
        let q = T::one() - p;
        let entries = self.entries.mapv(|z| z.scale(p)) + other.entries.mapv(|z| z.scale(q));
        Ok(DensityMatrix { entries })
    }

    pub fn mean_energy(&self, h: &Hamiltonian<T>) -> Result<T> {
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), h.dim()));
        }
        Ok(self.diagonal().iter().zip(h.energies()).map(|(&p, &e)| p * e).sum())
    }

    /// Reduced state on the first (`which == 1`) or second (`which == 0`)
    /// factor after tracing out the other.
    pub fn partial_trace(&self, da: usize, db: usize, which: usize) -> Result<Self> {
        if da * db != self.dim() {
            return Err(Error::DimensionMismatch(da * db, self.dim()));
        }
        Ok(DensityMatrix { entries: linalg::partial_trace(&self.entries, da, db, which) })
    }
}

/// Thermal state of a Hamiltonian at inverse temperature `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsState<T> {
    pub beta: T,
    pub hamiltonian: Hamiltonian<T>,
    pub probs: QuasiclassicalState<T>,
    pub partition_function: T,
}

impl<T: Real> GibbsState<T> {
    pub fn density_matrix(&self) -> DensityMatrix<T> {
        self.probs.to_density_matrix()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Excited population of a two-level Gibbs state.
    pub fn excited_population(&self) -> Option<T> {
        (self.dim() == 2).then(|| self.probs.probs()[1])
    }

    /// `ln Z`, finite even where `Z` itself would overflow.
    pub fn log_partition_function(&self) -> T {
        let e0 = self.hamiltonian.min_energy();
        if self.beta.is_infinite() {
            return self.partition_function.ln();
        }
        let s: T = self.hamiltonian.energies().iter().map(|&e| (-self.beta * (e - e0)).exp()).sum();
        s.ln() - self.beta * e0
    }

    pub fn is_full_rank(&self) -> bool {
        self.probs.probs().iter().all(|&p| p > T::zero())
    }
}

/// Boltzmann weights `exp(-beta E_i) / Z`. `beta = 0` gives the uniform state
/// and `beta = +inf` the (possibly degenerate) ground state.
pub fn gibbs_state<T: Real>(h: &Hamiltonian<T>, beta: T) -> Result<GibbsState<T>> {
    if beta.is_nan() || beta < T::zero() || beta == T::neg_infinity() {
        return Err(Error::param(format!("inverse temperature {beta} must be in [0, +inf]")));
    }
    let e0 = h.min_energy();
    let weights: Vec<T> = if beta.is_infinite() {
        h.energies().iter().map(|&e| if e == e0 { T::one() } else { T::zero() }).collect()
    } else {
        h.energies().iter().map(|&e| (-beta * (e - e0)).exp()).collect()
    };
    let s: T = weights.iter().cloned().sum();
    let probs = QuasiclassicalState::new(weights.iter().map(|&w| w / s).collect())?;
    let partition_function = if beta.is_infinite() {
        if e0 > T::zero() {
            T::zero()
        } else if e0 < T::zero() {
            T::infinity()
        } else {
            s
        }
    } else {
        s * (-beta * e0).exp()
    };
    Ok(GibbsState { beta, hamiltonian: h.clone(), probs, partition_function })
}

/// `q = e^{-beta E} / (1 + e^{-beta E})` for the two-level system with gap `E`.
pub fn two_level_excited_population<T: Real>(beta: T, gap: T) -> T {
    let x = (-beta * gap).exp();
    x / (T::one() + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gibbs_examples() {
        let g = gibbs_state(&Hamiltonian::<f64>::qubit(), 0.0).unwrap();
        assert_eq!(g.probs.probs(), &[0.5, 0.5]);
        let g = gibbs_state(&Hamiltonian::<f64>::qubit(), 2f64.ln()).unwrap();
        assert!((g.excited_population().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let h3 = Hamiltonian::<f64>::new(vec![0.0, 1.0, 2.0]).unwrap();
        let g = gibbs_state(&h3, 1.0).unwrap();
        let expect = [0.665240955774822, 0.244728471054798, 0.090030573170380];
        for (p, e) in g.probs.probs().iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((g.partition_function - 1.503214724408055).abs() < 1e-12);
    }

    #[test]
    fn gibbs_limits() {
        let h = Hamiltonian::<f64>::new(vec![0.0, 1.0, 1.0]).unwrap();
        let g = gibbs_state(&h, f64::INFINITY).unwrap();
        assert_eq!(g.probs.probs(), &[1.0, 0.0, 0.0]);
        assert!(gibbs_state(&h, f64::NAN).is_err());
        assert!(gibbs_state(&h, -1.0).is_err());
    }

    #[test]
    fn log_partition_survives_large_energies() {
        let h = Hamiltonian::<f64>::new(vec![1000.0, 1001.0]).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let expect = -1000.0 + (1.0 + (-1f64).exp()).ln();
        assert!((g.log_partition_function() - expect).abs() < 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(QuasiclassicalState::new(vec![0.5, 0.6]).is_err());
        assert!(QuasiclassicalState::two_level(1.5f64).is_err());
        let bad = linalg::diag_matrix(&[1.2, -0.2]);
        assert!(DensityMatrix::new(bad).is_err());
        let mut m = linalg::diag_matrix(&[0.5, 0.5]);
        m[[0, 1]] = Complex::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(Hamiltonian::new(vec![0.0]).is_err());
        assert!(Hamiltonian::new(vec![0.0, f64::INFINITY]).is_err());
        assert!(Hamiltonian::two_level(0.0).is_err());
    }

    #[test]
    fn pure_state_and_partial_trace() {
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap();
        let both = plus.tensor(&DensityMatrix::basis(2, 1).unwrap());
        let back = both.partial_trace(2, 2, 1).unwrap();
        assert!((back.entries() - plus.entries()).iter().all(|z| z.norm() < 1e-15));
    }
}
