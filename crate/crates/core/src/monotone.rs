//! Entropies, relative entropy and the resource monotones built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::{xlogx, Real};
use crate::state::{DensityMatrix, GibbsState, Hamiltonian};

/// Binary entropy in nats.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::param(format!("probability {p} outside [0, 1]")));
    }
    Ok(-xlogx(p) - xlogx(T::one() - p))
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    -rho.eigenvalues().into_iter().map(xlogx).sum::<T>()
}

fn classical_relative_entropy<T: Real>(p: &[T], q: &[T]) -> T {
    let tol = T::clamp_tol();
    let mut d = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= tol {
            continue;
        }
        if qi <= tol {
            return T::infinity();
        }
        d += pi * (pi.ln() - qi.ln());
    }
    d.max(T::zero())
}

/// `D(rho || sigma)` in nats; `+inf` when the support of `rho` is not
/// contained in that of `sigma`.
pub fn relative_entropy<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::param(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    if rho.is_diagonal() && sigma.is_diagonal() {
        return Ok(classical_relative_entropy(&rho.diagonal(), &sigma.diagonal()));
    }
    let tol = T::clamp_tol();
    let es = linalg::eigh(sigma.entries());
    let n = rho.dim();
    let mut cross = T::zero();
    for (c, &mu) in es.values.iter().enumerate() {
        // <v|rho|v> for the c-th eigenvector of sigma
        let mut w = T::zero();
        for i in 0..n {
            for j in 0..n {
                w += (es.vectors[[i, c]].conj() * rho.entries()[[i, j]] * es.vectors[[j, c]]).re;
            }
        }
        if mu <= tol {
            if w > tol * T::lit(1e3) {
                return Ok(T::infinity());
            }
            continue;
        }
        cross += w * mu.ln();
    }
    let neg_s = rho.eigenvalues().into_iter().map(xlogx).sum::<T>();
    Ok((neg_s - cross).max(T::zero()))
}

/// Mean energy of `rho` under a diagonal Hamiltonian.
pub fn mean_energy<T: Real>(rho: &DensityMatrix<T>, h: &Hamiltonian<T>) -> Result<T> {
    rho.mean_energy(h)
}

/// `F = <H> - S / beta`, with `k_B = 1`.
pub fn free_energy<T: Real>(rho: &DensityMatrix<T>, h: &Hamiltonian<T>, beta: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(Error::param("free energy needs beta > 0"));
    }
    let e = rho.mean_energy(h)?;
    if beta.is_infinite() {
        return Ok(e);
    }
    Ok(e - von_neumann_entropy(rho) / beta)
}

/// Asymptotic interconversion rate `D(rho||gamma) / D(sigma||gamma)`.
pub fn interconversion_rate<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    gamma: &GibbsState<T>,
) -> Result<T> {
    let g = gamma.density_matrix();
    let num = relative_entropy(rho, &g)?;
    let den = relative_entropy(sigma, &g)?;
    if den <= T::state_tol() {
        return Err(Error::FreeTarget);
    }
    if den.is_infinite() {
        return Err(Error::InvalidTarget("target lies outside the Gibbs support".into()));
    }
    Ok(num / den)
}

/// `D(gamma || rho)`. A monotone, but not asymptotically continuous.
pub fn reversed_monotone<T: Real>(rho: &DensityMatrix<T>, gamma: &GibbsState<T>) -> Result<T> {
    relative_entropy(&gamma.density_matrix(), rho)
}

/// `||a - b||_1` (sum of absolute eigenvalues of the difference).
pub fn trace_norm_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff: CMatrix<T> = a.entries() - b.entries();
    Ok(linalg::trace_norm_hermitian(&diff))
}

/// `(1/2) ||a - b||_1`.
pub fn trace_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    Ok(trace_norm_distance(a, b)? * T::lit(0.5))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport<T> {
    /// `|f(rho1) - f(rho2)|` with `f = D(. || gamma)`.
    pub lhs: T,
    pub trace_norm: T,
    pub log_dim: T,
    pub m: T,
    pub c: T,
    /// `m * trace_norm * log_dim + 4 c`
    pub rhs: T,
    pub holds: bool,
}

/// Constant `M = beta K + 1` with `K = E_max / ln d`, energies measured from
/// the ground level.
pub fn continuity_constant<T: Real>(h: &Hamiltonian<T>, beta: T) -> T {
    let d = T::usize(h.dim());
    let k = h.grounded().max_energy() / d.ln();
    beta * k + T::one()
}

/// Checks `|f(rho1) - f(rho2)| <= M ||rho1 - rho2||_1 ln d + 4c` for
/// `f = D(. || gamma)`.
pub fn continuity_bound_check<T: Real>(
    rho1: &DensityMatrix<T>,
    rho2: &DensityMatrix<T>,
    gamma: &GibbsState<T>,
    m: T,
    c: T,
) -> Result<ContinuityReport<T>> {
    if !gamma.is_full_rank() {
        return Err(Error::param("continuity check needs a full-rank Gibbs state"));
    }
    let g = gamma.density_matrix();
    let f1 = relative_entropy(rho1, &g)?;
    let f2 = relative_entropy(rho2, &g)?;
    let lhs = (f1 - f2).abs();
    let trace_norm = trace_norm_distance(rho1, rho2)?;
    let log_dim = T::usize(rho1.dim()).ln();
    let rhs = m * trace_norm * log_dim + T::lit(4.0) * c;
    Ok(ContinuityReport { lhs, trace_norm, log_dim, m, c, rhs, holds: lhs <= rhs })
}

/// `p D(rho) + (1-p) D(sigma) - D(p rho + (1-p) sigma)`, all relative to `gamma`.
pub fn affinity_gap<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    p: T,
    gamma: &GibbsState<T>,
) -> Result<T> {
    let g = gamma.density_matrix();
    let mixed = rho.mix(sigma, p)?;
    Ok(p * relative_entropy(rho, &g)? + (T::one() - p) * relative_entropy(sigma, &g)?
        - relative_entropy(&mixed, &g)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::gibbs_state;
    use num_complex::Complex;

    fn qubit_gibbs(beta: f64) -> GibbsState<f64> {
        gibbs_state(&Hamiltonian::qubit(), beta).unwrap()
    }

    #[test]
    fn excited_state_relative_entropy() {
        let g = qubit_gibbs(1.0);
        let top = DensityMatrix::basis(2, 1).unwrap();
        let d = relative_entropy(&top, &g.density_matrix()).unwrap();
        assert!((d - 1.3132616875182228).abs() < 1e-12);
        assert_eq!(relative_entropy(&g.density_matrix(), &g.density_matrix()).unwrap(), 0.0);
    }

    #[test]
    fn support_violation_is_infinite() {
        let a = DensityMatrix::<f64>::from_diagonal(&[0.5, 0.5]).unwrap();
        let b = DensityMatrix::basis(2, 0).unwrap();
        assert!(relative_entropy(&a, &b).unwrap().is_infinite());
        let g = qubit_gibbs(1.0);
        assert!(reversed_monotone(&b, &g).unwrap().is_infinite());
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap();
        let minus = DensityMatrix::pure(&[Complex::new(s, 0.0), Complex::new(-s, 0.0)]).unwrap();
        assert!(relative_entropy(&plus, &minus).unwrap().is_infinite());
        assert_eq!(relative_entropy(&plus, &plus).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_invalid_parameter() {
        let a = DensityMatrix::<f64>::basis(2, 0).unwrap();
        let b = DensityMatrix::<f64>::basis(3, 0).unwrap();
        assert!(matches!(relative_entropy(&a, &b), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn free_energy_of_gibbs_and_eigenstate() {
        let h = Hamiltonian::<f64>::new(vec![0.0, 1.0, 2.0]).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let f = free_energy(&g.density_matrix(), &h, 1.0).unwrap();
        assert!((f + g.partition_function.ln()).abs() < 1e-12);
        let top = DensityMatrix::basis(3, 2).unwrap();
        assert_eq!(free_energy(&top, &h, 1.0).unwrap(), 2.0);
        assert!(free_energy(&top, &h, 0.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let g = qubit_gibbs(1.0);
        let rho = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let top = DensityMatrix::basis(2, 1).unwrap();
        let r = interconversion_rate(&rho, &top, &g).unwrap();
        assert!((r - 0.381443).abs() < 1e-5);
        assert_eq!(interconversion_rate(&rho, &rho, &g).unwrap(), 1.0);
        assert_eq!(interconversion_rate(&g.density_matrix(), &top, &g).unwrap(), 0.0);
        assert_eq!(interconversion_rate(&rho, &g.density_matrix(), &g), Err(Error::FreeTarget));
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert!((binary_entropy(0.5f64).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((binary_entropy(0.268941f64).unwrap() - 0.5822026875177713).abs() < 1e-12);
        assert!(binary_entropy(1.1f64).is_err());
    }

    #[test]
    fn reversed_monotone_is_finite_for_full_rank() {
        let g = qubit_gibbs(1.0);
        let rho = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let v = reversed_monotone(&rho, &g).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(reversed_monotone(&g.density_matrix(), &g).unwrap(), 0.0);
    }

    #[test]
    fn continuity_examples() {
        let h = Hamiltonian::<f64>::new(vec![0.0, 1.0, 2.0]).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let m = continuity_constant(&h, 1.0);
        let c = 2f64.ln();
        let same = continuity_bound_check(&g.density_matrix(), &g.density_matrix(), &g, m, c).unwrap();
        assert!(same.holds && same.lhs == 0.0);
        let top = DensityMatrix::basis(3, 2).unwrap();
        let r = continuity_bound_check(&g.density_matrix(), &top, &g, m, c).unwrap();
        assert!(r.holds);
        assert!(r.rhs >= 2.0 + 3f64.ln());
    }

    #[test]
    fn works_in_f32() {
        let g = gibbs_state(&Hamiltonian::<f32>::qubit(), 1.0).unwrap();
        let top = DensityMatrix::basis(2, 1).unwrap();
        let d = relative_entropy(&top, &g.density_matrix()).unwrap();
        assert!((d - 1.3132617).abs() < 1e-5);
    }
}
