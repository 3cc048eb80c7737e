//! Seeded random states and Hamiltonians for property checks.

use ndarray::Array2;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{self, CMatrix};
use crate::scalar::Real;
use crate::state::{DensityMatrix, Hamiltonian};

/// Point drawn uniformly from the probability simplex.
pub fn random_probabilities<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    let mut p: Vec<T> = raw.iter().map(|x| T::lit(x / s)).collect();
    // push rounding into the largest entry so the sum is 1 to working precision
    let total: T = p.iter().cloned().sum();
    let imax = (0..d).max_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap()).unwrap();
    p[imax] += T::one() - total;
    p
}

/// Random density matrix `G G† / tr` with a `d x rank` complex Ginibre `G`.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix<T> {
    let mut g = Array2::<Complex<T>>::zeros((d, rank.max(1)));
    for z in g.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = Complex::new(T::lit(re), T::lit(im));
    }
    let mut m: CMatrix<T> = linalg::matmul(&g, &linalg::adjoint(&g));
    let tr = linalg::trace(&m).re;
    m.mapv_inplace(|z| z.unscale(tr));
    for i in 0..d {
        m[[i, i]] = Complex::new(m[[i, i]].re, T::zero());
    }
    DensityMatrix::new(m).expect("Ginibre construction is a valid state")
}

pub fn random_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    let raw: Vec<Complex<f64>> =
        (0..d).map(|_| Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.iter().map(|z| Complex::new(T::lit(z.re / norm), T::lit(z.im / norm))).collect()
}

/// Random diagonal state with full support.
pub fn random_quasiclassical<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix<T> {
    DensityMatrix::from_diagonal(&random_probabilities::<T, R>(d, rng)).unwrap()
}

/// Energies drawn uniformly from `[0, emax]` with the ground level pinned at 0.
pub fn random_hamiltonian<T: Real, R: Rng + ?Sized>(d: usize, emax: f64, rng: &mut R) -> Hamiltonian<T> {
    let mut e: Vec<T> = (0..d).map(|_| T::lit(rng.gen_range(0.0..emax))).collect();
    e[0] = T::zero();
    Hamiltonian::new(e).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        for d in [2, 3, 7, 16] {
            let ra: DensityMatrix<f64> = random_density_matrix(d, d, &mut a);
            let rb: DensityMatrix<f64> = random_density_matrix(d, d, &mut b);
            assert_eq!(ra, rb);
            let p: Vec<f64> = random_probabilities(d, &mut a);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let _: Vec<f64> = random_probabilities(d, &mut b);
        }
    }
}
