//! Small dense complex linear algebra: Hermitian eigensolver, Kronecker
//! products and partial traces.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

pub type CMatrix<T> = Array2<Complex<T>>;

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending,
/// eigenvectors in the matching columns.
#[derive(Clone, Debug)]
pub struct Eigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

fn off_diagonal_norm<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi. Accurate to a few ulps of the matrix norm.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> Eigen<T> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    let mut a = m.clone();
    // symmetrize against round-off in the input
    for i in 0..n {
        a[[i, i]] = Complex::new(a[[i, i]].re, T::zero());
        for j in (i + 1)..n {
            let avg = (a[[i, j]] + a[[j, i]].conj()).scale(T::lit(0.5));
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    }
    let mut v = CMatrix::<T>::eye(n);
    let total: T = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let eps = T::epsilon() * T::lit(0.5);

    for _sweep in 0..100 {
        if off_diagonal_norm(&a) <= eps * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let phase = apq.unscale(r);
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let tau = (aqq - app) / (r + r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // U restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let ph_conj = phase.conj();
                let u_pp = Complex::new(c, T::zero());
                let u_pq = Complex::new(s, T::zero());
                let u_qp = ph_conj.scale(-s);
                let u_qq = ph_conj.scale(c);
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * u_pp + akq * u_qp;
                    a[[k, q]] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[[q, k]] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[[p, q]] = Complex::zero();
                a[[q, p]] = Complex::zero();
                a[[p, p]] = Complex::new(a[[p, p]].re, T::zero());
                a[[q, q]] = Complex::new(a[[q, q]].re, T::zero());
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * u_pp + vkq * u_qp;
                    v[[k, q]] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.partial_cmp(&a[[j, j]].re).unwrap());
    let values = order.iter().map(|&i| a[[i, i]].re).collect();
    let mut vectors = CMatrix::<T>::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, col]] = v[[k, i]];
        }
    }
    Eigen { values, vectors }
}

pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.t().mapv(|z| z.conj())
}

pub fn matmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = CMatrix::<T>::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let aik = a[[i, k]];
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.ncols() {
                out[[i, j]] += aik * b[[k, j]];
            }
        }
    }
    out
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMatrix::<T>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Traces out subsystem `which` (0 = first factor) of a bipartite matrix
/// with factor dimensions `(da, db)`.
pub fn partial_trace<T: Real>(m: &CMatrix<T>, da: usize, db: usize, which: usize) -> CMatrix<T> {
    assert_eq!(m.nrows(), da * db);
    if which == 0 {
        let mut out = CMatrix::<T>::zeros((db, db));
        for k in 0..db {
            for l in 0..db {
                let mut s = Complex::zero();
                for i in 0..da {
                    s += m[[i * db + k, i * db + l]];
                }
                out[[k, l]] = s;
            }
        }
        out
    } else {
        let mut out = CMatrix::<T>::zeros((da, da));
        for i in 0..da {
            for j in 0..da {
                let mut s = Complex::zero();
                for k in 0..db {
                    s += m[[i * db + k, j * db + k]];
                }
                out[[i, j]] = s;
            }
        }
        out
    }
}

/// `f(M) = V f(Λ) V†` for Hermitian `M`.
pub fn hermitian_function<T: Real, F: Fn(T) -> T>(m: &CMatrix<T>, f: F) -> CMatrix<T> {
    let e = eigh(m);
    let n = m.nrows();
    let mut out = CMatrix::<T>::zeros((n, n));
    for (c, &lam) in e.values.iter().enumerate() {
        let fl = f(lam);
        for i in 0..n {
            let vi = e.vectors[[i, c]].scale(fl);
            for j in 0..n {
                out[[i, j]] += vi * e.vectors[[j, c]].conj();
            }
        }
    }
    out
}

pub fn diag_matrix<T: Real>(d: &[T]) -> CMatrix<T> {
    let mut out = CMatrix::<T>::zeros((d.len(), d.len()));
    for (i, &x) in d.iter().enumerate() {
        out[[i, i]] = Complex::new(x, T::zero());
    }
    out
}

pub fn outer<T: Real>(v: &Array1<Complex<T>>) -> CMatrix<T> {
    let n = v.len();
    let mut out = CMatrix::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = v[i] * v[j].conj();
        }
    }
    out
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    (0..m.nrows()).map(|i| m[[i, i]]).fold(Complex::zero(), |a, b| a + b)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn is_diagonal<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    m.indexed_iter().all(|((i, j), z)| i == j || z.norm() <= tol)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian<T: Real>(m: &CMatrix<T>) -> T {
    if is_diagonal(m, T::zero()) {
        return (0..m.nrows()).map(|i| m[[i, i]].re.abs()).sum();
    }
    eigh(m).values.iter().map(|x| x.abs()).sum()
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = Complex::one();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        let mut m = CMatrix::<f64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = Complex::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[[i, j]] = z;
                m[[j, i]] = z.conj();
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8, 16] {
            let m = random_hermitian(n, &mut rng);
            let e = eigh(&m);
            let back = matmul(&matmul(&e.vectors, &diag_matrix(&e.values)), &adjoint(&e.vectors));
            let err = (&back - &m).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            let vv = matmul(&adjoint(&e.vectors), &e.vectors);
            let orth = (&vv - &identity::<f64>(n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(orth < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_f32() {
        let m = diag_matrix(&[0.25f32, 0.75]);
        let e = eigh(&m);
        assert!((e.values[0] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = diag_matrix(&[0.3, 0.7]);
        let b = diag_matrix(&[0.1, 0.2, 0.7]);
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, 2, 3, 1);
        let rb = partial_trace(&ab, 2, 3, 0);
        assert!((&ra - &a).iter().all(|z| z.norm() < 1e-15));
        assert!((&rb - &b).iter().all(|z| z.norm() < 1e-15));
    }
}
