//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! A diagonal input costs one off-diagonal scan and no rotations, which is
//! what the thermal-state paths hit in practice.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: DMatrix<Complex64>,
}

/// Largest |A_ij − conj(A_ji)| over the matrix.
pub fn hermitian_defect(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn off_diagonal_norm_sqr(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

impl HermitianEigen {
    pub fn new(matrix: &DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if hermitian_defect(matrix) > 1e-10 * scale.max(1e-300) {
            return Err(Error::Numerical("matrix is not Hermitian".into()));
        }
        let mut a = matrix.clone();
        let mut v = DMatrix::<Complex64>::identity(n, n);
        let frob2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let target = (f64::EPSILON * f64::EPSILON) * frob2;

        let mut converged = off_diagonal_norm_sqr(&a) <= target;
        let mut sweep = 0;
        while !converged && sweep < MAX_SWEEPS {
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
            sweep += 1;
            converged = off_diagonal_norm_sqr(&a) <= target;
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
            )));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V† X V`: expresses an operator in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.vectors.adjoint() * x * &self.vectors
    }

    /// `V X V†`: maps an eigenbasis operator back.
    pub fn from_eigenbasis(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.vectors * x * self.vectors.adjoint()
    }

    /// `exp(−i·t·A)` for the decomposed Hermitian A.
    pub fn unitary_exp(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.dim();
        let phases = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -t * self.values[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        self.from_eigenbasis(&phases)
    }
}

/// One complex Jacobi rotation zeroing A[p,q].
fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // negligible relative to both diagonal entries
    if r <= f64::EPSILON * 1e-3 * (app.abs().min(aqq.abs())) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let conj_phase = phase.conj();

    // U = [[c, s], [−s e^{−iφ}, c e^{−iφ}]] on (p, q)
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -conj_phase * s;
    let u_qq = conj_phase * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for (n, seed) in [(2, 1), (5, 2), (17, 3), (40, 4)] {
            let a = random_hermitian(n, seed);
            let eig = HermitianEigen::new(&a).unwrap();
            let d = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(eig.values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let back = eig.from_eigenbasis(&d);
            let err = (&back - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            let unit = eig.vectors.adjoint() * &eig.vectors;
            let ortho = (&unit - DMatrix::<Complex64>::identity(n, n))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(ortho < 1e-12);
        }
    }

    #[test]
    fn agrees_with_nalgebra_spectrum() {
        let a = random_hermitian(24, 9);
        let ours = HermitianEigen::new(&a).unwrap().values;
        let mut theirs: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn diagonal_input_needs_no_rotation() {
        let d = DMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                Complex64::new(6.0 - i as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let eig = HermitianEigen::new(&d).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn unitary_exp_of_pauli_y() {
        let y = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let t = 0.7;
        let u = HermitianEigen::new(&y).unwrap().unitary_exp(t);
        // exp(−i t Y) = cos t I − i sin t Y
        assert!((u[(0, 0)] - Complex64::new(t.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - Complex64::new(-t.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = random_hermitian(4, 5);
        a[(0, 1)] += Complex64::new(0.1, 0.0);
        assert!(HermitianEigen::new(&a).is_err());
    }
}
