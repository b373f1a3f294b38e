//! Thermal states in two representations: truncated Fock-space density
//! operators and zero-mean Gaussian phase-space descriptors.
//!
//! Quadratures follow `q = (a + a†)/√2`, `p = (a − a†)/(√2 i)` so a single
//! thermal mode has covariance `((2n₀+1)/2)·I₂` and vacuum `I₂/2`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_defect, HermitianEigen};
use crate::error::{Error, Result};
use crate::physics::SourceSpec;

/// Smallest cutoff ever used for a thermal state.
pub const MIN_RECOMMENDED_CUTOFF: usize = 64;
/// Cutoff floor per unit of occupation.
pub const CUTOFF_PER_OCCUPATION: f64 = 40.0;
/// Tail probability the escalation policy drives below.
pub const TAIL_MASS_TARGET: f64 = 1e-12;
/// Escalation stops here.
pub const MAX_CUTOFF: usize = 1 << 24;

const HERMITIAN_TOL: f64 = 1e-12;
const NEGATIVE_EIGEN_TOL: f64 = 1e-12;

/// Operator on a truncated Fock space. Number-diagonal operators are kept
/// as their real diagonal, which is what every thermal-family operator is.
#[derive(Debug, Clone, PartialEq)]
pub enum FockOperator {
    Diagonal(Vec<f64>),
    Dense(DMatrix<Complex64>),
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        match self {
            FockOperator::Diagonal(d) => d.len(),
            FockOperator::Dense(m) => m.nrows(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, FockOperator::Diagonal(_))
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            FockOperator::Diagonal(d) if i == j => Complex64::new(d[i], 0.0),
            FockOperator::Diagonal(_) => Complex64::new(0.0, 0.0),
            FockOperator::Dense(m) => m[(i, j)],
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            FockOperator::Diagonal(d) => DMatrix::from_fn(d.len(), d.len(), |i, j| {
                if i == j {
                    Complex64::new(d[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            FockOperator::Dense(m) => m.clone(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        match self {
            FockOperator::Diagonal(d) => Complex64::new(d.iter().sum(), 0.0),
            FockOperator::Dense(m) => m.diagonal().iter().sum(),
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        match self {
            FockOperator::Diagonal(_) => 0.0,
            FockOperator::Dense(m) => hermitian_defect(m),
        }
    }

    pub fn matmul(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_dim(other)?;
        Ok(match (self, other) {
            (FockOperator::Diagonal(a), FockOperator::Diagonal(b)) => {
                FockOperator::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => FockOperator::Dense(self.to_dense() * other.to_dense()),
        })
    }

    /// `(AB + BA)/2`.
    pub fn symmetrized_product(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_dim(other)?;
        Ok(match (self, other) {
            (FockOperator::Diagonal(a), FockOperator::Diagonal(b)) => {
                FockOperator::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => {
                let a = self.to_dense();
                let b = other.to_dense();
                let s = &a * &b + &b * &a;
                FockOperator::Dense(s * Complex64::new(0.5, 0.0))
            }
        })
    }

    /// Max-norm distance between two operators.
    pub fn max_abs_diff(&self, other: &FockOperator) -> Result<f64> {
        self.check_dim(other)?;
        Ok(match (self, other) {
            (FockOperator::Diagonal(a), FockOperator::Diagonal(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            _ => (self.to_dense() - other.to_dense())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        })
    }

    /// `Tr(AB)` without forming the product.
    pub fn trace_product(&self, other: &FockOperator) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(match (self, other) {
            (FockOperator::Diagonal(a), FockOperator::Diagonal(b)) => {
                Complex64::new(a.iter().zip(b).map(|(x, y)| x * y).sum(), 0.0)
            }
            (FockOperator::Diagonal(a), FockOperator::Dense(m))
            | (FockOperator::Dense(m), FockOperator::Diagonal(a)) => {
                a.iter().enumerate().map(|(i, x)| m[(i, i)] * *x).sum()
            }
            (FockOperator::Dense(a), FockOperator::Dense(b)) => {
                let n = a.nrows();
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for k in 0..n {
                        s += a[(i, k)] * b[(k, i)];
                    }
                }
                s
            }
        })
    }

    fn check_dim(&self, other: &FockOperator) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            })
        }
    }
}

/// Density operator restricted to Fock states `|0⟩ … |D−1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityOperator {
    pub matrix: FockOperator,
    /// Probability weight lost to the truncation.
    pub tail_mass: f64,
}

impl TruncatedDensityOperator {
    /// Wraps an arbitrary matrix after checking the density-operator
    /// invariants.
    pub fn new(matrix: FockOperator, tail_mass: f64) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(Error::Domain("Fock cutoff must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::Domain(format!("tail mass {tail_mass} outside [0, 1]")));
        }
        let rho = Self { matrix, tail_mass };
        rho.validate()?;
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Checks Hermiticity, the trace window and positivity.
    pub fn validate(&self) -> Result<()> {
        let defect = self.matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("density operator not Hermitian ({defect:e})")));
        }
        let tr = self.matrix.trace();
        let slack = 1e-12;
        if tr.im.abs() > slack || tr.re < 1.0 - self.tail_mass - slack || tr.re > 1.0 + slack {
            return Err(Error::Invariant(format!(
                "trace {} outside [1 − {:e}, 1]",
                tr.re, self.tail_mass
            )));
        }
        let min_eig = self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -NEGATIVE_EIGEN_TOL {
            return Err(Error::Invariant(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match &self.matrix {
            FockOperator::Diagonal(d) => Ok(d.clone()),
            FockOperator::Dense(m) => Ok(HermitianEigen::new(m)?.values),
        }
    }

    /// `Tr(ρ f(N))` for a function of the number operator.
    pub fn number_expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.dim()).map(|k| self.matrix.entry(k, k).re * f(k as f64)).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.number_expectation(|k| k)
    }
}

/// `max(64, ⌈40 n₀⌉)`, the minimum cutoff accepted for a thermal state.
pub fn cutoff_floor(n0: f64) -> usize {
    MIN_RECOMMENDED_CUTOFF.max((CUTOFF_PER_OCCUPATION * n0).ceil() as usize)
}

/// Tail probability `(n₀/(n₀+1))^D` beyond cutoff `D`.
pub fn thermal_tail_mass(n0: f64, cutoff: usize) -> f64 {
    (cutoff as f64 * (n0 / (n0 + 1.0)).ln()).exp()
}

/// Starts at the floor and doubles until the tail mass is below 1e-12.
pub fn recommended_cutoff(n0: f64) -> Result<usize> {
    check_occupation(n0)?;
    let mut d = cutoff_floor(n0);
    while thermal_tail_mass(n0, d) >= TAIL_MASS_TARGET {
        d *= 2;
        if d > MAX_CUTOFF {
            return Err(Error::CutoffTooSmall {
                cutoff: MAX_CUTOFF,
                floor: d,
            });
        }
    }
    Ok(d)
}

fn check_occupation(n0: f64) -> Result<()> {
    if n0.is_finite() && n0 > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("occupation must be positive, got {n0}")))
    }
}

/// Bose-Einstein weights `P(k) = (1/(n₀+1))(n₀/(n₀+1))^k` for `k < D`.
pub fn bose_einstein_weights(n0: f64, cutoff: usize) -> Vec<f64> {
    let ln_ratio = -(1.0 / n0).ln_1p();
    let norm = 1.0 / (n0 + 1.0);
    (0..cutoff).map(|k| norm * (k as f64 * ln_ratio).exp()).collect()
}

/// Thermal state on a cutoff at or above [`cutoff_floor`].
pub fn thermal_density_operator(n0: f64, cutoff: usize) -> Result<TruncatedDensityOperator> {
    check_occupation(n0)?;
    let floor = cutoff_floor(n0);
    if cutoff < floor {
        return Err(Error::CutoffTooSmall { cutoff, floor });
    }
    Ok(thermal_unchecked(n0, cutoff))
}

/// Thermal state on any cutoff ≥ 2, for deliberate truncation studies.
pub fn thermal_density_truncated(n0: f64, cutoff: usize) -> Result<TruncatedDensityOperator> {
    check_occupation(n0)?;
    if cutoff < 2 {
        return Err(Error::Domain("Fock cutoff must be at least 2".into()));
    }
    Ok(thermal_unchecked(n0, cutoff))
}

fn thermal_unchecked(n0: f64, cutoff: usize) -> TruncatedDensityOperator {
    TruncatedDensityOperator {
        matrix: FockOperator::Diagonal(bose_einstein_weights(n0, cutoff)),
        tail_mass: thermal_tail_mass(n0, cutoff),
    }
}

/// Truncated annihilation operator, `a|k⟩ = √k |k−1⟩`.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Truncated quadratures `(q, p)`.
pub fn quadratures(dim: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad) * Complex64::new(s, 0.0);
    // (a − a†)/(√2 i) = −i(a − a†)/√2
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    (q, p)
}

/// Single-mode characteristic function `Tr[ρ exp(−i ξᵀΩR)]` evaluated in the
/// truncated Fock basis through the spectral exponential of `ξᵀΩR`.
pub fn fock_characteristic_function(rho: &TruncatedDensityOperator, xi: [f64; 2]) -> Result<Complex64> {
    let (q, p) = quadratures(rho.dim());
    // Ω = [[0, 1], [−1, 0]] so ξᵀΩR = ξ₁p − ξ₂q.
    let generator = &p * Complex64::new(xi[0], 0.0) - &q * Complex64::new(xi[1], 0.0);
    let unitary = HermitianEigen::new(&generator)?.unitary_exp(1.0);
    rho.matrix.trace_product(&FockOperator::Dense(unitary))
}

/// Symmetric 2×2 covariance block of one mode.
pub type CovBlock = Matrix2<f64>;

/// Mean vector and block-diagonal covariance of a product Gaussian state,
/// quadrature order `(q₁, p₁, q₂, p₂, …)`.
///
/// The covariance is stored per mode; [`Self::dense_covariance`] expands it.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStateDescriptor {
    pub mean: Vec<f64>,
    pub blocks: Vec<CovBlock>,
}

impl GaussianStateDescriptor {
    pub fn new(mean: Vec<f64>, blocks: Vec<CovBlock>) -> Result<Self> {
        if mean.len() != 2 * blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: 2 * blocks.len(),
                got: mean.len(),
            });
        }
        for b in &blocks {
            if b[(0, 1)] != b[(1, 0)] {
                return Err(Error::Domain("covariance block is not symmetric".into()));
            }
        }
        Ok(Self { mean, blocks })
    }

    /// `M` identical thermal blocks.
    pub fn thermal(n0: f64, modes: usize) -> Self {
        let v = (2.0 * n0 + 1.0) / 2.0;
        Self {
            mean: vec![0.0; 2 * modes],
            blocks: vec![CovBlock::new(v, 0.0, 0.0, v); modes],
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::thermal(0.0, modes)
    }

    pub fn mode_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dense_covariance(&self) -> DMatrix<f64> {
        let n = 2 * self.blocks.len();
        let mut cov = DMatrix::zeros(n, n);
        for (m, b) in self.blocks.iter().enumerate() {
            cov.view_mut((2 * m, 2 * m), (2, 2)).copy_from(b);
        }
        cov
    }

    /// Block-diagonal symplectic form `Ω = ⊕ [[0, 1], [−1, 0]]`.
    pub fn symplectic_form(&self) -> DMatrix<f64> {
        let n = 2 * self.blocks.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i / 2 != j / 2 {
                0.0
            } else if i % 2 == 0 && j == i + 1 {
                1.0
            } else if i % 2 == 1 && j + 1 == i {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Smallest eigenvalue of σ.
    pub fn min_covariance_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let half_tr = 0.5 * (b[(0, 0)] + b[(1, 1)]);
                let half_diff = 0.5 * (b[(0, 0)] - b[(1, 1)]);
                half_tr - (half_diff * half_diff + b[(0, 1)] * b[(0, 1)]).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue of the Hermitian matrix `σ + (i/2)Ω`; non-negative
    /// for every physical state.
    pub fn physicality_margin(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                // [[a, c + i/2], [c − i/2, d]]
                let half_tr = 0.5 * (b[(0, 0)] + b[(1, 1)]);
                let half_diff = 0.5 * (b[(0, 0)] - b[(1, 1)]);
                half_tr - (half_diff * half_diff + b[(0, 1)] * b[(0, 1)] + 0.25).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean photon number of mode `m`, `(σ_qq + σ_pp)/2 − 1/2 + |mean|²/2`.
    pub fn mode_occupation(&self, m: usize) -> f64 {
        let b = &self.blocks[m];
        let (q, p) = (self.mean[2 * m], self.mean[2 * m + 1]);
        0.5 * (b[(0, 0)] + b[(1, 1)]) - 0.5 + 0.5 * (q * q + p * p)
    }
}

/// Gaussian characteristic function `exp(−i ξᵀΩR̄ − ½ ξᵀΩσΩᵀξ)`.
pub fn characteristic_function(desc: &GaussianStateDescriptor, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != desc.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: desc.mean.len(),
            got: xi.len(),
        });
    }
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for (m, b) in desc.blocks.iter().enumerate() {
        let (x1, x2) = (xi[2 * m], xi[2 * m + 1]);
        // ξᵀω = (−x2, x1)
        let (w1, w2) = (-x2, x1);
        linear += w1 * desc.mean[2 * m] + w2 * desc.mean[2 * m + 1];
        quadratic += w1 * (b[(0, 0)] * w1 + b[(0, 1)] * w2) + w2 * (b[(1, 0)] * w1 + b[(1, 1)] * w2);
    }
    Ok(Complex64::new(-0.5 * quadratic, -linear).exp())
}

/// Product of `M` identical thermal modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeThermalState {
    pub n0: f64,
    pub mode_count: usize,
    pub descriptor: GaussianStateDescriptor,
}

impl MultimodeThermalState {
    /// Single-mode reduced state of mode `m` on a recommended cutoff.
    pub fn mode_marginal(&self, m: usize) -> Result<TruncatedDensityOperator> {
        if m >= self.mode_count {
            return Err(Error::Domain(format!("mode {m} out of range")));
        }
        let n = self.descriptor.mode_occupation(m);
        thermal_density_operator(n, recommended_cutoff(n)?)
    }

    pub fn total_mean_photons(&self) -> f64 {
        (0..self.mode_count).map(|m| self.descriptor.mode_occupation(m)).sum()
    }

    /// Photon statistics summary, for reports.
    pub fn summary(&self) -> MultimodeSummary {
        MultimodeSummary {
            n0: self.n0,
            mode_count: self.mode_count,
            total_mean_photons: self.total_mean_photons(),
            physicality_margin: self.descriptor.physicality_margin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultimodeSummary {
    pub n0: f64,
    pub mode_count: usize,
    pub total_mean_photons: f64,
    pub physicality_margin: f64,
}

/// In-band state of an observation: `M` independent thermal modes.
pub fn multimode_state(spec: &SourceSpec) -> Result<MultimodeThermalState> {
    let modes = crate::modal::ModeSet::nearest(spec)?;
    let descriptor = crate::modal::assemble_covariance(spec, &modes)?;
    Ok(MultimodeThermalState {
        n0: spec.n0,
        mode_count: modes.len(),
        descriptor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_weights_for_unit_occupation() {
        let rho = thermal_density_operator(1.0, 64).unwrap();
        let FockOperator::Diagonal(p) = &rho.matrix else {
            panic!("thermal state should be diagonal")
        };
        assert!((p[0] - 0.5).abs() < 1e-16);
        assert!((p[1] - 0.25).abs() < 1e-16);
        assert!((p[2] - 0.125).abs() < 1e-16);
        assert!((rho.tail_mass - 2f64.powi(-64)).abs() < 1e-30);
    }

    #[test]
    fn trace_and_mean_match_partial_sums() {
        for n0 in [0.3, 1.0, 2.0, 7.5, 10.0] {
            let d = recommended_cutoff(n0).unwrap();
            let rho = thermal_density_operator(n0, d).unwrap();
            let tr = rho.matrix.trace().re;
            assert!((tr - (1.0 - rho.tail_mass)).abs() < 1e-14);
            // closed-form partial sum: Σ_{k<D} k P(k) = n₀ − r^D (n₀ + D)
            let closed = n0 - rho.tail_mass * (n0 + d as f64);
            assert!((rho.mean_photon_number() - closed).abs() < 1e-12);
            assert!((rho.mean_photon_number() - n0).abs() < 1e-10);
        }
    }

    #[test]
    fn cutoff_rule_and_tails() {
        assert_eq!(cutoff_floor(0.5), 64);
        assert_eq!(cutoff_floor(5.0), 200);
        assert!(thermal_tail_mass(1.0, cutoff_floor(1.0)) < 1e-17);
        // (2/3)^80: the floor rule alone does not reach 1e-17 at n₀ = 2
        let at_two = thermal_tail_mass(2.0, cutoff_floor(2.0));
        assert!((at_two / 8.178_982_435_654_746e-15 - 1.0).abs() < 1e-9);
        assert!(thermal_tail_mass(10.0, cutoff_floor(10.0)) < 1e-12);
        assert!(matches!(
            thermal_density_operator(5.0, 4),
            Err(Error::CutoffTooSmall { cutoff: 4, floor: 200 })
        ));
        let tiny = thermal_density_truncated(5.0, 4).unwrap();
        assert!(tiny.tail_mass > 0.4);
        assert!(thermal_density_operator(0.0, 64).is_err());
        for n0 in [0.001, 1.0, 100.0, 1000.0] {
            let d = recommended_cutoff(n0).unwrap();
            assert!(thermal_tail_mass(n0, d) < TAIL_MASS_TARGET);
        }
    }

    #[test]
    fn partial_sums_increase_to_trace() {
        let rho = thermal_density_operator(3.0, 200).unwrap();
        let mut acc = 0.0;
        for k in 0..rho.dim() {
            let next = acc + rho.matrix.entry(k, k).re;
            assert!(next >= acc);
            acc = next;
        }
        assert!((acc - (1.0 - rho.tail_mass)).abs() < 1e-14);
    }

    #[test]
    fn moment_factoring_identity() {
        // Tr(ρN²) = 2n₀² + n₀ for a thermal state
        for n0 in [0.5, 1.0, 5.0, 20.0] {
            let rho = thermal_density_operator(n0, recommended_cutoff(n0).unwrap()).unwrap();
            let second = rho.number_expectation(|k| k * k);
            let expected = 2.0 * n0 * n0 + n0;
            assert!((second - expected).abs() < 1e-8 * expected.max(1.0), "n0={n0}");
        }
    }

    #[test]
    fn validate_rejects_bad_operators() {
        let bad = FockOperator::Diagonal(vec![0.7, 0.5]);
        assert!(TruncatedDensityOperator::new(bad, 0.0).is_err());
        let neg = FockOperator::Diagonal(vec![1.1, -0.1]);
        assert!(TruncatedDensityOperator::new(neg, 0.0).is_err());
        let mut m = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.1);
        assert!(TruncatedDensityOperator::new(FockOperator::Dense(m.clone()), 0.0).is_err());
        m[(1, 0)] = Complex64::new(0.1, -0.1);
        assert!(TruncatedDensityOperator::new(FockOperator::Dense(m), 0.0).is_ok());
    }

    #[test]
    fn characteristic_function_basics() {
        let vac = GaussianStateDescriptor::vacuum(2);
        assert_eq!(characteristic_function(&vac, &[0.0; 4]).unwrap(), Complex64::new(1.0, 0.0));
        let xi = [0.3, -0.2, 1.1, 0.4];
        let norm2: f64 = xi.iter().map(|x| x * x).sum();
        let got = characteristic_function(&vac, &xi).unwrap();
        assert!((got.re - (-norm2 / 4.0).exp()).abs() < 1e-15 && got.im == 0.0);
        assert!(characteristic_function(&vac, &[0.0; 3]).is_err());
    }

    #[test]
    fn characteristic_function_matches_fock_trace() {
        let desc = GaussianStateDescriptor::thermal(1.0, 1);
        for x in [0.3, 1.0] {
            let closed = characteristic_function(&desc, &[x, 0.0]).unwrap();
            assert!((closed.re - (-3.0 * x * x / 4.0).exp()).abs() < 1e-15);
            let rho64 = thermal_density_operator(1.0, 64).unwrap();
            let rho128 = thermal_density_operator(1.0, 128).unwrap();
            let f64_ = fock_characteristic_function(&rho64, [x, 0.0]).unwrap();
            let f128 = fock_characteristic_function(&rho128, [x, 0.0]).unwrap();
            assert!((f64_ - f128).norm() < 1e-8, "cutoff instability at x={x}");
            assert!((f128 - closed).norm() < 1e-8, "x={x}: {f128} vs {closed}");
        }
        // a general direction mixing both quadratures
        let rho = thermal_density_operator(1.0, 96).unwrap();
        let xi = [0.4, -0.7];
        let closed = characteristic_function(&desc, &xi).unwrap();
        let fock = fock_characteristic_function(&rho, xi).unwrap();
        assert!((fock - closed).norm() < 1e-8);
    }

    #[test]
    fn descriptor_physicality() {
        let th = GaussianStateDescriptor::thermal(1.0, 2);
        let dense = th.dense_covariance();
        assert_eq!(dense, DMatrix::from_diagonal_element(4, 4, 1.5));
        assert!((th.min_covariance_eigenvalue() - 1.5).abs() < 1e-15);
        assert!((th.physicality_margin() - 1.0).abs() < 1e-15);
        let vac = GaussianStateDescriptor::vacuum(3);
        assert!(vac.physicality_margin().abs() < 1e-15);
        let omega = th.symplectic_form();
        assert_eq!(omega[(0, 1)], 1.0);
        assert_eq!(omega[(1, 0)], -1.0);
        assert_eq!(omega[(1, 2)], 0.0);
        let unphysical = GaussianStateDescriptor::new(
            vec![0.0; 2],
            vec![CovBlock::new(0.2, 0.0, 0.0, 0.2)],
        )
        .unwrap();
        assert!(unphysical.physicality_margin() < 0.0);
    }

    #[test]
    fn multimode_state_examples() {
        let spec = SourceSpec::from_occupation(2.0, 1e9, 1e6, 1e-6).unwrap();
        let st = multimode_state(&spec).unwrap();
        assert_eq!(st.mode_count, 1);
        let marginal = st.mode_marginal(0).unwrap();
        let single = thermal_density_operator(2.0, marginal.dim()).unwrap();
        assert_eq!(marginal, single);

        let spec = SourceSpec::from_occupation(2.0, 1e9, 1e6, 5e-6).unwrap();
        let st = multimode_state(&spec).unwrap();
        let cov = st.descriptor.dense_covariance();
        for i in 0..cov.nrows() {
            for j in 0..cov.ncols() {
                if i / 2 != j / 2 {
                    assert_eq!(cov[(i, j)], 0.0);
                }
            }
        }
        assert!((st.total_mean_photons() - 5.0 * 2.0).abs() < 1e-12);
        assert!(st.descriptor.mean.iter().all(|&m| m == 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn characteristic_function_is_bounded(
                n0 in 0.0f64..50.0,
                xs in proptest::collection::vec(-5.0f64..5.0, 6),
            ) {
                let desc = GaussianStateDescriptor::thermal(n0, 3);
                let v = characteristic_function(&desc, &xs).unwrap();
                prop_assert!(v.norm() <= 1.0 + 1e-15);
            }
        }
    }
}
