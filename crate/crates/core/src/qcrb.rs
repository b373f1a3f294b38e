//! Symmetric logarithmic derivative, quantum Fisher information and the
//! resulting variance and sensitivity bounds for the occupation `n₀`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::HermitianEigen;
use crate::error::{Error, Result};
use crate::gaussian_state::{
    bose_einstein_weights, recommended_cutoff, thermal_density_operator, thermal_density_truncated, FockOperator,
    TruncatedDensityOperator,
};
use crate::physics::SourceSpec;

/// Occupations below this are rejected.
pub const MIN_OCCUPATION: f64 = 1e-6;
/// Eigenvalue-pair denominators below this are dropped from the SLD solve.
pub const EIGEN_FLOOR: f64 = 1e-14;
pub const QFI_REL_TOL: f64 = 1e-6;
pub const SLD_ENTRY_TOL: f64 = 1e-8;
pub const LYAPUNOV_TOL: f64 = 1e-10;
pub const SCORE_TOL: f64 = 1e-10;
const IMAG_RESIDUE_TOL: f64 = 1e-12;

fn check_n0(n0: f64) -> Result<()> {
    if !n0.is_finite() || n0 <= 0.0 {
        return Err(Error::Domain(format!("occupation must be positive, got {n0}")));
    }
    if n0 < MIN_OCCUPATION {
        return Err(Error::Domain(format!(
            "occupation {n0:e} is below the supported floor {MIN_OCCUPATION:e}"
        )));
    }
    Ok(())
}

/// `∂ρ_th/∂n₀ = ρ_th [N/(n₀(n₀+1)) − 1/(n₀+1)]` on `D` Fock states.
pub fn drho_dn0(n0: f64, cutoff: usize) -> Result<FockOperator> {
    check_n0(n0)?;
    if cutoff < 2 {
        return Err(Error::Domain("Fock cutoff must be at least 2".into()));
    }
    let p = bose_einstein_weights(n0, cutoff);
    let score = analytic_score(n0, cutoff);
    Ok(FockOperator::Diagonal(p.iter().zip(&score).map(|(a, b)| a * b).collect()))
}

fn analytic_score(n0: f64, cutoff: usize) -> Vec<f64> {
    let a = 1.0 / (n0 * (n0 + 1.0));
    let b = 1.0 / (n0 + 1.0);
    (0..cutoff).map(|k| k as f64 * a - b).collect()
}

/// Eigenvalue pairs left out of the Lyapunov solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizationNotice {
    pub threshold: f64,
    /// Eigenvalues of ρ below the threshold.
    pub dropped_eigenvalues: usize,
    /// Dimension of the eigenspace the solution lives on.
    pub retained_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SLDOperator {
    pub matrix: FockOperator,
    pub notice: Option<RegularizationNotice>,
    /// Positions (in the Fock basis for diagonal input, eigenbasis
    /// otherwise) that carry a solution.
    pub retained: Vec<bool>,
}

impl SLDOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `L = N/(n₀(n₀+1)) − 1/(n₀+1)`.
pub fn sld_analytic(n0: f64, cutoff: usize) -> Result<SLDOperator> {
    check_n0(n0)?;
    Ok(SLDOperator {
        matrix: FockOperator::Diagonal(analytic_score(n0, cutoff)),
        notice: None,
        retained: vec![true; cutoff],
    })
}

/// Solves `∂ρ = (Lρ + ρL)/2` in the eigenbasis of ρ,
/// `L_ij = 2(∂ρ)_ij/(λ_i + λ_j)`; pairs with `λ_i + λ_j < 10⁻¹⁴` are set to
/// zero and reported.
pub fn sld_numeric(rho: &TruncatedDensityOperator, drho: &FockOperator) -> Result<SLDOperator> {
    let dim = rho.dim();
    if drho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: drho.dim(),
        });
    }
    match (&rho.matrix, drho) {
        (FockOperator::Diagonal(lambda), FockOperator::Diagonal(d)) => {
            let retained: Vec<bool> = lambda.iter().map(|&l| 2.0 * l >= EIGEN_FLOOR).collect();
            let l = lambda
                .iter()
                .zip(d)
                .zip(&retained)
                .map(|((&l, &x), &keep)| if keep { 2.0 * x / (2.0 * l) } else { 0.0 })
                .collect();
            Ok(SLDOperator {
                matrix: FockOperator::Diagonal(l),
                notice: notice(&retained),
                retained,
            })
        }
        _ => {
            let rho_dense = rho.matrix.to_dense();
            let eig = HermitianEigen::new(&rho_dense)?;
            let d = eig.to_eigenbasis(&drho.to_dense());
            let lambda = &eig.values;
            let retained: Vec<bool> = lambda.iter().map(|&l| 2.0 * l >= EIGEN_FLOOR).collect();
            let lt = DMatrix::from_fn(dim, dim, |i, j| {
                let den = lambda[i] + lambda[j];
                if den >= EIGEN_FLOOR {
                    d[(i, j)] * (2.0 / den)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let l = eig.from_eigenbasis(&lt);
            let l = (&l + l.adjoint()) * Complex64::new(0.5, 0.0);
            Ok(SLDOperator {
                matrix: FockOperator::Dense(l),
                notice: notice(&retained),
                retained,
            })
        }
    }
}

fn notice(retained: &[bool]) -> Option<RegularizationNotice> {
    let kept = retained.iter().filter(|&&k| k).count();
    (kept < retained.len()).then_some(RegularizationNotice {
        threshold: EIGEN_FLOOR,
        dropped_eigenvalues: retained.len() - kept,
        retained_dim: kept,
    })
}

/// `‖(Lρ + ρL)/2 − ∂ρ‖_max`.
pub fn lyapunov_residual(rho: &TruncatedDensityOperator, drho: &FockOperator, l: &SLDOperator) -> Result<f64> {
    l.matrix.symmetrized_product(&rho.matrix)?.max_abs_diff(drho)
}

/// `Tr(ρL)`, zero for a valid score.
pub fn score_mean(rho: &TruncatedDensityOperator, l: &SLDOperator) -> Result<Complex64> {
    rho.matrix.trace_product(&l.matrix)
}

/// `1/(n₀(n₀+1))`.
pub fn qfi_single_mode(n0: f64) -> Result<f64> {
    check_n0(n0)?;
    Ok(1.0 / (n0 * (n0 + 1.0)))
}

/// `Re Tr(ρL²)`; an imaginary part above round-off is an error.
pub fn qfi_numeric(rho: &TruncatedDensityOperator, l: &SLDOperator) -> Result<f64> {
    if rho.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: l.dim(),
        });
    }
    let l2 = l.matrix.matmul(&l.matrix)?;
    let v = rho.matrix.trace_product(&l2)?;
    if v.im.abs() > IMAG_RESIDUE_TOL * v.re.abs().max(1.0) {
        return Err(Error::Numerical(format!("Tr(ρL²) has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

/// `ΔνT/(n₀(n₀+1))`, additivity over the `ΔνT` in-band modes.
pub fn qfi_total(spec: &SourceSpec) -> Result<f64> {
    Ok(spec.time_bandwidth() * qfi_single_mode(spec.n0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub qfi_single: f64,
    pub qfi_total: f64,
    pub var_bound: f64,
    pub rel_sens_bound: f64,
    pub temp_rel_sens_bound: f64,
}

pub fn bound_report(spec: &SourceSpec) -> Result<BoundReport> {
    let n0 = spec.n0;
    let b = spec.time_bandwidth();
    let qfi_single = qfi_single_mode(n0)?;
    Ok(BoundReport {
        qfi_single,
        qfi_total: b * qfi_single,
        var_bound: n0 * (n0 + 1.0) / b,
        rel_sens_bound: (n0 + 1.0) / (n0 * b),
        temp_rel_sens_bound: (1.0 + spec.energy_ratio()) / b,
    })
}

/// Closed-form relative sensitivities of the three published schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetitorCurves {
    /// `1/(ΔνT)`.
    pub radiometer: f64,
    /// `5T_samp/T + 1/(n₀ΔνT)`.
    pub lkd_claimed: f64,
    /// `(n₀+1)/(n₀ΔνT)`.
    pub zmuidzinas: f64,
    pub t_samp: f64,
    /// `0 < T_samp < τc`, where the claimed curve is stated to apply.
    pub lkd_regime_valid: bool,
    /// Whether the claimed curve lies below the bound.
    pub lkd_below_bound: bool,
    /// Bound divided by the claimed curve.
    pub lkd_gap_factor: f64,
}

pub fn competitor_sensitivities(spec: &SourceSpec, t_samp: f64) -> Result<CompetitorCurves> {
    let n0 = spec.n0;
    let b = spec.time_bandwidth();
    let bound = bound_report(spec)?.rel_sens_bound;
    let lkd_claimed = 5.0 * t_samp / spec.t_obs + 1.0 / (n0 * b);
    Ok(CompetitorCurves {
        radiometer: 1.0 / b,
        lkd_claimed,
        zmuidzinas: (n0 + 1.0) / (n0 * b),
        t_samp,
        lkd_regime_valid: t_samp > 0.0 && t_samp < spec.tau_c,
        lkd_below_bound: lkd_claimed < bound,
        lkd_gap_factor: bound / lkd_claimed,
    })
}

/// Axis swept by [`bound_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxis {
    N0,
    TObs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub n0: f64,
    pub t_obs: f64,
    pub time_bandwidth: f64,
    pub qfi_total: f64,
    pub var_bound: f64,
    pub rel_sens_bound: f64,
    pub temp_rel_sens_bound: f64,
    pub radiometer: f64,
    pub lkd_claimed: Option<f64>,
    pub zmuidzinas: f64,
}

/// Bounds and competitor curves on `points` log-spaced values of one axis.
pub fn bound_grid(
    spec: &SourceSpec,
    axis: GridAxis,
    lo: f64,
    hi: f64,
    points: usize,
    t_samp: Option<f64>,
) -> Result<Vec<GridRow>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::Config(format!(
            "grid needs 0 < lo < hi and at least two points (got {lo}, {hi}, {points})"
        )));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            let x = (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp();
            let s = match axis {
                GridAxis::N0 => spec.with_occupation(x)?,
                GridAxis::TObs => spec.with_observation_time(x)?,
            };
            grid_row(&s, t_samp)
        })
        .collect()
}

/// Bounds and competitor curves at a single source.
pub fn grid_row(spec: &SourceSpec, t_samp: Option<f64>) -> Result<GridRow> {
    let b = bound_report(spec)?;
    let c = competitor_sensitivities(spec, t_samp.unwrap_or(0.0))?;
    Ok(GridRow {
        n0: spec.n0,
        t_obs: spec.t_obs,
        time_bandwidth: spec.time_bandwidth(),
        qfi_total: b.qfi_total,
        var_bound: b.var_bound,
        rel_sens_bound: b.rel_sens_bound,
        temp_rel_sens_bound: b.temp_rel_sens_bound,
        radiometer: c.radiometer,
        lkd_claimed: t_samp.map(|_| c.lkd_claimed),
        zmuidzinas: c.zmuidzinas,
    })
}

/// A log-spaced sweep request for [`bound_summary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    pub axis: GridAxis,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub spec: SourceSpec,
    pub bound: BoundReport,
    /// Present when a sampling interval is given.
    pub competitors: Option<CompetitorCurves>,
    /// The requested sweep, or the single source when none is requested.
    pub grid: Vec<GridRow>,
}

pub fn bound_summary(spec: &SourceSpec, t_samp: Option<f64>, grid: Option<&GridRequest>) -> Result<BoundSummary> {
    if let Some(t) = t_samp {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("T_samp must be positive, got {t}")));
        }
    }
    Ok(BoundSummary {
        spec: *spec,
        bound: bound_report(spec)?,
        competitors: t_samp.map(|t| competitor_sensitivities(spec, t)).transpose()?,
        grid: match grid {
            Some(g) => bound_grid(spec, g.axis, g.lo, g.hi, g.points, t_samp)?,
            None => vec![grid_row(spec, t_samp)?],
        },
    })
}

/// How the Fock cutoff is chosen for an oracle check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffPolicy {
    /// Floor rule plus doubling until the tail mass is below 10⁻¹².
    Recommended,
    /// Exactly this cutoff, below the floor if asked.
    Fixed(usize),
}

/// Analytic against numeric QFI and SLD for one occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiCheckRow {
    pub n0: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    pub qfi_analytic: f64,
    pub qfi_numeric: f64,
    pub qfi_rel_error: f64,
    pub sld_residual: f64,
    /// Max entrywise |L_numeric − L_analytic| on the retained eigenspace.
    pub sld_max_deviation: f64,
    pub score_mean: f64,
    pub drho_trace: f64,
    pub dropped_eigenvalues: usize,
    pub pass: bool,
}

pub fn qfi_check(n0: f64, policy: CutoffPolicy) -> Result<QfiCheckRow> {
    check_n0(n0)?;
    let cutoff = match policy {
        CutoffPolicy::Recommended => recommended_cutoff(n0)?,
        CutoffPolicy::Fixed(d) => d,
    };
    let rho = match policy {
        CutoffPolicy::Recommended => thermal_density_operator(n0, cutoff)?,
        CutoffPolicy::Fixed(_) => thermal_density_truncated(n0, cutoff)?,
    };
    let drho = drho_dn0(n0, cutoff)?;
    let l = sld_numeric(&rho, &drho)?;
    let analytic = sld_analytic(n0, cutoff)?;
    let qfi_numeric = qfi_numeric(&rho, &l)?;
    let qfi_analytic = qfi_single_mode(n0)?;
    let qfi_rel_error = (qfi_numeric - qfi_analytic).abs() / qfi_analytic;
    let sld_residual = lyapunov_residual(&rho, &drho, &l)?;
    let sld_max_deviation = (0..cutoff)
        .filter(|&k| l.retained[k])
        .map(|k| (l.matrix.entry(k, k) - analytic.matrix.entry(k, k)).norm())
        .fold(0.0, f64::max);
    let score_mean = score_mean(&rho, &l)?.norm();
    let drho_trace = drho.trace().norm();
    let pass = qfi_rel_error <= QFI_REL_TOL
        && sld_max_deviation <= SLD_ENTRY_TOL
        && sld_residual < LYAPUNOV_TOL
        && score_mean <= SCORE_TOL
        && drho_trace <= SCORE_TOL;
    Ok(QfiCheckRow {
        n0,
        cutoff,
        tail_mass: rho.tail_mass,
        qfi_analytic,
        qfi_numeric,
        qfi_rel_error,
        sld_residual,
        sld_max_deviation,
        score_mean,
        drho_trace,
        dropped_eigenvalues: l.notice.map_or(0, |n| n.dropped_eigenvalues),
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiCheckReport {
    pub cutoff_policy: CutoffPolicy,
    pub rows: Vec<QfiCheckRow>,
    pub all_pass: bool,
}

pub fn qfi_check_report(n0s: &[f64], policy: CutoffPolicy) -> Result<QfiCheckReport> {
    if n0s.is_empty() {
        return Err(Error::Config("no occupations to check".into()));
    }
    let rows = n0s.iter().map(|&n0| qfi_check(n0, policy)).collect::<Result<Vec<_>>>()?;
    Ok(QfiCheckReport {
        cutoff_policy: policy,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::HermitianEigen;
    use crate::physics::{BOLTZMANN, PLANCK};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n0: f64, b: f64) -> SourceSpec {
        SourceSpec::from_occupation(n0, 1e9, 1e6, b / 1e6).unwrap()
    }

    #[test]
    fn summary_without_grid_has_one_row() {
        let s = bound_summary(&spec(1.0, 100.0), Some(1e-13), None).unwrap();
        assert_eq!(s.grid.len(), 1);
        assert_eq!(s.grid[0].rel_sens_bound, s.bound.rel_sens_bound);
        assert!(s.competitors.is_some());
        assert!(bound_summary(&spec(1.0, 100.0), None, None).unwrap().competitors.is_none());
        assert!(matches!(bound_summary(&spec(1.0, 100.0), Some(0.0), None), Err(Error::Config(_))));
    }

    #[test]
    fn summary_grid_spans_requested_range() {
        let req = GridRequest { axis: GridAxis::N0, lo: 0.1, hi: 1000.0, points: 9 };
        let s = bound_summary(&spec(1.0, 100.0), None, Some(&req)).unwrap();
        assert_eq!(s.grid.len(), 9);
        assert!((s.grid[0].n0 - 0.1).abs() < 1e-12);
        assert!((s.grid[8].n0 - 1000.0).abs() < 1e-9);
        assert!(s.grid.windows(2).all(|w| w[1].rel_sens_bound < w[0].rel_sens_bound));
    }

    #[test]
    fn check_report_collects_rows() {
        let r = qfi_check_report(&[0.5, 2.0], CutoffPolicy::Recommended).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.all_pass);
        assert!(matches!(qfi_check_report(&[], CutoffPolicy::Recommended), Err(Error::Config(_))));
    }

    #[test]
    fn drho_examples() {
        let d = drho_dn0(1.0, 64).unwrap();
        assert_eq!(d.entry(0, 0).re, -0.25);
        let big = drho_dn0(1.0, recommended_cutoff(1.0).unwrap()).unwrap();
        assert!(big.trace().norm() < 1e-10);
        assert!(drho_dn0(0.0, 64).is_err());
        assert!(drho_dn0(-1.0, 64).is_err());
    }

    #[test]
    fn drho_matches_central_difference() {
        for &n0 in &[0.5, 1.0, 5.0] {
            let d = recommended_cutoff(n0).unwrap();
            let exact = drho_dn0(n0, d).unwrap();
            for &h in &[1e-5, 1e-8] {
                let plus = bose_einstein_weights(n0 + h, d);
                let minus = bose_einstein_weights(n0 - h, d);
                for k in 0..d {
                    let fd = (plus[k] - minus[k]) / (2.0 * h);
                    let tol = if h == 1e-5 { 1e-8 } else { 1e-6 };
                    assert!((fd - exact.entry(k, k).re).abs() < tol, "n0={n0} h={h} k={k}");
                }
            }
        }
    }

    #[test]
    fn analytic_sld_examples() {
        let l = sld_analytic(1.0, 64).unwrap();
        assert_eq!(l.matrix.entry(0, 0).re, -0.5);
        assert_eq!(l.matrix.entry(2, 2).re, 0.5);
        let rho = thermal_density_operator(1.0, recommended_cutoff(1.0).unwrap()).unwrap();
        let l = sld_analytic(1.0, rho.dim()).unwrap();
        assert!(score_mean(&rho, &l).unwrap().norm() < 1e-10);
        // both diagonal: the commutator vanishes identically
        let lr = l.matrix.matmul(&rho.matrix).unwrap();
        let rl = rho.matrix.matmul(&l.matrix).unwrap();
        assert_eq!(lr, rl);
    }

    #[test]
    fn numeric_sld_reproduces_analytic() {
        for &n0 in &[0.5, 1.0, 5.0, 20.0, 100.0] {
            let row = qfi_check(n0, CutoffPolicy::Recommended).unwrap();
            assert!(row.pass, "{row:?}");
        }
    }

    fn random_unitary(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        HermitianEigen::new(&h).unwrap().unitary_exp(1.3)
    }

    #[test]
    fn dense_path_is_basis_covariant() {
        // errors scale as ε‖∂ρ‖/λ_min in a rotated basis; keep λ_min ≈ 1e-6
        let n0 = 0.7;
        let d = 16;
        let u = random_unitary(d, 11);
        let rho_diag = thermal_density_truncated(n0, d).unwrap();
        let rotate = |x: &FockOperator| FockOperator::Dense(&u * x.to_dense() * u.adjoint());
        let rho = TruncatedDensityOperator::new(rotate(&rho_diag.matrix), rho_diag.tail_mass).unwrap();
        let drho = rotate(&drho_dn0(n0, d).unwrap());
        let l = sld_numeric(&rho, &drho).unwrap();
        assert!(l.matrix.hermitian_defect() < 1e-12);
        assert!(lyapunov_residual(&rho, &drho, &l).unwrap() < 1e-10);
        // Retained block agrees with the rotated analytic SLD.
        let expect = rotate(&sld_numeric(&rho_diag, &drho_dn0(n0, d).unwrap()).unwrap().matrix);
        assert!(l.matrix.max_abs_diff(&expect).unwrap() < 1e-8);
        let q = qfi_numeric(&rho, &l).unwrap();
        let q_diag = qfi_numeric(&rho_diag, &sld_numeric(&rho_diag, &drho_dn0(n0, d).unwrap()).unwrap()).unwrap();
        assert!((q - q_diag).abs() < 1e-9 * q_diag);
    }

    #[test]
    fn dense_random_state_residual() {
        let d = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        let h = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut drho = (&h + h.adjoint()) * Complex64::new(0.01, 0.0);
        let shift = drho.trace() / Complex64::new(d as f64, 0.0);
        for i in 0..d {
            drho[(i, i)] -= shift;
        }
        let rho = TruncatedDensityOperator::new(FockOperator::Dense(rho), 0.0).unwrap();
        let drho = FockOperator::Dense(drho);
        let l = sld_numeric(&rho, &drho).unwrap();
        assert!(l.notice.is_none());
        assert!(l.matrix.hermitian_defect() < 1e-12);
        assert!(lyapunov_residual(&rho, &drho, &l).unwrap() < 1e-10);
        assert!(score_mean(&rho, &l).unwrap().norm() < 1e-10);
    }

    #[test]
    fn regularization_is_reported() {
        let rho = thermal_density_operator(0.5, 64).unwrap();
        let l = sld_numeric(&rho, &drho_dn0(0.5, 64).unwrap()).unwrap();
        let n = l.notice.unwrap();
        assert!(n.dropped_eigenvalues > 0 && n.retained_dim + n.dropped_eigenvalues == 64);
        assert!(lyapunov_residual(&rho, &drho_dn0(0.5, 64).unwrap(), &l).unwrap() < 1e-10);
    }

    #[test]
    fn qfi_examples() {
        assert_eq!(qfi_single_mode(1.0).unwrap(), 0.5);
        assert!((qfi_single_mode(0.001).unwrap() - 1.0 / (0.001 * 1.001)).abs() < 1e-9);
        assert!((qfi_single_mode(0.001).unwrap() - 999.0).abs() < 0.01);
        assert!(qfi_single_mode(1e-7).is_err());

        let d = recommended_cutoff(1.0).unwrap();
        let rho = thermal_density_operator(1.0, d).unwrap();
        assert!((qfi_numeric(&rho, &sld_analytic(1.0, d).unwrap()).unwrap() - 0.5).abs() < 1e-8);

        let d = recommended_cutoff(1e-3).unwrap();
        let rho = thermal_density_operator(1e-3, d).unwrap();
        let l = sld_numeric(&rho, &drho_dn0(1e-3, d).unwrap()).unwrap();
        let q = qfi_numeric(&rho, &l).unwrap();
        assert!((q / qfi_single_mode(1e-3).unwrap() - 1.0).abs() < 1e-6);

        let zero = SLDOperator {
            matrix: FockOperator::Diagonal(vec![0.0; d]),
            notice: None,
            retained: vec![true; d],
        };
        assert_eq!(qfi_numeric(&rho, &zero).unwrap(), 0.0);
        assert!(qfi_numeric(&rho, &sld_analytic(1e-3, d + 1).unwrap()).is_err());
    }

    #[test]
    fn qfi_over_log_grid() {
        for i in 0..=24 {
            let n0 = 10f64.powf(-3.0 + 6.0 * i as f64 / 24.0);
            let row = qfi_check(n0, CutoffPolicy::Recommended).unwrap();
            assert!(row.qfi_rel_error < 1e-6, "{row:?}");
            assert!(row.score_mean < 1e-10 && row.drho_trace < 1e-10);
        }
    }

    #[test]
    fn tiny_cutoff_fails_the_check() {
        let row = qfi_check(5.0, CutoffPolicy::Fixed(4)).unwrap();
        assert!(!row.pass);
        assert!((row.tail_mass - (5.0f64 / 6.0).powi(4)).abs() < 1e-15);
    }

    #[test]
    fn total_qfi_examples() {
        assert_eq!(qfi_total(&spec(1.0, 100.0)).unwrap(), 50.0);
        assert_eq!(qfi_total(&spec(3.0, 1.0)).unwrap(), qfi_single_mode(3.0).unwrap());
        let s = spec(2.0, 40.0);
        let doubled = s.with_observation_time(2.0 * s.t_obs).unwrap();
        assert_eq!(qfi_total(&doubled).unwrap(), 2.0 * qfi_total(&s).unwrap());
    }

    #[test]
    fn bound_examples() {
        let r = bound_report(&spec(1.0, 100.0)).unwrap();
        assert!((r.var_bound - 0.02).abs() < 1e-15);
        assert!((r.rel_sens_bound - 0.02).abs() < 1e-15);
        assert!((r.rel_sens_bound - r.var_bound / 1.0).abs() < 1e-15);

        // hν₀/kT_s = 0.01 at 1 GHz, ΔνT = 10⁶
        let t_s = PLANCK * 1e9 / (BOLTZMANN * 0.01);
        let s = SourceSpec::from_temperature(t_s, 1e9, 1e6, 1.0).unwrap();
        let r = bound_report(&s).unwrap();
        assert!((r.temp_rel_sens_bound / 1.01e-6 - 1.0).abs() < 1e-12);
        // reparameterization identity under n₀ = kT_s/hν₀
        assert!((r.temp_rel_sens_bound / r.rel_sens_bound - 1.0).abs() < 1e-12);

        let big = bound_report(&spec(1e9, 1e4)).unwrap();
        assert!((big.rel_sens_bound * 1e4 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bound_is_monotone() {
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let r = bound_report(&spec(10f64.powf(-2.0 + i as f64 * 0.03), 64.0)).unwrap();
            assert!(r.rel_sens_bound < last);
            last = r.rel_sens_bound;
        }
        let mut last = f64::INFINITY;
        for b in (1..200).map(|k| k as f64 * 3.0) {
            let r = bound_report(&spec(2.0, b)).unwrap();
            assert!(r.rel_sens_bound < last);
            last = r.rel_sens_bound;
        }
    }

    #[test]
    fn competitor_examples() {
        for &(n0, b) in &[(0.1, 10.0), (1.0, 100.0), (100.0, 1e4)] {
            let s = spec(n0, b);
            let c = competitor_sensitivities(&s, 1e-9 * s.t_obs).unwrap();
            assert_eq!(c.zmuidzinas, bound_report(&s).unwrap().rel_sens_bound);
            // 5T_samp/T = 5e-9 < 1/(ΔνT) for these configurations
            assert!(c.lkd_below_bound);
        }
        let s = spec(100.0, 1e4);
        let c = competitor_sensitivities(&s, 1e-9 * s.t_obs).unwrap();
        assert!((c.lkd_claimed - (1e-6 + 5e-9)).abs() < 1e-18);
        assert!((bound_report(&s).unwrap().rel_sens_bound - 1.01e-4).abs() < 1e-16);
        assert!(c.lkd_gap_factor > 50.0);
        assert!(c.lkd_regime_valid);
        assert!(!competitor_sensitivities(&s, 2.0 * s.tau_c).unwrap().lkd_regime_valid);
    }

    #[test]
    fn grid_rows() {
        let s = spec(1.0, 100.0);
        let rows = bound_grid(&s, GridAxis::N0, 0.1, 1000.0, 50, Some(1e-12)).unwrap();
        assert_eq!(rows.len(), 50);
        assert!(rows.windows(2).all(|w| w[1].rel_sens_bound < w[0].rel_sens_bound));
        let rows = bound_grid(&s, GridAxis::TObs, 1e-4, 1e-2, 10, None).unwrap();
        assert!(rows.windows(2).all(|w| w[1].rel_sens_bound < w[0].rel_sens_bound));
        assert!(rows[0].lkd_claimed.is_none());
        assert!(bound_grid(&s, GridAxis::N0, 1.0, 0.5, 10, None).is_err());
    }
}
