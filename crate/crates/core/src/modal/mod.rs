//! Fourier-series temporal modes of the observation window `[−T/2, T/2]`.
//!
//! Mode `m` has frequency `m/T`. Everything runs at baseband: the carrier is
//! factored out and a mode is addressed by its offset `m − ν₀T`.

mod appendix;
mod quadrature;
mod synthesis;

pub use appendix::{
    appendix_check, appendix_row, AppendixCheckConfig, AppendixReport, AppendixRow, DeviationSummary,
    EntryComparison, SynthesisSummary, DEVIATION_LIMIT_CONSTANT,
};

pub use quadrature::{
    modal_covariance_numeric, modal_covariance_table, AppendixQuadratureConfig, ModalCovarianceTable,
    ModalElement,
};
pub use synthesis::{
    project_onto_modes, synthesize_field, EnsembleMoments, FieldRealization, SynthesisPlan,
    DEFAULT_FREQUENCY_OVERSAMPLING,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
pub use crate::gaussian_state::GaussianStateDescriptor;
use crate::gaussian_state::CovBlock;
use crate::physics::{nearest_integer, SourceSpec};

/// Consecutive in-band mode indices `{ν₀T − ⌊M/2⌋, …, ν₀T − ⌊M/2⌋ + M − 1}`.
///
/// For even `M` this is the half-open set `ν₀T − M/2 … ν₀T + M/2 − 1`; odd
/// `M` splits symmetrically around `ν₀T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSet {
    first: i64,
    len: usize,
    nu0_index: i64,
}

impl ModeSet {
    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.len as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `ν₀T`, the index of the carrier mode.
    pub fn nu0_index(&self) -> i64 {
        self.nu0_index
    }

    /// `ΔνT/2`.
    pub fn half_width(&self) -> f64 {
        self.len as f64 / 2.0
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + Clone {
        self.first..self.first + self.len as i64
    }

    pub fn contains(&self, m: i64) -> bool {
        m >= self.first && m <= self.last()
    }

    /// Baseband offset `m − ν₀T` of the i-th mode in the set.
    pub fn offset(&self, i: usize) -> i64 {
        self.first + i as i64 - self.nu0_index
    }

    /// Lenient constructor: rounds ν₀T to the nearest integer.
    pub fn nearest(spec: &SourceSpec) -> Result<Self> {
        let (nu0_index, _) = nearest_integer(spec.nu0 * spec.t_obs);
        Self::from_parts(nu0_index, spec.mode_count())
    }

    fn from_parts(nu0_index: f64, len: usize) -> Result<Self> {
        if nu0_index > i64::MAX as f64 / 2.0 {
            return Err(Error::Domain(format!("carrier index {nu0_index} too large")));
        }
        let nu0_index = nu0_index as i64;
        let first = nu0_index - (len / 2) as i64;
        if first < 0 {
            return Err(Error::Domain("mode set reaches negative frequencies".into()));
        }
        Ok(Self {
            first,
            len,
            nu0_index,
        })
    }
}

/// In-band mode set; ν₀T and ΔνT must both be integers.
pub fn build_mode_set(spec: &SourceSpec) -> Result<ModeSet> {
    let (nu0_index, nu0_exact) = nearest_integer(spec.nu0 * spec.t_obs);
    if !nu0_exact {
        return Err(Error::Config(format!(
            "ν₀T = {} is not an integer",
            spec.nu0 * spec.t_obs
        )));
    }
    if !spec.modes.exact {
        return Err(Error::Config(format!(
            "ΔνT = {} is not an integer",
            spec.time_bandwidth()
        )));
    }
    ModeSet::from_parts(nu0_index, spec.mode_count())
}

/// `ν₀T`, snapped to the nearest integer when it is one up to rounding;
/// the flag reports whether it was.
pub fn carrier_index(spec: &SourceSpec) -> (f64, bool) {
    let raw = spec.nu0 * spec.t_obs;
    match nearest_integer(raw) {
        (k, true) => (k, true),
        _ => (raw, false),
    }
}

/// Whether mode `m` satisfies `|ν₀ − m/T| ≤ Δν/2`.
pub fn in_band(m: i64, spec: &SourceSpec) -> bool {
    let offset = (carrier_index(spec).0 - m as f64).abs();
    let half = 0.5 * spec.time_bandwidth();
    offset <= half + 1e-9 * half.max(1.0)
}

/// Long-observation limit `⟨a†_m a_n⟩ ≈ n₀ rect[(ν₀ − m/T)/Δν] δ_mn`.
pub fn modal_covariance_asymptotic(m: i64, n: i64, spec: &SourceSpec) -> Complex64 {
    if m == n && in_band(m, spec) {
        Complex64::new(spec.n0, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Zero-mean, block-diagonal covariance of the modes in `modes`: in-band
/// blocks are `((2n₀+1)/2)·I₂`, anything else gets the vacuum `I₂/2`.
pub fn assemble_covariance(spec: &SourceSpec, modes: &ModeSet) -> Result<GaussianStateDescriptor> {
    let blocks = modes
        .indices()
        .map(|m| {
            let occ = modal_covariance_asymptotic(m, m, spec).re;
            let v = (2.0 * occ + 1.0) / 2.0;
            CovBlock::new(v, 0.0, 0.0, v)
        })
        .collect::<Vec<_>>();
    GaussianStateDescriptor::new(vec![0.0; 2 * blocks.len()], blocks)
}
