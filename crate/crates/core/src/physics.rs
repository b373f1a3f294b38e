//! Closed-form source physics: occupation numbers, the phase-insensitive
//! correlation kernel, coherence time and temporal mode counting.
//!
//! Everything is SI; occupations are dimensionless photons per mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Exact SI-2019 defining constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub h: f64,
    /// Boltzmann constant, J/K.
    pub k: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        h: 6.626_070_15e-34,
        k: 1.380_649e-23,
    };
}

pub const PLANCK: f64 = PhysicalConstants::SI.h;
pub const BOLTZMANN: f64 = PhysicalConstants::SI.k;

/// Above this value of hν/kT the Planck occupation is reported as zero.
pub const PLANCK_UNDERFLOW_RATIO: f64 = 700.0;
/// Rayleigh-Jeans results are flagged once hν/kT exceeds this.
pub const RAYLEIGH_JEANS_WARN_RATIO: f64 = 0.1;
/// Observation must span this many coherence times to set the validity flag.
pub const LONG_OBSERVATION_RATIO: f64 = 100.0;

const INTEGRAL_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckOccupation {
    pub value: f64,
    /// Set when hν/kT_s > 700 and the value was clamped to zero.
    pub underflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighJeansOccupation {
    pub value: f64,
    /// Set when hν₀/kT_s > 0.1 and the approximation is degraded.
    pub degraded: bool,
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}

/// Dimensionless photon energy hν/kT.
pub fn energy_ratio(nu: f64, t_s: f64) -> Result<f64> {
    require_positive("frequency", nu)?;
    require_positive("source temperature", t_s)?;
    Ok(PLANCK * nu / (BOLTZMANN * t_s))
}

/// Bose-Einstein occupation `1/(exp(hν/kT_s) − 1)`.
pub fn planck_occupation(nu: f64, t_s: f64) -> Result<PlanckOccupation> {
    let x = energy_ratio(nu, t_s)?;
    if x > PLANCK_UNDERFLOW_RATIO {
        return Ok(PlanckOccupation {
            value: 0.0,
            underflow: true,
        });
    }
    Ok(PlanckOccupation {
        value: 1.0 / x.exp_m1(),
        underflow: false,
    })
}

/// Rayleigh-Jeans occupation `kT_s/(hν₀)`.
pub fn rayleigh_jeans_occupation(nu0: f64, t_s: f64) -> Result<RayleighJeansOccupation> {
    let x = energy_ratio(nu0, t_s)?;
    Ok(RayleighJeansOccupation {
        value: BOLTZMANN * t_s / (PLANCK * nu0),
        degraded: x > RAYLEIGH_JEANS_WARN_RATIO,
    })
}

/// Normalized sinc, `sin(πx)/(πx)`, exactly zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Rectangle function: 1 on `|x| ≤ 1/2`, 0 elsewhere.
pub fn rect(x: f64) -> f64 {
    if x.abs() <= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Phase-insensitive correlation `K(τ) = n₀Δν sinc(Δντ) e^{−i2πν₀τ}` of a
/// flat-band thermal field. The phase-sensitive correlation is identically
/// zero for thermal light and has no separate representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationKernel {
    pub n0: f64,
    pub delta_nu: f64,
    pub nu0: f64,
}

impl CorrelationKernel {
    pub fn new(n0: f64, delta_nu: f64, nu0: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::Domain(format!("occupation must be non-negative, got {n0}")));
        }
        require_positive("bandwidth", delta_nu)?;
        require_positive("center frequency", nu0)?;
        Ok(Self { n0, delta_nu, nu0 })
    }

    /// Full kernel including the carrier.
    pub fn eval(&self, tau: f64) -> Result<Complex64> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("lag must be finite, got {tau}")));
        }
        let envelope = self.baseband(tau);
        let phase = TAU * self.nu0 * tau;
        Ok(Complex64::new(envelope * phase.cos(), -envelope * phase.sin()))
    }

    /// Kernel with the carrier factored out; real and even in τ.
    pub fn baseband(&self, tau: f64) -> f64 {
        self.n0 * self.delta_nu * sinc(self.delta_nu * tau)
    }

    /// Phase-sensitive correlation ⟨E(t)E(t')⟩.
    pub fn phase_sensitive(&self, _tau: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    /// First-order coherence g⁽¹⁾(τ) = K(τ)/K(0).
    pub fn coherence(&self, tau: f64) -> Result<Complex64> {
        let k0 = self.n0 * self.delta_nu;
        if k0 == 0.0 {
            return Err(Error::Domain("coherence undefined for a vacuum kernel".into()));
        }
        Ok(self.eval(tau)? / k0)
    }
}

/// Coherence time `τc = 1/Δν` of the flat-band field.
pub fn coherence_time(delta_nu: f64) -> Result<f64> {
    require_positive("bandwidth", delta_nu)?;
    Ok(1.0 / delta_nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCount {
    pub value: u64,
    /// True when Δν·T is an integer (to a relative 1e-9).
    pub exact: bool,
}

/// Rounds `x` to the nearest integer, reporting whether it already was one.
pub(crate) fn nearest_integer(x: f64) -> (f64, bool) {
    let r = x.round();
    let exact = (x - r).abs() <= INTEGRAL_REL_TOL * r.abs().max(1.0);
    (r, exact)
}

/// Number of temporal modes `M = round(Δν·T)`.
pub fn mode_count(delta_nu: f64, t_obs: f64) -> Result<ModeCount> {
    require_positive("bandwidth", delta_nu)?;
    require_positive("observation time", t_obs)?;
    let product = delta_nu * t_obs;
    if product < 1.0 {
        return Err(Error::Domain(format!(
            "time-bandwidth product {product} is below one mode"
        )));
    }
    if product >= 2f64.powi(53) {
        return Err(Error::Domain(format!("time-bandwidth product {product} too large")));
    }
    let (rounded, exact) = nearest_integer(product);
    Ok(ModeCount {
        value: rounded as u64,
        exact,
    })
}

/// Full parameterization of one observation of a filtered thermal source.
///
/// Built from either the source temperature or the occupation; the other is
/// derived through the Rayleigh-Jeans relation `n₀ = kT_s/(hν₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    #[serde(rename = "T_s")]
    pub t_s: f64,
    pub nu0: f64,
    pub delta_nu: f64,
    #[serde(rename = "T_obs")]
    pub t_obs: f64,
    pub n0: f64,
    pub tau_c: f64,
    #[serde(rename = "M")]
    pub modes: ModeCount,
    pub long_observation: bool,
}

impl SourceSpec {
    pub fn from_temperature(t_s: f64, nu0: f64, delta_nu: f64, t_obs: f64) -> Result<Self> {
        let n0 = rayleigh_jeans_occupation(nu0, t_s)?.value;
        Self::assemble(t_s, n0, nu0, delta_nu, t_obs)
    }

    pub fn from_occupation(n0: f64, nu0: f64, delta_nu: f64, t_obs: f64) -> Result<Self> {
        require_positive("occupation", n0)?;
        require_positive("center frequency", nu0)?;
        let t_s = n0 * PLANCK * nu0 / BOLTZMANN;
        Self::assemble(t_s, n0, nu0, delta_nu, t_obs)
    }

    fn assemble(t_s: f64, n0: f64, nu0: f64, delta_nu: f64, t_obs: f64) -> Result<Self> {
        require_positive("source temperature", t_s)?;
        require_positive("occupation", n0)?;
        require_positive("center frequency", nu0)?;
        require_positive("bandwidth", delta_nu)?;
        require_positive("observation time", t_obs)?;
        if delta_nu >= 2.0 * nu0 {
            return Err(Error::Domain(format!(
                "bandwidth {delta_nu} must be below twice the center frequency {nu0}"
            )));
        }
        let tau_c = coherence_time(delta_nu)?;
        let modes = mode_count(delta_nu, t_obs)?;
        Ok(Self {
            t_s,
            nu0,
            delta_nu,
            t_obs,
            n0,
            tau_c,
            modes,
            long_observation: t_obs / tau_c >= LONG_OBSERVATION_RATIO,
        })
    }

    /// Real-valued product Δν·T used by the bound formulas.
    pub fn time_bandwidth(&self) -> f64 {
        self.delta_nu * self.t_obs
    }

    pub fn mode_count(&self) -> usize {
        self.modes.value as usize
    }

    /// hν₀/kT_s for this source.
    pub fn energy_ratio(&self) -> f64 {
        PLANCK * self.nu0 / (BOLTZMANN * self.t_s)
    }

    pub fn kernel(&self) -> CorrelationKernel {
        CorrelationKernel {
            n0: self.n0,
            delta_nu: self.delta_nu,
            nu0: self.nu0,
        }
    }

    /// Same source observed for a different duration.
    pub fn with_observation_time(&self, t_obs: f64) -> Result<Self> {
        Self::assemble(self.t_s, self.n0, self.nu0, self.delta_nu, t_obs)
    }

    /// Same band and duration at a different occupation.
    pub fn with_occupation(&self, n0: f64) -> Result<Self> {
        Self::from_occupation(n0, self.nu0, self.delta_nu, self.t_obs)
    }
}
