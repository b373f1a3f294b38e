//! Classical Gaussian-field surrogate of the filtered thermal field.
//!
//! A record of length `R = r·T` is built from independent circular complex
//! Gaussian coefficients on the comb `k/R`, flat over the band with half
//! weight on the two edge bins, and transformed to the time domain with one
//! FFT. Because the record is periodic in `R`, the circular autocorrelation
//! of the ensemble is exactly `n₀Δν` at lag 0 and exactly zero at lag `1/Δν`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::{carrier_index, ModeSet};
use crate::error::{Error, Result};
use crate::physics::{nearest_integer, SourceSpec};
use crate::rng::{Domain, StreamFactory};
use crate::stats::{BootstrapSpread, BootstrapWeights};

/// Record length in units of the observation window.
pub const DEFAULT_FREQUENCY_OVERSAMPLING: usize = 8;
/// Samples per coherence time used when no spacing is requested.
pub const DEFAULT_SAMPLES_PER_COHERENCE_TIME: f64 = 8.0;
/// Minimum samples per coherence time.
pub const MIN_SAMPLES_PER_COHERENCE_TIME: f64 = 4.0;
/// Guard band beyond the window, in coherence times.
pub const GUARD_COHERENCE_TIMES: f64 = 10.0;

/// Sampled complex baseband envelope, in √(photons/s).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
    /// `Σ|c_k|²` of the coefficients this record was built from.
    pub spectral_power: f64,
}

impl FieldRealization {
    pub fn record_length(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Time-averaged `|B(t)|²` over the full periodic record.
    pub fn average_power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Relative mismatch between time-domain and spectral power.
    pub fn parseval_defect(&self) -> f64 {
        (self.average_power() - self.spectral_power).abs() / self.spectral_power
    }

    /// Circular estimate of `⟨B*(t)B(t+lag·dt)⟩` from one record.
    pub fn circular_autocorrelation(&self, lag: usize) -> Complex64 {
        let n = self.samples.len();
        let sum: Complex64 = (0..n)
            .map(|j| self.samples[j].conj() * self.samples[(j + lag) % n])
            .sum();
        sum / n as f64
    }
}

/// Precomputed frequency comb and transforms for repeated synthesis.
pub struct SynthesisPlan {
    n0: f64,
    t_obs: f64,
    dt: f64,
    window: usize,
    len: usize,
    /// (FFT slot, standard deviation per real component, window phase)
    bins: Vec<(usize, f64, Complex64)>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SynthesisPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SynthesisPlan")
            .field("dt", &self.dt)
            .field("window", &self.window)
            .field("len", &self.len)
            .field("bins", &self.bins.len())
            .finish()
    }
}

impl SynthesisPlan {
    /// `dt` is snapped down so that `T/dt` is an integer. The record spans
    /// `oversampling` windows and starts at `−T/2`.
    pub fn new(spec: &SourceSpec, dt: f64, oversampling: usize) -> Result<Self> {
        let tau_c = 1.0 / spec.delta_nu;
        if !(dt > 0.0) || dt > tau_c / MIN_SAMPLES_PER_COHERENCE_TIME * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "sample spacing {dt} s exceeds 1/(4Δν) = {} s",
                tau_c / MIN_SAMPLES_PER_COHERENCE_TIME
            )));
        }
        let record = oversampling as f64 * spec.t_obs;
        if oversampling < 2 || record < spec.t_obs + GUARD_COHERENCE_TIMES * tau_c {
            return Err(Error::Config(format!(
                "record of {record} s is shorter than T + {GUARD_COHERENCE_TIMES}τc"
            )));
        }
        let (exact, close) = nearest_integer(spec.t_obs / dt);
        let window = if close { exact as usize } else { (spec.t_obs / dt).ceil() as usize };
        let dt = spec.t_obs / window as f64;
        let len = oversampling * window;

        // band edge k_b = r·ΔνT/2 on the comb of spacing 1/R
        let half_band = 0.5 * oversampling as f64 * spec.time_bandwidth();
        let (edge, edge_on_grid) = nearest_integer(half_band);
        let kb = if edge_on_grid { edge as i64 } else { half_band.floor() as i64 };
        let unit_var = spec.n0 / record;
        let bins = (-kb..=kb)
            .map(|k| {
                let w = if edge_on_grid && k.abs() == kb { 0.5 } else { 1.0 };
                let slot = k.rem_euclid(len as i64) as usize;
                // e^{−i2πk t0/R} with t0 = −T/2
                let phase = Complex64::from_polar(1.0, PI * k as f64 / oversampling as f64);
                (slot, (0.5 * w * unit_var).sqrt(), phase)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(Self {
            n0: spec.n0,
            t_obs: spec.t_obs,
            dt,
            window,
            len,
            bins,
            fft,
        })
    }

    /// Default plan: eight samples per coherence time, eight windows long.
    pub fn with_defaults(spec: &SourceSpec) -> Result<Self> {
        let dt = 1.0 / (DEFAULT_SAMPLES_PER_COHERENCE_TIME * spec.delta_nu);
        Self::new(spec, dt, DEFAULT_FREQUENCY_OVERSAMPLING)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        -0.5 * self.t_obs
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Samples spanning the observation window, endpoints excluded.
    pub fn window_samples(&self) -> usize {
        self.window
    }

    pub fn realize<R: Rng>(&self, rng: &mut R) -> FieldRealization {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut spectral_power = 0.0;
        for &(slot, sd, phase) in &self.bins {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(sd * re, sd * im);
            spectral_power += c.norm_sqr();
            buf[slot] = c * phase;
        }
        self.fft.process(&mut buf);
        FieldRealization {
            samples: buf,
            dt: self.dt,
            t0: self.t0(),
            spectral_power,
        }
    }
}

/// One realization with the default record length.
pub fn synthesize_field<R: Rng>(spec: &SourceSpec, dt: f64, rng: &mut R) -> Result<FieldRealization> {
    let r = DEFAULT_FREQUENCY_OVERSAMPLING.max((1.0 + GUARD_COHERENCE_TIMES / spec.time_bandwidth()).ceil() as usize);
    Ok(SynthesisPlan::new(spec, dt, r)?.realize(rng))
}

/// Reusable modal projector for records of one sample spacing.
pub struct Projector {
    start: usize,
    window: usize,
    scale: f64,
    /// Baseband offsets `m − ν₀T`.
    offsets: Vec<f64>,
    ifft: Option<Arc<dyn Fft<f64>>>,
}

impl Projector {
    pub fn new(field: &FieldRealization, modes: &ModeSet, spec: &SourceSpec) -> Result<Self> {
        let t = spec.t_obs;
        let (window, w_ok) = nearest_integer(t / field.dt);
        let (start, s_ok) = nearest_integer((-0.5 * t - field.t0) / field.dt);
        if !w_ok || !s_ok || start < 0.0 {
            return Err(Error::Config(format!(
                "record (t0 = {}, dt = {}) is not aligned with the window [−T/2, T/2]",
                field.t0, field.dt
            )));
        }
        let (window, start) = (window as usize, start as usize);
        if field.samples.len() < start + window + 1 {
            return Err(Error::Config("record does not cover [−T/2, T/2]".into()));
        }
        let (carrier, integral) = carrier_index(spec);
        let offsets = modes.indices().map(|m| m as f64 - carrier).collect();
        let ifft = integral.then(|| FftPlanner::new().plan_fft_inverse(window));
        Ok(Self {
            start,
            window,
            scale: field.dt / t.sqrt(),
            offsets,
            ifft,
        })
    }

    /// Trapezoid-rule `a_m = ∫ B(t) e^{i2π(m−ν₀T)t/T} dt/√T`.
    pub fn project(&self, field: &FieldRealization) -> Vec<Complex64> {
        let s = &field.samples[self.start..=self.start + self.window];
        let k = self.window;
        match &self.ifft {
            Some(ifft) => {
                let mut y: Vec<Complex64> = s[..k].to_vec();
                y[0] = 0.5 * (s[0] + s[k]);
                ifft.process(&mut y);
                self.offsets
                    .iter()
                    .map(|&j| {
                        let j = j as i64;
                        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        y[j.rem_euclid(k as i64) as usize] * (sign * self.scale)
                    })
                    .collect()
            }
            None => self
                .offsets
                .iter()
                .map(|&j| {
                    let sum: Complex64 = (0..=k)
                        .map(|q| {
                            let w = if q == 0 || q == k { 0.5 } else { 1.0 };
                            let arg = 2.0 * PI * j * (q as f64 / k as f64 - 0.5);
                            s[q] * Complex64::from_polar(w, arg)
                        })
                        .sum();
                    sum * self.scale
                })
                .collect(),
        }
    }
}

/// Discrete approximation of the modal annihilation amplitudes.
pub fn project_onto_modes(field: &FieldRealization, modes: &ModeSet, spec: &SourceSpec) -> Result<Vec<Complex64>> {
    Ok(Projector::new(field, modes, spec)?.project(field))
}

/// Per-realization statistics of a synthesized ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMoments {
    pub realizations: usize,
    pub mode_count: usize,
    /// Row `r` holds the projected amplitudes of realization `r`.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// Window-averaged sample mean of each realization.
    pub sample_means: Vec<Complex64>,
    /// Circular autocorrelation of each realization at each requested lag.
    pub autocorrelations: Vec<Vec<Complex64>>,
    pub lags: Vec<usize>,
    pub dt: f64,
    pub max_parseval_defect: f64,
    pub master_seed: u64,
}

/// Summary of one estimated moment against its bootstrap spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub re: f64,
    pub im: f64,
    pub sigma_re: f64,
    pub sigma_im: f64,
}

impl SynthesisPlan {
    /// Synthesizes and projects `realizations` records, realization `r` drawn
    /// from its own substream; the result does not depend on thread count.
    pub fn ensemble(
        &self,
        spec: &SourceSpec,
        modes: &ModeSet,
        realizations: usize,
        master_seed: u64,
        lags: &[usize],
    ) -> Result<EnsembleMoments> {
        let factory = StreamFactory::new(master_seed, Domain::Synthesis);
        let probe = FieldRealization {
            samples: vec![Complex64::new(0.0, 0.0); self.len],
            dt: self.dt,
            t0: self.t0(),
            spectral_power: 1.0,
        };
        let projector = Projector::new(&probe, modes, spec)?;
        let window = self.window;
        let start = projector.start;
        let rows: Vec<_> = (0..realizations)
            .into_par_iter()
            .map(|r| {
                let field = self.realize(&mut factory.stream(r as u64));
                let a = projector.project(&field);
                let mean = field.samples[start..start + window].iter().sum::<Complex64>() / window as f64;
                let ac = lags.iter().map(|&l| field.circular_autocorrelation(l)).collect::<Vec<_>>();
                (a, mean, ac, field.parseval_defect())
            })
            .collect();
        let mut out = EnsembleMoments {
            realizations,
            mode_count: modes.len(),
            amplitudes: Vec::with_capacity(realizations),
            sample_means: Vec::with_capacity(realizations),
            autocorrelations: Vec::with_capacity(realizations),
            lags: lags.to_vec(),
            dt: self.dt,
            max_parseval_defect: 0.0,
            master_seed,
        };
        for (a, mean, ac, defect) in rows {
            out.amplitudes.push(a);
            out.sample_means.push(mean);
            out.autocorrelations.push(ac);
            out.max_parseval_defect = out.max_parseval_defect.max(defect);
        }
        Ok(out)
    }
}

impl EnsembleMoments {
    fn weights(&self, stream: u64) -> BootstrapWeights {
        let factory = StreamFactory::new(self.master_seed, Domain::Bootstrap);
        BootstrapWeights::new(self.realizations, crate::stats::BOOTSTRAP_RESAMPLES, &mut factory.stream(stream))
    }

    fn estimate(&self, weights: &BootstrapWeights, values: impl Fn(usize) -> Complex64) -> MomentEstimate {
        let n = self.realizations;
        let data = DMatrix::from_fn(n, 2, |r, c| {
            let z = values(r);
            if c == 0 {
                z.re
            } else {
                z.im
            }
        });
        let spreads = weights.mean_spreads(&data);
        let (re, im) = (data.column(0).mean(), data.column(1).mean());
        MomentEstimate {
            re,
            im,
            sigma_re: spreads[0].sigma,
            sigma_im: spreads[1].sigma,
        }
    }

    /// Ensemble mean of `conj(a_i)·a_k`.
    pub fn cross_moment(&self, i: usize, k: usize) -> Complex64 {
        self.amplitudes.iter().map(|a| a[i].conj() * a[k]).sum::<Complex64>() / self.realizations as f64
    }

    /// Ensemble mean of `a_i·a_k`.
    pub fn pair_moment(&self, i: usize, k: usize) -> Complex64 {
        self.amplitudes.iter().map(|a| a[i] * a[k]).sum::<Complex64>() / self.realizations as f64
    }

    /// Empirical `⟨a†_i a_k⟩` matrix.
    pub fn cross_matrix(&self) -> DMatrix<Complex64> {
        let m = self.mode_count;
        let mut acc = DMatrix::<Complex64>::zeros(m, m);
        for a in &self.amplitudes {
            for i in 0..m {
                let ci = a[i].conj();
                for k in 0..m {
                    acc[(i, k)] += ci * a[k];
                }
            }
        }
        acc / Complex64::new(self.realizations as f64, 0.0)
    }

    pub fn cross_estimate(&self, i: usize, k: usize) -> MomentEstimate {
        let w = self.weights(1 + (i * self.mode_count + k) as u64);
        self.estimate(&w, |r| self.amplitudes[r][i].conj() * self.amplitudes[r][k])
    }

    /// Bootstrap estimates of `mean(a_i a_k)` for every `i ≤ k`, row-major.
    pub fn pair_estimates(&self) -> Vec<((usize, usize), MomentEstimate)> {
        let m = self.mode_count;
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |k| (i, k))).collect();
        let weights = self.weights(0);
        let n = self.realizations;
        let data = DMatrix::from_fn(n, 2 * pairs.len(), |r, c| {
            let (i, k) = pairs[c / 2];
            let z = self.amplitudes[r][i] * self.amplitudes[r][k];
            if c % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        let spreads: Vec<BootstrapSpread> = weights.mean_spreads(&data);
        pairs
            .iter()
            .enumerate()
            .map(|(p, &pair)| {
                (
                    pair,
                    MomentEstimate {
                        re: data.column(2 * p).mean(),
                        im: data.column(2 * p + 1).mean(),
                        sigma_re: spreads[2 * p].sigma,
                        sigma_im: spreads[2 * p + 1].sigma,
                    },
                )
            })
            .collect()
    }

    pub fn autocorrelation_estimate(&self, lag_index: usize) -> MomentEstimate {
        let w = self.weights(u64::MAX - 1 - lag_index as u64);
        self.estimate(&w, |r| self.autocorrelations[r][lag_index])
    }

    /// Mean of the window-averaged samples with its standard error.
    pub fn sample_mean_estimate(&self) -> MomentEstimate {
        let n = self.realizations as f64;
        let re: Vec<f64> = self.sample_means.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.sample_means.iter().map(|z| z.im).collect();
        MomentEstimate {
            re: crate::stats::mean(&re),
            im: crate::stats::mean(&im),
            sigma_re: (crate::stats::variance(&re) / n).sqrt(),
            sigma_im: (crate::stats::variance(&im) / n).sqrt(),
        }
    }
}
