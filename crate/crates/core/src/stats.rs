//! Sample statistics and percentile bootstrap.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Resamples used for every Monte Carlo error bar.
pub const BOOTSTRAP_RESAMPLES: usize = 500;
/// Agreement threshold, in bootstrap standard deviations.
pub const SIGMA_THRESHOLD: f64 = 3.0;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Raw moment `E[x^k]` of a sample.
pub fn raw_moment(x: &[f64], k: i32) -> f64 {
    x.iter().map(|v| v.powi(k)).sum::<f64>() / x.len() as f64
}

/// Spread of one statistic's bootstrap replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpread {
    /// Standard deviation of the replicates.
    pub sigma: f64,
    /// 2.5th percentile of the replicates.
    pub ci_low: f64,
    /// 97.5th percentile of the replicates.
    pub ci_high: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Percentile bootstrap of `K` statistics computed from the same resamples.
pub fn bootstrap<T: Copy, const K: usize, R: Rng>(
    data: &[T],
    resamples: usize,
    rng: &mut R,
    statistic: impl Fn(&[T]) -> [f64; K],
) -> [BootstrapSpread; K] {
    assert!(data.len() >= 2 && resamples >= 2, "bootstrap needs at least two samples");
    let n = data.len();
    let mut buffer: Vec<T> = Vec::with_capacity(n);
    let mut replicates: Vec<[f64; K]> = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        buffer.clear();
        buffer.extend((0..n).map(|_| data[rng.random_range(0..n)]));
        replicates.push(statistic(&buffer));
    }
    std::array::from_fn(|k| spread(replicates.iter().map(|r| r[k]).collect()))
}

/// Multinomial resample counts shared by many statistics of one sample.
///
/// Row `b` holds how often each observation appears in resample `b`, so the
/// bootstrap replicates of every column mean come out of one matrix product.
#[derive(Debug, Clone)]
pub struct BootstrapWeights {
    counts: DMatrix<f64>,
}

impl BootstrapWeights {
    pub fn new<R: Rng>(n: usize, resamples: usize, rng: &mut R) -> Self {
        assert!(n >= 2 && resamples >= 2, "bootstrap needs at least two samples");
        let mut counts = DMatrix::zeros(resamples, n);
        for b in 0..resamples {
            for _ in 0..n {
                counts[(b, rng.random_range(0..n))] += 1.0;
            }
        }
        Self { counts }
    }

    pub fn resamples(&self) -> usize {
        self.counts.nrows()
    }

    /// Spread of the column means of `data` (observations × statistics).
    pub fn mean_spreads(&self, data: &DMatrix<f64>) -> Vec<BootstrapSpread> {
        const BLOCK: usize = 256;
        let n = self.counts.ncols() as f64;
        let mut out = Vec::with_capacity(data.ncols());
        for start in (0..data.ncols()).step_by(BLOCK) {
            let width = BLOCK.min(data.ncols() - start);
            let replicates = &self.counts * data.columns(start, width) / n;
            for c in 0..width {
                out.push(spread(replicates.column(c).iter().copied().collect()));
            }
        }
        out
    }
}

fn spread(mut column: Vec<f64>) -> BootstrapSpread {
    let sigma = variance(&column).sqrt();
    column.sort_by(f64::total_cmp);
    BootstrapSpread {
        sigma,
        ci_low: percentile(&column, 0.025),
        ci_high: percentile(&column, 0.975),
    }
}

/// `|observed − expected| ≤ threshold·σ`.
pub fn within_sigma(observed: f64, expected: f64, sigma: f64, threshold: f64) -> bool {
    (observed - expected).abs() <= threshold * sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, StreamFactory};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn moments_of_known_sample() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(raw_moment(&x, 2), 7.5);
    }

    #[test]
    fn bootstrap_sigma_of_mean_tracks_standard_error() {
        let f = StreamFactory::new(1, Domain::Auxiliary);
        let mut rng = f.stream(0);
        let x: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut brng = f.stream(1);
        let [s] = bootstrap(&x, BOOTSTRAP_RESAMPLES, &mut brng, |d| [mean(d)]);
        let se = (variance(&x) / x.len() as f64).sqrt();
        assert!((s.sigma / se - 1.0).abs() < 0.15, "{} vs {}", s.sigma, se);
        assert!(s.ci_low < mean(&x) && mean(&x) < s.ci_high);
    }

    #[test]
    fn weighted_bootstrap_matches_resampling_semantics() {
        let f = StreamFactory::new(2, Domain::Auxiliary);
        let mut rng = f.stream(0);
        let x: Vec<f64> = (0..3000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let data = DMatrix::from_fn(x.len(), 2, |r, c| if c == 0 { x[r] } else { 2.0 * x[r] });
        let w = BootstrapWeights::new(x.len(), BOOTSTRAP_RESAMPLES, &mut f.stream(1));
        let s = w.mean_spreads(&data);
        let se = (variance(&x) / x.len() as f64).sqrt();
        assert!((s[0].sigma / se - 1.0).abs() < 0.15);
        assert!((s[1].sigma - 2.0 * s[0].sigma).abs() < 1e-12);
        assert_eq!(w.resamples(), BOOTSTRAP_RESAMPLES);
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 0.125), 0.5);
    }
}
