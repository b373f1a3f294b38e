//! Direct quadrature of the modal covariance double integral.
//!
//! With `B = ΔνT`, `d = m − n` and `φ = ν₀T − (m+n)/2`, the symmetry of the
//! integration region folds the integral onto the real form
//!
//! ```text
//! ⟨a†_m a_n⟩ = 2 n₀ B (−1)^d ∫₀¹ cos(π d v) J(v) dv,
//! J(v) = ∫₀ᵛ sinc(B s) cos(2π φ s) ds,
//! ```
//!
//! where `v = 1 − |ζ|/T` and `s = τ/T`. The strip `v < c/B` is where the
//! inner range is shorter than `c` coherence times; its contribution is
//! reported separately as the edge part.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

use super::{carrier_index, ModeSet};
use crate::error::{Error, Result};
use crate::physics::{sinc, SourceSpec};
use crate::quadrature::GaussLegendre;

const GL_ORDER: usize = 8;
const MIN_PANELS: usize = 32;
/// Panels per oscillation of the integrand at the first level.
const PANELS_PER_CYCLE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixQuadratureConfig {
    /// Split parameter: the edge strip is `c` coherence times wide.
    pub c: f64,
    pub panels_zeta: usize,
    pub panels_tau: usize,
    pub rtol: f64,
    pub max_doublings: u32,
}

fn default_rtol() -> f64 {
    1e-4
}

fn default_doublings() -> u32 {
    8
}

impl Default for AppendixQuadratureConfig {
    fn default() -> Self {
        Self {
            c: 5.0,
            panels_zeta: MIN_PANELS,
            panels_tau: MIN_PANELS,
            rtol: default_rtol(),
            max_doublings: default_doublings(),
        }
    }
}

impl AppendixQuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(Error::Config(format!("split parameter c = {} must be ≥ 1", self.c)));
        }
        if self.panels_zeta < MIN_PANELS || self.panels_tau < MIN_PANELS {
            return Err(Error::Config(format!(
                "panel counts ({}, {}) must be ≥ {MIN_PANELS}",
                self.panels_zeta, self.panels_tau
            )));
        }
        if !(self.rtol > 0.0) {
            return Err(Error::Config("rtol must be positive".into()));
        }
        Ok(())
    }
}

/// One converged covariance element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModalElement {
    pub value: Complex64,
    /// Contribution of the two edge strips `|ζ| > T − cτc`.
    pub edge_part: f64,
    /// `2·n₀c²τc/T`, the sum of the two edge-term bounds.
    pub edge_bound: f64,
    /// `|I_k − I_{k−1}|` at the accepted level.
    pub error_estimate: f64,
    pub panels_tau: usize,
    pub panels_zeta: usize,
}

#[derive(Debug, Clone, Copy)]
struct Level {
    inner: usize,
    outer_edge: usize,
    outer_core: usize,
}

impl Level {
    fn doubled(self) -> Self {
        Self {
            inner: self.inner * 2,
            outer_edge: self.outer_edge * 2,
            outer_core: self.outer_core * 2,
        }
    }

    fn outer_total(&self) -> usize {
        self.outer_edge + self.outer_core
    }
}

struct Problem {
    b: f64,
    v_edge: f64,
    gl: GaussLegendre,
}

struct OuterNodes {
    v: Vec<f64>,
    w: Vec<f64>,
    edge: Vec<bool>,
}

impl Problem {
    fn new(spec: &SourceSpec, cfg: &AppendixQuadratureConfig) -> Self {
        let b = spec.time_bandwidth();
        Self {
            b,
            v_edge: (cfg.c / b).min(1.0),
            gl: GaussLegendre::new(GL_ORDER),
        }
    }

    fn first_level(&self, cfg: &AppendixQuadratureConfig, max_phi: f64, max_d: f64) -> Level {
        let cycles = 0.5 * self.b + max_phi;
        let inner = cfg.panels_tau.max((PANELS_PER_CYCLE * cycles).ceil() as usize);
        let outer = cfg
            .panels_zeta
            .max((PANELS_PER_CYCLE * (cycles + 0.5 * max_d)).ceil() as usize);
        let outer_edge = ((outer as f64 * self.v_edge).ceil() as usize).max(4);
        let outer_core = if self.v_edge < 1.0 {
            ((outer as f64 * (1.0 - self.v_edge)).ceil() as usize).max(4)
        } else {
            0
        };
        Level {
            inner,
            outer_edge,
            outer_core,
        }
    }

    fn outer_nodes(&self, level: Level) -> OuterNodes {
        let mut v = Vec::with_capacity(level.outer_total() * GL_ORDER);
        let mut w = Vec::with_capacity(v.capacity());
        let mut edge = Vec::with_capacity(v.capacity());
        let mut push = |a: f64, b: f64, panels: usize, is_edge: bool| {
            let h = (b - a) / panels as f64;
            for j in 0..panels {
                let lo = a + j as f64 * h;
                for (x, wx) in self.gl.on(lo, lo + h) {
                    v.push(x);
                    w.push(wx);
                    edge.push(is_edge);
                }
            }
        };
        push(0.0, self.v_edge, level.outer_edge, true);
        if level.outer_core > 0 {
            push(self.v_edge, 1.0, level.outer_core, false);
        }
        OuterNodes { v, w, edge }
    }

    /// J(v) at every outer node for one value of φ.
    fn inner_table(&self, phi: f64, panels: usize, nodes: &OuterNodes) -> Vec<f64> {
        let b = self.b;
        let f = |s: f64| sinc(b * s) * (2.0 * PI * phi * s).cos();
        let h = 1.0 / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..panels {
            let lo = j as f64 * h;
            acc += self.gl.integrate(lo, lo + h, f);
            cumulative.push(acc);
        }
        nodes
            .v
            .iter()
            .map(|&v| {
                let j = ((v / h).floor() as usize).min(panels - 1);
                let lo = j as f64 * h;
                cumulative[j] + self.gl.integrate(lo, v, f)
            })
            .collect()
    }

    /// `(full, edge)` outer integrals for each `d`, before the prefactor.
    fn outer(&self, j: &[f64], nodes: &OuterNodes, d: i64) -> (f64, f64) {
        let mut full = 0.0;
        let mut edge = 0.0;
        for k in 0..j.len() {
            let term = nodes.w[k] * (PI * d as f64 * nodes.v[k]).cos() * j[k];
            full += term;
            if nodes.edge[k] {
                edge += term;
            }
        }
        (full, edge)
    }
}

fn phi_of(spec: &SourceSpec, m: i64, n: i64) -> f64 {
    carrier_index(spec).0 - 0.5 * (m + n) as f64
}

fn parity(d: i64) -> f64 {
    if d.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨a†_m a_n⟩` by composite Gauss-Legendre quadrature with panel doubling.
pub fn modal_covariance_numeric(
    m: i64,
    n: i64,
    spec: &SourceSpec,
    cfg: &AppendixQuadratureConfig,
) -> Result<ModalElement> {
    cfg.validate()?;
    let problem = Problem::new(spec, cfg);
    let phi = phi_of(spec, m, n);
    let d = m - n;
    let prefactor = 2.0 * spec.n0 * problem.b * parity(d);
    let scale = spec.n0 / problem.b;

    let mut level = problem.first_level(cfg, phi.abs(), d.unsigned_abs() as f64);
    let eval = |level: Level| {
        let nodes = problem.outer_nodes(level);
        let j = problem.inner_table(phi, level.inner, &nodes);
        let (full, edge) = problem.outer(&j, &nodes, d);
        (prefactor * full, prefactor * edge)
    };
    let mut previous = eval(level);
    let mut older = previous;
    for _ in 0..cfg.max_doublings {
        level = level.doubled();
        let current = eval(level);
        let delta = (current.0 - previous.0).abs();
        if delta <= cfg.rtol * (current.0.abs() + scale) {
            return Ok(ModalElement {
                value: Complex64::new(current.0, 0.0),
                edge_part: current.1,
                edge_bound: 2.0 * spec.n0 * cfg.c * cfg.c / problem.b,
                error_estimate: delta,
                panels_tau: level.inner,
                panels_zeta: level.outer_total(),
            });
        }
        older = previous;
        previous = current;
    }
    Err(Error::NoConvergence {
        panels: level.inner,
        last: previous.0,
        previous: older.0,
    })
}

/// Quadrature covariance over every pair of a mode set.
#[derive(Debug, Clone)]
pub struct ModalCovarianceTable {
    pub modes: ModeSet,
    pub n0: f64,
    /// `⟨a†_m a_n⟩`, indexed by position in the mode set; real and symmetric.
    pub values: DMatrix<f64>,
    pub edge_parts: DMatrix<f64>,
    pub error_estimates: DMatrix<f64>,
    pub edge_bound: f64,
    pub panels_tau: usize,
    pub panels_zeta: usize,
}

impl ModalCovarianceTable {
    /// Deviation from the `n₀·rect·δ` asymptote.
    pub fn deviation(&self) -> DMatrix<f64> {
        let m = self.values.nrows();
        DMatrix::from_fn(m, m, |i, j| {
            let target = if i == j { self.n0 } else { 0.0 };
            self.values[(i, j)] - target
        })
    }

    /// Max |deviation| over the diagonal, restricted to positions in `range`.
    pub fn max_diagonal_deviation_in(&self, range: std::ops::Range<usize>) -> (f64, usize) {
        range
            .map(|i| ((self.values[(i, i)] - self.n0).abs(), i))
            .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// Max off-diagonal magnitude with both positions in `range`.
    pub fn max_off_diagonal_in(&self, range: std::ops::Range<usize>) -> (f64, (usize, usize)) {
        let mut best = (0.0, (0, 0));
        for i in range.clone() {
            for j in range.clone() {
                if i != j && self.values[(i, j)].abs() > best.0 {
                    best = (self.values[(i, j)].abs(), (i, j));
                }
            }
        }
        best
    }

    pub fn max_diagonal_deviation(&self) -> (f64, usize) {
        self.max_diagonal_deviation_in(0..self.modes.len())
    }

    pub fn max_off_diagonal(&self) -> (f64, (usize, usize)) {
        self.max_off_diagonal_in(0..self.modes.len())
    }

    /// Max deviation from the asymptote over every entry.
    pub fn max_deviation(&self) -> f64 {
        self.deviation().iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Every `⟨a†_m a_n⟩` for `m, n` in `modes`, sharing inner tables between
/// pairs with equal `m + n` and converging the whole table jointly.
pub fn modal_covariance_table(
    spec: &SourceSpec,
    modes: &ModeSet,
    cfg: &AppendixQuadratureConfig,
) -> Result<ModalCovarianceTable> {
    cfg.validate()?;
    let problem = Problem::new(spec, cfg);
    let m_count = modes.len();
    let first = modes.first();
    let scale = spec.n0 / problem.b;
    let max_phi = (0..m_count)
        .flat_map(|i| [phi_of(spec, first + i as i64, first).abs(), phi_of(spec, first + i as i64, modes.last()).abs()])
        .fold(0.0, f64::max);
    let mut level = problem.first_level(cfg, max_phi, m_count as f64);

    let eval = |level: Level| -> (DMatrix<f64>, DMatrix<f64>) {
        let nodes = problem.outer_nodes(level);
        let mut values = DMatrix::zeros(m_count, m_count);
        let mut edges = DMatrix::zeros(m_count, m_count);
        let mut tables: HashMap<i64, Vec<f64>> = HashMap::new();
        for i in 0..m_count {
            for k in i..m_count {
                let (m, n) = (first + i as i64, first + k as i64);
                let j = tables
                    .entry(m + n)
                    .or_insert_with(|| problem.inner_table(phi_of(spec, m, n), level.inner, &nodes));
                let d = m - n;
                let (full, edge) = problem.outer(j, &nodes, d);
                let pre = 2.0 * spec.n0 * problem.b * parity(d);
                values[(i, k)] = pre * full;
                values[(k, i)] = pre * full;
                edges[(i, k)] = pre * edge;
                edges[(k, i)] = pre * edge;
            }
        }
        (values, edges)
    };

    let mut previous = eval(level);
    let mut older = previous.0.clone();
    for _ in 0..cfg.max_doublings {
        level = level.doubled();
        let current = eval(level);
        let errors = (&current.0 - &previous.0).map(f64::abs);
        let converged = errors
            .iter()
            .zip(current.0.iter())
            .all(|(e, v)| *e <= cfg.rtol * (v.abs() + scale));
        if converged {
            return Ok(ModalCovarianceTable {
                modes: *modes,
                n0: spec.n0,
                values: current.0,
                edge_parts: current.1,
                error_estimates: errors,
                edge_bound: 2.0 * spec.n0 * cfg.c * cfg.c / problem.b,
                panels_tau: level.inner,
                panels_zeta: level.outer_total(),
            });
        }
        older = std::mem::replace(&mut previous, current).0;
    }
    // report the entry that moved the most
    let at = (&previous.0 - &older)
        .iter()
        .enumerate()
        .map(|(k, v)| (v.abs(), k))
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
        .1;
    Err(Error::NoConvergence {
        panels: level.inner,
        last: previous.0.as_slice()[at],
        previous: older.as_slice()[at],
    })
}
