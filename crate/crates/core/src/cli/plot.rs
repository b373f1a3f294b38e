//! Log-log SVG overlay of the bound, the competitor curves and simulated
//! points. Self-contained: generic font family, no external references.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::estimators::{ComparisonReport, EstimatorKind, SensitivityReport};
use crate::physics::SourceSpec;
use crate::qcrb::GridRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub kind: EstimatorKind,
    pub label: String,
    pub n0: f64,
    pub modes: usize,
    pub rel_sensitivity: f64,
    pub bootstrap_sigma: f64,
    pub rel_sensitivity_ci: [f64; 2],
    pub bound: f64,
    pub bound_satisfied: bool,
}

impl From<&SensitivityReport> for PlotPoint {
    fn from(r: &SensitivityReport) -> Self {
        Self {
            kind: r.kind,
            label: r.label.clone(),
            n0: r.n0,
            modes: r.modes,
            rel_sensitivity: r.rel_sensitivity,
            bootstrap_sigma: r.bootstrap_sigma,
            rel_sensitivity_ci: r.rel_sensitivity_ci,
            bound: r.bound,
            bound_satisfied: r.bound_satisfied,
        }
    }
}

/// A report file accepted by `plot`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlotSource {
    Simulate(SensitivityReport),
    Compare(ComparisonReport),
}

impl PlotSource {
    pub fn reports(&self) -> Vec<&SensitivityReport> {
        match self {
            PlotSource::Simulate(r) => vec![r],
            PlotSource::Compare(c) => c.simulated.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub spec: SourceSpec,
    pub curves: Vec<GridRow>,
    pub points: Vec<PlotPoint>,
    pub all_points_at_or_above_bound: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

fn kind_colour(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::PhotonCounting => "#d62728",
        EstimatorKind::HeterodyneRadiometer => "#9467bd",
        EstimatorKind::TwoDetectorCorrelation => "#8c564b",
    }
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn decades(lo: f64, hi: f64) -> (f64, f64) {
        let (a, mut b) = (lo.log10().floor(), hi.log10().ceil());
        if b <= a {
            b = a + 1.0;
        }
        (a, b)
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let y = y.max(10f64.powf(self.y.0));
        HEIGHT - BOTTOM - (y.log10() - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, axes: &Axes, pts: impl Iterator<Item = (f64, f64)>, colour: &str, dash: &str) {
    let coords: Vec<String> = pts
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| format!("{:.2},{:.2}", axes.px(x), axes.py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{colour}" stroke-width="2"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

fn decade_label(k: f64) -> String {
    format!(r#"10<tspan dy="-7" font-size="10">{k}</tspan>"#)
}

pub fn render_svg(data: &PlotData) -> String {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let mut xs: Vec<f64> = data.curves.iter().map(|r| r.n0).collect();
    xs.extend(data.points.iter().map(|p| p.n0));
    let mut ys: Vec<f64> = data
        .curves
        .iter()
        .flat_map(|r| [Some(r.rel_sens_bound), Some(r.radiometer), r.lkd_claimed])
        .flatten()
        .collect();
    for p in &data.points {
        ys.extend([p.rel_sensitivity - p.bootstrap_sigma, p.rel_sensitivity + p.bootstrap_sigma]);
    }
    let range = |v: &[f64]| {
        let v: Vec<f64> = v.iter().copied().filter(|&x| positive(x)).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        if v.is_empty() {
            (0.0, 1.0)
        } else {
            Axes::decades(lo, hi)
        }
    };
    let axes = Axes {
        x: range(&xs),
        y: range(&ys),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">Relative sensitivity, M = {}</text>"#,
        (x0 + x1) / 2.0,
        data.spec.modes.value
    );

    // decade grid and tick labels
    let mut k = axes.x.0;
    while k <= axes.x.1 {
        let x = axes.px(10f64.powf(k));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            decade_label(k)
        );
        k += 1.0;
    }
    let mut k = axes.y.0;
    while k <= axes.y.1 {
        let y = axes.py(10f64.powf(k));
        let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            decade_label(k)
        );
        k += 1.0;
    }
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">occupation n₀</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">Var(n̂₀)/n₀²</text>"#,
        (y0 + y1) / 2.0
    );

    let mut legend: Vec<(String, String, &str)> = vec![];
    polyline(&mut s, &axes, data.curves.iter().map(|r| (r.n0, r.rel_sens_bound)), "#1f77b4", "");
    legend.push(("quantum Cramér-Rao bound".into(), "#1f77b4".into(), ""));
    polyline(&mut s, &axes, data.curves.iter().map(|r| (r.n0, r.radiometer)), "#ff7f0e", r#" stroke-dasharray="8 4""#);
    legend.push(("radiometer equation".into(), "#ff7f0e".into(), r#" stroke-dasharray="8 4""#));
    if data.curves.iter().all(|r| r.lkd_claimed.is_some()) && !data.curves.is_empty() {
        polyline(
            &mut s,
            &axes,
            data.curves.iter().filter_map(|r| r.lkd_claimed.map(|l| (r.n0, l))),
            "#2ca02c",
            r#" stroke-dasharray="2 3""#,
        );
        legend.push(("LKD claimed".into(), "#2ca02c".into(), r#" stroke-dasharray="2 3""#));
    }

    let mut kinds: Vec<EstimatorKind> = vec![];
    for p in &data.points {
        let colour = kind_colour(p.kind);
        let x = axes.px(p.n0);
        let (lo, hi) = (axes.py(p.rel_sensitivity - p.bootstrap_sigma), axes.py(p.rel_sensitivity + p.bootstrap_sigma));
        let _ = writeln!(
            s,
            r#"<g stroke="{colour}"><line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}"/><line x1="{:.2}" y1="{lo:.2}" x2="{:.2}" y2="{lo:.2}"/><line x1="{:.2}" y1="{hi:.2}" x2="{:.2}" y2="{hi:.2}"/></g>"#,
            x - 4.0,
            x + 4.0,
            x - 4.0,
            x + 4.0
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="{colour}"/>"#,
            axes.py(p.rel_sensitivity)
        );
        if !kinds.contains(&p.kind) {
            kinds.push(p.kind);
        }
    }

    let (lx, mut ly) = (x1 - 250.0, y1 + 18.0);
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="240" height="{:.2}" fill="white" fill-opacity="0.85" stroke="#999999"/>"##,
        lx - 8.0,
        y1 + 6.0,
        18.0 * (legend.len() + kinds.len()) as f64 + 8.0
    );
    for (label, colour, dash) in &legend {
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 28.0,
            lx + 36.0,
            ly + 4.0
        );
        ly += 18.0;
    }
    for kind in kinds {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{ly:.2}" r="3.5" fill="{}"/><text x="{:.2}" y="{:.2}">{} (simulated)</text>"#,
            lx + 14.0,
            kind_colour(kind),
            lx + 36.0,
            ly + 4.0,
            kind.tag()
        );
        ly += 18.0;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcrb::{bound_grid, GridAxis};

    fn data(points: Vec<PlotPoint>) -> PlotData {
        let spec = SourceSpec::from_occupation(1.0, 1e9, 1e6, 1e-4).unwrap();
        PlotData {
            spec,
            curves: bound_grid(&spec, GridAxis::N0, 0.1, 1000.0, 40, Some(1e-15)).unwrap(),
            all_points_at_or_above_bound: points.iter().all(|p| p.bound_satisfied),
            points,
        }
    }

    #[test]
    fn bound_only_plot_has_three_curves_and_legend() {
        let svg = render_svg(&data(vec![]));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("LKD claimed") && svg.contains("radiometer equation"));
        assert!(!svg.contains("<circle"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn points_render_with_error_bars() {
        let p = PlotPoint {
            kind: EstimatorKind::PhotonCounting,
            label: "photon counting".into(),
            n0: 10.0,
            modes: 100,
            rel_sensitivity: 0.011,
            bootstrap_sigma: 5e-5,
            rel_sensitivity_ci: [0.0109, 0.0111],
            bound: 0.011,
            bound_satisfied: true,
        };
        let svg = render_svg(&data(vec![p]));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("photon_counting (simulated)"));
    }
}
