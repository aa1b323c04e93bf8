use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::run::{Provenance, SweepResult};
use crate::detectors::Method;
use crate::metrics::svg_escape;

#[derive(Serialize)]
struct MethodSummary {
    mean_auroc: f64,
    min_auroc: f64,
    max_auroc: f64,
    mean_fpr95: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    axis: String,
    rows: usize,
    grid: Vec<String>,
    methods: BTreeMap<String, MethodSummary>,
    provenance: &'a Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<&'a str>,
}

const COLORS: [&str; 3] = ["steelblue", "darkorange", "seagreen"];

impl SweepResult {
    /// One JSON object per row, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
            .collect()
    }

    /// Grid values in order, without repeats.
    pub fn grid_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for r in &self.rows {
            let v = r.value.to_string();
            if !labels.contains(&v) {
                labels.push(v);
            }
        }
        labels
    }

    fn methods(&self) -> Vec<Method> {
        let mut methods = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        methods
    }

    /// Pretty summary JSON. `generated_at` is omitted when `None`, which
    /// keeps the output byte-stable across reruns.
    pub fn summary_json(&self, generated_at: Option<&str>) -> String {
        let mut methods = BTreeMap::new();
        for m in self.methods() {
            let rows: Vec<_> = self.rows.iter().filter(|r| r.method == m).collect();
            let n = rows.len() as f64;
            methods.insert(
                m.to_string(),
                MethodSummary {
                    mean_auroc: rows.iter().map(|r| r.auroc).sum::<f64>() / n,
                    min_auroc: rows.iter().map(|r| r.auroc).fold(f64::INFINITY, f64::min),
                    max_auroc: rows
                        .iter()
                        .map(|r| r.auroc)
                        .fold(f64::NEG_INFINITY, f64::max),
                    mean_fpr95: rows.iter().map(|r| r.fpr95).sum::<f64>() / n,
                },
            );
        }
        let summary = Summary {
            axis: self.provenance.spec.axis.to_string(),
            rows: self.rows.len(),
            grid: self.grid_labels(),
            methods,
            provenance: &self.provenance,
            generated_at,
        };
        let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// AUROC per detector along the grid.
    pub fn chart_svg(&self) -> String {
        let (w, h, left, top, plot_w, plot_h) = (520.0, 360.0, 60.0, 40.0, 420.0, 260.0);
        let labels = self.grid_labels();
        let x = |i: usize| {
            left + if labels.len() > 1 {
                plot_w * i as f64 / (labels.len() - 1) as f64
            } else {
                plot_w / 2.0
            }
        };
        let y = |v: f64| top + (1.0 - v) * plot_h;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">AUROC by {} value</text>"#,
            left + plot_w / 2.0,
            self.provenance.spec.axis
        );
        for tick in 0..=4 {
            let v = tick as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
                left - 6.0,
                y(v) + 4.0
            );
        }
        for (i, label) in labels.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                x(i),
                top + plot_h + 18.0,
                svg_escape(label)
            );
        }
        for (k, m) in self.methods().into_iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let points: Vec<String> = self
                .rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| {
                    let i = labels
                        .iter()
                        .position(|l| *l == r.value.to_string())
                        .expect("label listed");
                    format!("{:.2},{:.2}", x(i), y(r.auroc))
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                points.join(" ")
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{m}</text>"#,
                left + plot_w + 8.0,
                top + 14.0 + 16.0 * k as f64
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
