use std::fmt::Write;

use super::roc::{auroc, RocCurve};
use crate::scalar::Scalar;

const SIZE: f64 = 360.0;
const MARGIN: f64 = 50.0;

fn px(v: f64) -> f64 {
    MARGIN + v * SIZE
}

fn py(v: f64) -> f64 {
    MARGIN + (1.0 - v) * SIZE
}

/// Standalone SVG of the ROC curve on the unit square, with the chance
/// diagonal for reference.
pub fn roc_svg<T: Scalar>(curve: &RocCurve<T>, title: &str) -> String {
    let total = SIZE + 2.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
            px(v),
            py(0.0) + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            px(0.0) - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4 4"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    let points: Vec<String> = curve
        .points()
        .iter()
        .map(|&(f, t)| format!("{:.2},{:.2}", px(f), py(t)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">False positive rate (OOD accepted)</text>"#,
        px(0.5),
        py(0.0) + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">True positive rate (ID accepted)</text>"#,
        py(0.5),
        py(0.5)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="30" text-anchor="middle" font-size="14">{} (AUROC {:.4})</text>"#,
        px(0.5),
        escape(title),
        auroc(curve)
    );
    svg.push_str("</svg>\n");
    svg
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::ScoreSet;
    use crate::metrics::roc_curve;

    #[test]
    fn svg_contains_staircase_and_diagonal() {
        let id = ScoreSet::new(None, vec![3.0f64, 1.0]).unwrap();
        let ood = ScoreSet::new(None, vec![2.0f64, 0.0]).unwrap();
        let svg = roc_svg(&roc_curve(&id, &ood).unwrap(), "EBM <test>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(
            "points=\"50.00,410.00 50.00,230.00 230.00,230.00 230.00,50.00 410.00,50.00\""
        ));
        assert!(svg.contains("EBM &lt;test&gt; (AUROC 0.7500)"));
    }
}
