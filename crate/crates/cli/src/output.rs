//! Text artifacts: result CSV, human and key-value reports, SVG charts.

use std::fmt::Write as _;

use tailcap::classify::{ConditionReport, SupportVerdict};
use tailcap::{CapacityResult, KktReport};

pub const CSV_HEADER: &str = "A,capacity_nats,nu,n_points,grid_min_residual,certified";

/// One CSV row. Fixed precision keeps reruns and verify-kkt round trips
/// byte-identical even when the last ulp of a recomputation moves.
pub fn csv_row(a: f64, capacity: f64, kkt: &KktReport, n_points: usize) -> String {
    format!(
        "{a},{capacity:.10},{:.6e},{n_points},{:.6e},{}",
        kkt.nu, kkt.grid_min_residual, kkt.certified
    )
}

pub fn result_row(r: &CapacityResult) -> String {
    csv_row(r.budget, r.capacity, &r.kkt, r.input.len())
}

pub fn csv(rows: &[String]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

pub fn kkt_report(kkt: &KktReport, capacity: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "KKT verification");
    let _ = writeln!(s, "  capacity            {capacity:.10} nats");
    let _ = writeln!(s, "  nu                  {:.6e}", kkt.nu);
    let _ = writeln!(s, "  max |s| on support  {:.3e}", kkt.max_support_residual());
    let _ = writeln!(s, "  grid minimum of s   {:.3e} at x = {:.6}", kkt.grid_min_residual, kkt.grid_argmin);
    let _ = writeln!(s, "  grid extent         {:.6}", kkt.grid_extent);
    let _ = writeln!(s, "  certified           {}", kkt.certified);
    s
}

pub fn verdict_report(v: &SupportVerdict, cross_check: Option<&SupportVerdict>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Support classification");
    let _ = writeln!(s, "  verdict   {}", v.kind.as_str());
    let _ = writeln!(s, "  basis     {:?}", v.basis);
    let _ = writeln!(s, "  rests on  {}", v.theorem_tag);
    if let Some(d) = &v.diagnostic {
        let _ = writeln!(s, "  note      {d}");
    }
    for (x, rho) in &v.evidence {
        let _ = writeln!(s, "  rho({x:.6e}) = {rho:.6e}");
    }
    if let Some(c) = cross_check {
        let _ = writeln!(s, "  sampled   {}", c.kind.as_str());
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[verdict]");
    let _ = writeln!(s, "kind={}", v.kind.as_str());
    let _ = writeln!(s, "basis={}", format!("{:?}", v.basis).to_lowercase());
    let _ = writeln!(s, "tag={}", v.theorem_tag);
    if let Some(c) = cross_check {
        let _ = writeln!(s, "sampled_kind={}", c.kind.as_str());
    }
    s
}

pub fn conditions_report(r: &ConditionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Regularity conditions");
    for c in &r.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        let _ = writeln!(s, "  {:<3} {mark}  {}", c.name, c.detail);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[conditions]");
    for c in &r.checks {
        let value = c.value.map_or("-".to_string(), |v| format!("{v:.6e}"));
        let _ = writeln!(s, "{}={} value={value}", c.name, c.passed);
    }
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
    let _ = writeln!(s, "log_moment={}", opt(r.log_moment));
    let _ = writeln!(s, "kappa={}", opt(r.kappa));
    let _ = writeln!(s, "envelope_integral={}", opt(r.envelope_integral));
    let _ = writeln!(s, "all_passed={}", r.all_passed());
    s
}

/// A named polyline.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line chart: frame, axis ranges, one polyline per series, legend.
pub fn svg_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, r#"<text x="{m}" y="{}" text-anchor="middle">{x0:.3}</text>"#, h - m + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x1:.3}</text>"#, w - m, h - m + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y0:.3}</text>"#, m - 6.0, h - m + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.3}</text>"#, m - 6.0, m + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = m + 16.0 + 18.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, m + 10.0, m + 34.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, m + 40.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_series() {
        let series = vec![
            Series { label: "a<1".into(), points: vec![(0.0, 0.0), (1.0, 1.0)] },
            Series { label: "b".into(), points: vec![(0.0, 0.5), (1.0, 0.7)] },
        ];
        let svg = svg_chart("t", "A", "C", &series);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;1"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg, svg_chart("t", "A", "C", &series));
    }
}
