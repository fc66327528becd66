//! Log-log rate chart of RMSE against n.

use std::fmt::Write;

use bootbias::experiments::{loglog_fit, RateFit};

use crate::commands::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Fit `log rmse ~ log n` and render the chart. Needs at least two points.
pub fn rate_chart(ns: &[f64], rmses: &[f64]) -> Result<(String, RateFit), CliError> {
    let fit = loglog_fit(ns, rmses, 2).map_err(|e| CliError::Input(format!("cannot fit rate: {e}")))?;
    Ok((render(ns, rmses, &fit), fit))
}

fn log_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().map(|v| v.log10()).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.log10()).fold(f64::NEG_INFINITY, f64::max);
    // pad so that no point sits on the frame
    let pad = ((hi - lo) * 0.08).max(0.05);
    (lo - pad, hi + pad)
}

fn render(ns: &[f64], rmses: &[f64], fit: &RateFit) -> String {
    let (x0, x1) = log_range(ns);
    let (y0, y1) = log_range(rmses);
    let px = |n: f64| LEFT + (n.log10() - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y.log10() - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (fl, fr, ft, fb) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{fl}" y="{ft}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fr - fl,
        fb - ft
    );

    // fitted line, clipped to the data range in n
    let nmin = ns.iter().copied().fold(f64::INFINITY, f64::min);
    let nmax = ns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let line_at = |n: f64| (fit.intercept + fit.slope * n.ln()).exp();
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        px(nmin),
        py(line_at(nmin)),
        px(nmax),
        py(line_at(nmax))
    );

    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by(|&a, &b| ns[a].total_cmp(&ns[b]));
    let points: Vec<String> = order
        .iter()
        .map(|&i| format!("{:.2},{:.2}", px(ns[i]), py(rmses[i])))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points.join(" ")
    );
    for &i in &order {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(ns[i]),
            py(rmses[i])
        );
    }

    for &i in &order {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(ns[i]),
            fb + 18.0,
            ns[i]
        );
    }
    let rmin = rmses.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = rmses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for r in [rmin, rmax] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{r:.3e}</text>"#,
            fl - 6.0,
            py(r) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (log scale)</text>"#,
        (fl + fr) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">RMSE (log scale)</text>"#,
        (ft + fb) / 2.0,
        (ft + fb) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="25" text-anchor="end" font-size="14">slope {:.2}</text>"#,
        fr,
        fit.slope
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_give_one_polyline() {
        let (svg, fit) = rate_chart(&[100.0, 400.0], &[0.3, 0.15]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">slope -0.50<"));
        assert!((fit.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic_output() {
        let ns = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
        let r: Vec<f64> = ns.iter().map(|n| 2.0 / n).collect();
        let (a, _) = rate_chart(&ns, &r).unwrap();
        let (b, _) = rate_chart(&ns, &r).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(">slope -1.00<"));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
    }

    #[test]
    fn unusable_input_is_an_error() {
        assert!(rate_chart(&[], &[]).is_err());
        assert!(rate_chart(&[100.0], &[0.1]).is_err());
        assert!(rate_chart(&[100.0, 200.0], &[0.1, 0.0]).is_err());
    }
}
