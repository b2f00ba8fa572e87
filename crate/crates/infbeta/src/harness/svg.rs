//! Minimal SVG scatter writer for the diagnostic panels. Data-only plots:
//! fixed canvas, points, optional polylines, axis frame with min/max labels.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub struct Series<'a> {
    pub points: &'a [(f64, f64)],
    /// SVG color name or #rrggbb.
    pub color: &'a str,
    /// Connect the points with a polyline instead of drawing circles.
    pub line: bool,
}

pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(y_label)
    );
    // Axis extent labels.
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{:.4}</text>"#,
        MARGIN,
        HEIGHT - MARGIN + 14.0,
        x_min
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{:.4}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 14.0,
        x_max
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{:.4}</text>"#,
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        y_min
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{:.4}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0,
        y_max
    );
    for s in series {
        if s.line {
            let mut d = String::new();
            for &(x, y) in s.points {
                let _ = write!(d, "{:.3},{:.3} ", sx(x), sy(y));
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1"/>"#,
                d.trim_end(),
                s.color
            );
        } else {
            for &(x, y) in s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="2.2" fill="{}"/>"#,
                    sx(x),
                    sy(y),
                    s.color
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_well_formed_svg() {
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)];
        let line = [(0.0, 0.8), (2.0, 1.8)];
        let svg = scatter_svg(
            "demo",
            "x",
            "y",
            &[
                Series { points: &pts, color: "black", line: false },
                Series { points: &line, color: "steelblue", line: true },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn deterministic_output() {
        let pts = [(0.1, 0.2), (0.3, 0.4)];
        let a = scatter_svg("t", "x", "y", &[Series { points: &pts, color: "black", line: false }]);
        let b = scatter_svg("t", "x", "y", &[Series { points: &pts, color: "black", line: false }]);
        assert_eq!(a, b);
    }
}
