use std::collections::BTreeMap;
use std::fmt::Write;

use super::ProjectedPoint;

pub const WIDTH: f64 = 1000.0;
pub const HEIGHT: f64 = 800.0;
pub const MARGIN_FRACTION: f64 = 0.05;
pub const RADIUS: f64 = 3.0;
pub const FALLBACK_COLOR: &str = "gray";

/// Wiley red, Elsevier green, Springer-Nature blue; everything else gray.
pub fn default_color_map() -> BTreeMap<String, String> {
    [("Wiley", "red"), ("Elsevier", "green"), ("Springer-Nature", "blue")]
        .into_iter()
        .map(|(p, c)| (p.to_string(), c.to_string()))
        .collect()
}

/// Maps `[lo, hi]` onto `[a, b]`; a degenerate range maps to the middle.
fn fit(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Scatter plot of `points` in viewport coordinates, y pointing up.
pub fn render_scatter(
    points: &[ProjectedPoint],
    color_map: &BTreeMap<String, String>,
    label_top_n: usize,
) -> String {
    let (mx, my) = (WIDTH * MARGIN_FRACTION, HEIGHT * MARGIN_FRACTION);
    let bounds = |f: fn(&ProjectedPoint) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = bounds(|p| p.x);
    let (y0, y1) = bounds(|p| p.y);
    let place = |p: &ProjectedPoint| {
        (
            fit(p.x, x0, x1, mx, WIDTH - mx),
            fit(p.y, y0, y1, HEIGHT - my, my),
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for p in points {
        let (cx, cy) = place(p);
        let fill = color_map.get(&p.publisher).map_or(FALLBACK_COLOR, String::as_str);
        let _ = writeln!(
            svg,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{RADIUS}" fill="{}"><title>{}</title></circle>"#,
            escape(fill),
            escape(&p.journal_id)
        );
    }
    let mut by_size: Vec<&ProjectedPoint> = points.iter().collect();
    by_size.sort_by(|a, b| b.n_docs.cmp(&a.n_docs).then_with(|| a.journal_id.cmp(&b.journal_id)));
    for p in by_size.into_iter().take(label_top_n) {
        let (cx, cy) = place(p);
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="10" font-family="sans-serif">{}</text>"#,
            cx + RADIUS + 1.0,
            cy - RADIUS - 1.0,
            escape(&p.journal_id)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: &str, x: f64, y: f64, publisher: &str, n: usize) -> ProjectedPoint {
        ProjectedPoint {
            journal_id: id.into(),
            x,
            y,
            publisher: publisher.into(),
            n_docs: n,
        }
    }

    #[test]
    fn single_point() {
        let s = render_scatter(&[pt("a", 3.0, 4.0, "Wiley", 1)], &default_color_map(), 0);
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(s.contains(r#"cx="500.000" cy="400.000""#));
        assert!(s.contains(r#"fill="red""#));
    }

    #[test]
    fn corners_and_colors() {
        let pts = [pt("a", -1.0, -1.0, "X", 5), pt("b", 1.0, 1.0, "Y & Z", 9)];
        let s = render_scatter(&pts, &default_color_map(), 1);
        assert!(s.contains(r#"cx="50.000" cy="760.000""#));
        assert!(s.contains(r#"cx="950.000" cy="40.000""#));
        assert_eq!(s.matches(r#"fill="gray""#).count(), 2);
        assert_eq!(s.matches("<text").count(), 1);
        assert!(s.contains(">b</text>"));
    }

    #[test]
    fn escapes() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
