//! Minimal self-contained SVG emission; no rendering dependencies.

use std::fmt::Write as _;

pub const GENERATOR: &str = concat!("tmflow ", env!("CARGO_PKG_VERSION"));

/// Accumulates shapes in user coordinates and renders a standalone document.
pub struct SvgCanvas {
    width: f64,
    height: f64,
    body: String,
}

fn fmt_coord(v: f64) -> String {
    // fixed precision keeps output byte-stable across runs
    format!("{v:.6}")
}

impl SvgCanvas {
    pub fn new(width: f64, height: f64) -> Self {
        SvgCanvas {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{}" y="{}" width="{}" height="{}" style="{style}"/>"#,
            fmt_coord(x),
            fmt_coord(y),
            fmt_coord(w),
            fmt_coord(h)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], style: &str, class: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(x), fmt_coord(y)))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}" style="{style}" fill="none"/>"#,
            pts.join(" ")
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}">{}</text>"#,
            fmt_coord(x),
            fmt_coord(y),
            fmt_coord(size),
            content
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- generator: {} -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            GENERATOR,
            fmt_coord(self.width),
            fmt_coord(self.height),
            fmt_coord(self.width),
            fmt_coord(self.height),
            self.body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canvas_renders_shapes_and_generator() {
        let mut c = SvgCanvas::new(100.0, 50.0);
        c.rect(1.0, 2.0, 3.0, 4.0, "fill:#ccc", "band");
        c.polyline(&[(0.0, 0.0), (1.0, 1.0)], "stroke:#000", "curve");
        c.text(5.0, 5.0, 3.0, "label");
        let doc = c.finish();
        assert!(doc.contains("generator: tmflow"));
        assert!(doc.contains("class=\"band\""));
        assert!(doc.contains("polyline"));
        assert!(doc.ends_with("</svg>\n"));
    }
}
