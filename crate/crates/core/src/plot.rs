//! De Finetti projection and SVG rendering of entropy triangles.
//!
//! Layout: the ΔH' vertex sits bottom right, the information vertex at the
//! apex and the VI' vertex bottom left. ΔH' ticks run along the bottom edge,
//! information ticks along the right edge and VI' ticks along the left edge.
//!
//! The SVG has a fixed 800x720 viewport and four groups, in order:
//! `grid`, `axes`, `points`, `legend`. Output depends only on the spec.

use std::fmt::Write as _;

use crate::balance::{CoordKind, TriangleCoord};
use crate::error::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 720.0;
pub const MARGIN: f64 = 40.0;
const SIDE: f64 = WIDTH - 2.0 * MARGIN;
const BASELINE: f64 = HEIGHT - MARGIN;
const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Axis colors: divergence yellow, information green, variation red.
pub const DELTA_COLOR: &str = "#d4a017";
pub const INFO_COLOR: &str = "#2e8b57";
pub const VI_COLOR: &str = "#c0392b";
const OUTLINE_COLOR: &str = "#333333";

/// Allowed grid spacings.
pub const GRID_STEPS: [f64; 3] = [0.1, 0.2, 0.25];

/// Maps a composition to the plane: VI' vertex at (0,0), ΔH' vertex at
/// (1,0), information vertex at (1/2, √3/2).
pub fn project(c: &TriangleCoord) -> Result<(f64, f64)> {
    c.validate()?;
    Ok((c.info / 2.0 + c.delta, c.info * SQRT3_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Glyph {
    Cross,
    Circle,
    FilledCircle,
    FilledTriangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub coord: TriangleCoord,
    /// Text drawn next to the marker, e.g. `1_3`.
    pub label: String,
    /// Legend entry the point belongs to.
    pub series: String,
    pub glyph: Glyph,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    /// Aggregate plots label the information axis `2I'`, split plots `I'`.
    /// Glyphs distinguish point kinds on combined plots.
    pub kind: PlotKind,
    pub points: Vec<PlotPoint>,
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Aggregate,
    Split,
    /// Split points of both blocks together with the aggregate point.
    Combined,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>, kind: PlotKind) -> Self {
        PlotSpec {
            title: title.into(),
            kind,
            points: Vec::new(),
            grid_step: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !GRID_STEPS
            .iter()
            .any(|s| (s - self.grid_step).abs() < 1e-12)
        {
            return Err(Error::Argument(format!(
                "grid step {} must be one of 0.1, 0.2, 0.25",
                self.grid_step
            )));
        }
        for p in &self.points {
            p.coord.validate()?;
            let ok = match self.kind {
                PlotKind::Aggregate => p.coord.kind == CoordKind::Aggregate,
                PlotKind::Split => p.coord.kind != CoordKind::Aggregate,
                PlotKind::Combined => true,
            };
            if !ok {
                return Err(Error::Argument(format!(
                    "point `{}` of kind {} does not belong on a {:?} plot",
                    p.label, p.coord.kind, self.kind
                )));
            }
        }
        Ok(())
    }

    fn axis_labels(&self) -> [&'static str; 3] {
        match self.kind {
            PlotKind::Aggregate => ["ΔH'", "2I'", "VI'"],
            PlotKind::Split => ["ΔH'_X, ΔH'_Y", "I'", "H'_X|Y, H'_Y|X"],
            PlotKind::Combined => [
                "ΔH'",
                "I' (split), 2I' (aggregate)",
                "H'_cond (split), VI' (aggregate)",
            ],
        }
    }
}

fn to_viewport(x: f64, y: f64) -> (f64, f64) {
    (MARGIN + SIDE * x, BASELINE - SIDE * y)
}

fn point_at(delta: f64, info: f64) -> (f64, f64) {
    to_viewport(info / 2.0 + delta, info * SQRT3_2)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
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

fn marker(out: &mut String, glyph: Glyph, x: f64, y: f64, color: &str) {
    const R: f64 = 6.0;
    let color = escape(color);
    match glyph {
        Glyph::Cross => {
            let _ = writeln!(
                out,
                r#"    <path d="M{:.2} {:.2} L{:.2} {:.2} M{:.2} {:.2} L{:.2} {:.2}" stroke="{color}" stroke-width="2" fill="none"/>"#,
                x - R,
                y - R,
                x + R,
                y + R,
                x - R,
                y + R,
                x + R,
                y - R
            );
        }
        Glyph::Circle => {
            let _ = writeln!(
                out,
                r#"    <circle cx="{x:.2}" cy="{y:.2}" r="{R:.2}" stroke="{color}" stroke-width="2" fill="none"/>"#
            );
        }
        Glyph::FilledCircle => {
            let _ = writeln!(
                out,
                r#"    <circle cx="{x:.2}" cy="{y:.2}" r="{R:.2}" fill="{color}"/>"#
            );
        }
        Glyph::FilledTriangle => {
            let _ = writeln!(
                out,
                r#"    <polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
                x,
                y - R,
                x - R,
                y + R * 0.8,
                x + R,
                y + R * 0.8
            );
        }
    }
}

fn line(out: &mut String, a: (f64, f64), b: (f64, f64), color: &str, width: f64) {
    let _ = writeln!(
        out,
        r#"    <line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width}"/>"#,
        a.0, a.1, b.0, b.1
    );
}

fn text(out: &mut String, at: (f64, f64), anchor: &str, color: &str, size: u32, body: &str) {
    let _ = writeln!(
        out,
        r#"    <text x="{:.2}" y="{:.2}" text-anchor="{anchor}" fill="{color}" font-size="{size}">{}</text>"#,
        at.0,
        at.1,
        escape(body)
    );
}

/// Renders a plot spec as an SVG 1.1 document.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"  <title>{}</title>"#, escape(&spec.title));
    text(
        &mut out,
        (WIDTH / 2.0, 24.0),
        "middle",
        OUTLINE_COLOR,
        16,
        &spec.title,
    );

    // grid: lines of constant value for each part, colored by axis
    let _ = writeln!(out, r#"  <g id="grid" stroke-dasharray="4 3">"#);
    let steps = (1.0 / spec.grid_step).round() as usize;
    for k in 1..steps {
        let t = k as f64 * spec.grid_step;
        // ΔH' = t
        line(
            &mut out,
            point_at(t, 0.0),
            point_at(t, 1.0 - t),
            DELTA_COLOR,
            0.8,
        );
        // information = t
        line(
            &mut out,
            point_at(0.0, t),
            point_at(1.0 - t, t),
            INFO_COLOR,
            0.8,
        );
        // VI' = t
        line(
            &mut out,
            point_at(1.0 - t, 0.0),
            point_at(0.0, 1.0 - t),
            VI_COLOR,
            0.8,
        );
    }
    let _ = writeln!(out, "  </g>");

    let [delta_label, info_label, vi_label] = spec.axis_labels();
    let _ = writeln!(out, r#"  <g id="axes">"#);
    let left = point_at(0.0, 0.0);
    let right = point_at(1.0, 0.0);
    let apex = point_at(0.0, 1.0);
    line(&mut out, left, right, DELTA_COLOR, 2.0);
    line(&mut out, right, apex, INFO_COLOR, 2.0);
    line(&mut out, apex, left, VI_COLOR, 2.0);
    for k in 0..=steps {
        let t = k as f64 * spec.grid_step;
        let tick = format!("{t:.2}");
        let b = point_at(t, 0.0);
        text(
            &mut out,
            (b.0, b.1 + 16.0),
            "middle",
            DELTA_COLOR,
            11,
            &tick,
        );
        let r = point_at(1.0 - t, t);
        text(
            &mut out,
            (r.0 + 8.0, r.1 + 4.0),
            "start",
            INFO_COLOR,
            11,
            &tick,
        );
        let l = point_at(0.0, 1.0 - t);
        text(&mut out, (l.0 - 8.0, l.1 + 4.0), "end", VI_COLOR, 11, &tick);
    }
    text(
        &mut out,
        (right.0, right.1 + 34.0),
        "end",
        DELTA_COLOR,
        14,
        delta_label,
    );
    text(
        &mut out,
        (apex.0 + 14.0, apex.1 - 4.0),
        "start",
        INFO_COLOR,
        14,
        info_label,
    );
    text(
        &mut out,
        (left.0, left.1 + 34.0),
        "start",
        VI_COLOR,
        14,
        vi_label,
    );
    let _ = writeln!(out, "  </g>");

    let _ = writeln!(out, r#"  <g id="points">"#);
    for p in &spec.points {
        let (x, y) = project(&p.coord)?;
        let (vx, vy) = to_viewport(x, y);
        marker(&mut out, p.glyph, vx, vy, &p.color);
        if !p.label.is_empty() {
            text(
                &mut out,
                (vx + 8.0, vy - 8.0),
                "start",
                OUTLINE_COLOR,
                11,
                &p.label,
            );
        }
    }
    let _ = writeln!(out, "  </g>");

    let _ = writeln!(out, r#"  <g id="legend">"#);
    let mut seen: Vec<(&str, Glyph, &str)> = Vec::new();
    for p in &spec.points {
        let key = (p.series.as_str(), p.glyph, p.color.as_str());
        if !p.series.is_empty() && !seen.contains(&key) {
            seen.push(key);
        }
    }
    for (i, (series, glyph, color)) in seen.iter().enumerate() {
        let y = 60.0 + 20.0 * i as f64;
        marker(&mut out, *glyph, MARGIN + 10.0, y, color);
        text(
            &mut out,
            (MARGIN + 24.0, y + 4.0),
            "start",
            OUTLINE_COLOR,
            12,
            series,
        );
    }
    let _ = writeln!(out, "  </g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(a: f64, b: f64, c: f64) -> TriangleCoord {
        TriangleCoord::new(a, b, c, CoordKind::Aggregate).unwrap()
    }

    #[test]
    fn vertices_and_centroid() {
        let close =
            |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12;
        assert!(close(project(&coord(1.0, 0.0, 0.0)).unwrap(), (1.0, 0.0)));
        assert!(close(
            project(&coord(0.0, 1.0, 0.0)).unwrap(),
            (0.5, 3f64.sqrt() / 2.0)
        ));
        assert!(close(project(&coord(0.0, 0.0, 1.0)).unwrap(), (0.0, 0.0)));
        let third = 1.0 / 3.0;
        assert!(close(
            project(&coord(third, third, third)).unwrap(),
            (0.5, 3f64.sqrt() / 6.0)
        ));
    }

    #[test]
    fn rejects_non_compositions() {
        let bad = TriangleCoord {
            delta: 0.6,
            info: 0.6,
            vi: 0.0,
            kind: CoordKind::Aggregate,
        };
        assert!(project(&bad).is_err());
    }

    #[test]
    fn empty_plot_has_triangle_and_grid_only() {
        let svg = render_svg(&PlotSpec::new("empty", PlotKind::Aggregate)).unwrap();
        assert!(svg.contains(r#"<g id="grid""#));
        assert!(svg.contains(r#"<g id="axes">"#));
        assert!(!svg.contains("<circle"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn apex_marker_position() {
        let mut spec = PlotSpec::new("apex", PlotKind::Aggregate);
        spec.points.push(PlotPoint {
            coord: coord(0.0, 1.0, 0.0),
            label: String::new(),
            series: "perfect".into(),
            glyph: Glyph::FilledCircle,
            color: "#000000".into(),
        });
        let svg = render_svg(&spec).unwrap();
        let (x, y) = to_viewport(0.5, 3f64.sqrt() / 2.0);
        assert!(
            svg.contains(&format!(r#"<circle cx="{x:.2}" cy="{y:.2}""#)),
            "{svg}"
        );
    }

    #[test]
    fn grid_step_validated() {
        let mut spec = PlotSpec::new("g", PlotKind::Split);
        spec.grid_step = 0.3;
        assert!(render_svg(&spec).is_err());
        spec.grid_step = 0.25;
        assert!(render_svg(&spec).is_ok());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let mut spec = PlotSpec::new("k", PlotKind::Split);
        spec.points.push(PlotPoint {
            coord: coord(0.2, 0.3, 0.5),
            label: "a".into(),
            series: "s".into(),
            glyph: Glyph::Cross,
            color: "#000".into(),
        });
        assert!(render_svg(&spec).is_err());
    }

    #[test]
    fn text_is_escaped() {
        let spec = PlotSpec::new("a < b & c", PlotKind::Aggregate);
        let svg = render_svg(&spec).unwrap();
        assert!(svg.contains("a &lt; b &amp; c"));
        roxmltree::Document::parse(&svg).unwrap();
    }
}
