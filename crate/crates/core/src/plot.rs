//! Standalone SVG rendering of two-dimensional models.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::EmbeddingModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("plot2d requires dimension 2, got {0}")]
    WrongDimension(usize),
}

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];
const ROLE_COLOR: &str = "#1f77b4";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
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

struct Frame {
    min: [f64; 2],
    scale: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.min[0]) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - MARGIN - (v - self.min[1]) * self.scale
    }
}

/// Renders every concept box as a labelled rectangle, every role box as a
/// dashed blue rectangle and every individual as a dot. Output depends only
/// on the model.
pub fn plot2d(model: &EmbeddingModel) -> Result<String, PlotError> {
    if model.dim() != 2 {
        return Err(PlotError::WrongDimension(model.dim()));
    }
    let bounds = |c: &[f64], o: &[f64]| [c[0] - o[0], c[1] - o[1], c[0] + o[0], c[1] + o[1]];
    let concepts: Vec<(&str, [f64; 4])> = model
        .concepts()
        .iter()
        .map(|n| {
            let b = model.concept_box(n).expect("known concept");
            (n.as_str(), bounds(b.center(), b.offset()))
        })
        .collect();
    let roles: Vec<(&str, [f64; 4])> = model
        .roles()
        .iter()
        .map(|n| {
            let b = model.role_box(n).expect("known role");
            (n.as_str(), bounds(b.center(), b.offset()))
        })
        .collect();
    let points: Vec<(&str, Vec<f64>)> = model
        .individuals()
        .iter()
        .map(|n| (n.as_str(), model.individual_point(n).expect("known individual")))
        .collect();

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (_, b) in concepts.iter().chain(&roles) {
        lo = [lo[0].min(b[0]), lo[1].min(b[1])];
        hi = [hi[0].max(b[2]), hi[1].max(b[3])];
    }
    for (_, p) in &points {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let frame = Frame { min: lo, scale: (SIZE - 2.0 * MARGIN) / span };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let mut rect = |b: &[f64; 4], class: &str, color: &str, dash: &str, name: &str| {
        let (x, y) = (frame.x(b[0]), frame.y(b[3]));
        let (w, h) = ((b[2] - b[0]) * frame.scale, (b[3] - b[1]) * frame.scale);
        let _ = writeln!(
            svg,
            r#"  <g class="{class}"><rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{color}" fill-opacity="0.08" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" fill="{color}">{}</text></g>"#,
            x + 2.0,
            y - 3.0,
            escape(name)
        );
    };
    for (i, (name, b)) in concepts.iter().enumerate() {
        rect(b, "concept", PALETTE[i % PALETTE.len()], "", name);
    }
    for (name, b) in &roles {
        rect(b, "role", ROLE_COLOR, r#" stroke-dasharray="6 3""#, name);
    }
    for (name, p) in &points {
        let (x, y) = (frame.x(p[0]), frame.y(p[1]));
        let _ = writeln!(
            svg,
            r#"  <g class="individual"><circle cx="{x:.3}" cy="{y:.3}" r="3" fill="black"/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11">{}</text></g>"#,
            x + 4.0,
            y - 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
