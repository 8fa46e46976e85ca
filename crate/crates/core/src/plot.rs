//! SVG drawing of planar tropical curves.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::tropfan::TropicalCurve;

const SIZE: f64 = 400.0;
const RADIUS: f64 = 150.0;

/// Rays from the center, each scaled to a common length and labelled with
/// its multiplicity and direction.
pub fn curve_svg(curve: &TropicalCurve) -> Result<String> {
    if curve.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: curve.ambient_dim(),
        });
    }
    let c = SIZE / 2.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for ray in curve.rays() {
        let d = ray.direction.to_i64s()?;
        let (x, y) = (d[0] as f64, d[1] as f64);
        let len = x.hypot(y);
        // SVG y grows downward
        let (ex, ey) = (c + RADIUS * x / len, c - RADIUS * y / len);
        let (lx, ly) = (c + (RADIUS + 22.0) * x / len, c - (RADIUS + 22.0) * y / len);
        let width = 1.0 + ray.multiplicity as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{c}" y1="{c}" x2="{ex:.2}" y2="{ey:.2}" stroke="black" stroke-width="{width}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" font-family="monospace" font-size="12" text-anchor="middle">{} {}</text>"#,
            ray.multiplicity, ray.direction
        );
    }
    let _ = writeln!(out, r#"<circle cx="{c}" cy="{c}" r="3" fill="black"/>"#);
    out.push_str("</svg>\n");
    Ok(out)
}
