//! Deterministic SVG pictures of developed tesselations in the Poincaré disk.
//!
//! A boundary vertex `x` sits at `((x²-1)/(x²+1), -2x/(x²+1))`: `∞` at `1`,
//! `0` at `-1`, `1` at `-i` and `-1` at `i`.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::farey::{FareyVertex, OrientedEdge};
use crate::structures::TlcTesselation;

const RADIUS: f64 = 200.0;
const MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    /// Edge orbits drawn dashed, e.g. the edges removed by a Delaunay paving.
    pub dashed: BTreeSet<usize>,
}

/// Boundary point of `x` on the unit circle.
pub fn circle_point(x: &FareyVertex) -> (f64, f64) {
    if x.is_infinity() {
        return (1.0, 0.0);
    }
    let p = x.to_f64();
    let n = p * p + 1.0;
    ((p * p - 1.0) / n, -2.0 * p / n)
}

fn to_svg((x, y): (f64, f64)) -> (f64, f64) {
    (MARGIN + RADIUS * (1.0 + x), MARGIN + RADIUS * (1.0 - y))
}

fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Path data of the geodesic from `a` to `b`, in SVG coordinates.
fn geodesic_path(a: &FareyVertex, b: &FareyVertex) -> String {
    let (pa, pb) = (circle_point(a), circle_point(b));
    let (sa, sb) = (to_svg(pa), to_svg(pb));
    let dot = pa.0 * pb.0 + pa.1 * pb.1;
    let cross = pa.0 * pb.1 - pa.1 * pb.0;
    if cross.abs() < 1e-9 {
        return format!("M {} {} L {} {}", num(sa.0), num(sa.1), num(sb.0), num(sb.1));
    }
    // Circle orthogonal to the boundary through both points.
    let r = RADIUS * ((1.0 - dot) / (1.0 + dot)).max(0.0).sqrt();
    // A ccw pair about the origin runs clockwise about the arc centre, which
    // is sweep 0 once y points down.
    let sweep = if cross > 0.0 { 0 } else { 1 };
    format!("M {} {} A {} {} 0 0 {} {} {}", num(sa.0), num(sa.1), num(r), num(r), sweep, num(sb.0), num(sb.1))
}

/// SVG with one `class="edge"` path per edge developed to `depth`, plus an
/// arrow along the DOE.
pub fn render_svg(t: &TlcTesselation, depth: usize, opts: &RenderOptions) -> String {
    let size = 2.0 * (RADIUS + MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = num(size)
    );
    let _ = writeln!(
        out,
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M 0 0 L 10 5 L 0 10 z" fill="crimson"/></marker></defs>"#
    );
    let c = MARGIN + RADIUS;
    let _ = writeln!(
        out,
        r#"<circle class="boundary" cx="{c}" cy="{c}" r="{r}" fill="none" stroke="black" stroke-width="1"/>"#,
        c = num(c),
        r = num(RADIUS)
    );
    for (a, b) in t.edges_to_depth(depth) {
        let e = OrientedEdge { tail: a.clone(), head: b.clone() };
        let dashed = t.orbit_of(&e).is_some_and(|o| opts.dashed.contains(&o));
        let style = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<path class="edge" data-tail="{a}" data-head="{b}" d="{}" fill="none" stroke="steelblue" stroke-width="0.8"{style}/>"#,
            geodesic_path(&a, &b)
        );
    }
    let doe = t.doe();
    let _ = writeln!(
        out,
        r#"<path class="doe" data-tail="{}" data-head="{}" d="{}" fill="none" stroke="crimson" stroke-width="2" marker-end="url(#arrow)"/>"#,
        doe.tail,
        doe.head,
        geodesic_path(&doe.tail, &doe.head)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroup::Subgroup;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
    }

    #[test]
    fn boundary_placement() {
        assert!(close(circle_point(&FareyVertex::int(-1)), (0.0, 1.0)));
        assert!(close(circle_point(&FareyVertex::int(1)), (0.0, -1.0)));
        assert!(close(circle_point(&FareyVertex::int(0)), (-1.0, 0.0)));
        assert!(close(circle_point(&FareyVertex::infinity()), (1.0, 0.0)));
    }

    #[test]
    fn arcs_meet_boundary_orthogonally() {
        let (a, b) = (FareyVertex::int(0), FareyVertex::int(1));
        let (pa, pb) = (circle_point(&a), circle_point(&b));
        let dot = pa.0 * pb.0 + pa.1 * pb.1;
        // Centre at (pa+pb)/(1+dot); orthogonality means |c|² = 1 + r².
        let c = ((pa.0 + pb.0) / (1.0 + dot), (pa.1 + pb.1) / (1.0 + dot));
        let r2 = (c.0 - pa.0).powi(2) + (c.1 - pa.1).powi(2);
        assert!((c.0 * c.0 + c.1 * c.1 - 1.0 - r2).abs() < 1e-12);
        assert!(((1.0 - dot) / (1.0 + dot) - r2).abs() < 1e-12);
    }

    #[test]
    fn one_arc_per_edge_and_deterministic() {
        let t = TlcTesselation::farey(&Subgroup::commutator());
        for depth in 0..4 {
            let svg = render_svg(&t, depth, &RenderOptions::default());
            let arcs = svg.matches(r#"class="edge""#).count();
            assert_eq!(arcs, 3 + 6 * ((1 << depth) - 1));
            assert_eq!(svg.matches(r#"class="doe""#).count(), 1);
            assert_eq!(svg, render_svg(&t, depth, &RenderOptions::default()));
        }
        let mut opts = RenderOptions::default();
        opts.dashed.insert(t.orbit_of(&OrientedEdge::standard()).unwrap());
        let svg = render_svg(&t, 2, &opts);
        assert!(svg.matches("stroke-dasharray").count() >= 1);
    }
}
