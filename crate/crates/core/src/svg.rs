//! SVG rendering of floorplans, skeletons, and networks.
//!
//! Layer ids, bottom to top: `floorplan` (black), `skeleton` (gray),
//! `candidates` (hollow circles), `joints` (blue), `midpoints` (purple),
//! `edges` (green, width proportional to overlap), `selected` (red),
//! `connectors` (orange).

use std::fmt::Write;

use crate::floorplan::{Floorplan, SegmentKind};
use crate::geometry::Point2;
use crate::pipeline::PlanResult;
use crate::skeleton::{ConvergingPoint, PointKind, SkeletonGrid};

/// Maps floorplan meters to SVG user units with y pointing down.
struct View {
    lo: Point2,
    hi: Point2,
    scale: f64,
}

impl View {
    fn new(fp: &Floorplan) -> Self {
        let (lo, hi) = fp.bounds();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        View {
            lo,
            hi,
            scale: 1000.0 / span,
        }
    }

    fn x(&self, p: Point2) -> f64 {
        (p.x - self.lo.x) * self.scale + 10.0
    }

    fn y(&self, p: Point2) -> f64 {
        (self.hi.y - p.y) * self.scale + 10.0
    }

    fn header(&self, out: &mut String) {
        let w = (self.hi.x - self.lo.x) * self.scale + 20.0;
        let h = (self.hi.y - self.lo.y) * self.scale + 20.0;
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
        );
    }
}

fn floorplan_layer(out: &mut String, v: &View, fp: &Floorplan) {
    out.push_str("<g id=\"floorplan\" fill=\"none\" stroke=\"black\" stroke-width=\"2\">\n");
    for w in fp.walls() {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            v.x(w.a),
            v.y(w.a),
            v.x(w.b),
            v.y(w.b)
        );
    }
    for o in fp.openings() {
        let color = if o.kind == SegmentKind::Window { "deepskyblue" } else { "tan" };
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            v.x(o.a),
            v.y(o.a),
            v.x(o.b),
            v.y(o.b)
        );
    }
    out.push_str("</g>\n");
}

fn skeleton_layer(out: &mut String, v: &View, sk: &SkeletonGrid) {
    let side = (sk.spec.resolution * v.scale).max(0.5);
    out.push_str("<g id=\"skeleton\" fill=\"gray\" stroke=\"none\">\n<path d=\"");
    for c in sk.cells() {
        let p = sk.spec.center(c);
        let _ = write!(
            out,
            "M{:.2} {:.2}h{side:.2}v{side:.2}h-{side:.2}z",
            v.x(p) - side / 2.0,
            v.y(p) - side / 2.0
        );
    }
    out.push_str("\"/>\n</g>\n");
}

fn points_layer(out: &mut String, v: &View, id: &str, style: &str, r: f64, points: &[ConvergingPoint]) {
    let _ = writeln!(out, r#"<g id="{id}" {style}>"#);
    for p in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}"/>"#,
            v.x(p.position),
            v.y(p.position)
        );
    }
    out.push_str("</g>\n");
}

/// Skeleton with joint and midpoint markers over the floorplan.
pub fn render_skeleton(fp: &Floorplan, sk: &SkeletonGrid, points: &[ConvergingPoint]) -> String {
    let v = View::new(fp);
    let mut out = String::new();
    v.header(&mut out);
    floorplan_layer(&mut out, &v, fp);
    skeleton_layer(&mut out, &v, sk);
    markers(&mut out, &v, points);
    out.push_str("</svg>\n");
    out
}

fn markers(out: &mut String, v: &View, points: &[ConvergingPoint]) {
    let of = |k: PointKind| -> Vec<ConvergingPoint> { points.iter().filter(|p| p.kind == k).copied().collect() };
    points_layer(out, v, "joints", r#"fill="royalblue" stroke="none""#, 3.0, &of(PointKind::Joint));
    points_layer(
        out,
        v,
        "midpoints",
        r#"fill="purple" stroke="none""#,
        3.0,
        &of(PointKind::InsertedMidpoint),
    );
}

/// Floorplan, skeleton, candidates, and the selected network.
pub fn render_plan(r: &PlanResult) -> String {
    let fp = r.engine.floorplan();
    let v = View::new(fp);
    let mut out = String::new();
    v.header(&mut out);
    floorplan_layer(&mut out, &v, fp);
    skeleton_layer(&mut out, &v, &r.skeleton);
    points_layer(
        &mut out,
        &v,
        "candidates",
        r#"fill="none" stroke="dimgray" stroke-width="1""#,
        4.0,
        &r.candidates,
    );
    markers(&mut out, &v, &r.candidates);
    out.push_str("<g id=\"edges\" stroke=\"green\" stroke-linecap=\"round\">\n");
    for (a, b, o) in r.graph.induced_edges(&r.network.selected) {
        let (pa, pb) = (r.candidates[a].position, r.candidates[b].position);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-width="{:.2}"/>"#,
            v.x(pa),
            v.y(pa),
            v.x(pb),
            v.y(pb),
            0.5 + 5.0 * o
        );
    }
    out.push_str("</g>\n");
    let (cover, conn): (Vec<usize>, Vec<usize>) =
        r.network.selected.iter().partition(|&&s| !r.network.is_connector(s));
    let pick = |ids: &[usize]| -> Vec<ConvergingPoint> { ids.iter().map(|&i| r.candidates[i]).collect() };
    points_layer(&mut out, &v, "selected", r#"fill="red" stroke="none""#, 7.0, &pick(&cover));
    points_layer(&mut out, &v, "connectors", r#"fill="orange" stroke="none""#, 7.0, &pick(&conn));
    out.push_str("</svg>\n");
    out
}
