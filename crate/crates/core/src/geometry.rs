//! Planar primitives shared by every stage of the pipeline.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for coordinate comparisons, in meters.
pub const EPS: f64 = 1e-9;

/// A point in the floorplan plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

/// Signed area of the triangle (a, b, c) times two. Positive when counterclockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// True iff segments (p, q) and (c, d) cross at a single point interior to both.
///
/// Touching at an endpoint and collinear overlap are not crossings.
pub fn proper_crossing(p: Point2, q: Point2, c: Point2, d: Point2) -> bool {
    let o1 = sign(orient(p, q, c));
    let o2 = sign(orient(p, q, d));
    if o1 == 0 || o2 == 0 || o1 == o2 {
        return false;
    }
    let o3 = sign(orient(c, d, p));
    let o4 = sign(orient(c, d, q));
    o3 != 0 && o4 != 0 && o3 != o4
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_touch(p: Point2, q: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient(p, q, c);
    let o2 = orient(p, q, d);
    let o3 = orient(c, d, p);
    let o4 = orient(c, d, q);
    let scale = (q - p).norm().max((d - c).norm()).max(1.0);
    let tol = EPS * scale;
    let s = |v: f64| {
        if v > tol {
            1
        } else if v < -tol {
            -1
        } else {
            0
        }
    };
    let (s1, s2, s3, s4) = (s(o1), s(o2), s(o3), s(o4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    let on = |a: Point2, b: Point2, x: Point2, sx: i32| {
        sx == 0
            && x.x >= a.x.min(b.x) - tol
            && x.x <= a.x.max(b.x) + tol
            && x.y >= a.y.min(b.y) - tol
            && x.y <= a.y.max(b.y) + tol
    };
    on(p, q, c, s1) || on(p, q, d, s2) || on(c, d, p, s3) || on(c, d, q, s4)
}

/// Closest point on segment (a, b) to p and its parameter in [0, 1].
pub fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> (Point2, f64) {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (a.lerp(b, t), t)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    closest_on_segment(p, a, b).0.dist(p)
}

/// Twice the signed area of a ring (positive for counterclockwise).
pub fn ring_signed_area2(ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(ring[(i + 1) % n])).sum()
}

/// Even-odd point-in-ring test. Points on the boundary may go either way.
pub fn point_in_ring(p: Point2, ring: &[Point2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Edges of a closed ring as (start, end) pairs.
pub fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

/// True iff no two edges of the ring intersect other than adjacent edges at their shared vertex.
pub fn ring_is_simple(ring: &[Point2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if a.dist(b) <= EPS {
            return false;
        }
        for j in (i + 1)..n {
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges may only share their common vertex: reject folding back.
                let (shared, other_a, other_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let u = other_a - shared;
                let v = other_b - shared;
                if u.cross(v).abs() <= EPS * u.norm() * v.norm() && u.dot(v) > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_touch(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Intersection parameters (t on p->q, u on c->d) of two lines, if not parallel.
pub fn line_intersection(p: Point2, q: Point2, c: Point2, d: Point2) -> Option<(f64, f64)> {
    let r = q - p;
    let s = d - c;
    let denom = r.cross(s);
    if denom.abs() < 1e-300 {
        return None;
    }
    let cp = c - p;
    Some((cp.cross(s) / denom, cp.cross(r) / denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn crossing_excludes_endpoint_touch() {
        assert!(proper_crossing(p(0., 0.), p(2., 0.), p(1., -1.), p(1., 1.)));
        assert!(!proper_crossing(p(0., 0.), p(2., 0.), p(1., 0.), p(1., 1.)));
        assert!(!proper_crossing(p(0., 0.), p(2., 0.), p(1., 0.), p(3., 0.)));
        assert!(!proper_crossing(p(0., 0.), p(1., 0.), p(1., -1.), p(1., 1.)));
    }

    #[test]
    fn ring_area_and_containment() {
        let sq = [p(0., 0.), p(2., 0.), p(2., 2.), p(0., 2.)];
        assert_eq!(ring_signed_area2(&sq), 8.0);
        assert!(point_in_ring(p(1., 1.), &sq));
        assert!(!point_in_ring(p(3., 1.), &sq));
        assert!(ring_is_simple(&sq));
        let bow = [p(0., 0.), p(2., 2.), p(2., 0.), p(0., 2.)];
        assert!(!ring_is_simple(&bow));
    }

    #[test]
    fn closest_point_clamps() {
        let (c, t) = closest_on_segment(p(5., 1.), p(0., 0.), p(2., 0.));
        assert_eq!(c, p(2., 0.));
        assert_eq!(t, 1.0);
        assert!((point_segment_distance(p(1., 3.), p(0., 0.), p(2., 0.)) - 3.0).abs() < 1e-12);
    }
}
