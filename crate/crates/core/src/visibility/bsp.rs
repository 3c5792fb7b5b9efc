//! Binary space partition over occluder segments.
//!
//! Each node splits the plane along the supporting line of the median
//! fragment. Fragments crossing a splitter are cut in two; every fragment
//! remembers the occluder it came from, and all intersection tests run
//! against the original occluder so results match a brute-force scan
//! exactly.

use crate::error::{Error, Result};
use crate::floorplan::Segment;
use crate::geometry::{self, Point2};

const SIDE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Fragment {
    a: Point2,
    b: Point2,
    source: usize,
}

#[derive(Debug, Clone)]
struct Node {
    origin: Point2,
    /// Unit direction of the splitting line.
    dir: Point2,
    coplanar: Vec<Fragment>,
    front: Option<usize>,
    back: Option<usize>,
}

impl Node {
    /// Signed distance of `p` from the splitting line, positive to the left.
    fn side(&self, p: Point2) -> f64 {
        self.dir.cross(p - self.origin)
    }
}

#[derive(Debug, Clone)]
pub struct BspTree {
    nodes: Vec<Node>,
    root: Option<usize>,
    occluders: Vec<Segment>,
}

enum Class {
    Front,
    Back,
    Both,
}

impl BspTree {
    /// Builds a balanced tree with no depth limit.
    pub fn build(occluders: &[Segment]) -> Result<Self> {
        if occluders.is_empty() {
            return Err(Error::Parameter("BSP tree needs at least one occluder".into()));
        }
        let frags: Vec<Fragment> = occluders
            .iter()
            .enumerate()
            .map(|(i, s)| Fragment {
                a: s.a,
                b: s.b,
                source: i,
            })
            .collect();
        let mut tree = BspTree {
            nodes: Vec::new(),
            root: None,
            occluders: occluders.to_vec(),
        };
        tree.root = tree.build_node(frags);
        Ok(tree)
    }

    fn build_node(&mut self, mut frags: Vec<Fragment>) -> Option<usize> {
        if frags.is_empty() {
            return None;
        }
        // Median fragment along the dominant axis of the midpoint cloud.
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for f in &frags {
            let m = f.a.lerp(f.b, 0.5);
            lo = Point2::new(lo.x.min(m.x), lo.y.min(m.y));
            hi = Point2::new(hi.x.max(m.x), hi.y.max(m.y));
        }
        let horizontal = hi.x - lo.x >= hi.y - lo.y;
        let key = |f: &Fragment| {
            let m = f.a.lerp(f.b, 0.5);
            if horizontal {
                (m.x, m.y)
            } else {
                (m.y, m.x)
            }
        };
        frags.sort_by(|f, g| {
            let (a, b) = (key(f), key(g));
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(f.source.cmp(&g.source))
        });
        let splitter = frags[frags.len() / 2];
        let dir = splitter.b - splitter.a;
        let dir = dir * (1.0 / dir.norm());
        let mut node = Node {
            origin: splitter.a,
            dir,
            coplanar: Vec::new(),
            front: None,
            back: None,
        };
        let mut front = Vec::new();
        let mut back = Vec::new();
        for f in frags {
            let sa = node.side(f.a);
            let sb = node.side(f.b);
            let ca = classify(sa);
            let cb = classify(sb);
            match (ca, cb) {
                (0, 0) => node.coplanar.push(f),
                (x, y) if x >= 0 && y >= 0 => front.push(f),
                (x, y) if x <= 0 && y <= 0 => back.push(f),
                _ => {
                    let t = sa / (sa - sb);
                    let m = f.a.lerp(f.b, t);
                    let first = Fragment { b: m, ..f };
                    let second = Fragment { a: m, ..f };
                    if sa > 0.0 {
                        front.push(first);
                        back.push(second);
                    } else {
                        back.push(first);
                        front.push(second);
                    }
                }
            }
        }
        let idx = self.nodes.len();
        self.nodes.push(node);
        let f = self.build_node(front);
        let b = self.build_node(back);
        self.nodes[idx].front = f;
        self.nodes[idx].back = b;
        Some(idx)
    }

    pub fn occluders(&self) -> &[Segment] {
        &self.occluders
    }

    /// Number of fragments stored across all nodes (occluders plus splits).
    pub fn fragment_count(&self) -> usize {
        self.nodes.iter().map(|n| n.coplanar.len()).sum()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &BspTree, n: Option<usize>) -> usize {
            match n {
                None => 0,
                Some(i) => 1 + go(t, t.nodes[i].front).max(go(t, t.nodes[i].back)),
            }
        }
        go(self, self.root)
    }

    fn classify_points(node: &Node, pts: &[Point2]) -> Class {
        let mut front = true;
        let mut back = true;
        for &p in pts {
            let s = node.side(p);
            front &= s > SIDE_TOL;
            back &= s < -SIDE_TOL;
        }
        if front {
            Class::Front
        } else if back {
            Class::Back
        } else {
            Class::Both
        }
    }

    /// True iff the open segment (p, q) properly crosses no occluder.
    pub fn line_of_sight(&self, p: Point2, q: Point2) -> bool {
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            match Self::classify_points(node, &[p, q]) {
                Class::Front => stack.extend(node.front),
                Class::Back => stack.extend(node.back),
                Class::Both => {
                    for f in &node.coplanar {
                        let s = &self.occluders[f.source];
                        if geometry::proper_crossing(p, q, s.a, s.b) {
                            return false;
                        }
                    }
                    stack.extend(node.front);
                    stack.extend(node.back);
                }
            }
        }
        true
    }

    /// Indices of occluders that may intersect the convex polygon `region`, sorted and unique.
    pub fn occluders_near(&self, region: &[Point2]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            match Self::classify_points(node, region) {
                Class::Front => stack.extend(node.front),
                Class::Back => stack.extend(node.back),
                Class::Both => {
                    out.extend(node.coplanar.iter().map(|f| f.source));
                    stack.extend(node.front);
                    stack.extend(node.back);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn classify(s: f64) -> i8 {
    if s > SIDE_TOL {
        1
    } else if s < -SIDE_TOL {
        -1
    } else {
        0
    }
}

/// Brute-force line of sight over every occluder.
pub fn line_of_sight_brute(occluders: &[Segment], p: Point2, q: Point2) -> bool {
    !occluders
        .iter()
        .any(|s| geometry::proper_crossing(p, q, s.a, s.b))
}
