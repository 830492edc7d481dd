//! Incremental Bowyer–Watson triangulation of points inside an axis-aligned
//! rectangle, with boundary-segment recovery by midpoint insertion.

use std::collections::HashMap;

use super::{signed_area, Point};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Segment {
    Straight,
    /// Circular arc about `center`; midpoints are projected back onto it.
    Arc { center: Point, radius: f64 },
}

pub(crate) struct Triangulator {
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    alive: Vec<bool>,
    // directed edge (a, b) -> triangle that has it counter-clockwise
    edges: HashMap<(usize, usize), usize>,
    scale: f64,
}

impl Triangulator {
    pub(crate) fn new(lo: Point, hi: Point) -> Self {
        let points = vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
        let scale = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        let mut tri = Self {
            points,
            triangles: Vec::new(),
            alive: Vec::new(),
            edges: HashMap::new(),
            scale,
        };
        tri.push_triangle([0, 1, 2]);
        tri.push_triangle([0, 2, 3]);
        tri
    }

    pub(crate) fn points(&self) -> &[Point] {
        &self.points
    }

    fn push_triangle(&mut self, t: [usize; 3]) {
        let id = self.triangles.len();
        for k in 0..3 {
            self.edges.insert((t[k], t[(k + 1) % 3]), id);
        }
        self.triangles.push(t);
        self.alive.push(true);
    }

    fn kill_triangle(&mut self, id: usize) {
        let t = self.triangles[id];
        for k in 0..3 {
            let key = (t[k], t[(k + 1) % 3]);
            if self.edges.get(&key) == Some(&id) {
                self.edges.remove(&key);
            }
        }
        self.alive[id] = false;
    }

    fn orient_tol(&self) -> f64 {
        1e-13 * self.scale * self.scale
    }

    fn in_circumcircle(&self, id: usize, p: Point) -> bool {
        let [a, b, c] = self.triangles[id].map(|v| self.points[v]);
        let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
        let (bx, by) = (b[0] - p[0], b[1] - p[1]);
        let (cx, cy) = (c[0] - p[0], c[1] - p[1]);
        let det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
            + (cx * cx + cy * cy) * (ax * by - bx * ay);
        // relative threshold so near-cocircular configurations count as outside
        let mag = (ax * ax + ay * ay) * (bx * cy).abs().max((cx * by).abs())
            + (bx * bx + by * by) * (ax * cy).abs().max((cx * ay).abs())
            + (cx * cx + cy * cy) * (ax * by).abs().max((bx * ay).abs());
        det > 1e-10 * mag
    }

    /// Inserts `p` and returns its index (or the index of a coincident point).
    pub(crate) fn insert(&mut self, p: Point) -> Result<usize, String> {
        let tol = self.orient_tol();
        let dup = 1e-12 * self.scale;
        if let Some(i) = self
            .points
            .iter()
            .position(|q| (q[0] - p[0]).abs() <= dup && (q[1] - p[1]).abs() <= dup)
        {
            return Ok(i);
        }

        let start = (0..self.triangles.len())
            .filter(|&t| self.alive[t])
            .find(|&t| {
                let [a, b, c] = self.triangles[t].map(|v| self.points[v]);
                signed_area(a, b, p) >= -tol && signed_area(b, c, p) >= -tol && signed_area(c, a, p) >= -tol
            })
            .ok_or_else(|| format!("point ({}, {}) outside the triangulation", p[0], p[1]))?;

        // cavity: connected set of triangles whose circumcircle contains p
        let mut in_cavity: HashMap<usize, bool> = HashMap::new();
        let mut cavity = vec![start];
        in_cavity.insert(start, true);
        let mut k = 0;
        while k < cavity.len() {
            let t = self.triangles[cavity[k]];
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if let Some(&nb) = self.edges.get(&(b, a)) {
                    if !in_cavity.contains_key(&nb) && self.in_circumcircle(nb, p) {
                        in_cavity.insert(nb, true);
                        cavity.push(nb);
                    }
                }
            }
            k += 1;
        }

        // make the cavity star-shaped with respect to p
        let mut skip_hull_edge: Option<(usize, usize)>;
        loop {
            skip_hull_edge = None;
            let mut changed = false;
            let members: Vec<usize> = cavity.iter().copied().filter(|t| in_cavity[t]).collect();
            'scan: for &t in &members {
                let tri = self.triangles[t];
                for e in 0..3 {
                    let (a, b) = (tri[e], tri[(e + 1) % 3]);
                    let nb = self.edges.get(&(b, a)).copied();
                    if nb.map(|n| in_cavity.get(&n).copied().unwrap_or(false)).unwrap_or(false) {
                        continue;
                    }
                    let o = signed_area(self.points[a], self.points[b], p);
                    if o > tol {
                        continue;
                    }
                    match nb {
                        None if o.abs() <= tol => {
                            skip_hull_edge = Some((a, b));
                        }
                        Some(n) if o.abs() <= tol => {
                            // p lies on an interior edge: take the other side too
                            in_cavity.insert(n, true);
                            cavity.push(n);
                            changed = true;
                            break 'scan;
                        }
                        _ => {
                            if t == start {
                                return Err(format!("degenerate cavity at ({}, {})", p[0], p[1]));
                            }
                            in_cavity.insert(t, false);
                            changed = true;
                            break 'scan;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let members: Vec<usize> = cavity.iter().copied().filter(|t| in_cavity[t]).collect();
        let mut boundary = Vec::new();
        let mut removed_area = 0.0;
        for &t in &members {
            let tri = self.triangles[t];
            removed_area += signed_area(self.points[tri[0]], self.points[tri[1]], self.points[tri[2]]);
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let nb = self.edges.get(&(b, a)).copied();
                let interior = nb.map(|n| in_cavity.get(&n).copied().unwrap_or(false)).unwrap_or(false);
                if !interior && Some((a, b)) != skip_hull_edge {
                    boundary.push((a, b));
                }
            }
        }
        let idx = self.points.len();
        self.points.push(p);
        let added_area: f64 = boundary
            .iter()
            .map(|&(a, b)| signed_area(self.points[a], self.points[b], p))
            .sum();
        if (added_area - removed_area).abs() > 1e-9 * removed_area.max(tol) {
            self.points.pop();
            return Err(format!("cavity area mismatch at ({}, {})", p[0], p[1]));
        }
        for &t in &members {
            self.kill_triangle(t);
        }
        for (a, b) in boundary {
            self.push_triangle([a, b, idx]);
        }
        Ok(idx)
    }

    pub(crate) fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a, b)) || self.edges.contains_key(&(b, a))
    }

    /// Inserts midpoints until every segment is an edge of the triangulation.
    /// Returns the final list of segments (split where needed).
    pub(crate) fn recover_segments(
        &mut self,
        mut segments: Vec<(usize, usize, Segment)>,
        max_rounds: usize,
    ) -> Result<Vec<(usize, usize, Segment)>, String> {
        for _ in 0..max_rounds {
            let mut next = Vec::with_capacity(segments.len());
            let mut missing = 0;
            for (a, b, kind) in segments {
                if self.has_edge(a, b) {
                    next.push((a, b, kind));
                    continue;
                }
                missing += 1;
                let (pa, pb) = (self.points[a], self.points[b]);
                let mid = match kind {
                    Segment::Straight => [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                    Segment::Arc { center, radius } => {
                        let ta = (pa[1] - center[1]).atan2(pa[0] - center[0]);
                        let tb = (pb[1] - center[1]).atan2(pb[0] - center[0]);
                        let tm = 0.5 * (ta + tb);
                        [center[0] + radius * tm.cos(), center[1] + radius * tm.sin()]
                    }
                };
                let m = self.insert(mid)?;
                next.push((a, m, kind));
                next.push((m, b, kind));
            }
            segments = next;
            if missing == 0 {
                return Ok(segments);
            }
        }
        Err(format!("{} segments still missing", segments.iter().filter(|s| !self.has_edge(s.0, s.1)).count()))
    }

    pub(crate) fn triangles(&self) -> Vec<[usize; 3]> {
        (0..self.triangles.len())
            .filter(|&t| self.alive[t])
            .map(|t| self.triangles[t])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_triangulate_the_square() {
        let mut tri = Triangulator::new([0.0, 0.0], [1.0, 1.0]);
        for i in 0..=4 {
            for j in 0..=4 {
                tri.insert([i as f64 * 0.25, j as f64 * 0.25]).unwrap();
            }
        }
        let tris = tri.triangles();
        assert_eq!(tri.points().len(), 25);
        assert_eq!(tris.len(), 32);
        let area: f64 = tris
            .iter()
            .map(|t| signed_area(tri.points()[t[0]], tri.points()[t[1]], tri.points()[t[2]]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!(tris
            .iter()
            .all(|t| signed_area(tri.points()[t[0]], tri.points()[t[1]], tri.points()[t[2]]) > 0.0));
    }

    #[test]
    fn segment_recovery_splits_missing_edges() {
        let mut tri = Triangulator::new([0.0, 0.0], [2.0, 1.0]);
        let a = tri.insert([0.2, 0.5]).unwrap();
        let b = tri.insert([1.8, 0.5]).unwrap();
        tri.insert([1.0, 0.55]).unwrap();
        tri.insert([1.0, 0.45]).unwrap();
        let segs = tri.recover_segments(vec![(a, b, Segment::Straight)], 20).unwrap();
        assert!(segs.len() > 1);
        assert!(segs.iter().all(|&(p, q, _)| tri.has_edge(p, q)));
    }
}
