use std::f64::consts::PI;

use super::delaunay::{Segment, Triangulator};
use super::{BoundaryTag, Mesh, MeshError, Point, Subdomain};

/// Channel/tissue geometry: blood occupies `(0,L)×(0,H)` minus a half-disc
/// electrode of radius `r` centred at `(L/2, 0)`; tissue occupies
/// `(0,L)×(-H_ts,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub length: f64,
    pub height: f64,
    pub electrode_radius: f64,
    pub tissue_depth: f64,
    /// Segments on the electrode half-circle.
    pub arc_segments: usize,
    pub mesh_size: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            length: 1.5,
            height: 1.0,
            electrode_radius: 0.075,
            tissue_depth: 0.5,
            arc_segments: 12,
            mesh_size: 0.05,
        }
    }
}

impl GeometryParams {
    pub fn validate(&self) -> Result<(), MeshError> {
        let GeometryParams {
            length: l,
            height: h,
            electrode_radius: r,
            tissue_depth: d,
            arc_segments,
            mesh_size,
        } = *self;
        let finite = [l, h, r, d, mesh_size].iter().all(|v| v.is_finite());
        if !finite {
            return Err(MeshError::Geometry("non-finite geometry parameter".into()));
        }
        if !(l > 0.0 && h > 0.0 && d > 0.0) {
            return Err(MeshError::Geometry("length, height and tissue depth must be > 0".into()));
        }
        if !(r > 0.0 && 2.0 * r < l) {
            return Err(MeshError::Geometry(format!("electrode radius {r} must satisfy 0 < 2r < L")));
        }
        if !(r < h && r < d) {
            return Err(MeshError::Geometry(format!(
                "electrode radius {r} must be smaller than the channel height and tissue depth"
            )));
        }
        if !(mesh_size > 0.0 && mesh_size <= r) {
            return Err(MeshError::Geometry(format!("mesh size {mesh_size} must satisfy 0 < h <= r")));
        }
        if arc_segments < 2 {
            return Err(MeshError::Geometry("electrode arc needs at least 2 segments".into()));
        }
        Ok(())
    }

    pub fn electrode_center(&self) -> Point {
        [0.5 * self.length, 0.0]
    }

    /// Closed-form area `L·H − πr²/2 + L·H_ts`.
    pub fn analytic_area(&self) -> f64 {
        self.length * self.height - 0.5 * PI * self.electrode_radius.powi(2) + self.length * self.tissue_depth
    }

    /// Whether `p` lies in the closed domain (outside the open electrode notch).
    pub fn contains(&self, p: Point) -> bool {
        let c = self.electrode_center();
        let in_box = p[0] >= 0.0 && p[0] <= self.length && p[1] >= -self.tissue_depth && p[1] <= self.height;
        let in_notch = p[1] > 0.0 && (p[0] - c[0]).hypot(p[1] - c[1]) < self.electrode_radius;
        in_box && !in_notch
    }
}

/// Builds the tagged channel/tissue triangulation.
///
/// Points come from three families: concentric rings about the electrode
/// whose radial and angular spacings match, a half-disc fan under the
/// electrode footprint, and a uniform background grid aligned with all
/// straight walls and `y = 0`. The union is Delaunay-triangulated and the
/// walls, the contact line and the electrode arc are recovered as edges.
pub fn build_channel_tissue_mesh(params: &GeometryParams) -> Result<Mesh, MeshError> {
    params.validate()?;
    let GeometryParams {
        length: l,
        height: h,
        electrode_radius: r,
        tissue_depth: d,
        arc_segments: n_arc,
        mesh_size,
    } = *params;
    let c = params.electrode_center();
    let failure = |detail: String| MeshError::MesherFailure {
        target: mesh_size,
        achieved: f64::NAN,
        detail,
    };

    let nx = (l / mesh_size).ceil() as usize;
    let hx = l / nx as f64;
    let ny_b = (h / mesh_size).ceil() as usize;
    let ny_t = (d / mesh_size).ceil() as usize;

    let dtheta = PI / n_arc as f64;
    let room = 0.6 * h.min(d).min(c[0]);
    let mut radii = vec![r];
    loop {
        let last = *radii.last().expect("non-empty");
        let next = last * (1.0 + dtheta);
        if last * dtheta >= 0.9 * hx || next > room {
            break;
        }
        radii.push(next);
    }
    let outer = *radii.last().expect("non-empty");
    let keep_out = outer + 0.5 * hx;

    let mut tri = Triangulator::new([0.0, -d], [l, h]);
    let insert = |tri: &mut Triangulator, p: Point| tri.insert(p).map_err(&failure);

    // contact line y = 0 first
    let mut axis: Vec<Point> = Vec::new();
    for i in 0..=nx {
        let x = i as f64 * hx;
        if (x - c[0]).abs() >= keep_out {
            axis.push([x, 0.0]);
        }
    }
    for &rho in &radii {
        axis.push([c[0] - rho, 0.0]);
        axis.push([c[0] + rho, 0.0]);
    }
    let fan_rings = ((n_arc as f64 / PI).round() as usize).saturating_sub(1).max(2);
    for k in 0..fan_rings {
        let s = r * k as f64 / fan_rings as f64;
        axis.push([c[0] - s, 0.0]);
        axis.push([c[0] + s, 0.0]);
    }
    axis.sort_by(|p, q| p[0].total_cmp(&q[0]));
    axis.dedup_by(|p, q| (p[0] - q[0]).abs() < 1e-12);
    let mut axis_ids = Vec::with_capacity(axis.len());
    for p in &axis {
        axis_ids.push(insert(&mut tri, *p)?);
    }

    // electrode arc (upper half of ring 0)
    let mut arc_ids = Vec::with_capacity(n_arc + 1);
    for k in 0..=n_arc {
        let t = k as f64 * dtheta;
        let p = if k == 0 {
            [c[0] + r, 0.0]
        } else if k == n_arc {
            [c[0] - r, 0.0]
        } else {
            [c[0] + r * t.cos(), r * t.sin()]
        };
        arc_ids.push(insert(&mut tri, p)?);
    }

    // remaining ring points, both half planes
    for (j, &rho) in radii.iter().enumerate() {
        for k in 1..(2 * n_arc) {
            if k == n_arc || (j == 0 && k < n_arc) {
                continue;
            }
            let t = k as f64 * dtheta;
            insert(&mut tri, [c[0] + rho * t.cos(), rho * t.sin()])?;
        }
    }

    // fan under the footprint
    for k in 1..fan_rings {
        let rho = r * k as f64 / fan_rings as f64;
        let m = ((n_arc * k) as f64 / fan_rings as f64).round().max(1.0) as usize;
        for i in 1..m {
            let t = PI + PI * i as f64 / m as f64;
            insert(&mut tri, [c[0] + rho * t.cos(), rho * t.sin()])?;
        }
    }

    // background grid
    let mut rows: Vec<f64> = (0..=ny_b).map(|j| h * j as f64 / ny_b as f64).collect();
    rows.extend((1..=ny_t).map(|j| -d * j as f64 / ny_t as f64));
    for &y in &rows {
        for i in 0..=nx {
            let x = i as f64 * hx;
            if (x - c[0]).hypot(y) < keep_out {
                continue;
            }
            insert(&mut tri, [x, y])?;
        }
    }

    // required segments
    let mut segments: Vec<(usize, usize, Segment)> = Vec::new();
    for w in axis_ids.windows(2) {
        segments.push((w[0], w[1], Segment::Straight));
    }
    for w in arc_ids.windows(2) {
        segments.push((w[0], w[1], Segment::Arc { center: c, radius: r }));
    }
    let on = |pred: &dyn Fn(Point) -> bool, key: &dyn Fn(Point) -> f64, pts: &[Point]| {
        let mut ids: Vec<usize> = (0..pts.len()).filter(|&i| pred(pts[i])).collect();
        ids.sort_by(|&a, &b| key(pts[a]).total_cmp(&key(pts[b])));
        ids
    };
    let eps = 1e-12 * (l + h + d);
    let walls: Vec<Vec<usize>> = {
        let pts = tri.points();
        vec![
            on(&|p| p[0].abs() < eps, &|p| p[1], pts),
            on(&|p| (p[0] - l).abs() < eps, &|p| p[1], pts),
            on(&|p| (p[1] - h).abs() < eps, &|p| p[0], pts),
            on(&|p| (p[1] + d).abs() < eps, &|p| p[0], pts),
        ]
    };
    for wall in walls {
        for w in wall.windows(2) {
            segments.push((w[0], w[1], Segment::Straight));
        }
    }
    let segments = tri.recover_segments(segments, 30).map_err(&failure)?;

    // drop the notch, label subdomains
    let points = tri.points().to_vec();
    let mut triangles = Vec::new();
    let mut subdomain = Vec::new();
    for t in tri.triangles() {
        let [a, b, q] = t.map(|v| points[v]);
        let g = [(a[0] + b[0] + q[0]) / 3.0, (a[1] + b[1] + q[1]) / 3.0];
        if g[1] > 0.0 && (g[0] - c[0]).hypot(g[1]) < r {
            continue;
        }
        if [a, b, q].iter().any(|p| p[1] > eps) && [a, b, q].iter().any(|p| p[1] < -eps) {
            return Err(failure(format!("triangle straddles the contact line near ({:.4}, {:.4})", g[0], g[1])));
        }
        triangles.push(t);
        subdomain.push(if g[1] > 0.0 { Subdomain::Blood } else { Subdomain::Tissue });
    }

    let is_arc: std::collections::HashSet<(usize, usize)> = segments
        .iter()
        .filter(|s| matches!(s.2, Segment::Arc { .. }))
        .map(|s| (s.0.min(s.1), s.0.max(s.1)))
        .collect();

    // compact vertex numbering
    let mut remap = vec![usize::MAX; points.len()];
    let mut vertices = Vec::new();
    for t in &mut triangles {
        for v in t.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = vertices.len();
                vertices.push(points[*v]);
            }
            *v = remap[*v];
        }
    }
    let arc_edges: std::collections::HashSet<(usize, usize)> = is_arc
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (remap[a], remap[b]);
            (x.min(y), x.max(y))
        })
        .collect();

    let mut owners: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            owners.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut tagged = Vec::new();
    for (&(a, b), ts) in &owners {
        let (pa, pb) = (vertices[a], vertices[b]);
        let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let tag = match ts.as_slice() {
            [t0, t1] => {
                if subdomain[*t0] != subdomain[*t1] {
                    Some(BoundaryTag::Interface)
                } else {
                    None
                }
            }
            [_] => {
                let tag = if arc_edges.contains(&(a, b)) {
                    BoundaryTag::Electrode
                } else if m[0].abs() < eps {
                    if m[1] > 0.0 {
                        BoundaryTag::Inlet
                    } else {
                        BoundaryTag::TissueLeft
                    }
                } else if (m[0] - l).abs() < eps {
                    if m[1] > 0.0 {
                        BoundaryTag::Outlet
                    } else {
                        BoundaryTag::TissueRight
                    }
                } else if (m[1] - h).abs() < eps {
                    BoundaryTag::ChannelTop
                } else if (m[1] + d).abs() < eps {
                    BoundaryTag::TissueBottom
                } else if m[1].abs() < eps && (m[0] - c[0]).abs() < r {
                    BoundaryTag::Electrode
                } else {
                    return Err(failure(format!("unclassified boundary edge at ({:.4}, {:.4})", m[0], m[1])));
                };
                Some(tag)
            }
            _ => None,
        };
        if let Some(tag) = tag {
            tagged.push(([a, b], tag));
        }
    }

    let mesh = Mesh::new(vertices, triangles, subdomain, tagged)?;
    let achieved = (0..mesh.num_triangles()).map(|t| mesh.diameter(t)).fold(0.0, f64::max);
    if achieved > 2.5 * mesh_size {
        return Err(MeshError::MesherFailure {
            target: mesh_size,
            achieved,
            detail: "largest element exceeds 2.5 h".into(),
        });
    }
    Ok(mesh)
}

/// Structured triangulation of `[x0,x1]×[y0,y1]` with `nx × ny` cells, each
/// split along alternating diagonals. All triangles get the same subdomain.
/// Walls are tagged left Σ1, top Σ2, right Σ3, bottom Σ7.
pub fn rectangle_mesh(
    lo: Point,
    hi: Point,
    nx: usize,
    ny: usize,
    subdomain: Subdomain,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 || !(hi[0] > lo[0] && hi[1] > lo[1]) {
        return Err(MeshError::Geometry("empty rectangle".into()));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64,
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, e) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, e]);
            } else {
                triangles.push([a, b, e]);
                triangles.push([b, c, e]);
            }
        }
    }
    let mut tagged = Vec::new();
    for i in 0..nx {
        tagged.push(([id(i, 0), id(i + 1, 0)], BoundaryTag::Interface));
        tagged.push(([id(i, ny), id(i + 1, ny)], BoundaryTag::ChannelTop));
    }
    for j in 0..ny {
        tagged.push(([id(0, j), id(0, j + 1)], BoundaryTag::Inlet));
        tagged.push(([id(nx, j), id(nx, j + 1)], BoundaryTag::Outlet));
    }
    let labels = vec![subdomain; triangles.len()];
    Mesh::new(vertices, triangles, labels, tagged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_electrode() {
        let p = GeometryParams {
            electrode_radius: 0.0,
            ..Default::default()
        };
        assert!(matches!(build_channel_tissue_mesh(&p), Err(MeshError::Geometry(_))));
    }

    #[test]
    fn rejects_mesh_coarser_than_electrode() {
        let p = GeometryParams {
            mesh_size: 0.1,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(MeshError::Geometry(_))));
    }

    #[test]
    fn rectangle_mesh_counts() {
        let m = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 4, 3, Subdomain::Blood).unwrap();
        assert_eq!(m.num_vertices(), 20);
        assert_eq!(m.num_triangles(), 24);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(m.boundary_edges().len(), 14);
    }

    fn default_mesh() -> (GeometryParams, Mesh) {
        let p = GeometryParams::default();
        let m = build_channel_tissue_mesh(&p).unwrap();
        (p, m)
    }

    #[test]
    fn default_mesh_area_and_arc() {
        let (p, m) = default_mesh();
        assert!((m.total_area() - 2.241164).abs() < 0.01 * 2.241164);
        assert!((p.analytic_area() - 2.241164).abs() < 1e-6);
        let arc: f64 = m
            .boundary_edges()
            .iter()
            .filter(|e| e.tag == BoundaryTag::Electrode && e.side == Some(Subdomain::Blood))
            .map(|e| {
                let [a, b] = e.vertices.map(|v| m.vertices()[v]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .sum();
        let exact = PI * p.electrode_radius;
        assert!(arc < exact && arc > 0.98 * exact, "arc {arc}");
    }

    #[test]
    fn default_mesh_notch_and_quality() {
        let (p, m) = default_mesh();
        let c = p.electrode_center();
        for t in 0..m.num_triangles() {
            let g = m.centroid(t);
            assert!(!(g[1] >= 0.0 && (g[0] - c[0]).hypot(g[1]) < p.electrode_radius));
            assert_eq!(m.subdomain(t) == Subdomain::Blood, g[1] > 0.0);
        }
        let q = crate::mesh::mesh_quality(&m);
        // golden values for the shipped default
        assert!(q.h_max / q.h_min <= 4.0, "{q:?}");
        assert!(q.min_angle > 30.0, "{q:?}");
        assert!(q.h_max <= 2.5 * p.mesh_size);
    }

    #[test]
    fn default_mesh_tags_cover_boundary() {
        let (p, m) = default_mesh();
        let eps = 1e-12;
        for tag in BoundaryTag::ALL {
            assert!(m.has_tag(tag), "{tag:?} missing");
        }
        for e in m.tagged_edges() {
            let [a, b] = e.vertices.map(|v| m.vertices()[v]);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let ok = match e.tag {
                BoundaryTag::Inlet => mid[0].abs() < eps && mid[1] > 0.0,
                BoundaryTag::ChannelTop => (mid[1] - p.height).abs() < eps,
                BoundaryTag::Outlet => (mid[0] - p.length).abs() < eps && mid[1] > 0.0,
                BoundaryTag::TissueLeft => mid[0].abs() < eps && mid[1] < 0.0,
                BoundaryTag::TissueBottom => (mid[1] + p.tissue_depth).abs() < eps,
                BoundaryTag::TissueRight => (mid[0] - p.length).abs() < eps && mid[1] < 0.0,
                BoundaryTag::Interface => {
                    a[1].abs() < eps && b[1].abs() < eps && (mid[0] - 0.75).abs() >= p.electrode_radius
                }
                BoundaryTag::Electrode => {
                    let ra = (a[0] - 0.75).hypot(a[1]);
                    let rb = (b[0] - 0.75).hypot(b[1]);
                    let on_arc = (ra - p.electrode_radius).abs() < 1e-9 && (rb - p.electrode_radius).abs() < 1e-9;
                    let footprint = a[1].abs() < eps && b[1].abs() < eps && (mid[0] - 0.75).abs() < p.electrode_radius;
                    on_arc || footprint
                }
            };
            assert!(ok, "{:?} edge at {mid:?}", e.tag);
        }
        // interface vertices are shared by both subdomains
        let blood = m.vertex_mask(Subdomain::Blood);
        let tissue = m.vertex_mask(Subdomain::Tissue);
        for e in m.interface_edges() {
            for v in e.vertices {
                assert!(blood[v] && tissue[v]);
            }
        }
    }

    #[test]
    fn refined_mesh_improves_area() {
        let p = GeometryParams {
            mesh_size: 0.025,
            arc_segments: 24,
            ..Default::default()
        };
        let m = build_channel_tissue_mesh(&p).unwrap();
        let coarse = build_channel_tissue_mesh(&GeometryParams::default()).unwrap();
        let err = |m: &Mesh| (m.total_area() - p.analytic_area()).abs();
        assert!(err(&m) < err(&coarse));
    }

    #[test]
    fn contains_excludes_notch() {
        let p = GeometryParams::default();
        assert!(!p.contains([0.75, 0.03]));
        assert!(p.contains([0.75, -0.03]));
        assert!(p.contains([0.75, 0.15]));
        assert!(!p.contains([1.6, 0.5]));
    }
}
