//! Tagged two-subdomain triangulations of the blood channel and tissue slab.

mod delaunay;
mod generate;
mod io;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use generate::{build_channel_tissue_mesh, rectangle_mesh, GeometryParams};
pub use io::{load_mesh, parse_mesh, write_mesh, mesh_to_string};

pub type Point = [f64; 2];

/// Boundary labels Σ1…Σ8 of the channel/tissue configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum BoundaryTag {
    /// Σ1, channel inflow wall `x = 0`, `y > 0`.
    Inlet = 1,
    /// Σ2, channel top wall `y = H`.
    ChannelTop = 2,
    /// Σ3, channel outflow wall `x = L`, `y > 0`.
    Outlet = 3,
    /// Σ4, tissue left wall.
    TissueLeft = 4,
    /// Σ5, tissue bottom wall.
    TissueBottom = 5,
    /// Σ6, tissue right wall.
    TissueRight = 6,
    /// Σ7, blood/tissue contact line `y = 0` away from the electrode.
    Interface = 7,
    /// Σ8, electrode surface.
    Electrode = 8,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 8] = [
        BoundaryTag::Inlet,
        BoundaryTag::ChannelTop,
        BoundaryTag::Outlet,
        BoundaryTag::TissueLeft,
        BoundaryTag::TissueBottom,
        BoundaryTag::TissueRight,
        BoundaryTag::Interface,
        BoundaryTag::Electrode,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get((index as usize).wrapping_sub(1)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Blood,
    Tissue,
}

impl Subdomain {
    pub fn code(self) -> u8 {
        match self {
            Subdomain::Blood => 0,
            Subdomain::Tissue => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Subdomain::Blood),
            1 => Some(Subdomain::Tissue),
            _ => None,
        }
    }
}

/// A mesh edge carrying a boundary label. `side` is the subdomain of the
/// adjacent triangle for boundary edges; interface edges touch both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    pub side: Option<Subdomain>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("mesher could not reach target size {target:.4}: achieved {achieved:.4} ({detail})")]
    MesherFailure {
        target: f64,
        achieved: f64,
        detail: String,
    },
    #[error("triangle {triangle} references missing vertex {vertex}")]
    VertexOutOfRange { triangle: usize, vertex: usize },
    #[error("triangle {triangle} has non-positive signed area {area:e}")]
    NonPositiveArea { triangle: usize, area: f64 },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonConforming(usize, usize),
    #[error("tagged edge ({0}, {1}) is not an edge of the mesh")]
    UnknownEdge(usize, usize),
    #[error("edge ({0}, {1}) carries more than one tag")]
    DuplicateTag(usize, usize),
    #[error("boundary edge ({0}, {1}) has no tag")]
    UntaggedBoundary(usize, usize),
    #[error("edge ({a}, {b}) tagged {tag:?} is interior to one subdomain")]
    InteriorTagged { a: usize, b: usize, tag: BoundaryTag },
    #[error("edge ({a}, {b}) between blood and tissue must carry the interface tag, found {tag:?}")]
    InterfaceTag { a: usize, b: usize, tag: BoundaryTag },
    #[error("required boundary tag absent: {0:?}")]
    MissingTag(BoundaryTag),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh i/o: {0}")]
    Io(String),
}

/// Immutable triangulation with per-triangle subdomain labels and tagged
/// boundary/interface edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    subdomain: Vec<Subdomain>,
    boundary_edges: Vec<TaggedEdge>,
    interface_edges: Vec<TaggedEdge>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(p: Point, q: Point, r: Point) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn dist(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

impl Mesh {
    /// Validates and assembles a mesh. Every topological boundary edge must be
    /// tagged; edges between a blood and a tissue triangle must carry Σ7.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        subdomain: Vec<Subdomain>,
        tagged: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Self, MeshError> {
        if subdomain.len() != triangles.len() {
            return Err(MeshError::Geometry(format!(
                "{} subdomain labels for {} triangles",
                subdomain.len(),
                triangles.len()
            )));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { triangle: t, vertex: v });
                }
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(MeshError::NonPositiveArea { triangle: t, area });
            }
        }

        let mut edge_tris: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                let owners = edge_tris.entry(key).or_default();
                owners.push(t);
                if owners.len() > 2 {
                    return Err(MeshError::NonConforming(key.0, key.1));
                }
            }
        }

        let mut tags: BTreeMap<(usize, usize), BoundaryTag> = BTreeMap::new();
        for (e, tag) in tagged {
            let key = edge_key(e[0], e[1]);
            if !edge_tris.contains_key(&key) {
                return Err(MeshError::UnknownEdge(key.0, key.1));
            }
            if tags.insert(key, tag).is_some() {
                return Err(MeshError::DuplicateTag(key.0, key.1));
            }
        }

        let mut boundary_edges = Vec::new();
        let mut interface_edges = Vec::new();
        for (key, owners) in &edge_tris {
            let tag = tags.get(key).copied();
            match owners.as_slice() {
                [t] => {
                    let tag = tag.ok_or(MeshError::UntaggedBoundary(key.0, key.1))?;
                    // keep the orientation of the owning triangle
                    let tri = triangles[*t];
                    let k = (0..3)
                        .find(|&k| edge_key(tri[k], tri[(k + 1) % 3]) == *key)
                        .expect("edge belongs to triangle");
                    boundary_edges.push(TaggedEdge {
                        vertices: [tri[k], tri[(k + 1) % 3]],
                        tag,
                        side: Some(subdomain[*t]),
                    });
                }
                [t0, t1] => {
                    let mixed = subdomain[*t0] != subdomain[*t1];
                    match (mixed, tag) {
                        (true, Some(BoundaryTag::Interface)) => interface_edges.push(TaggedEdge {
                            vertices: [key.0, key.1],
                            tag: BoundaryTag::Interface,
                            side: None,
                        }),
                        (true, Some(other)) => {
                            return Err(MeshError::InterfaceTag { a: key.0, b: key.1, tag: other })
                        }
                        (true, None) => {
                            return Err(MeshError::InterfaceTag {
                                a: key.0,
                                b: key.1,
                                tag: BoundaryTag::Interface,
                            })
                        }
                        (false, Some(tag)) => {
                            return Err(MeshError::InteriorTagged { a: key.0, b: key.1, tag })
                        }
                        (false, None) => {}
                    }
                }
                _ => unreachable!("checked above"),
            }
        }
        boundary_edges.sort_by_key(|e| (e.tag, edge_key(e.vertices[0], e.vertices[1])));

        Ok(Self {
            vertices,
            triangles,
            subdomain,
            boundary_edges,
            interface_edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn subdomain(&self, triangle: usize) -> Subdomain {
        self.subdomain[triangle]
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomain
    }

    pub fn boundary_edges(&self) -> &[TaggedEdge] {
        &self.boundary_edges
    }

    pub fn interface_edges(&self) -> &[TaggedEdge] {
        &self.interface_edges
    }

    /// Boundary and interface edges together.
    pub fn tagged_edges(&self) -> impl Iterator<Item = &TaggedEdge> {
        self.boundary_edges.iter().chain(self.interface_edges.iter())
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.tagged_edges().any(|e| e.tag == tag)
    }

    pub fn require_tag(&self, tag: BoundaryTag) -> Result<(), MeshError> {
        if self.has_tag(tag) {
            Ok(())
        } else {
            Err(MeshError::MissingTag(tag))
        }
    }

    pub fn vertices_with_tag(&self, tag: BoundaryTag) -> BTreeSet<usize> {
        self.tagged_edges()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.vertices)
            .collect()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        signed_area(p, q, r)
    }

    /// Element diameter: the longest edge.
    pub fn diameter(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        dist(p, q).max(dist(q, r)).max(dist(r, p))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [p, q, r] = self.triangle_points(t);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn subdomain_area(&self, s: Subdomain) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.subdomain[t] == s)
            .map(|t| self.area(t))
            .sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Diameter of the whole domain, taken as the bounding-box diagonal.
    pub fn domain_diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        dist(lo, hi)
    }

    /// `true` for every vertex touched by a triangle of subdomain `s`.
    pub fn vertex_mask(&self, s: Subdomain) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.subdomain[t] == s {
                for &v in tri {
                    mask[v] = true;
                }
            }
        }
        mask
    }

    /// Finds a triangle containing `p` and the barycentric coordinates of `p`
    /// in it. Points on shared edges resolve to the lowest triangle index.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let scale = self.domain_diameter().max(1.0);
        let tol = 1e-12 * scale;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(t);
            let area = signed_area(a, b, c);
            let l0 = signed_area(p, b, c) / area;
            let l1 = signed_area(a, p, c) / area;
            let l2 = 1.0 - l0 - l1;
            if l0 >= -tol && l1 >= -tol && l2 >= -tol {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }
}

/// Element-size and angle statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub h_min: f64,
    pub h_max: f64,
    /// Smallest interior angle, in degrees.
    pub min_angle: f64,
    /// Largest interior angle, in degrees.
    pub max_angle: f64,
    /// Every angle strictly below 90°.
    pub is_acute: bool,
}

fn angles_deg(p: [Point; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let a = p[k];
        let b = p[(k + 1) % 3];
        let c = p[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
        out[k] = cos.clamp(-1.0, 1.0).acos().to_degrees();
    }
    out
}

pub fn mesh_quality(mesh: &Mesh) -> QualityReport {
    let mut report = QualityReport {
        h_min: f64::INFINITY,
        h_max: 0.0,
        min_angle: 180.0,
        max_angle: 0.0,
        is_acute: true,
    };
    for t in 0..mesh.num_triangles() {
        let h = mesh.diameter(t);
        report.h_min = report.h_min.min(h);
        report.h_max = report.h_max.max(h);
        for angle in angles_deg(mesh.triangle_points(t)) {
            report.min_angle = report.min_angle.min(angle);
            report.max_angle = report.max_angle.max(angle);
            if angle >= 90.0 {
                report.is_acute = false;
            }
        }
    }
    report
}
