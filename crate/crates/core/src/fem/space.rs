use super::element::{velocity_at, ElementGeometry};
use super::quadrature::triangle_rule;
use super::FemError;
use crate::mesh::{Mesh, Point, Subdomain};

/// Which triangles a scalar space lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    All,
    Blood,
    Tissue,
}

impl Region {
    pub fn contains(self, s: Subdomain) -> bool {
        match self {
            Region::All => true,
            Region::Blood => s == Subdomain::Blood,
            Region::Tissue => s == Subdomain::Tissue,
        }
    }
}

impl From<Subdomain> for Region {
    fn from(s: Subdomain) -> Self {
        match s {
            Subdomain::Blood => Region::Blood,
            Subdomain::Tissue => Region::Tissue,
        }
    }
}

/// Continuous P1 space on a region. Dofs use the global vertex numbering;
/// vertices not touched by the region are inactive and carry zero rows in
/// every assembled matrix.
#[derive(Debug, Clone, Copy)]
pub struct ScalarSpace<'m> {
    pub mesh: &'m Mesh,
    pub region: Region,
}

impl<'m> ScalarSpace<'m> {
    pub fn new(mesh: &'m Mesh, region: Region) -> Self {
        Self { mesh, region }
    }

    pub fn ndofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mesh.num_triangles()).filter(|&t| self.region.contains(self.mesh.subdomain(t)))
    }

    pub fn active(&self) -> Vec<bool> {
        let mut mask = vec![false; self.ndofs()];
        for t in self.elements() {
            for v in self.mesh.triangles()[t] {
                mask[v] = true;
            }
        }
        mask
    }

    pub fn geometry(&self, t: usize) -> ElementGeometry {
        ElementGeometry::new(self.mesh.triangle_points(t))
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.mesh.vertices().iter().map(|&p| f(p)).collect()
    }
}

/// P1-bubble velocity space on the blood triangles. Full dof layout:
/// `c·nv + v` for vertex `v`, `2·nv + c·nt + t` for the bubble of triangle `t`.
#[derive(Debug, Clone, Copy)]
pub struct VelocitySpace<'m> {
    pub mesh: &'m Mesh,
}

impl<'m> VelocitySpace<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        Self { mesh }
    }

    pub fn ndofs(&self) -> usize {
        2 * (self.mesh.num_vertices() + self.mesh.num_triangles())
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mesh.num_triangles()).filter(|&t| self.mesh.subdomain(t) == Subdomain::Blood)
    }

    /// Global indices of the 8 local unknowns of triangle `t`.
    pub fn local_dofs(&self, t: usize) -> [usize; 8] {
        let nv = self.mesh.num_vertices();
        let nt = self.mesh.num_triangles();
        let tri = self.mesh.triangles()[t];
        let mut out = [0; 8];
        for c in 0..2 {
            for k in 0..3 {
                out[k + 4 * c] = c * nv + tri[k];
            }
            out[3 + 4 * c] = 2 * nv + c * nt + t;
        }
        out
    }
}

/// Discrete P1-bubble velocity: vertex values plus one bubble coefficient per
/// triangle. Tissue entries stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub nodal: Vec<[f64; 2]>,
    pub bubble: Vec<[f64; 2]>,
}

impl VelocityField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            nodal: vec![[0.0; 2]; mesh.num_vertices()],
            bubble: vec![[0.0; 2]; mesh.num_triangles()],
        }
    }

    /// Local shape-function coefficients on triangle `t`.
    pub fn local(&self, mesh: &Mesh, t: usize) -> [[f64; 2]; 4] {
        let [a, b, c] = mesh.triangles()[t];
        [self.nodal[a], self.nodal[b], self.nodal[c], self.bubble[t]]
    }

    pub fn value(&self, mesh: &Mesh, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let e = ElementGeometry::new(mesh.triangle_points(t));
        let (phi, _) = e.velocity_basis(bary);
        velocity_at(&phi, &self.local(mesh, t))
    }

    /// Largest Euclidean speed over the vertices and quadrature points of `t`.
    pub fn max_speed_on(&self, mesh: &Mesh, t: usize) -> f64 {
        let w = self.local(mesh, t);
        let mut m = 0.0f64;
        for v in &w[..3] {
            m = m.max(v[0].hypot(v[1]));
        }
        let e = ElementGeometry::new(mesh.triangle_points(t));
        for q in triangle_rule() {
            let (phi, _) = e.velocity_basis(q.bary);
            let u = velocity_at(&phi, &w);
            m = m.max(u[0].hypot(u[1]));
        }
        m
    }

    /// Flattens into the full dof layout of [`VelocitySpace`].
    pub fn to_vector(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * (self.nodal.len() + self.bubble.len()));
        for c in 0..2 {
            out.extend(self.nodal.iter().map(|v| v[c]));
        }
        for c in 0..2 {
            out.extend(self.bubble.iter().map(|v| v[c]));
        }
        out
    }

    pub fn from_vector(mesh: &Mesh, x: &[f64]) -> Result<Self, FemError> {
        let nv = mesh.num_vertices();
        let nt = mesh.num_triangles();
        if x.len() != 2 * (nv + nt) {
            return Err(FemError::DimensionMismatch {
                expected: 2 * (nv + nt),
                found: x.len(),
            });
        }
        Ok(Self {
            nodal: (0..nv).map(|v| [x[v], x[nv + v]]).collect(),
            bubble: (0..nt).map(|t| [x[2 * nv + t], x[2 * nv + nt + t]]).collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.nodal.iter().chain(&self.bubble).all(|v| v[0].is_finite() && v[1].is_finite())
    }
}

/// One real per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    values: Vec<f64>,
}

impl CoefficientField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn uniform(num_triangles: usize, value: f64) -> Self {
        Self {
            values: vec![value; num_triangles],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.values.iter().map(|v| v * s).collect())
    }

    /// Elementwise sum with another field.
    pub fn plus(&self, other: &CoefficientField) -> Self {
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// Checks positivity on the triangles of `space`.
    pub fn check_positive(&self, space: &ScalarSpace) -> Result<(), FemError> {
        for t in space.elements() {
            let v = self.values[t];
            if !(v > 0.0 && v.is_finite()) {
                return Err(FemError::NonPositiveCoefficient { element: t, value: v });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::rectangle_mesh;

    #[test]
    fn velocity_vector_round_trip() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 2, 2, Subdomain::Blood).unwrap();
        let mut u = VelocityField::zeros(&mesh);
        for (i, v) in u.nodal.iter_mut().enumerate() {
            *v = [i as f64, -(i as f64)];
        }
        u.bubble[3] = [0.5, 0.25];
        let x = u.to_vector();
        assert_eq!(x.len(), VelocitySpace::new(&mesh).ndofs());
        assert_eq!(VelocityField::from_vector(&mesh, &x).unwrap(), u);
        let dofs = VelocitySpace::new(&mesh).local_dofs(3);
        assert_eq!(x[dofs[3]], 0.5);
        assert_eq!(x[dofs[7]], 0.25);
    }

    #[test]
    fn restricted_space_activity() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 2, 2, Subdomain::Tissue).unwrap();
        assert!(ScalarSpace::new(&mesh, Region::Blood).active().iter().all(|a| !a));
        assert!(ScalarSpace::new(&mesh, Region::Tissue).active().iter().all(|a| *a));
    }
}
