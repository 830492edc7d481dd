//! Global assembly of the scalar and velocity/pressure forms.
//!
//! Scalar matrices are `nv × nv` in the global vertex numbering, velocity
//! matrices use the full P1-bubble layout of [`VelocitySpace`]. Rows and
//! columns of dofs outside the space's region are left empty.

use super::element::{
    local_convection_skew, local_divergence, local_velocity_load, local_velocity_mass, local_viscous,
    ElementGeometry, LocalVelocityMatrix,
};
use super::quadrature::triangle_rule;
use super::space::{CoefficientField, ScalarSpace, VelocityField, VelocitySpace};
use super::FemError;
use crate::mesh::Point;
use crate::sparse::CsrMatrix;

type Triplets = Vec<(usize, usize, f64)>;

fn build(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
    CsrMatrix::from_triplets(rows, cols, triplets).expect("assembly indices are in range")
}

fn check_len(expected: usize, found: usize) -> Result<(), FemError> {
    if expected == found {
        Ok(())
    } else {
        Err(FemError::DimensionMismatch { expected, found })
    }
}

/// `∫ κ ∇α_j · ∇α_i` with a per-element coefficient `κ`.
pub fn assemble_stiffness(space: &ScalarSpace, coeff: &CoefficientField) -> Result<CsrMatrix, FemError> {
    check_len(space.mesh.num_triangles(), coeff.len())?;
    coeff.check_positive(space)?;
    let mut trip: Triplets = Vec::new();
    for t in space.elements() {
        let e = space.geometry(t);
        let tri = space.mesh.triangles()[t];
        let k = coeff.get(t) * e.area;
        for i in 0..3 {
            for j in 0..3 {
                let g = e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1];
                trip.push((tri[i], tri[j], k * g));
            }
        }
    }
    Ok(build(space.ndofs(), space.ndofs(), &trip))
}

/// Consistent mass `∫ α_j α_i`.
pub fn assemble_mass(space: &ScalarSpace) -> CsrMatrix {
    let mut trip: Triplets = Vec::new();
    for t in space.elements() {
        let area = space.mesh.area(t);
        let tri = space.mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                let v = if i == j { area / 6.0 } else { area / 12.0 };
                trip.push((tri[i], tri[j], v));
            }
        }
    }
    build(space.ndofs(), space.ndofs(), &trip)
}

/// Row-sum lumped mass `∫ α_i`.
pub fn lumped_mass(space: &ScalarSpace) -> Vec<f64> {
    let mut m = vec![0.0; space.ndofs()];
    for t in space.elements() {
        let third = space.mesh.area(t) / 3.0;
        for v in space.mesh.triangles()[t] {
            m[v] += third;
        }
    }
    m
}

/// `∫ (u·∇α_j) α_i` over the blood triangles of the space, with the full
/// P1-bubble velocity.
pub fn assemble_advection(space: &ScalarSpace, u: &VelocityField) -> Result<CsrMatrix, FemError> {
    let mesh = space.mesh;
    check_len(mesh.num_vertices(), u.nodal.len())?;
    check_len(mesh.num_triangles(), u.bubble.len())?;
    if !u.is_finite() {
        return Err(FemError::NonFinite("advecting velocity"));
    }
    let mut trip: Triplets = Vec::new();
    for t in space.elements().filter(|&t| mesh.subdomain(t) == crate::mesh::Subdomain::Blood) {
        let e = space.geometry(t);
        let tri = mesh.triangles()[t];
        let w = u.local(mesh, t);
        // ∫ u λ_i for each test function i
        let mut ul = [[0.0; 2]; 3];
        for q in triangle_rule() {
            let (phi, _) = e.velocity_basis(q.bary);
            let uq = super::element::velocity_at(&phi, &w);
            let wq = q.weight * e.area;
            for i in 0..3 {
                ul[i][0] += wq * uq[0] * phi[i];
                ul[i][1] += wq * uq[1] * phi[i];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let v = ul[i][0] * e.grad[j][0] + ul[i][1] * e.grad[j][1];
                trip.push((tri[i], tri[j], v));
            }
        }
    }
    Ok(build(space.ndofs(), space.ndofs(), &trip))
}

/// `∫ f α_i`.
pub fn assemble_load(space: &ScalarSpace, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; space.ndofs()];
    for t in space.elements() {
        let e = space.geometry(t);
        let tri = space.mesh.triangles()[t];
        for q in triangle_rule() {
            let fq = f(e.map(q.bary)) * q.weight * e.area;
            for i in 0..3 {
                b[tri[i]] += fq * q.bary[i];
            }
        }
    }
    b
}

/// Per-element Joule density `σ_K |∇φ_h|²_K`; zero outside the space's region.
pub fn joule_density(space: &ScalarSpace, sigma: &CoefficientField, phi: &[f64]) -> Result<CoefficientField, FemError> {
    check_len(space.mesh.num_triangles(), sigma.len())?;
    check_len(space.ndofs(), phi.len())?;
    let mut s = vec![0.0; space.mesh.num_triangles()];
    for t in space.elements() {
        let e = space.geometry(t);
        let tri = space.mesh.triangles()[t];
        let g = e.p1_gradient(tri.map(|v| phi[v]));
        s[t] = sigma.get(t) * (g[0] * g[0] + g[1] * g[1]);
    }
    Ok(CoefficientField::new(s))
}

/// Load vector `∫ σ|∇φ_h|² α_i` (each vertex receives a third of the
/// element's integral since the density is elementwise constant).
pub fn assemble_joule_load(space: &ScalarSpace, sigma: &CoefficientField, phi: &[f64]) -> Result<Vec<f64>, FemError> {
    let density = joule_density(space, sigma, phi)?;
    Ok(density_load(space, &density))
}

/// `∫ s α_i` for an elementwise constant `s`.
pub fn density_load(space: &ScalarSpace, density: &CoefficientField) -> Vec<f64> {
    let mut b = vec![0.0; space.ndofs()];
    for t in space.elements() {
        let share = density.get(t) * space.mesh.area(t) / 3.0;
        for v in space.mesh.triangles()[t] {
            b[v] += share;
        }
    }
    b
}

fn scatter_velocity(space: &VelocitySpace, local: impl Fn(usize, &ElementGeometry) -> LocalVelocityMatrix) -> CsrMatrix {
    let mut trip: Triplets = Vec::new();
    for t in space.elements() {
        let e = ElementGeometry::new(space.mesh.triangle_points(t));
        let m = local(t, &e);
        let dofs = space.local_dofs(t);
        for i in 0..8 {
            for j in 0..8 {
                if m[i][j] != 0.0 {
                    trip.push((dofs[i], dofs[j], m[i][j]));
                }
            }
        }
    }
    build(space.ndofs(), space.ndofs(), &trip)
}

pub fn assemble_velocity_mass(space: &VelocitySpace) -> CsrMatrix {
    scatter_velocity(space, |_, e| local_velocity_mass(e))
}

/// `∫ ν 𝔻(w) : 𝔻(ψ)` with a per-element viscosity.
pub fn assemble_viscous(space: &VelocitySpace, nu: &CoefficientField) -> Result<CsrMatrix, FemError> {
    check_len(space.mesh.num_triangles(), nu.len())?;
    for t in space.elements() {
        let v = nu.get(t);
        if !(v > 0.0 && v.is_finite()) {
            return Err(FemError::NonPositiveCoefficient { element: t, value: v });
        }
    }
    Ok(scatter_velocity(space, |t, e| local_viscous(e, nu.get(t))))
}

/// Skew-symmetrised convection with advecting velocity `w`; the result is
/// exactly antisymmetric.
pub fn assemble_convection_skew(space: &VelocitySpace, w: &VelocityField) -> Result<CsrMatrix, FemError> {
    check_len(space.mesh.num_vertices(), w.nodal.len())?;
    check_len(space.mesh.num_triangles(), w.bubble.len())?;
    if !w.is_finite() {
        return Err(FemError::NonFinite("convecting velocity"));
    }
    Ok(scatter_velocity(space, |t, e| local_convection_skew(e, &w.local(space.mesh, t))))
}

/// `B[q, ψ] = ∫ q ∇·ψ`, rows indexed by pressure (vertex) dofs.
pub fn assemble_divergence(space: &VelocitySpace) -> CsrMatrix {
    let mut trip: Triplets = Vec::new();
    for t in space.elements() {
        let e = ElementGeometry::new(space.mesh.triangle_points(t));
        let b = local_divergence(&e);
        let dofs = space.local_dofs(t);
        let tri = space.mesh.triangles()[t];
        for q in 0..3 {
            for j in 0..8 {
                trip.push((tri[q], dofs[j], b[q][j]));
            }
        }
    }
    build(space.mesh.num_vertices(), space.ndofs(), &trip)
}

/// `∫ f · ψ` for a vector load.
pub fn assemble_velocity_load(space: &VelocitySpace, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
    let mut b = vec![0.0; space.ndofs()];
    for t in space.elements() {
        let e = ElementGeometry::new(space.mesh.triangle_points(t));
        let l = local_velocity_load(&e, &f);
        for (i, d) in space.local_dofs(t).into_iter().enumerate() {
            b[d] += l[i];
        }
    }
    b
}
