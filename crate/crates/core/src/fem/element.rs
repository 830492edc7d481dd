//! Per-triangle geometry, P1 and bubble shape functions, and local matrices
//! of the velocity/pressure forms.
//!
//! Local velocity unknowns are numbered `k + 4c`: `k = 0..3` are the vertex
//! hats, `k = 3` the bubble, `c` the component.

use super::quadrature::triangle_rule;
use crate::mesh::Point;

/// Number of local velocity unknowns (4 shape functions × 2 components).
pub const NV_LOC: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub points: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates (constant on the triangle).
    pub grad: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(points: [Point; 3]) -> Self {
        let [a, b, c] = points;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let area = 0.5 * det;
        let grad = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        Self { points, area, grad }
    }

    pub fn map(&self, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.points;
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Gradient of a P1 function with vertex values `v`.
    pub fn p1_gradient(&self, v: [f64; 3]) -> [f64; 2] {
        let g = &self.grad;
        [
            v[0] * g[0][0] + v[1] * g[1][0] + v[2] * g[2][0],
            v[0] * g[0][1] + v[1] * g[1][1] + v[2] * g[2][1],
        ]
    }

    /// Values and gradients of the four velocity shape functions
    /// (three hats and the bubble `27 λ0 λ1 λ2`) at barycentric `l`.
    pub fn velocity_basis(&self, l: [f64; 3]) -> ([f64; 4], [[f64; 2]; 4]) {
        let g = &self.grad;
        let bubble = 27.0 * l[0] * l[1] * l[2];
        let db = [
            27.0 * (l[1] * l[2] * g[0][0] + l[0] * l[2] * g[1][0] + l[0] * l[1] * g[2][0]),
            27.0 * (l[1] * l[2] * g[0][1] + l[0] * l[2] * g[1][1] + l[0] * l[1] * g[2][1]),
        ];
        ([l[0], l[1], l[2], bubble], [g[0], g[1], g[2], db])
    }
}

/// Velocity value at barycentric `l` from local coefficients
/// `w[k] = (w_x, w_y)` of the four shape functions.
pub fn velocity_at(values: &[f64; 4], w: &[[f64; 2]; 4]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for k in 0..4 {
        out[0] += values[k] * w[k][0];
        out[1] += values[k] * w[k][1];
    }
    out
}

pub type LocalVelocityMatrix = [[f64; NV_LOC]; NV_LOC];

/// `∫ ψ_i · ψ_j` for vector shape functions.
pub fn local_velocity_mass(e: &ElementGeometry) -> LocalVelocityMatrix {
    let mut m = [[0.0; NV_LOC]; NV_LOC];
    for q in triangle_rule() {
        let (phi, _) = e.velocity_basis(q.bary);
        let w = q.weight * e.area;
        for a in 0..4 {
            for b in 0..4 {
                let v = w * phi[a] * phi[b];
                m[a][b] += v;
                m[a + 4][b + 4] += v;
            }
        }
    }
    m
}

/// `∫ ν 𝔻(ψ_j) : 𝔻(ψ_i)` with constant `ν`; for scalar shapes `a, b` and
/// components `c, d` the integrand is `½ (δ_cd ∇a·∇b + ∂_d a ∂_c b)`.
pub fn local_viscous(e: &ElementGeometry, nu: f64) -> LocalVelocityMatrix {
    let mut m = [[0.0; NV_LOC]; NV_LOC];
    for q in triangle_rule() {
        let (_, dphi) = e.velocity_basis(q.bary);
        let w = 0.5 * nu * q.weight * e.area;
        for a in 0..4 {
            for b in 0..4 {
                let dot = dphi[a][0] * dphi[b][0] + dphi[a][1] * dphi[b][1];
                for c in 0..2 {
                    for d in 0..2 {
                        let diag = if c == d { dot } else { 0.0 };
                        m[a + 4 * c][b + 4 * d] += w * (diag + dphi[a][d] * dphi[b][c]);
                    }
                }
            }
        }
    }
    m
}

/// Skew-symmetrised convection `½[∫(w·∇ψ_j)·ψ_i − ∫(w·∇ψ_i)·ψ_j]`, built as
/// an exact negation so the matrix is antisymmetric to the last bit.
pub fn local_convection_skew(e: &ElementGeometry, w: &[[f64; 2]; 4]) -> LocalVelocityMatrix {
    let mut plain = [[0.0; 4]; 4];
    for q in triangle_rule() {
        let (phi, dphi) = e.velocity_basis(q.bary);
        let wq = velocity_at(&phi, w);
        let weight = q.weight * e.area;
        for i in 0..4 {
            for j in 0..4 {
                plain[i][j] += weight * (wq[0] * dphi[j][0] + wq[1] * dphi[j][1]) * phi[i];
            }
        }
    }
    let mut m = [[0.0; NV_LOC]; NV_LOC];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = 0.5 * (plain[i][j] - plain[j][i]);
            for c in 0..2 {
                m[i + 4 * c][j + 4 * c] = v;
                m[j + 4 * c][i + 4 * c] = -v;
            }
        }
    }
    m
}

/// `B[q][(k,c)] = ∫ λ_q ∂_c ψ_k`.
pub fn local_divergence(e: &ElementGeometry) -> [[f64; NV_LOC]; 3] {
    let mut m = [[0.0; NV_LOC]; 3];
    for q in triangle_rule() {
        let (phi, dphi) = e.velocity_basis(q.bary);
        let w = q.weight * e.area;
        for p in 0..3 {
            for k in 0..4 {
                for c in 0..2 {
                    m[p][k + 4 * c] += w * phi[p] * dphi[k][c];
                }
            }
        }
    }
    m
}

/// `∫ f · ψ_i` for a vector load evaluated at physical points.
pub fn local_velocity_load(e: &ElementGeometry, f: &dyn Fn(Point) -> [f64; 2]) -> [f64; NV_LOC] {
    let mut out = [0.0; NV_LOC];
    for q in triangle_rule() {
        let (phi, _) = e.velocity_basis(q.bary);
        let fq = f(e.map(q.bary));
        let w = q.weight * e.area;
        for k in 0..4 {
            out[k] += w * fq[0] * phi[k];
            out[k + 4] += w * fq[1] * phi[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ElementGeometry {
        ElementGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    }

    fn skewed() -> ElementGeometry {
        ElementGeometry::new([[0.1, -0.2], [1.3, 0.4], [0.2, 0.9]])
    }

    #[test]
    fn barycentric_gradients() {
        let e = reference();
        assert_eq!(e.area, 0.5);
        assert_eq!(e.grad, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
        let e = skewed();
        let g = e.p1_gradient([1.0, 1.0, 1.0]);
        assert!(g[0].abs() < 1e-14 && g[1].abs() < 1e-14);
        // gradient of x
        let xs = e.points.map(|p| p[0]);
        let g = e.p1_gradient(xs);
        assert!((g[0] - 1.0).abs() < 1e-14 && g[1].abs() < 1e-14);
    }

    #[test]
    fn bubble_vanishes_on_edges_and_peaks_at_centroid() {
        let e = skewed();
        let (phi, _) = e.velocity_basis([0.3, 0.7, 0.0]);
        assert_eq!(phi[3], 0.0);
        let (phi, _) = e.velocity_basis([1.0 / 3.0; 3]);
        assert!((phi[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn velocity_mass_of_hat_and_bubble() {
        let e = reference();
        let m = local_velocity_mass(&e);
        // ∫λ0² = A/6, ∫λ0 λ1 = A/12, ∫b λ0 = 27·2A·2!/6! = 3A/20, ∫b² = 27²·2A·8/8! = 81A/280
        let a = e.area;
        assert!((m[0][0] - a / 6.0).abs() < 1e-14);
        assert!((m[0][1] - a / 12.0).abs() < 1e-14);
        assert!((m[0][3] - 3.0 * a / 20.0).abs() < 1e-14);
        assert!((m[3][3] - 81.0 * a / 280.0).abs() < 1e-13);
        assert_eq!(m[0][4], 0.0);
    }

    #[test]
    fn viscous_energy_of_linear_shear() {
        // u = (x, 0): 𝔻 = diag(1, 0), so ∫ 𝔻(u):𝔻(u) = area
        let e = skewed();
        let nu = 2.5;
        let k = local_viscous(&e, nu);
        let mut u = [0.0; NV_LOC];
        for v in 0..3 {
            u[v] = e.points[v][0];
        }
        let energy: f64 = (0..NV_LOC).map(|i| (0..NV_LOC).map(|j| u[i] * k[i][j] * u[j]).sum::<f64>()).sum();
        assert!((energy - nu * e.area).abs() < 1e-13, "{energy}");
        // u = (y, x) is a pure strain with 𝔻 = [[0,1],[1,0]], |𝔻|² = 2
        let mut u = [0.0; NV_LOC];
        for v in 0..3 {
            u[v] = e.points[v][1];
            u[v + 4] = e.points[v][0];
        }
        let energy: f64 = (0..NV_LOC).map(|i| (0..NV_LOC).map(|j| u[i] * k[i][j] * u[j]).sum::<f64>()).sum();
        assert!((energy - 2.0 * nu * e.area).abs() < 1e-13, "{energy}");
    }

    #[test]
    fn rigid_motions_in_viscous_kernel() {
        let e = skewed();
        let k = local_viscous(&e, 1.0);
        let mut trans = [0.0; NV_LOC];
        let mut rot = [0.0; NV_LOC];
        for v in 0..3 {
            trans[v] = 1.0;
            trans[v + 4] = 1.0;
            rot[v] = -e.points[v][1];
            rot[v + 4] = e.points[v][0];
        }
        for u in [trans, rot] {
            for row in &k {
                let r: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
                assert!(r.abs() < 1e-13, "{r}");
            }
        }
    }

    #[test]
    fn divergence_of_linear_field() {
        // u = (x, 0): ∫ λ_q ∇·u = A/3 for every q
        let e = skewed();
        let b = local_divergence(&e);
        for row in &b {
            let s: f64 = (0..3).map(|v| row[v] * e.points[v][0]).sum();
            assert!((s - e.area / 3.0).abs() < 1e-14);
        }
        // bubble column: ∫ λ_q ∂_x b = −∫ b ∂_x λ_q = −(9A/20) ∂_x λ_q
        for q in 0..3 {
            assert!((b[q][3] + 9.0 * e.area / 20.0 * e.grad[q][0]).abs() < 1e-13);
            assert!((b[q][7] + 9.0 * e.area / 20.0 * e.grad[q][1]).abs() < 1e-13);
        }
    }

    #[test]
    fn skew_convection_is_antisymmetric() {
        let e = skewed();
        let w = [[0.3, -1.2], [2.0, 0.1], [-0.7, 0.4], [0.9, 0.9]];
        let m = local_convection_skew(&e, &w);
        for i in 0..NV_LOC {
            for j in 0..NV_LOC {
                assert_eq!(m[i][j], -m[j][i]);
            }
        }
    }
}
