use crate::fem::VelocityField;
use crate::mesh::{Mesh, Subdomain};

/// Unknowns at one time level. Scalar fields use the global vertex numbering;
/// entries outside a field's subdomain are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub step: usize,
    pub velocity: VelocityField,
    pub pressure: Vec<f64>,
    /// Temperature, single-valued across the blood/tissue interface.
    pub theta: Vec<f64>,
    pub phi_blood: Vec<f64>,
    pub phi_tissue: Vec<f64>,
}

impl FieldState {
    /// Rest state at uniform temperature.
    pub fn initial(mesh: &Mesh, theta0: f64) -> Self {
        let nv = mesh.num_vertices();
        Self {
            t: 0.0,
            step: 0,
            velocity: VelocityField::zeros(mesh),
            pressure: vec![0.0; nv],
            theta: vec![theta0; nv],
            phi_blood: vec![0.0; nv],
            phi_tissue: vec![0.0; nv],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.velocity.is_finite()
            && [&self.pressure, &self.theta, &self.phi_blood, &self.phi_tissue]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Single potential field: blood values on blood vertices, tissue values
    /// elsewhere. Vertices on the interface belong to both potentials; the
    /// blood value is reported there.
    pub fn merged_potential(&self, mesh: &Mesh) -> Vec<f64> {
        let blood = mesh.vertex_mask(Subdomain::Blood);
        (0..mesh.num_vertices())
            .map(|v| if blood[v] { self.phi_blood[v] } else { self.phi_tissue[v] })
            .collect()
    }
}
