//! Temperature-dependent conductivities and blood viscosity.

use thiserror::Error;

use crate::fem::CoefficientField;
use crate::mesh::{Mesh, Subdomain};

/// Floor applied to the linear laws so coefficients stay positive for
/// unphysical temperatures.
pub const COEFFICIENT_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("temperature is not a number")]
    NotANumber,
    #[error("element {element}: {source}")]
    Element {
        element: usize,
        #[source]
        source: Box<MaterialError>,
    },
    #[error("temperature vector has {found} entries, mesh has {expected} vertices")]
    Length { expected: usize, found: usize },
    #[error("invalid material parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel {
    /// Baseline electrical conductivity σ0.
    pub sigma0: f64,
    /// Baseline thermal conductivity η0.
    pub eta0: f64,
    /// Core temperature θ̄ in °C.
    pub theta_core: f64,
    /// Dynamic viscosity of blood.
    pub dynamic_viscosity: f64,
    pub density: f64,
    /// Relative slope `k_ν` of the optional linear viscosity law.
    pub viscosity_slope: f64,
    /// Factors multiplying `∂θ/∂t` in blood and tissue.
    pub blood_heat_capacity: f64,
    pub tissue_heat_capacity: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self {
            sigma0: 0.6,
            eta0: 0.54,
            theta_core: 37.0,
            dynamic_viscosity: 0.0021,
            density: 1000.0,
            viscosity_slope: 0.0,
            blood_heat_capacity: 1.0,
            tissue_heat_capacity: 1.0,
        }
    }
}

/// Which coefficient [`MaterialModel::coefficient_field`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    ElectricalConductivity,
    ThermalConductivity,
    /// Kinematic viscosity; zero on tissue elements.
    Viscosity,
    /// Heat capacity factor per subdomain (temperature independent).
    HeatCapacity,
}

fn finite(theta: f64) -> Result<f64, MaterialError> {
    if theta.is_nan() {
        Err(MaterialError::NotANumber)
    } else {
        Ok(theta)
    }
}

impl MaterialModel {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let positive = [
            ("sigma0", self.sigma0),
            ("eta0", self.eta0),
            ("dynamic_viscosity", self.dynamic_viscosity),
            ("density", self.density),
            ("blood_heat_capacity", self.blood_heat_capacity),
            ("tissue_heat_capacity", self.tissue_heat_capacity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MaterialError::Invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.theta_core.is_finite() || !self.viscosity_slope.is_finite() {
            return Err(MaterialError::Invalid("theta_core and viscosity_slope must be finite".into()));
        }
        Ok(())
    }

    /// Base kinematic viscosity `μ/ρ`.
    pub fn nu0(&self) -> f64 {
        self.dynamic_viscosity / self.density
    }

    pub fn electrical_conductivity(&self, subdomain: Subdomain, theta: f64) -> Result<f64, MaterialError> {
        let theta = finite(theta)?;
        let s0 = self.sigma0;
        Ok(match subdomain {
            Subdomain::Blood => {
                if theta <= 99.0 {
                    s0 * (0.015 * (theta - self.theta_core)).exp()
                } else if theta <= 100.0 {
                    2.5345 * s0
                } else if theta <= 105.0 {
                    2.5345 * s0 * (1.0 - 0.198 * (theta - 100.0))
                } else {
                    0.025345 * s0
                }
            }
            Subdomain::Tissue => (s0 + 0.02 * (theta - self.theta_core)).max(COEFFICIENT_FLOOR),
        })
    }

    pub fn thermal_conductivity(&self, subdomain: Subdomain, theta: f64) -> Result<f64, MaterialError> {
        let theta = finite(theta)?;
        let t = match subdomain {
            Subdomain::Blood => theta.min(100.0),
            Subdomain::Tissue => theta,
        };
        Ok((self.eta0 + 0.0012 * (t - self.theta_core)).max(COEFFICIENT_FLOOR))
    }

    /// `ν0 (1 + k_ν (θ − θ̄))`, constant when `k_ν = 0`.
    pub fn kinematic_viscosity(&self, theta: f64) -> Result<f64, MaterialError> {
        let theta = finite(theta)?;
        let nu0 = self.nu0();
        Ok((nu0 * (1.0 + self.viscosity_slope * (theta - self.theta_core))).max(COEFFICIENT_FLOOR * nu0))
    }

    pub fn heat_capacity(&self, subdomain: Subdomain) -> f64 {
        match subdomain {
            Subdomain::Blood => self.blood_heat_capacity,
            Subdomain::Tissue => self.tissue_heat_capacity,
        }
    }

    /// Evaluates a coefficient on every triangle at the mean of its three
    /// vertex temperatures.
    pub fn coefficient_field(
        &self,
        mesh: &Mesh,
        theta: &[f64],
        kind: CoefficientKind,
    ) -> Result<CoefficientField, MaterialError> {
        if theta.len() != mesh.num_vertices() {
            return Err(MaterialError::Length {
                expected: mesh.num_vertices(),
                found: theta.len(),
            });
        }
        let mut values = Vec::with_capacity(mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mean = (theta[tri[0]] + theta[tri[1]] + theta[tri[2]]) / 3.0;
            let s = mesh.subdomain(t);
            let v = match kind {
                CoefficientKind::ElectricalConductivity => self.electrical_conductivity(s, mean),
                CoefficientKind::ThermalConductivity => self.thermal_conductivity(s, mean),
                CoefficientKind::Viscosity => match s {
                    Subdomain::Blood => self.kinematic_viscosity(mean),
                    Subdomain::Tissue => Ok(0.0),
                },
                CoefficientKind::HeatCapacity => Ok(self.heat_capacity(s)),
            }
            .map_err(|e| MaterialError::Element {
                element: t,
                source: Box::new(e),
            })?;
            values.push(v);
        }
        Ok(CoefficientField::new(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, BoundaryTag};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn stated_values() {
        let m = MaterialModel::default();
        assert_eq!(m.electrical_conductivity(Subdomain::Blood, 37.0).unwrap(), 0.6);
        assert!(rel(m.electrical_conductivity(Subdomain::Blood, 99.5).unwrap(), 1.5207) < 1e-12);
        assert!(rel(m.electrical_conductivity(Subdomain::Blood, 110.0).unwrap(), 0.015207) < 1e-12);
        assert!(rel(m.electrical_conductivity(Subdomain::Tissue, 47.0).unwrap(), 0.8) < 1e-12);
        assert_eq!(m.thermal_conductivity(Subdomain::Blood, 37.0).unwrap(), 0.54);
        assert!(rel(m.thermal_conductivity(Subdomain::Blood, 150.0).unwrap(), 0.6156) < 1e-12);
        assert_eq!(m.thermal_conductivity(Subdomain::Tissue, 37.0).unwrap(), 0.54);
    }

    #[test]
    fn viscosity_law() {
        let mut m = MaterialModel::default();
        assert!(rel(m.kinematic_viscosity(37.0).unwrap(), 2.1e-6) < 1e-12);
        assert_eq!(m.kinematic_viscosity(20.0).unwrap(), m.kinematic_viscosity(80.0).unwrap());
        m.viscosity_slope = 0.01;
        assert!(rel(m.kinematic_viscosity(47.0).unwrap(), 2.1e-6 * 1.1) < 1e-12);
    }

    #[test]
    fn breakpoint_continuity() {
        let m = MaterialModel::default();
        let s = |t: f64| m.electrical_conductivity(Subdomain::Blood, t).unwrap();
        let below = |t: f64| t - 1e-12;
        assert!((s(below(100.0)) - s(100.0 + 1e-12)).abs() < 1e-9 * m.sigma0);
        assert!((s(105.0) - s(105.0 + 1e-12)).abs() <= 1e-12 * m.sigma0);
        assert!((s(99.0) - s(99.0 + 1e-12)).abs() <= 5e-5 * m.sigma0);
    }

    #[test]
    fn nan_is_rejected() {
        let m = MaterialModel::default();
        assert_eq!(m.electrical_conductivity(Subdomain::Blood, f64::NAN), Err(MaterialError::NotANumber));
        assert_eq!(m.thermal_conductivity(Subdomain::Tissue, f64::NAN), Err(MaterialError::NotANumber));
        assert_eq!(m.kinematic_viscosity(f64::NAN), Err(MaterialError::NotANumber));
    }

    #[test]
    fn field_uses_element_mean() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![Subdomain::Tissue],
            vec![
                ([0, 1], BoundaryTag::TissueBottom),
                ([1, 2], BoundaryTag::TissueRight),
                ([2, 0], BoundaryTag::TissueLeft),
            ],
        )
        .unwrap();
        let m = MaterialModel::default();
        let f = m
            .coefficient_field(&mesh, &[37.0, 47.0, 57.0], CoefficientKind::ElectricalConductivity)
            .unwrap();
        assert!(rel(f.get(0), 0.8) < 1e-12);
        let err = m
            .coefficient_field(&mesh, &[37.0, f64::NAN, 57.0], CoefficientKind::ThermalConductivity)
            .unwrap_err();
        assert!(matches!(err, MaterialError::Element { element: 0, .. }));
    }

    #[test]
    fn uniform_baseline_field() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 3, 3, Subdomain::Blood).unwrap();
        let m = MaterialModel::default();
        let theta = vec![37.0; mesh.num_vertices()];
        let f = m.coefficient_field(&mesh, &theta, CoefficientKind::ElectricalConductivity).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.6));
    }

    proptest! {
        #[test]
        fn coefficients_positive_and_bounded(theta in 0.0f64..200.0) {
            let m = MaterialModel::default();
            for s in [Subdomain::Blood, Subdomain::Tissue] {
                let sigma = m.electrical_conductivity(s, theta).unwrap();
                let eta = m.thermal_conductivity(s, theta).unwrap();
                prop_assert!(sigma >= 0.025345 * m.sigma0 - 1e-15 || s == Subdomain::Tissue);
                prop_assert!(sigma > 0.0 && sigma < 10.0);
                prop_assert!(eta > 0.0 && eta < 1.0);
            }
            prop_assert!(m.kinematic_viscosity(theta).unwrap() > 0.0);
        }

        #[test]
        fn monotone_laws(a in -50.0f64..200.0, b in -50.0f64..200.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let m = MaterialModel::default();
            prop_assert!(m.electrical_conductivity(Subdomain::Tissue, lo).unwrap()
                <= m.electrical_conductivity(Subdomain::Tissue, hi).unwrap());
            prop_assert!(m.thermal_conductivity(Subdomain::Tissue, lo).unwrap()
                <= m.thermal_conductivity(Subdomain::Tissue, hi).unwrap());
            if hi <= 99.0 {
                prop_assert!(m.electrical_conductivity(Subdomain::Blood, lo).unwrap()
                    <= m.electrical_conductivity(Subdomain::Blood, hi).unwrap());
            }
        }
    }
}
