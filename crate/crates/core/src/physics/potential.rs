use super::{require_converged, PhysicsError};
use crate::fem::{
    apply_dirichlet, assemble_stiffness, collect_scalar_dirichlet, joule_density, BcKind, BoundaryCondition,
    CoefficientField, Region, ScalarData, ScalarSpace,
};
use crate::materials::{CoefficientKind, MaterialModel};
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::{solve_spd, SolveReport, SolverOptions};

/// Solves `-∇·(κ∇u) = f` on a scalar space with the given nodal constraints.
/// Inactive dofs are pinned to zero.
pub fn solve_elliptic(
    space: &ScalarSpace,
    coeff: &CoefficientField,
    load: &[f64],
    fixed: &[Option<f64>],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport), PhysicsError> {
    let k = assemble_stiffness(space, coeff)?;
    let mut fixed = fixed.to_vec();
    for (v, active) in space.active().into_iter().enumerate() {
        if !active {
            fixed[v] = Some(0.0);
        }
    }
    let (a, b) = apply_dirichlet(&k, load, &fixed)?;
    let (x, report) = solve_spd(&a, &b, opts);
    Ok((x, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSolution {
    pub blood: Vec<f64>,
    pub tissue: Vec<f64>,
    pub reports: [SolveReport; 2],
}

/// Potentials in blood and tissue with conductivities at the lagged
/// temperature: `φ = φ_d` on the electrode, zero on the outer walls, no flux
/// through the blood/tissue contact line.
pub fn potential_step(
    mesh: &Mesh,
    model: &MaterialModel,
    theta_prev: &[f64],
    electrode_potential: f64,
    opts: &SolverOptions,
) -> Result<PotentialSolution, PhysicsError> {
    mesh.require_tag(BoundaryTag::Electrode)?;
    if !electrode_potential.is_finite() {
        return Err(PhysicsError::NonFinite("electrode potential"));
    }
    let sigma = model.coefficient_field(mesh, theta_prev, CoefficientKind::ElectricalConductivity)?;
    let zero = BcKind::DirichletScalar(ScalarData::Constant(0.0));
    let electrode = BoundaryCondition::new(
        &[BoundaryTag::Electrode],
        BcKind::DirichletScalar(ScalarData::Constant(electrode_potential)),
    );
    let blood_bcs = [
        BoundaryCondition::new(&[BoundaryTag::Inlet, BoundaryTag::ChannelTop, BoundaryTag::Outlet], zero.clone()),
        electrode.clone(),
    ];
    let tissue_bcs = [
        BoundaryCondition::new(
            &[BoundaryTag::TissueLeft, BoundaryTag::TissueBottom, BoundaryTag::TissueRight],
            zero,
        ),
        electrode,
    ];
    let nv = mesh.num_vertices();
    let solve = |region: Region, bcs: &[BoundaryCondition]| -> Result<(Vec<f64>, SolveReport), PhysicsError> {
        let space = ScalarSpace::new(mesh, region);
        let fixed = collect_scalar_dirichlet(mesh, bcs, false)?;
        let (x, report) = solve_elliptic(&space, &sigma, &vec![0.0; nv], &fixed, opts)?;
        require_converged("potential", report)?;
        Ok((x, report))
    };
    let (blood, rb) = solve(Region::Blood, &blood_bcs)?;
    let (tissue, rt) = solve(Region::Tissue, &tissue_bcs)?;
    Ok(PotentialSolution {
        blood,
        tissue,
        reports: [rb, rt],
    })
}

/// Elementwise Joule source `σ(θ̄_K)|∇φ|²`, each element using the potential
/// of its own subdomain.
pub fn joule_field(
    mesh: &Mesh,
    model: &MaterialModel,
    theta_prev: &[f64],
    phi_blood: &[f64],
    phi_tissue: &[f64],
) -> Result<CoefficientField, PhysicsError> {
    let sigma = model.coefficient_field(mesh, theta_prev, CoefficientKind::ElectricalConductivity)?;
    let b = joule_density(&ScalarSpace::new(mesh, Region::Blood), &sigma, phi_blood)?;
    let t = joule_density(&ScalarSpace::new(mesh, Region::Tissue), &sigma, phi_tissue)?;
    Ok(b.plus(&t))
}
