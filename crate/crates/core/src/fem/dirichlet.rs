//! Boundary conditions and symmetric Dirichlet elimination.

use std::fmt;
use std::sync::Arc;

use super::FemError;
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::sparse::CsrMatrix;

#[derive(Clone)]
pub enum ScalarData {
    Constant(f64),
    Profile(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl ScalarData {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            ScalarData::Constant(v) => *v,
            ScalarData::Profile(f) => f(p),
        }
    }
}

impl fmt::Debug for ScalarData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarData::Constant(v) => write!(f, "Constant({v})"),
            ScalarData::Profile(_) => write!(f, "Profile(..)"),
        }
    }
}

#[derive(Clone)]
pub enum VectorData {
    Constant([f64; 2]),
    Profile(Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>),
}

impl VectorData {
    pub fn eval(&self, p: Point) -> [f64; 2] {
        match self {
            VectorData::Constant(v) => *v,
            VectorData::Profile(f) => f(p),
        }
    }
}

impl fmt::Debug for VectorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorData::Constant(v) => write!(f, "Constant({v:?})"),
            VectorData::Profile(_) => write!(f, "Profile(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BcKind {
    DirichletScalar(ScalarData),
    DirichletVelocity(VectorData),
    /// Zero flux; nothing is assembled.
    NeumannZero,
    /// Natural outflow of the viscous form; nothing is assembled.
    DoNothing,
}

#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub tags: Vec<BoundaryTag>,
    pub kind: BcKind,
}

impl BoundaryCondition {
    pub fn new(tags: &[BoundaryTag], kind: BcKind) -> Self {
        Self {
            tags: tags.to_vec(),
            kind,
        }
    }
}

fn kind_per_tag(bcs: &[BoundaryCondition]) -> Result<Vec<(BoundaryTag, &BcKind)>, FemError> {
    let mut out: Vec<(BoundaryTag, &BcKind)> = Vec::new();
    for bc in bcs {
        for &tag in &bc.tags {
            if out.iter().any(|(t, _)| *t == tag) {
                return Err(FemError::DuplicateCondition(tag));
            }
            out.push((tag, &bc.kind));
        }
    }
    out.sort_by_key(|(t, _)| *t);
    Ok(out)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn collect<T: Copy>(
    mesh: &Mesh,
    bcs: &[BoundaryCondition],
    strict: bool,
    value: impl Fn(&BcKind, Point) -> Option<T>,
    same: impl Fn(T, T) -> bool,
) -> Result<Vec<Option<T>>, FemError> {
    let mut fixed: Vec<Option<(T, BoundaryTag)>> = vec![None; mesh.num_vertices()];
    // ascending tag order: the lower-numbered tag wins at shared vertices
    for (tag, kind) in kind_per_tag(bcs)? {
        if value(kind, [0.0, 0.0]).is_none() {
            continue;
        }
        mesh.require_tag(tag).map_err(|_| FemError::MissingTag(tag))?;
        for v in mesh.vertices_with_tag(tag) {
            let g = value(kind, mesh.vertices()[v]).expect("dirichlet kind");
            match fixed[v] {
                None => fixed[v] = Some((g, tag)),
                Some((prev, first)) => {
                    if strict && !same(prev, g) {
                        return Err(FemError::DirichletConflict {
                            node: v,
                            first,
                            second: tag,
                        });
                    }
                }
            }
        }
    }
    Ok(fixed.into_iter().map(|f| f.map(|(g, _)| g)).collect())
}

/// Per-vertex prescribed scalar values. Vertices on two Dirichlet tags take
/// the value of the lower-numbered tag; with `strict`, differing values are
/// an error instead.
pub fn collect_scalar_dirichlet(
    mesh: &Mesh,
    bcs: &[BoundaryCondition],
    strict: bool,
) -> Result<Vec<Option<f64>>, FemError> {
    let fixed = collect(
        mesh,
        bcs,
        strict,
        |k, p| match k {
            BcKind::DirichletScalar(d) => Some(d.eval(p)),
            _ => None,
        },
        close,
    )?;
    if fixed.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FemError::NonFinite("dirichlet data"));
    }
    Ok(fixed)
}

/// Per-vertex prescribed velocities, same tie-break rule as the scalar case.
pub fn collect_velocity_dirichlet(
    mesh: &Mesh,
    bcs: &[BoundaryCondition],
    strict: bool,
) -> Result<Vec<Option<[f64; 2]>>, FemError> {
    let fixed = collect(
        mesh,
        bcs,
        strict,
        |k, p| match k {
            BcKind::DirichletVelocity(d) => Some(d.eval(p)),
            _ => None,
        },
        |a, b| close(a[0], b[0]) && close(a[1], b[1]),
    )?;
    if fixed.iter().flatten().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
        return Err(FemError::NonFinite("dirichlet data"));
    }
    Ok(fixed)
}

/// Symmetric elimination: constrained rows become identity rows with the
/// prescribed value on the right-hand side, and constrained columns are moved
/// to the right-hand side of the free rows.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], fixed: &[Option<f64>]) -> Result<(CsrMatrix, Vec<f64>), FemError> {
    let n = a.rows();
    if a.cols() != n || b.len() != n || fixed.len() != n {
        return Err(FemError::DimensionMismatch {
            expected: n,
            found: if b.len() != n { b.len() } else { fixed.len() },
        });
    }
    let mut rhs = b.to_vec();
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..n {
        if let Some(g) = fixed[i] {
            trip.push((i, i, 1.0));
            rhs[i] = g;
            continue;
        }
        for (j, v) in a.row(i) {
            match fixed[j] {
                Some(g) => rhs[i] -= v * g,
                None => trip.push((i, j, v)),
            }
        }
    }
    let m = CsrMatrix::from_triplets(n, n, &trip).expect("indices from a valid matrix");
    Ok((m, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_stiffness, CoefficientField, Region, ScalarSpace};
    use crate::mesh::{rectangle_mesh, Subdomain};
    use crate::sparse::{solve_spd, SolverOptions};

    fn square() -> Mesh {
        rectangle_mesh([0.0, 0.0], [1.0, 1.0], 6, 6, Subdomain::Blood).unwrap()
    }

    fn all_walls(data: ScalarData) -> Vec<BoundaryCondition> {
        vec![BoundaryCondition::new(
            &[BoundaryTag::Inlet, BoundaryTag::ChannelTop, BoundaryTag::Outlet, BoundaryTag::Interface],
            BcKind::DirichletScalar(data),
        )]
    }

    fn solve_poisson(mesh: &Mesh, bcs: &[BoundaryCondition]) -> Vec<f64> {
        let space = ScalarSpace::new(mesh, Region::All);
        let k = assemble_stiffness(&space, &CoefficientField::uniform(mesh.num_triangles(), 1.0)).unwrap();
        let fixed = collect_scalar_dirichlet(mesh, bcs, false).unwrap();
        let (a, b) = apply_dirichlet(&k, &vec![0.0; space.ndofs()], &fixed).unwrap();
        assert!(a.is_symmetric(1e-14));
        let (x, report) = solve_spd(&a, &b, &SolverOptions::default());
        assert!(report.converged);
        x
    }

    #[test]
    fn linear_data_is_reproduced() {
        let mesh = square();
        let x = solve_poisson(&mesh, &all_walls(ScalarData::Profile(Arc::new(|p| p[0]))));
        for (v, p) in mesh.vertices().iter().enumerate() {
            assert!((x[v] - p[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let mesh = square();
        let x = solve_poisson(&mesh, &all_walls(ScalarData::Constant(0.0)));
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lower_tag_wins_and_strict_reports_node() {
        let mesh = square();
        let bcs = vec![
            BoundaryCondition::new(&[BoundaryTag::Inlet], BcKind::DirichletScalar(ScalarData::Constant(1.0))),
            BoundaryCondition::new(&[BoundaryTag::ChannelTop], BcKind::DirichletScalar(ScalarData::Constant(2.0))),
        ];
        let fixed = collect_scalar_dirichlet(&mesh, &bcs, false).unwrap();
        let corner = mesh.vertices().iter().position(|p| p[0] == 0.0 && p[1] == 1.0).unwrap();
        assert_eq!(fixed[corner], Some(1.0));
        match collect_scalar_dirichlet(&mesh, &bcs, true) {
            Err(FemError::DirichletConflict { node, .. }) => assert_eq!(node, corner),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_missing_tags() {
        let mesh = square();
        let dup = vec![
            BoundaryCondition::new(&[BoundaryTag::Inlet], BcKind::NeumannZero),
            BoundaryCondition::new(&[BoundaryTag::Inlet], BcKind::DoNothing),
        ];
        assert!(matches!(collect_scalar_dirichlet(&mesh, &dup, false), Err(FemError::DuplicateCondition(_))));
        let missing = vec![BoundaryCondition::new(
            &[BoundaryTag::Electrode],
            BcKind::DirichletScalar(ScalarData::Constant(1.0)),
        )];
        assert!(matches!(
            collect_scalar_dirichlet(&mesh, &missing, false),
            Err(FemError::MissingTag(BoundaryTag::Electrode))
        ));
    }
}
