//! Legacy ASCII VTK snapshots.

use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::{Mesh, Subdomain};
use crate::simulation::Snapshot;

fn push_values(out: &mut String, values: impl Iterator<Item = f64>) {
    for v in values {
        if v.is_nan() {
            out.push_str("nan\n");
        } else {
            writeln!(out, "{v:.9e}").expect("string write");
        }
    }
}

/// Unstructured-grid file with point fields `theta`, `phi` (blood value on
/// blood vertices, tissue value elsewhere), `pressure` (NaN off the blood
/// region) and `velocity` (vertex part, zero in tissue), and cell fields
/// `subdomain`, `artificial_viscosity` and `joule`.
pub fn vtk_to_string(mesh: &Mesh, snapshot: &Snapshot) -> String {
    let s = &snapshot.state;
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let blood = mesh.vertex_mask(Subdomain::Blood);
    let mut out = String::with_capacity(64 * (nv + nt) * 4);
    out.push_str("# vtk DataFile Version 3.0\n");
    writeln!(out, "rfa-sim t={:.9e} step={}", s.t, s.step).expect("string write");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {nv} double").expect("string write");
    for p in mesh.vertices() {
        writeln!(out, "{:.9e} {:.9e} 0", p[0], p[1]).expect("string write");
    }
    writeln!(out, "CELLS {nt} {}", 4 * nt).expect("string write");
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).expect("string write");
    }
    writeln!(out, "CELL_TYPES {nt}").expect("string write");
    for _ in 0..nt {
        out.push_str("5\n");
    }

    writeln!(out, "POINT_DATA {nv}").expect("string write");
    out.push_str("SCALARS theta double 1\nLOOKUP_TABLE default\n");
    push_values(&mut out, s.theta.iter().copied());
    out.push_str("SCALARS phi double 1\nLOOKUP_TABLE default\n");
    push_values(&mut out, s.merged_potential(mesh).into_iter());
    out.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    push_values(
        &mut out,
        (0..nv).map(|v| if blood[v] { s.pressure[v] } else { f64::NAN }),
    );
    out.push_str("VECTORS velocity double\n");
    for (v, u) in s.velocity.nodal.iter().enumerate() {
        let u = if blood[v] { *u } else { [0.0, 0.0] };
        writeln!(out, "{:.9e} {:.9e} 0", u[0], u[1]).expect("string write");
    }

    writeln!(out, "CELL_DATA {nt}").expect("string write");
    out.push_str("SCALARS subdomain int 1\nLOOKUP_TABLE default\n");
    for &d in mesh.subdomains() {
        writeln!(out, "{}", d.code()).expect("string write");
    }
    out.push_str("SCALARS artificial_viscosity double 1\nLOOKUP_TABLE default\n");
    push_values(&mut out, snapshot.artificial_viscosity.values().iter().copied());
    out.push_str("SCALARS joule double 1\nLOOKUP_TABLE default\n");
    push_values(&mut out, snapshot.joule.values().iter().copied());
    out
}

pub fn write_vtk(mesh: &Mesh, snapshot: &Snapshot, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, vtk_to_string(mesh, snapshot))
}

/// Reads back one named scalar array of a file written by [`vtk_to_string`].
pub fn read_vtk_scalars(text: &str, name: &str) -> Option<Vec<f64>> {
    let mut lines = text.lines();
    let mut count = 0;
    while let Some(line) = lines.next() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("POINT_DATA") | Some("CELL_DATA") => count = words.next()?.parse().ok()?,
            Some("SCALARS") if words.next() == Some(name) => {
                lines.next()?;
                return lines.take(count).map(|l| l.trim().parse().ok()).collect();
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::CoefficientField;
    use crate::mesh::rectangle_mesh;
    use crate::physics::FieldState;

    #[test]
    fn structure_and_round_trip() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 3, 2, Subdomain::Blood).unwrap();
        let mut state = FieldState::initial(&mesh, 37.0);
        state.theta = mesh.vertices().iter().map(|p| 37.0 + p[0] / 3.0 + 1e-7 * p[1]).collect();
        let snap = Snapshot {
            state,
            joule: CoefficientField::uniform(mesh.num_triangles(), 0.5),
            artificial_viscosity: CoefficientField::uniform(mesh.num_triangles(), 0.0),
        };
        let text = vtk_to_string(&mesh, &snap);
        assert!(text.contains(&format!("POINTS {} double", mesh.num_vertices())));
        let theta = read_vtk_scalars(&text, "theta").unwrap();
        assert_eq!(theta.len(), mesh.num_vertices());
        for (a, b) in theta.iter().zip(&snap.state.theta) {
            assert!((a - b).abs() <= 1e-6);
        }
        assert_eq!(read_vtk_scalars(&text, "joule").unwrap(), vec![0.5; mesh.num_triangles()]);
    }

    #[test]
    fn uniform_temperature_is_written_exactly() {
        let mesh = rectangle_mesh([0.0, 0.0], [1.0, 1.0], 2, 2, Subdomain::Tissue).unwrap();
        let snap = Snapshot {
            state: FieldState::initial(&mesh, 37.0),
            joule: CoefficientField::uniform(mesh.num_triangles(), 0.0),
            artificial_viscosity: CoefficientField::uniform(mesh.num_triangles(), 0.0),
        };
        let text = vtk_to_string(&mesh, &snap);
        assert!(read_vtk_scalars(&text, "theta").unwrap().iter().all(|v| *v == 37.0));
        assert!(read_vtk_scalars(&text, "pressure").unwrap().iter().all(|v| v.is_nan()));
    }
}
