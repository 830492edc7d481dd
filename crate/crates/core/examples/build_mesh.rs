//! Builds the default channel/tissue mesh, prints its quality statistics and
//! writes it in the `rfa-mesh 1` format.
//!
//! ```text
//! cargo run --release --example build_mesh -- [mesh_size] [output.mesh]
//! ```

use std::f64::consts::PI;

use rfa_sim::mesh::{build_channel_tissue_mesh, mesh_quality, write_mesh, BoundaryTag, GeometryParams, Subdomain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut params = GeometryParams::default();
    if let Some(h) = args.next() {
        params.mesh_size = h.parse()?;
    }
    let output = args.next().unwrap_or_else(|| "channel.mesh".to_string());

    let mesh = build_channel_tissue_mesh(&params)?;
    let q = mesh_quality(&mesh);
    println!("vertices   {}", mesh.num_vertices());
    println!("triangles  {} (blood {}, tissue {})",
        mesh.num_triangles(),
        mesh.subdomains().iter().filter(|s| **s == Subdomain::Blood).count(),
        mesh.subdomains().iter().filter(|s| **s == Subdomain::Tissue).count());
    println!("h_min      {:.5}", q.h_min);
    println!("h_max      {:.5}  (ratio {:.3})", q.h_max, q.h_max / q.h_min);
    println!("angles     {:.2}° .. {:.2}°", q.min_angle, q.max_angle);
    println!("area       {:.6}  (closed form {:.6})", mesh.total_area(), params.analytic_area());

    let arc: f64 = mesh
        .boundary_edges()
        .iter()
        .filter(|e| e.tag == BoundaryTag::Electrode && e.side == Some(Subdomain::Blood))
        .map(|e| {
            let [a, b] = e.vertices.map(|v| mesh.vertices()[v]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .sum();
    println!("arc length {:.5}  (pi r = {:.5})", arc, PI * params.electrode_radius);
    for tag in BoundaryTag::ALL {
        let n = mesh.tagged_edges().filter(|e| e.tag == tag).count();
        println!("  Σ{} {:?}: {} edges", tag.index(), tag, n);
    }

    write_mesh(&mesh, &output)?;
    println!("wrote {output}");
    Ok(())
}
