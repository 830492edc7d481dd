//! Tabulates the temperature-dependent material laws of blood and tissue.
//!
//! ```text
//! cargo run --example coefficient_models
//! ```

use rfa_sim::materials::MaterialModel;
use rfa_sim::mesh::Subdomain::{Blood, Tissue};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = MaterialModel::default();
    println!("{:>7} {:>10} {:>10} {:>10} {:>10} {:>12}", "theta", "sigma_b", "sigma_ts", "eta_b", "eta_ts", "nu");
    for theta in [20.0, 37.0, 47.0, 60.0, 80.0, 99.0, 99.5, 100.0, 102.5, 105.0, 110.0, 150.0] {
        println!(
            "{theta:>7.1} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>12.4e}",
            m.electrical_conductivity(Blood, theta)?,
            m.electrical_conductivity(Tissue, theta)?,
            m.thermal_conductivity(Blood, theta)?,
            m.thermal_conductivity(Tissue, theta)?,
            m.kinematic_viscosity(theta)?,
        );
    }
    let s = |t: f64| m.electrical_conductivity(Blood, t);
    println!();
    println!("jump at  99: {:.3e}", (s(99.0 + 1e-12)? - s(99.0)?).abs());
    println!("jump at 100: {:.3e}", (s(100.0 + 1e-12)? - s(100.0)?).abs());
    println!("jump at 105: {:.3e}", (s(105.0 + 1e-12)? - s(105.0)?).abs());
    Ok(())
}
