//! Manufactured-solution convergence tables for the potential, heat and
//! Stokes solvers.
//!
//! ```text
//! cargo run --release --example mms_convergence -- [levels...]
//! ```

use rfa_sim::verify::{mms_heat, mms_potential, mms_stokes, observed_orders, ConvergenceStudy};

fn print(study: &ConvergenceStudy) {
    println!("{}", study.name);
    for s in &study.series {
        let orders = observed_orders(&study.h, &s.errors);
        println!("  {}", s.quantity);
        for (i, (h, e)) in study.h.iter().zip(&s.errors).enumerate() {
            let order = if i == 0 { "-".to_string() } else { format!("{:.3}", orders[i - 1]) };
            println!("    h = 1/{:<4} error {e:.4e}  order {order}", (1.0 / h).round());
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut levels: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if levels.is_empty() {
        levels = vec![8, 16, 32, 64];
    }
    print(&mms_potential(&levels)?);
    print(&mms_heat(&levels)?);
    print(&mms_stokes(&levels)?);
    Ok(())
}
