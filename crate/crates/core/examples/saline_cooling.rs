//! Compares the temperature above the electrode with and without saline
//! injection through the electrode.
//!
//! ```text
//! cargo run --release --example saline_cooling
//! ```

use rfa_sim::simulation::{run, scenario_test1, scenario_test2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plain = run(scenario_test1()).map_err(|e| e.0)?;
    let saline = run(scenario_test2()).map_err(|e| e.0)?;
    println!("{:>6} {:>12} {:>12} {:>10}", "t", "no saline", "saline", "diff");
    for (a, b) in plain.series.iter().zip(&saline.series).step_by(10) {
        let (ta, tb) = (a.probes[0][0], b.probes[0][0]);
        println!("{:>6.2} {ta:>12.4} {tb:>12.4} {:>10.4}", a.t, tb - ta);
    }
    let pa = plain.series.last().expect("rows").joule_power;
    let pb = saline.series.last().expect("rows").joule_power;
    println!("final Joule power: {pa:.5} without saline, {pb:.5} with saline");
    Ok(())
}
