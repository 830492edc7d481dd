//! Heating by the electrode in flowing blood: runs the reference scenario,
//! writes VTK snapshots and the time series, and summarises the peak
//! temperature and the artificial viscosity.
//!
//! ```text
//! cargo run --release --example ablation_test1 -- [output_dir]
//! ```

use std::path::PathBuf;

use rfa_sim::io::run_to_directory;
use rfa_sim::simulation::scenario_test1;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/test1".into()));
    let config = scenario_test1();
    let r = config.geometry.electrode_radius;
    let summary = run_to_directory(config, &dir, false, None)?;
    println!("{:>6} {:>9} {:>16} {:>9} {:>10}", "t", "max θ", "argmax", "|u|", "probe θ");
    for row in summary.series.iter().step_by(10) {
        println!(
            "{:>6.2} {:>9.4} ({:>6.3},{:>6.3}) {:>9.4} {:>10.4}",
            row.t, row.max_theta, row.argmax[0], row.argmax[1], row.velocity_l2, row.probes[0][0]
        );
    }
    let last = summary.series.last().expect("at least the initial row");
    let d = (last.argmax[0] - 0.75).hypot(last.argmax[1]);
    println!("peak {:.4} at distance {d:.3} from the electrode centre (2r = {:.3})", last.max_theta, 2.0 * r);
    println!("{} snapshots in {}", summary.snapshots.len(), dir.display());
    Ok(())
}
