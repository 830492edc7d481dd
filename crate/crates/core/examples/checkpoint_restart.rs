//! Runs half of the reference scenario, writes a checkpoint, resumes from it
//! and compares with an uninterrupted run.
//!
//! ```text
//! cargo run --release --example checkpoint_restart -- [checkpoint.bin]
//! ```

use rfa_sim::simulation::{scenario_test1, Checkpoint, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "checkpoint.bin".into());
    let config = scenario_test1();
    let total = config.time.steps();

    let mut first = Simulation::new(config.clone())?;
    while first.state().step < total / 2 {
        first.step()?;
    }
    first.checkpoint().write(&path)?;
    println!("checkpoint at step {} written to {path}", first.state().step);

    let mut resumed = Simulation::resume(config.clone(), Checkpoint::read(&path)?)?;
    while !resumed.is_finished() {
        resumed.step()?;
    }
    let mut straight = Simulation::new(config)?;
    while !straight.is_finished() {
        straight.step()?;
    }
    let diff = resumed
        .state()
        .theta
        .iter()
        .zip(&straight.state().theta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max temperature difference after {total} steps: {diff:e}");
    println!("bitwise identical: {}", resumed.state() == straight.state());
    Ok(())
}
