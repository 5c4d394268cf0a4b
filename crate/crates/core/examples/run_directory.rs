//! A run directory from a configuration file: interrupted, resumed and
//! analysed with the same calls the `soler` binary makes.

use std::error::Error;
use std::path::Path;

use soler::runner::commands;
use soler::runner::{resume, run, RunConfig, RunManifest, RunOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/free_2d.toml");
    let config = RunConfig::load(&config_path)?.resolve()?;
    let dir = std::env::temp_dir().join(format!("soler-example-{}", std::process::id()));

    let halted = run(&config, &dir, RunOptions { halt_after_step: Some(30) })?;
    println!("halted: {:?} after {} steps", halted.status, halted.steps_completed);
    let done = resume(&dir, RunOptions::default())?;
    println!("resumed: {:?} after {} steps", done.status, done.steps_completed);

    let mut out = std::io::stdout();
    commands::scatter(&dir, 1.0, &mut out)?;
    commands::fit_decay_file(&dir.join("series.csv"), None, Some("sup_abs"), &mut out)?;
    print!("{}", RunManifest::load(&dir)?.to_text());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
