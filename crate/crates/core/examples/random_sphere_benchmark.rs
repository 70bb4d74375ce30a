//! Random-sphere benchmark with the five standard strategies: CSV, JSON and
//! an SVG of the mean error curves.
//!
//! `cargo run --release --example random_sphere_benchmark -- [n] [repetitions] [out]`

use std::path::PathBuf;

use blocksupport::bench::{run, BenchmarkConfig};
use blocksupport::cells::ScenarioSpec;

fn main() -> blocksupport::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(300);
    let repetitions = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let out = args.get(2).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("blocksupport-random-sphere"));

    let mut config = BenchmarkConfig::new(ScenarioSpec::random_sphere(n));
    config.repetitions = repetitions;
    config.out = out;
    let (results, artifacts) = run(&config)?;
    for (strategy, mean) in &results.scenarios[0].mean_iterations {
        println!("{strategy:<14} {mean:.1}");
    }
    println!("plot: {}", artifacts.plots[0].display());
    Ok(())
}
