//! Hexagonal cluster of 309 cells with increasing position noise: as the
//! edge-vertex ratio drops, the tree preconditioners pull ahead.
//!
//! `cargo run --release --example hex_lattice_sweep -- [repetitions] [out]`

use std::path::PathBuf;

use blocksupport::bench::{run, BenchmarkConfig};
use blocksupport::cells::{FrictionParams, ScenarioSpec};

fn main() -> blocksupport::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let repetitions = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let out = args.get(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("blocksupport-hex"));

    let params = FrictionParams { gamma_med: 3e4, ..FrictionParams::default() };
    let mut spec = ScenarioSpec::hex_lattice(4, 0.0).with_friction(params);
    spec.sigma = None;
    let mut config = BenchmarkConfig::new(spec);
    config.repetitions = repetitions;
    config.out = out;
    let (results, _) = run(&config)?;
    for s in &results.scenarios {
        let ratio = s.runs[0].edge_vertex_ratio;
        let means: Vec<String> = s.mean_iterations.iter().map(|(k, v)| format!("{k} {v:.0}")).collect();
        println!("{} (edges/vertex {ratio:.2}): {}", s.label, means.join(", "));
    }
    Ok(())
}
