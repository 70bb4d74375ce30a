use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blocksupport::bench::{generate_graph, run, verify_suite, BenchmarkConfig};
use blocksupport::graph::write_graph;
use blocksupport::krylov::Status;
use blocksupport::precond::Strategy;
use blocksupport::{Error, Result};

/// Benchmarks of support-graph preconditioners on cell friction systems.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario with every strategy and write CSV, JSON and SVG.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated strategy tokens, e.g. `identity,mst,aug-mst:3`.
        #[arg(long)]
        strategies: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Add generalized eigenvalue reports (small systems only).
        #[arg(long)]
        verify_bounds: bool,
    },
    /// Write the collision graph of a scenario in the text graph format.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the spectral property suite on random scenarios.
    Verify {
        /// Largest cell count.
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn cmd_run(
    config: PathBuf,
    out: Option<PathBuf>,
    strategies: Option<String>,
    seed: Option<u64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    verify_bounds: bool,
) -> Result<ExitCode> {
    let mut c = BenchmarkConfig::load(&config)?;
    if let Some(out) = out {
        c.out = out;
    }
    if let Some(list) = strategies {
        c.strategies = Strategy::parse_list(&list)?;
    }
    if seed.is_some() {
        c.seed = seed;
    }
    if let Some(tol) = tol {
        c.tol = tol;
    }
    if max_iter.is_some() {
        c.max_iter = max_iter;
    }
    c.verify_bounds |= verify_bounds;
    c.validate()?;

    let (results, artifacts) = run(&c)?;
    for s in &results.scenarios {
        let ratio = s.runs.first().map_or(0.0, |r| r.edge_vertex_ratio);
        println!("{} (edges/vertex {:.2})", s.label, ratio);
        for (strategy, mean) in &s.mean_iterations {
            let failed = s
                .runs
                .iter()
                .filter(|r| &r.record.strategy == strategy && r.record.status != Status::Converged)
                .count();
            println!("  {strategy:<14} mean iterations {mean:>8.1}  not converged {failed}");
        }
    }
    println!("wrote {}", artifacts.csv.display());
    println!("wrote {}", artifacts.mean_csv.display());
    println!("wrote {}", artifacts.summary.display());
    for p in &artifacts.plots {
        println!("wrote {}", p.display());
    }
    Ok(if results.all_failed() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_gen(config: PathBuf, out: PathBuf, seed: Option<u64>) -> Result<ExitCode> {
    let c = BenchmarkConfig::load(&config)?;
    let spec = c
        .scenario
        .clone()
        .ok_or_else(|| Error::Config("gen needs a generated scenario, not a graph file".into()))?;
    let g = generate_graph(&spec, seed.unwrap_or(c.base_seed()))?;
    write_graph(&g, BufWriter::new(File::create(&out)?))?;
    println!("n {} m {} -> {}", g.n(), g.edge_count(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(n: usize, trials: usize, seed: u64) -> Result<ExitCode> {
    let checks = verify_suite(n, trials, seed)?;
    let mut ok = true;
    for c in &checks {
        ok &= c.ok();
        let worst = c.worst_ratio.map(|r| format!("  worst ratio {r:.3e}")).unwrap_or_default();
        println!("{} {}/{}  {}{}", if c.ok() { "PASS" } else { "FAIL" }, c.passed, c.trials, c.name, worst);
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, strategies, seed, tol, max_iter, verify_bounds } => {
            cmd_run(config, out, strategies, seed, tol, max_iter, verify_bounds)
        }
        Command::Gen { config, out, seed } => cmd_gen(config, out, seed),
        Command::Verify { n, trials, seed } => cmd_verify(n, trials, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
