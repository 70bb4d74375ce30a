//! Round trip of a collision graph through the line-oriented text format.

use std::io::BufReader;

use blocksupport::bench::generate_graph;
use blocksupport::cells::ScenarioSpec;
use blocksupport::graph::{read_graph, write_graph};

fn main() -> blocksupport::Result<()> {
    let g = generate_graph(&ScenarioSpec::hex_lattice(2, 0.03), 4)?;
    let mut text = Vec::new();
    write_graph(&g, &mut text)?;
    let back = read_graph(BufReader::new(text.as_slice()))?;
    println!("{} bytes; first lines:", text.len());
    for line in String::from_utf8_lossy(&text).lines().take(3) {
        println!("  {}...", &line[..line.len().min(70)]);
    }
    println!("round trip exact: {}", back.edges() == g.edges() && back.self_loops() == g.self_loops());
    Ok(())
}
