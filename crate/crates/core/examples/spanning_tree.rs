//! Maximum spanning tree keyed by the smallest eigenvalue of each edge
//! weight, and the zero-fill elimination order it comes with.

use blocksupport::cells::{build_collision_graph, generate_hex_lattice, FrictionParams};
use blocksupport::graph::{elimination_fill, prim_mst};

fn main() -> blocksupport::Result<()> {
    let cells = generate_hex_lattice(3, 0.05, 3)?;
    let g = build_collision_graph(&cells, &FrictionParams::default())?;
    let tree = prim_mst(&g)?;
    println!("graph: n {} m {}; tree edges {}", g.n(), g.edge_count(), tree.edge_count());
    println!("sum of tree keys {:.4e}", tree.total_key());

    let order = tree.elimination_order();
    let adjacency = tree.to_graph().adjacency_lists();
    let fill = elimination_fill(&adjacency, order)?;
    println!("fill edges when eliminating leaves first: {}", fill.len());
    let reversed: Vec<usize> = order.iter().rev().copied().collect();
    println!("fill edges in the opposite order: {}", elimination_fill(&adjacency, &reversed)?.len());
    Ok(())
}
