//! Augmented spanning tree: split the tree into `t` subtrees, add the
//! heaviest edge between each pair of touching subtrees and factor with the
//! fill-aware order.

use blocksupport::cells::{build_collision_graph, generate_hex_lattice, FrictionParams};
use blocksupport::graph::{augment_mst, partition_tree, prim_mst};
use blocksupport::precond::{default_subtree_count, Preconditioner, Strategy};

fn main() -> blocksupport::Result<()> {
    let cells = generate_hex_lattice(4, 0.05, 11)?;
    let g = build_collision_graph(&cells, &FrictionParams::default())?;
    let tree = prim_mst(&g)?;
    for t in [2, 3, default_subtree_count(g.n()), 8] {
        let parts = partition_tree(&tree, t);
        let aug = augment_mst(&g, &tree, &parts);
        let p = Preconditioner::build(Strategy::AugmentedMst(Some(t)), &g)?;
        println!(
            "t {t}: {} subtrees, {} extra edges, {} fill blocks",
            aug.subtree_count(),
            aug.extra_edges.len(),
            p.fill()
        );
    }
    Ok(())
}
