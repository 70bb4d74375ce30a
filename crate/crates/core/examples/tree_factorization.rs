//! Block LDL^T of a tree Laplacian in linear time, checked against the
//! general sparse factorization, and the instrumented tree solve.

use blocksupport::cells::{build_collision_graph, domain_radius_for, generate_random_sphere, FrictionParams};
use blocksupport::factor::{ldlt_general, ldlt_tree, BlockMatrix};
use blocksupport::graph::prim_spanning_forest;

fn main() -> blocksupport::Result<()> {
    let n = 1000;
    // A dense enough packing that the contact graph is connected.
    let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, 0.45), 0.5, 0.8, 5)?;
    let g = build_collision_graph(&cells, &FrictionParams::default())?;
    let (components, _) = g.components();
    if components > 1 {
        println!("contact graph has {components} components; the spanning forest is used instead");
    }
    let tree = prim_spanning_forest(&g);
    let tree_graph = tree.to_graph();

    let ft = ldlt_tree(&tree)?;
    let fg = ldlt_general(&BlockMatrix::from_graph(&tree_graph), tree.elimination_order())?;
    println!("L blocks: tree {} general {} (n - roots = {})", ft.l_nnz(), fg.l_nnz(), n - tree.roots().len());

    let b: Vec<f64> = (0..3 * n).map(|k| (k as f64).sin()).collect();
    let (x, counts) = ft.solve_counted(&b)?;
    let r = tree_graph.laplacian_matvec(&x)?;
    let res = r.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    println!("solve: {} off-diagonal products, {} diagonal solves, residual {res:.2e}", counts.offdiagonal_products, counts.diagonal_solves);

    Ok(())
}
