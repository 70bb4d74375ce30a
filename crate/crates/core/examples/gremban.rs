//! Doubling reduction: a block matrix with positive definite off-diagonal
//! blocks is solved through a block Laplacian twice its size.

use blocksupport::blockmat::{Block, SymBlock};
use blocksupport::factor::{direct_solve, BlockMatrix};
use blocksupport::precond::gremban_expand;

fn main() -> blocksupport::Result<()> {
    let mut a = BlockMatrix::zeros(3, 3);
    a.set(0, 0, &Block::identity(3) * 4.0);
    a.set(1, 1, &Block::identity(3) * 4.0);
    a.set(2, 2, &Block::identity(3) * 3.0);
    a.set(0, 1, Block::identity(3));
    a.set(1, 2, SymBlock::diagonal(&[-1.0, -2.0, -1.0]).into_block());

    let e = gremban_expand(&a)?;
    println!("expanded: {} vertices, {} edges", e.graph().n(), e.graph().edge_count());
    let b = [1.0, 2.0, 3.0, 0.0, -1.0, 0.5, 2.0, 0.0, 1.0];
    let x = e.recover(&direct_solve(e.graph(), &e.embed(&b)?)?)?;
    let back = a.matvec(&x)?;
    let res = back.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    println!("x = {x:.4?}\nmax residual {res:.1e}");
    Ok(())
}
