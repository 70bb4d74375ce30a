//! Friction blocks: the cell-cell weight `A (g_par u u^T + g_perp (I - u u^T))`
//! has eigenvalues `A g_par` (along `u`) and `A g_perp` (twice).

use blocksupport::blockmat::{solve_block, SymBlock};

fn main() -> blocksupport::Result<()> {
    let u = [1.0 / 3f64.sqrt(); 3];
    let w = SymBlock::friction(&u, 2e6, 8e6) * 0.0785;
    let eig = w.eigen()?;
    println!("eigenvalues {:?}", eig.values);
    println!("condition number {}", w.condition_number());

    let x = solve_block(&w, &[1.0, 0.0, 0.0])?;
    let back = w.mul_vec(&x);
    println!("solve residual {:.2e}", (back[0] - 1.0).abs().max(back[1].abs()).max(back[2].abs()));
    Ok(())
}
