//! The congestion-dilation inequality for one edge supported by a path of
//! `k` edges, including the tight equal-block case.

use blocksupport::blockmat::SymBlock;
use blocksupport::spectral::{congestion_dilation_check, congestion_dilation_check_with, congestion_dilation_factor};

fn main() -> blocksupport::Result<()> {
    let id = SymBlock::identity(3);
    let path = vec![id.clone(); 3];
    println!("equal blocks, k = 3: factor {}", congestion_dilation_factor(&id, &path)?);
    println!("  at 3.00: {}", congestion_dilation_check_with(&id, &path, 3.0)?);
    println!("  at 2.99: {}", congestion_dilation_check_with(&id, &path, 2.99)?);

    let heavy = SymBlock::diagonal(&[2.0, 5.0, 1.0]);
    let path = vec![SymBlock::diagonal(&[1.0, 1.0, 2.0]), SymBlock::identity(3)];
    println!("mixed blocks, k = 2: factor {} passes {}", congestion_dilation_factor(&heavy, &path)?, congestion_dilation_check(&heavy, &path)?);
    Ok(())
}
