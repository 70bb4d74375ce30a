//! Generate a cell cluster, build its friction system and solve it with the
//! maximum spanning tree preconditioner.

use blocksupport::cells::{assemble_rhs, build_collision_graph, domain_radius_for, generate_random_sphere};
use blocksupport::cells::{ForceModel, FrictionParams};
use blocksupport::krylov::{pcg, PcgOptions};
use blocksupport::precond::{Preconditioner, Strategy};

fn main() -> blocksupport::Result<()> {
    let n = 500;
    let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, 0.3), 0.5, 0.9, 1)?;
    let gamma = build_collision_graph(&cells, &FrictionParams::default())?;
    let f = assemble_rhs(&cells, ForceModel::RandomNormal, 2)?;
    println!("{} cells, {} contacts", gamma.n(), gamma.edge_count());

    for strategy in [Strategy::Identity, Strategy::Mst] {
        let p = Preconditioner::build(strategy, &gamma)?;
        let (_, record) = pcg(&gamma, &f, &p, &PcgOptions::default(), None)?;
        println!("{strategy:<9} {:?} after {} iterations", record.status, record.iterations);
    }
    Ok(())
}
