//! Every preconditioning strategy on one friction system, with the relative
//! error measured against a direct solve.

use blocksupport::cells::{assemble_rhs, build_collision_graph, domain_radius_for, generate_random_sphere};
use blocksupport::cells::{ForceModel, FrictionParams};
use blocksupport::factor::direct_solve;
use blocksupport::krylov::{pcg, PcgOptions};
use blocksupport::precond::{Preconditioner, Strategy};

fn main() -> blocksupport::Result<()> {
    let n = 400;
    let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, 0.3), 0.5, 0.9, 21)?;
    let g = build_collision_graph(&cells, &FrictionParams::default())?;
    let f = assemble_rhs(&cells, ForceModel::RandomNormal, 22)?;
    let reference = direct_solve(&g, &f)?;
    println!("edges per vertex {:.2}", g.edge_vertex_ratio());

    let mut strategies = Strategy::STANDARD.to_vec();
    strategies.push(Strategy::AugmentedMst(None));
    for s in strategies {
        let p = Preconditioner::build(s, &g)?;
        let opts = PcgOptions { tol: 1e-10, ..PcgOptions::default() };
        let (_, r) = pcg(&g, &f, &p, &opts, Some(&reference))?;
        let to_1e6 = r.iterations_to_error(1e-6).map_or("-".to_string(), |k| k.to_string());
        println!("{:<14} iterations {:>4}  to error 1e-6 {:>4}  final error {:.1e}", s.to_string(), r.iterations, to_1e6, r.final_error().unwrap_or(f64::NAN));
    }
    Ok(())
}
