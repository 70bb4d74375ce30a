//! Generalized eigenvalues of (Gamma, P) against the spanning-tree bounds on
//! a small scenario.

use blocksupport::cells::{collision_graph_from_contacts, collision_kappa, domain_radius_for, find_contacts};
use blocksupport::cells::{generate_random_sphere, FrictionParams};
use blocksupport::precond::Strategy;
use blocksupport::spectral::{kappa_edges, verify_bounds_with_kappa};

fn main() -> blocksupport::Result<()> {
    let n = 40;
    let params = FrictionParams::default();
    let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, 0.3), 0.5, 0.9, 8)?;
    let contacts = find_contacts(&cells)?;
    let g = collision_graph_from_contacts(n, &contacts, &params)?;
    println!("n {} m {} max degree {}", g.n(), g.edge_count(), g.max_degree());
    println!("kappa: edges {:.3}, collision {:.3}", kappa_edges(&g), collision_kappa(&contacts, &params));

    for (s, kappa) in [
        (Strategy::Mst, collision_kappa(&contacts, &params)),
        (Strategy::AugmentedMst(Some(2)), kappa_edges(&g)),
        (Strategy::RowMst, kappa_edges(&g)),
        (Strategy::BlockJacobi, kappa_edges(&g)),
    ] {
        let r = verify_bounds_with_kappa(&g, s, kappa)?;
        let bound = r.bound().map_or("none".to_string(), |b| format!("{b:.3e}"));
        println!(
            "{:<10} lambda [{:.6}, {:.4}] cond {:.3}  bound {bound}  holds {:?}",
            s.to_string(),
            r.lambda_min,
            r.lambda_max,
            r.kappa_precond,
            r.bound_holds
        );
    }
    Ok(())
}
