//! The two scenario families: random sequential packing in a ball and a
//! noisy hexagonal close packed cluster.

use blocksupport::cells::{domain_radius_for, find_contacts, generate_hex_lattice, generate_random_sphere};

fn main() -> blocksupport::Result<()> {
    for fraction in [0.2, 0.3, 0.35] {
        let n = 1000;
        let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, fraction), 0.5, 0.9, 1)?;
        let contacts = find_contacts(&cells)?;
        let max_area = contacts.iter().map(|c| c.area).fold(0.0, f64::max);
        println!("random sphere, volume fraction {fraction}: {} contacts per cell, largest area {max_area:.4}", contacts.len() as f64 / n as f64);
    }
    for sigma in [0.0, 0.02, 0.05, 0.1] {
        let cells = generate_hex_lattice(4, sigma, 7)?;
        let m = find_contacts(&cells)?.len();
        println!("hex lattice, {} cells, sigma {sigma}: {:.2} contacts per cell", cells.len(), m as f64 / cells.len() as f64);
    }
    Ok(())
}
