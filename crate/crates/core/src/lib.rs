//! Support-graph preconditioners for block friction systems.
//!
//! Off-lattice cell models produce, at every time step, a symmetric positive
//! definite system `Gamma v = F` whose matrix is the block Laplacian of the
//! collision graph. This crate keeps that matrix in graph form, builds
//! maximum-spanning-tree preconditioners from it, factors them without fill,
//! and runs matrix-free preconditioned conjugate gradients.
//!
//! ```
//! use blocksupport::cells::{generate_random_sphere, build_collision_graph, FrictionParams};
//! use blocksupport::precond::{Preconditioner, Strategy};
//! use blocksupport::krylov::{pcg, PcgOptions};
//!
//! let cells = generate_random_sphere(60, 3.0, 0.5, 0.9, 7).unwrap();
//! let gamma = build_collision_graph(&cells, &FrictionParams::default()).unwrap();
//! let m = Preconditioner::build(Strategy::Mst, &gamma).unwrap();
//! let f = vec![1.0; gamma.n() * gamma.dim()];
//! let (_v, record) = pcg(&gamma, &f, &m, &PcgOptions::default(), None).unwrap();
//! assert!(record.converged());
//! ```

pub mod bench;
pub mod blockmat;
pub mod cells;
pub mod error;
pub mod factor;
pub mod graph;
mod jacobi;
pub mod krylov;
pub mod precond;
pub mod spectral;

pub use blockmat::{Block, SymBlock};
pub use error::{Error, Result};
pub use graph::{Edge, MatrixWeightedGraph};
