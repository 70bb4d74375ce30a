//! Benchmark scenarios: cell configurations, Hertz contacts and the friction
//! (collision) graph they induce.
//!
//! Lengths are in units of 10 um; the default cell radius is 0.5.
//!
//! All randomness comes from SplitMix64 (Steele, Lea and Flood, 2014): a
//! 64-bit state advanced by the golden-ratio increment `0x9E3779B97F4A7C15`
//! and mixed with two xor-shift-multiply rounds. It is tiny, splittable by
//! reseeding and easy to reproduce in any language.

mod scenario;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::blockmat::SymBlock;
use crate::error::{Error, Result};
use crate::graph::{Edge, MatrixWeightedGraph};

pub use scenario::{ScenarioKind, ScenarioSpec, DEFAULT_VOLUME_FRACTION};

pub const DEFAULT_CELL_RADIUS: f64 = 0.5;

/// Default lattice spacing of the hexagonal cluster, slightly below one
/// diameter so nearest neighbors overlap by 0.02. Next-nearest neighbors
/// (at `0.98 * sqrt 2`) do not touch.
pub const DEFAULT_HEX_SPACING: f64 = 0.98;

/// Centers closer than this are treated as coincident.
const COINCIDENT_TOL: f64 = 1e-12;

/// Rejection-sampling attempts allowed per requested cell.
const ATTEMPTS_PER_CELL: usize = 2000;

pub type Point = [f64; 3];

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn length(a: &Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Seed of stream `k` derived from `seed` by one SplitMix64 output.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed
        .wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfiguration {
    pub positions: Vec<Point>,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub descriptor: String,
}

impl CellConfiguration {
    pub fn new(positions: Vec<Point>, radii: Vec<f64>, seed: u64, descriptor: String) -> Result<Self> {
        if positions.len() != radii.len() {
            return Err(Error::DimensionMismatch { expected: positions.len(), got: radii.len() });
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("cell position is not finite".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput("cell radius must be positive".into()));
        }
        Ok(CellConfiguration { positions, radii, seed, descriptor })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Uniform grid hashing points into cubes of side `h`.
struct Grid {
    h: f64,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(h: f64) -> Self {
        Grid { h, cells: HashMap::new() }
    }

    fn key(&self, p: &Point) -> (i64, i64, i64) {
        let f = |x: f64| (x / self.h).floor() as i64;
        (f(p[0]), f(p[1]), f(p[2]))
    }

    fn insert(&mut self, p: &Point, id: usize) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(id);
    }

    /// Ids in the 27 cubes around `p`.
    fn near(&self, p: &Point) -> impl Iterator<Item = usize> + '_ {
        let (x, y, z) = self.key(p);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.cells
                        .get(&(x + dx, y + dy, z + dz))
                        .map(|v| v.as_slice())
                        .unwrap_or(&[])
                        .iter()
                        .copied()
                })
            })
        })
    }
}

/// Domain radius at which `n` cells of radius `cell_radius` fill the
/// fraction `volume_fraction` of the ball.
pub fn domain_radius_for(n: usize, cell_radius: f64, volume_fraction: f64) -> f64 {
    cell_radius * (n as f64 / volume_fraction).cbrt()
}

/// Random sequential placement in a ball: candidates are drawn uniformly in
/// the ball and accepted when at least `min_dist` from every placed cell.
pub fn generate_random_sphere(
    n: usize,
    domain_radius: f64,
    cell_radius: f64,
    min_dist: f64,
    seed: u64,
) -> Result<CellConfiguration> {
    if !(min_dist > 0.0) || !(domain_radius > 0.0) || !(cell_radius > 0.0) {
        return Err(Error::InvalidInput(
            "domain radius, cell radius and minimum distance must be positive".into(),
        ));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut grid = Grid::new(min_dist);
    let mut positions: Vec<Point> = Vec::with_capacity(n);
    let budget = ATTEMPTS_PER_CELL.saturating_mul(n.max(1));
    let mut attempts = 0;
    while positions.len() < n {
        if attempts == budget {
            return Err(Error::PackingInfeasible { placed: positions.len(), requested: n });
        }
        attempts += 1;
        let p: Point = [
            rng.random_range(-domain_radius..domain_radius),
            rng.random_range(-domain_radius..domain_radius),
            rng.random_range(-domain_radius..domain_radius),
        ];
        if length(&p) > domain_radius {
            continue;
        }
        if grid.near(&p).any(|k| length(&sub(&p, &positions[k])) < min_dist) {
            continue;
        }
        grid.insert(&p, positions.len());
        positions.push(p);
    }
    let descriptor = format!(
        "random-sphere n={n} domain_radius={domain_radius} cell_radius={cell_radius} min_dist={min_dist}"
    );
    CellConfiguration::new(positions, vec![cell_radius; n], seed, descriptor)
}

/// FCC sites of the cuboctahedral cluster with `shells` shells around a
/// central cell, in integer coordinates `(x, y, z)` with `x + y + z` even.
fn fcc_cluster(shells: usize) -> Vec<[i64; 3]> {
    let k = shells as i64;
    let mut sites = Vec::new();
    for x in -k..=k {
        for y in -k..=k {
            for z in -k..=k {
                if (x + y + z).rem_euclid(2) == 0 && x.abs() + y.abs() + z.abs() <= 2 * k {
                    sites.push([x, y, z]);
                }
            }
        }
    }
    sites
}

/// Hexagonal close packing (FCC stacking) truncated to a cuboctahedral
/// cluster, with default radius and spacing. Four shells give 309 cells.
pub fn generate_hex_lattice(shells: usize, sigma: f64, seed: u64) -> Result<CellConfiguration> {
    generate_hex_lattice_with(shells, sigma, seed, DEFAULT_CELL_RADIUS, DEFAULT_HEX_SPACING)
}

/// As [`generate_hex_lattice`] with explicit cell radius and nearest-neighbor
/// spacing. Every coordinate gets independent `N(0, sigma^2)` noise.
pub fn generate_hex_lattice_with(
    shells: usize,
    sigma: f64,
    seed: u64,
    cell_radius: f64,
    spacing: f64,
) -> Result<CellConfiguration> {
    if shells == 0 {
        return Err(Error::InvalidInput("a hexagonal cluster needs at least one shell".into()));
    }
    if !(sigma >= 0.0) || !(spacing > 0.0) {
        return Err(Error::InvalidInput("sigma must be non-negative and spacing positive".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let scale = spacing / std::f64::consts::SQRT_2;
    let positions: Vec<Point> = fcc_cluster(shells)
        .into_iter()
        .map(|s| {
            let mut p = [s[0] as f64 * scale, s[1] as f64 * scale, s[2] as f64 * scale];
            if sigma > 0.0 {
                for x in &mut p {
                    let noise: f64 = rng.sample(StandardNormal);
                    *x += sigma * noise;
                }
            }
            p
        })
        .collect();
    let n = positions.len();
    let descriptor = format!("hex-lattice shells={shells} n={n} sigma={sigma} spacing={spacing}");
    CellConfiguration::new(positions, vec![cell_radius; n], seed, descriptor)
}

/// One overlapping pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    /// `delta = R_i + R_j - |r_j - r_i|`.
    pub overlap: f64,
    /// Hertz contact area `pi R_eff delta`, `R_eff = R_i R_j / (R_i + R_j)`.
    pub area: f64,
    /// `(r_j - r_i) / |r_j - r_i|`.
    pub normal: Point,
}

pub fn hertz_contact_area(r_i: f64, r_j: f64, overlap: f64) -> f64 {
    std::f64::consts::PI * r_i * r_j / (r_i + r_j) * overlap
}

fn contact(config: &CellConfiguration, i: usize, j: usize) -> Result<Option<Contact>> {
    let (i, j) = (i.min(j), i.max(j));
    let diff = sub(&config.positions[j], &config.positions[i]);
    let distance = length(&diff);
    if distance < COINCIDENT_TOL {
        return Err(Error::DegenerateContact { i, j });
    }
    let (ri, rj) = (config.radii[i], config.radii[j]);
    let overlap = ri + rj - distance;
    if overlap <= 0.0 {
        return Ok(None);
    }
    Ok(Some(Contact {
        i,
        j,
        distance,
        overlap,
        area: hertz_contact_area(ri, rj, overlap),
        normal: [diff[0] / distance, diff[1] / distance, diff[2] / distance],
    }))
}

/// Overlapping pairs sorted by `(i, j)`. Broad phase: uniform grid of side
/// `2 max R`; narrow phase: exact distance test.
pub fn find_contacts(config: &CellConfiguration) -> Result<Vec<Contact>> {
    let h = 2.0 * config.radii.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    if config.is_empty() {
        return Ok(out);
    }
    let mut grid = Grid::new(h);
    for (k, p) in config.positions.iter().enumerate() {
        grid.insert(p, k);
    }
    for (i, p) in config.positions.iter().enumerate() {
        let mut near: Vec<usize> = grid.near(p).filter(|&j| j > i).collect();
        near.sort_unstable();
        for j in near {
            if let Some(c) = contact(config, i, j)? {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Friction coefficients of the cell-cell (`parallel`, `perp`) and
/// cell-medium (`med`) terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionParams {
    pub gamma_parallel: f64,
    pub gamma_perp: f64,
    pub gamma_med: f64,
}

impl Default for FrictionParams {
    /// The top-row parameters of the random-sphere benchmark.
    fn default() -> Self {
        FrictionParams { gamma_parallel: 2e6, gamma_perp: 8e6, gamma_med: 3e5 }
    }
}

impl FrictionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_parallel", self.gamma_parallel),
            ("gamma_perp", self.gamma_perp),
            ("gamma_med", self.gamma_med),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_parallel.max(self.gamma_perp)
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_parallel.min(self.gamma_perp)
    }
}

/// `kappa = max A_ij * gamma_max / gamma_min` over the contacts.
pub fn collision_kappa(contacts: &[Contact], params: &FrictionParams) -> f64 {
    let a_max = contacts.iter().map(|c| c.area).fold(0.0, f64::max);
    a_max * params.gamma_max() / params.gamma_min()
}

/// Friction graph: one edge `A_ij (g_par u u^T + g_perp (I - u u^T))` per
/// contact and the self-loop `g_med I` at every cell.
pub fn build_collision_graph(config: &CellConfiguration, params: &FrictionParams) -> Result<MatrixWeightedGraph> {
    let contacts = find_contacts(config)?;
    collision_graph_from_contacts(config.len(), &contacts, params)
}

pub fn collision_graph_from_contacts(
    n: usize,
    contacts: &[Contact],
    params: &FrictionParams,
) -> Result<MatrixWeightedGraph> {
    params.validate()?;
    let edges = contacts
        .iter()
        .map(|c| {
            let w = SymBlock::friction(&c.normal, params.gamma_parallel, params.gamma_perp);
            Edge::new(c.i, c.j, w * c.area)
        })
        .collect();
    let loops = vec![SymBlock::scaled_identity(3, params.gamma_med); n];
    MatrixWeightedGraph::new(3, loops, edges)
}

/// Right-hand side of the friction system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceModel {
    Zero,
    /// Independent standard normal components.
    #[default]
    RandomNormal,
    /// Repulsion `A_ij` along each contact normal, equal and opposite.
    HertzRepulsion,
}

/// `len` independent standard normal samples.
pub fn random_normal_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn assemble_rhs(config: &CellConfiguration, model: ForceModel, seed: u64) -> Result<Vec<f64>> {
    let n = config.len();
    let mut f = vec![0.0; 3 * n];
    match model {
        ForceModel::Zero => {}
        ForceModel::RandomNormal => f = random_normal_vector(3 * n, seed),
        ForceModel::HertzRepulsion => {
            for c in find_contacts(config)? {
                for k in 0..3 {
                    f[3 * c.i + k] -= c.area * c.normal[k];
                    f[3 * c.j + k] += c.area * c.normal[k];
                }
            }
        }
    }
    Ok(f)
}
