use serde::{Deserialize, Serialize};

use super::{
    domain_radius_for, generate_hex_lattice_with, generate_random_sphere, CellConfiguration, ForceModel,
    FrictionParams, DEFAULT_CELL_RADIUS, DEFAULT_HEX_SPACING,
};
use crate::error::{Error, Result};

/// Volume fraction of cells in the ball when no domain radius is given.
pub const DEFAULT_VOLUME_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    RandomSphere,
    HexLattice,
}

/// JSON scenario description. Absent fields take defaults; see
/// [`ScenarioSpec::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(rename = "type")]
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shells: Option<usize>,
    #[serde(default = "default_cell_radius")]
    pub cell_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_dist: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Nearest-neighbor distance of the hexagonal lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default = "default_gamma_parallel")]
    pub gamma_parallel: f64,
    #[serde(default = "default_gamma_perp")]
    pub gamma_perp: f64,
    #[serde(default = "default_gamma_med")]
    pub gamma_med: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub force_model: ForceModel,
}

fn default_cell_radius() -> f64 {
    DEFAULT_CELL_RADIUS
}
fn default_gamma_parallel() -> f64 {
    FrictionParams::default().gamma_parallel
}
fn default_gamma_perp() -> f64 {
    FrictionParams::default().gamma_perp
}
fn default_gamma_med() -> f64 {
    FrictionParams::default().gamma_med
}

impl ScenarioSpec {
    pub fn random_sphere(n: usize) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::RandomSphere,
            n: Some(n),
            shells: None,
            cell_radius: DEFAULT_CELL_RADIUS,
            domain_radius: None,
            min_dist: None,
            sigma: None,
            spacing: None,
            gamma_parallel: default_gamma_parallel(),
            gamma_perp: default_gamma_perp(),
            gamma_med: default_gamma_med(),
            seed: 0,
            force_model: ForceModel::default(),
        }
    }

    pub fn hex_lattice(shells: usize, sigma: f64) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::HexLattice,
            n: None,
            shells: Some(shells),
            sigma: Some(sigma),
            ..ScenarioSpec::random_sphere(0)
        }
    }

    pub fn with_friction(mut self, params: FrictionParams) -> Self {
        self.gamma_parallel = params.gamma_parallel;
        self.gamma_perp = params.gamma_perp;
        self.gamma_med = params.gamma_med;
        self
    }

    pub fn params(&self) -> FrictionParams {
        FrictionParams {
            gamma_parallel: self.gamma_parallel,
            gamma_perp: self.gamma_perp,
            gamma_med: self.gamma_med,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate().map_err(config)?;
        if !(self.cell_radius > 0.0) {
            return Err(Error::Config("cell_radius must be positive".into()));
        }
        match self.kind {
            ScenarioKind::RandomSphere => {
                if self.n.is_none() {
                    return Err(Error::Config("random-sphere scenario needs `n`".into()));
                }
                if self.shells.is_some() || self.sigma.is_some() || self.spacing.is_some() {
                    return Err(Error::Config(
                        "`shells`, `sigma` and `spacing` apply to hex-lattice scenarios".into(),
                    ));
                }
                for (name, v) in [("domain_radius", self.domain_radius), ("min_dist", self.min_dist)] {
                    if v.is_some_and(|v| !(v > 0.0)) {
                        return Err(Error::Config(format!("{name} must be positive")));
                    }
                }
            }
            ScenarioKind::HexLattice => {
                if !self.shells.is_some_and(|s| s >= 1) {
                    return Err(Error::Config("hex-lattice scenario needs `shells` >= 1".into()));
                }
                if self.n.is_some() || self.domain_radius.is_some() || self.min_dist.is_some() {
                    return Err(Error::Config(
                        "`n`, `domain_radius` and `min_dist` apply to random-sphere scenarios".into(),
                    ));
                }
                if self.sigma.is_some_and(|s| !(s >= 0.0)) {
                    return Err(Error::Config("sigma must be non-negative".into()));
                }
                if self.spacing.is_some_and(|s| !(s > 0.0)) {
                    return Err(Error::Config("spacing must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Copy with every generator parameter filled in. A hex lattice without
    /// `sigma` keeps it unset so callers can sweep it.
    pub fn resolved(&self) -> Result<ScenarioSpec> {
        self.validate()?;
        let mut s = self.clone();
        match s.kind {
            ScenarioKind::RandomSphere => {
                let n = s.n.unwrap_or(0);
                s.domain_radius.get_or_insert(domain_radius_for(n, s.cell_radius, DEFAULT_VOLUME_FRACTION));
                s.min_dist.get_or_insert(0.9 * 2.0 * s.cell_radius);
            }
            ScenarioKind::HexLattice => {
                s.spacing.get_or_insert(DEFAULT_HEX_SPACING * 2.0 * s.cell_radius);
            }
        }
        Ok(s)
    }

    /// Cell configuration for `seed`; the scenario's own `seed` is ignored here.
    pub fn generate(&self, seed: u64) -> Result<CellConfiguration> {
        let s = self.resolved()?;
        match s.kind {
            ScenarioKind::RandomSphere => generate_random_sphere(
                s.n.unwrap_or(0),
                s.domain_radius.unwrap_or(0.0),
                s.cell_radius,
                s.min_dist.unwrap_or(0.0),
                seed,
            ),
            ScenarioKind::HexLattice => generate_hex_lattice_with(
                s.shells.unwrap_or(0),
                s.sigma.unwrap_or(0.0),
                seed,
                s.cell_radius,
                s.spacing.unwrap_or(0.0),
            ),
        }
    }

    /// Short name used in CSV rows.
    pub fn label(&self) -> String {
        match self.kind {
            ScenarioKind::RandomSphere => format!("random-sphere-n{}", self.n.unwrap_or(0)),
            ScenarioKind::HexLattice => match self.sigma {
                Some(sigma) => format!("hex-lattice-s{}-sigma{}", self.shells.unwrap_or(0), sigma),
                None => format!("hex-lattice-s{}", self.shells.unwrap_or(0)),
            },
        }
    }
}

fn config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_json() {
        let s: ScenarioSpec = serde_json::from_str(r#"{"type": "random-sphere", "n": 50}"#).unwrap();
        assert_eq!(s, ScenarioSpec::random_sphere(50));
        let r = s.resolved().unwrap();
        assert_eq!(r.min_dist, Some(0.9));
        assert!(r.domain_radius.unwrap() > 0.0);
    }

    #[test]
    fn parses_full_json() {
        let s: ScenarioSpec = serde_json::from_str(
            r#"{"type": "hex-lattice", "shells": 4, "cell_radius": 0.5, "sigma": 0.05,
                "gamma_parallel": 2e7, "gamma_perp": 8e7, "gamma_med": 3e4,
                "seed": 9, "force_model": "hertz-repulsion"}"#,
        )
        .unwrap();
        assert_eq!(s.kind, ScenarioKind::HexLattice);
        assert_eq!(s.force_model, ForceModel::HertzRepulsion);
        assert_eq!(s.generate(1).unwrap().len(), 309);
        let back: ScenarioSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            r#"{"type": "random-sphere"}"#,
            r#"{"type": "hex-lattice", "shells": 0}"#,
            r#"{"type": "random-sphere", "n": 5, "gamma_med": -1}"#,
            r#"{"type": "random-sphere", "n": 5, "shells": 2}"#,
            r#"{"type": "hex-lattice", "shells": 2, "sigma": -0.1}"#,
        ] {
            let s: ScenarioSpec = serde_json::from_str(bad).unwrap();
            assert!(matches!(s.validate(), Err(Error::Config(_))), "{bad}");
        }
        assert!(serde_json::from_str::<ScenarioSpec>(r#"{"type": "cube", "n": 5}"#).is_err());
        assert!(serde_json::from_str::<ScenarioSpec>(r#"{"type": "random-sphere", "n": 5, "extra": 1}"#).is_err());
    }
}
