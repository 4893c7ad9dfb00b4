//! JSON germ definitions (`"schema": 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::WeightSystem;
use crate::obstruction::GermSystem;
use crate::poly::parse_poly;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// User-facing truncation `K` of the arc series.
    pub order: usize,
    /// Obstruction threshold.
    pub tol: f64,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    /// Sphere samples of the obstruction scan.
    pub samples: usize,
    pub link_points: usize,
    pub zero_set_points: usize,
    /// Directions per scale of the Lipschitz scan.
    pub scan_samples: usize,
    pub allow_obstructed: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            order: 8,
            tol: crate::obstruction::OBSTRUCTION_TOL,
            seed: DEFAULT_SEED,
            epsilons: vec![0.3, 1.0],
            samples: 10_000,
            link_points: 50,
            zero_set_points: 1000,
            scan_samples: 20,
            allow_obstructed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermDefinition {
    pub schema: u32,
    pub name: String,
    pub variables: Vec<String>,
    pub weights: Vec<u32>,
    pub equations: Vec<String>,
    pub perturbations: Vec<String>,
    #[serde(default)]
    pub options: Options,
}

impl GermDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        let def: GermDefinition = serde_json::from_str(text).map_err(|e| Error::Definition(e.to_string()))?;
        if def.schema != SCHEMA_VERSION {
            return Err(Error::Definition(format!("unsupported schema {}", def.schema)));
        }
        Ok(def)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Definition(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definitions serialize")
    }

    /// Parse and validate into a [`GermSystem`].
    pub fn build(&self) -> Result<GermSystem> {
        if self.variables.len() != self.weights.len() {
            return Err(Error::Definition(format!(
                "{} variables but {} weights",
                self.variables.len(),
                self.weights.len()
            )));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if self.variables[..i].contains(v) {
                return Err(Error::Definition(format!("duplicate variable `{v}`")));
            }
        }
        let ws = WeightSystem::new(&self.weights)?;
        let parse = |list: &[String]| list.iter().map(|e| parse_poly(e, &self.variables)).collect::<Result<Vec<_>>>();
        GermSystem::new(ws, parse(&self.equations)?, parse(&self.perturbations)?)
    }
}
