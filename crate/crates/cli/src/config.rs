//! Run configuration: a TOML file with the ensemble parameters, nested
//! sections for the potential and the quadrature controls, and per-command
//! options. Unknown keys are rejected so typos fail loudly instead of
//! silently running with defaults.
//!
//! ```toml
//! b = 1.0
//! charges = [1, 2]
//! total_charge = 4
//! family = "monomial"          # or "hermite-monic"; optional
//! fugacities = [1.0, 1.0]      # optional, defaults to all ones
//!
//! [potential]
//! kind = "gaussian"            # or "tabulated" with knots = [[x, u], ...]
//! sigma = 1.0
//!
//! [quadrature]                 # optional
//! radius = 12.0                # half-width of the truncated interval
//! rel_tol = 1e-11
//! max_subdivisions = 50
//! fixed_panels = 64            # replaces adaptive refinement when set
//!
//! [oracle]                     # optional
//! mc_samples = 200000
//! seed = 1
//!
//! [correlate]                  # read by the correlate command only
//! pattern = [1, 0]             # insertions per species
//! grid = [-2.0, 0.0, 2.0]      # one-insertion sweep, or points = [[..], ..]
//! populations = [2, 1]         # optional: fixed-population correlation
//! ```

use std::path::Path;

use loggas_core::{
    CompleteFamily, EnsembleSpec, OracleConfig, OracleMethod, Potential, QuadMethod,
    QuadratureScheme,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub b: f64,
    pub charges: Vec<u32>,
    pub total_charge: u32,
    #[serde(default = "default_family")]
    pub family: String,
    pub fugacities: Option<Vec<f64>>,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub oracle: OracleSection,
    pub correlate: Option<CorrelateConfig>,
}

fn default_family() -> String {
    "monomial".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum PotentialConfig {
    Gaussian { sigma: f64 },
    Tabulated { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub radius: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<u32>,
    pub fixed_panels: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub mc_samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    /// Number of insertion points per species.
    pub pattern: Vec<u32>,
    /// Sweep of single insertion points; requires a pattern with exactly one
    /// insertion in total.
    pub grid: Option<Vec<f64>>,
    /// Explicit point tuples, each of length `sum(pattern)`, assigned to
    /// species in order.
    pub points: Option<Vec<Vec<f64>>>,
    /// When present, the correlation is taken at this fixed population;
    /// otherwise populations are mixed by the fugacities.
    pub populations: Option<Vec<u32>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn ensemble(&self) -> Result<EnsembleSpec, Failure> {
        let family = match self.family.as_str() {
            "monomial" => CompleteFamily::monomial(),
            "hermite-monic" => CompleteFamily::hermite_monic(),
            other => {
                return Err(Failure::Config(format!(
                    "unknown polynomial family {other:?} (expected \"monomial\" or \"hermite-monic\")"
                )))
            }
        };
        let potential = match &self.potential {
            PotentialConfig::Gaussian { sigma } => Potential::gaussian(*sigma)?,
            PotentialConfig::Tabulated { knots } => Potential::tabulated(knots.clone())?,
        };
        Ok(EnsembleSpec::new(
            self.b,
            self.charges.clone(),
            self.total_charge,
            family,
            potential,
        )?)
    }

    /// The complete family *other* than the configured one, for the
    /// family-invariance check; `None` when the configured name is unknown.
    pub fn alternate_family(&self) -> Option<CompleteFamily> {
        match self.family.as_str() {
            "monomial" => Some(CompleteFamily::hermite_monic()),
            "hermite-monic" => Some(CompleteFamily::monomial()),
            _ => None,
        }
    }

    pub fn scheme(&self) -> QuadratureScheme {
        let defaults = QuadratureScheme::default();
        QuadratureScheme {
            method: match self.quadrature.fixed_panels {
                Some(n) => QuadMethod::FixedPanels(n),
                None => QuadMethod::Adaptive,
            },
            radius: self.quadrature.radius,
            rel_tol: self.quadrature.rel_tol.unwrap_or(defaults.rel_tol),
            max_subdivisions: self
                .quadrature
                .max_subdivisions
                .unwrap_or(defaults.max_subdivisions),
        }
    }

    pub fn oracle_config(&self, mc: bool, paranoid: bool, seed: Option<u64>) -> OracleConfig {
        let defaults = OracleConfig::default();
        OracleConfig {
            method: if mc {
                OracleMethod::MonteCarlo
            } else {
                OracleMethod::Quadrature
            },
            paranoid,
            mc_samples: self.oracle.mc_samples.unwrap_or(defaults.mc_samples),
            seed: seed.or(self.oracle.seed).unwrap_or(defaults.seed),
        }
    }

    pub fn fugacities(&self) -> Result<Vec<f64>, Failure> {
        match &self.fugacities {
            None => Ok(vec![1.0; self.charges.len()]),
            Some(z) => {
                if z.len() != self.charges.len() {
                    return Err(Failure::Config(format!(
                        "{} fugacities for {} species",
                        z.len(),
                        self.charges.len()
                    )));
                }
                if let Some(bad) = z.iter().find(|v| !v.is_finite()) {
                    return Err(Failure::Config(format!("non-finite fugacity {bad}")));
                }
                Ok(z.clone())
            }
        }
    }
}

impl CorrelateConfig {
    /// Expands grid/points into the list of insertion tuples, each of length
    /// `sum(pattern)`. An empty list is legal and yields an empty table.
    pub fn tuples(&self, species_count: usize) -> Result<Vec<Vec<f64>>, Failure> {
        if self.pattern.len() != species_count {
            return Err(Failure::Config(format!(
                "correlate.pattern has {} entries for {} species",
                self.pattern.len(),
                species_count
            )));
        }
        let total: u32 = self.pattern.iter().sum();
        if total == 0 {
            return Err(Failure::Config(
                "correlate.pattern must request at least one insertion".into(),
            ));
        }
        match (&self.grid, &self.points) {
            (Some(_), Some(_)) => Err(Failure::Config(
                "correlate accepts either grid or points, not both".into(),
            )),
            (None, None) => Err(Failure::Config(
                "correlate needs a grid or a points list".into(),
            )),
            (Some(grid), None) => {
                if total != 1 {
                    return Err(Failure::Config(format!(
                        "a grid sweeps a single insertion point, but the pattern requests {total}; use points = [[..], ..]"
                    )));
                }
                Ok(grid.iter().map(|&x| vec![x]).collect())
            }
            (None, Some(points)) => {
                for tuple in points {
                    if tuple.len() != total as usize {
                        return Err(Failure::Config(format!(
                            "point tuple {:?} has {} coordinates, pattern requires {total}",
                            tuple,
                            tuple.len()
                        )));
                    }
                }
                Ok(points.clone())
            }
        }
    }

    /// Splits one flat tuple into per-species point lists following the
    /// pattern.
    pub fn split(&self, tuple: &[f64]) -> Vec<Vec<f64>> {
        let mut lists = Vec::with_capacity(self.pattern.len());
        let mut start = 0usize;
        for &m in &self.pattern {
            let end = start + m as usize;
            lists.push(tuple[start..end].to_vec());
            start = end;
        }
        lists
    }
}
