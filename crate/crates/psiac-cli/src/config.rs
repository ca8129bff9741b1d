//! Experiment configuration: one JSON document per run.

use psiac::dg::{BoundaryCondition, Mesh};
use psiac::exact::{rat, Rational};
use psiac::kernel::FilterName;
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Symbolic,
    Legacy,
    Both,
}

impl Pipeline {
    pub fn variants(self) -> Vec<&'static str> {
        match self {
            Pipeline::Symbolic => vec!["symbolic"],
            Pipeline::Legacy => vec!["legacy"],
            Pipeline::Both => vec!["symbolic", "legacy"],
        }
    }
}

fn default_ppc() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: u8,
    pub degrees: Vec<usize>,
    pub mesh_sizes: Vec<usize>,
    pub filters: Vec<String>,
    pub pipeline: Pipeline,
    #[serde(default = "default_ppc")]
    pub eval_points_per_cell: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.example == 1 || self.example == 2) {
            return Err(ConfigError::Invalid {
                field: "example",
                reason: format!("must be 1 or 2, got {}", self.example),
            });
        }
        if self.degrees.is_empty() || self.degrees.contains(&0) {
            return Err(ConfigError::Invalid {
                field: "degrees",
                reason: "need a non-empty list of degrees >= 1".into(),
            });
        }
        if self.mesh_sizes.is_empty() || self.mesh_sizes.contains(&0) {
            return Err(ConfigError::Invalid {
                field: "mesh_sizes",
                reason: "need a non-empty list of cell counts >= 1".into(),
            });
        }
        if self.example == 1 {
            if let Some(&n) = self.mesh_sizes.iter().find(|&&n| n % 2 == 1) {
                return Err(ConfigError::Invalid {
                    field: "mesh_sizes",
                    reason: format!(
                        "example 1 lives on [-1, 1]; {n} cells leave a/h non-integral (use even sizes)"
                    ),
                });
            }
        }
        for f in &self.filters {
            f.parse::<FilterName>().map_err(|reason| ConfigError::Invalid {
                field: "filters",
                reason,
            })?;
        }
        if self.eval_points_per_cell < 2 {
            return Err(ConfigError::Invalid {
                field: "eval_points_per_cell",
                reason: "need at least 2 points per cell".into(),
            });
        }
        Ok(())
    }

    pub fn parsed_filters(&self) -> Vec<FilterName> {
        self.filters
            .iter()
            .map(|f| f.parse().expect("validated"))
            .collect()
    }

    pub fn problem(&self) -> Example {
        Example::new(self.example)
    }
}

/// The two canonical advection runs: unit transport speed, zero source.
#[derive(Clone, Copy, Debug)]
pub struct Example {
    pub id: u8,
    pub t_end: f64,
}

impl Example {
    pub fn new(id: u8) -> Self {
        let t_end = if id == 1 { 1.0 / 16.0 } else { 1.0 };
        Example { id, t_end }
    }

    pub fn domain(&self) -> (Rational, Rational) {
        if self.id == 1 {
            (rat(-1), rat(1))
        } else {
            (rat(0), rat(1))
        }
    }

    pub fn mesh(&self, n: usize) -> Result<Mesh, psiac::dg::MeshError> {
        let (a, b) = self.domain();
        Mesh::new(a, b, n)
    }

    pub fn initial(&self, x: f64) -> f64 {
        if self.id == 1 {
            0.7 * (PI * (10.0f64 / 7.0).sqrt() * x).sin()
        } else {
            (2.0 * PI * x).sin()
        }
    }

    /// Exact solution at the final time (the translated initial profile).
    pub fn exact_at_end(&self, x: f64) -> f64 {
        self.initial(x - self.t_end)
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        if self.id == 1 {
            let ex = *self;
            BoundaryCondition::DirichletInflow(Box::new(move |tau| ex.initial(-1.0 - tau)))
        } else {
            BoundaryCondition::Periodic
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "example": 2,
            "degrees": [1, 2],
            "mesh_sizes": [20, 40],
            "filters": ["SRV", "RLKV"],
            "pipeline": "both"
        })
    }

    fn parse(v: serde_json::Value) -> Result<ExperimentConfig, ConfigError> {
        let config: ExperimentConfig = serde_json::from_value(v).map_err(|e| ConfigError::Parse {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    #[test]
    fn valid_config_parses() {
        let config = parse(base_json()).unwrap();
        assert_eq!(config.eval_points_per_cell, 20);
        assert_eq!(config.parsed_filters().len(), 2);
        assert_eq!(config.pipeline.variants(), vec!["symbolic", "legacy"]);
    }

    #[test]
    fn bad_filter_rejected() {
        let mut v = base_json();
        v["filters"] = serde_json::json!(["NOPE"]);
        assert!(matches!(
            parse(v),
            Err(ConfigError::Invalid { field: "filters", .. })
        ));
    }

    #[test]
    fn odd_mesh_rejected_for_example_one() {
        let mut v = base_json();
        v["example"] = serde_json::json!(1);
        v["mesh_sizes"] = serde_json::json!([21]);
        assert!(matches!(
            parse(v),
            Err(ConfigError::Invalid { field: "mesh_sizes", .. })
        ));
    }

    #[test]
    fn parse_error_carries_location() {
        let dir = std::env::temp_dir().join("psiac-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.json");
        std::fs::write(&path, "{\n  \"example\": 2,\n  oops\n}").unwrap();
        match ExperimentConfig::load(&path) {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn example_solutions_translate() {
        let ex1 = Example::new(1);
        assert!((ex1.exact_at_end(0.3) - ex1.initial(0.3 - 1.0 / 16.0)).abs() < 1e-15);
        let ex2 = Example::new(2);
        // period-one translation: the profile returns to itself
        assert!((ex2.exact_at_end(0.3) - ex2.initial(0.3)).abs() < 1e-12);
    }
}
