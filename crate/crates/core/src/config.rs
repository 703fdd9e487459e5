//! JSON run configurations: schema-validated (unknown keys rejected),
//! dotted-path overridable, echoed verbatim into every output sidecar.

use crate::error::{Error, Result};
use crate::fit::FitModel;
use crate::operator::GridSpec;
use crate::params::{ModelParams, PotentialSpec};
use crate::quad::{linspace, logspace};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sample,
    Ids,
    Negative,
    Classical,
    Laplace,
    Constants,
    Fk,
    Fit,
    #[serde(rename = "pipeline_lifshitz_1d")]
    PipelineLifshitz1d,
}

/// Grid specification: an explicit list or a generated range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridRange {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        scale: Scale,
    },
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl GridRange {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            GridRange::List(v) => {
                if v.is_empty() {
                    return Err(Error::config("empty grid list".to_string()));
                }
                Ok(v.clone())
            }
            GridRange::Range {
                start,
                stop,
                count,
                scale,
            } => {
                if *count == 0 {
                    return Err(Error::config("grid count must be positive".to_string()));
                }
                match scale {
                    Scale::Linear => Ok(linspace(*start, *stop, *count)),
                    Scale::Log => {
                        if *start <= 0.0 || *stop <= 0.0 {
                            return Err(Error::config(
                                "log-scale grid needs positive endpoints".to_string(),
                            ));
                        }
                        Ok(logspace(*start, *stop, *count))
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub box_r: f64,
    #[serde(default)]
    pub replicate: u64,
    /// Also export the assembled operator in `row col value` format.
    #[serde(default)]
    pub export_operator: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsBlock {
    pub lambda_grid: GridRange,
    pub replicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceFlavor {
    FromIds,
    N1Quadrature,
    N1Mc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceBlock {
    pub kind: LaplaceFlavor,
    pub t_grid: GridRange,
    /// λ grid for the `from_ids` flavor (the IDS is computed in-run).
    #[serde(default)]
    pub lambda_grid: Option<GridRange>,
    #[serde(default)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkBlock {
    pub x: Vec<f64>,
    pub t_grid: GridRange,
    pub n_paths: usize,
    pub n_configs: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    pub input_csv: String,
    pub model: FitModel,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub min_depth: Option<f64>,
}

fn default_exp_tol() -> f64 {
    0.2
}

fn default_coeff_rel_tol() -> f64 {
    0.3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineBlock {
    pub box_r: f64,
    pub dx: f64,
    pub replicates: usize,
    pub lambda_grid: GridRange,
    #[serde(default = "default_exp_tol")]
    pub exponent_tol: f64,
    #[serde(default = "default_coeff_rel_tol")]
    pub coefficient_rel_tol: f64,
    /// Window depth override for the tail fit (default 10).
    #[serde(default)]
    pub min_depth: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub spec: PotentialSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub sample: Option<SampleBlock>,
    #[serde(default)]
    pub ids: Option<IdsBlock>,
    #[serde(default)]
    pub laplace: Option<LaplaceBlock>,
    #[serde(default)]
    pub fk: Option<FkBlock>,
    #[serde(default)]
    pub fit: Option<FitBlock>,
    #[serde(default)]
    pub pipeline: Option<PipelineBlock>,
    /// Base name of the emitted artifacts; defaults to the command name.
    #[serde(default)]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn output_base(&self) -> String {
        self.output.clone().unwrap_or_else(|| {
            match self.command {
                Command::Sample => "sample",
                Command::Ids => "ids",
                Command::Negative => "negative",
                Command::Classical => "classical",
                Command::Laplace => "laplace",
                Command::Constants => "constants",
                Command::Fk => "fk",
                Command::Fit => "fit",
                Command::PipelineLifshitz1d => "lifshitz_1d",
            }
            .to_string()
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.spec.validate(self.params.d)?;
        if let Some(g) = &self.grid {
            g.validate()?;
            if g.d != self.params.d {
                return Err(Error::config(format!(
                    "grid.d = {} does not match params.d = {}",
                    g.d, self.params.d
                )));
            }
        }
        Ok(())
    }
}

fn parse_json(text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("config parse: {e}")))
}

/// Apply one `dotted.path=value` override onto a JSON tree. The value is
/// parsed as JSON when possible, falling back to a bare string.
pub fn apply_override(root: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::config(format!("override {assignment:?} must look like key.path=value"))
    })?;
    let value: serde_json::Value = serde_json::from_str(raw.trim())
        .unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.trim().split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if seg.is_empty() {
            return Err(Error::config(format!("override {assignment:?}: empty path segment")));
        }
        let obj = cursor.as_object_mut().ok_or_else(|| {
            Error::config(format!(
                "override {assignment:?}: {} is not an object",
                segments[..i].join(".")
            ))
        })?;
        if i + 1 == segments.len() {
            obj.insert(seg.to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry(seg.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

/// Load a run config from a JSON file, applying dotted-path overrides
/// before schema validation.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    load_config_str(&text, overrides)
}

pub fn load_config_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut tree = parse_json(text)?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let cfg: RunConfig = serde_json::from_value(tree)
        .map_err(|e| Error::config(format!("config schema: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "command": "constants",
        "params": {"d": 1, "theta": 1.0, "h": 1.0, "seed": 7},
        "spec": {"c0": 1.0, "alpha": 2.0, "r0": 0.1, "sign": 1, "u_cap": 1e6}
    }"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = load_config_str(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.command, Command::Constants);
        assert_eq!(cfg.output_base(), "constants");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"seed\": 7", "\"seed\": 7, \"sneed\": 8");
        let err = load_config_str(&bad, &[]).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("sneed"), "{err}");
    }

    #[test]
    fn overrides_apply_along_dotted_paths() {
        let cfg = load_config_str(
            MINIMAL,
            &[
                "params.theta=2.5".to_string(),
                "spec.alpha=4".to_string(),
                "output=custom".to_string(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.params.theta, 2.5);
        assert_eq!(cfg.spec.alpha, 4.0);
        assert_eq!(cfg.output_base(), "custom");
    }

    #[test]
    fn invalid_theta_is_a_config_error() {
        let err = load_config_str(MINIMAL, &["params.theta=-1".to_string()]).unwrap_err();
        assert!(err.to_string().contains("theta"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn grid_ranges_resolve() {
        let lin = GridRange::Range {
            start: 0.0,
            stop: 1.0,
            count: 5,
            scale: Scale::Linear,
        };
        assert_eq!(lin.resolve().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = GridRange::Range {
            start: 1.0,
            stop: 100.0,
            count: 3,
            scale: Scale::Log,
        };
        let v = log.resolve().unwrap();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert!(GridRange::List(vec![]).resolve().is_err());
    }

    #[test]
    fn bad_override_paths_error() {
        assert!(load_config_str(MINIMAL, &["params=3".to_string()]).is_err());
        assert!(load_config_str(MINIMAL, &["noequals".to_string()]).is_err());
        assert!(load_config_str(MINIMAL, &["params.theta.x=1".to_string()]).is_err());
    }
}
