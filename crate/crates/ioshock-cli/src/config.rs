//! Config-file loading and flag resolution. The TOML file supplies defaults;
//! command-line flags always win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ioshock::diffusion::{ShockParams, SweepSpec};
use ioshock::netstats::PathMode;

use crate::{CliError, OutputFormat, ReportArgs, SimulateArgs, StatsArgs};

/// Raw TOML config. Every key is optional; keys mirror the CLI flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub inputs: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub model: Option<u8>,
    pub f: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub shock_size: Option<f64>,
    pub seeds: Option<Vec<String>>,
    pub metadata: Option<PathBuf>,
    pub undirected_paths: Option<bool>,
    pub timestamp: Option<bool>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_format(raw: &str) -> Result<OutputFormat, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        "both" => Ok(OutputFormat::Both),
        other => Err(CliError::Config(format!(
            "unknown format {other:?}; expected csv, json, or both"
        ))),
    }
}

fn resolve_inputs(
    flag_inputs: &[PathBuf],
    file: &FileConfig,
) -> Result<Vec<PathBuf>, CliError> {
    let inputs = if flag_inputs.is_empty() {
        file.inputs.clone().unwrap_or_default()
    } else {
        flag_inputs.to_vec()
    };
    if inputs.is_empty() {
        return Err(CliError::Config(
            "no input tables given (positional arguments or `inputs` in the config file)"
                .to_string(),
        ));
    }
    Ok(inputs)
}

fn resolve_out(flag: Option<&PathBuf>, file: &FileConfig) -> Result<PathBuf, CliError> {
    flag.cloned()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::Config("no output directory (--out or `out`)".to_string()))
}

fn resolve_format(
    flag: Option<OutputFormat>,
    file: &FileConfig,
    default: OutputFormat,
) -> Result<OutputFormat, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match &file.format {
        Some(raw) => parse_format(raw),
        None => Ok(default),
    }
}

#[derive(Debug, Clone)]
pub struct StatsConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub path_mode: PathMode,
}

impl StatsConfig {
    pub fn resolve(args: &StatsArgs, file: &FileConfig) -> Result<Self, CliError> {
        let path_mode = if args.undirected_paths || file.undirected_paths.unwrap_or(false) {
            PathMode::Undirected
        } else {
            PathMode::Directed
        };
        Ok(Self {
            inputs: resolve_inputs(&args.inputs, file)?,
            out: resolve_out(args.out.as_ref(), file)?,
            format: resolve_format(args.format, file, OutputFormat::Csv)?,
            path_mode,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub specs: Vec<SweepSpec>,
    pub seeds: Vec<String>,
    pub metadata: Option<PathBuf>,
    pub timestamp: bool,
}

impl SimulateConfig {
    pub fn resolve(args: &SimulateArgs, file: &FileConfig) -> Result<Self, CliError> {
        let model = args
            .model
            .or(file.model)
            .ok_or_else(|| CliError::Config("no model selected (--model 1|2|3)".to_string()))?;
        let f = if args.f.is_empty() {
            file.f.clone().unwrap_or_default()
        } else {
            args.f.clone()
        };
        let c = if args.c.is_empty() {
            file.c.clone().unwrap_or_default()
        } else {
            args.c.clone()
        };
        let shock_size = args.shock_size.or(file.shock_size);
        let specs = build_specs(model, &f, &c, shock_size)?;
        let seeds = if args.seeds.is_empty() {
            file.seeds.clone().unwrap_or_default()
        } else {
            args.seeds.clone()
        };
        Ok(Self {
            inputs: resolve_inputs(&args.inputs, file)?,
            out: resolve_out(args.out.as_ref(), file)?,
            format: resolve_format(args.format, file, OutputFormat::Both)?,
            specs,
            seeds,
            metadata: args.metadata.clone().or_else(|| file.metadata.clone()),
            timestamp: args.timestamp || file.timestamp.unwrap_or(false),
        })
    }
}

/// Builds the per-model parameter grid. Models 2 and 3 pair `--f` and `--c`
/// by position; model 1 takes only a shock size.
pub fn build_specs(
    model: u8,
    f: &[f64],
    c: &[f64],
    shock_size: Option<f64>,
) -> Result<Vec<SweepSpec>, CliError> {
    match model {
        1 => {
            if !f.is_empty() || !c.is_empty() {
                return Err(CliError::Config(
                    "model 1 takes --shock-size, not --f/--c".to_string(),
                ));
            }
            let size = shock_size.unwrap_or(1.0);
            if size <= 0.0 {
                return Err(CliError::Config(format!(
                    "shock size must be positive, got {size}"
                )));
            }
            Ok(vec![SweepSpec::Demand { shock_size: size }])
        }
        2 | 3 => {
            if shock_size.is_some() {
                return Err(CliError::Config(
                    "--shock-size applies to model 1 only".to_string(),
                ));
            }
            if f.is_empty() || f.len() != c.len() {
                return Err(CliError::Config(format!(
                    "models 2 and 3 need matching --f/--c lists, got {} and {}",
                    f.len(),
                    c.len()
                )));
            }
            f.iter()
                .zip(c)
                .map(|(&f, &c)| {
                    let params = ShockParams::new(f, c)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    Ok(if model == 2 {
                        SweepSpec::LinkCascade(params)
                    } else {
                        SweepSpec::ProductionCascade(params)
                    })
                })
                .collect()
        }
        other => Err(CliError::Config(format!(
            "unknown model {other}; expected 1, 2, or 3"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub out: PathBuf,
    pub metadata: Option<PathBuf>,
}

impl ReportConfig {
    pub fn resolve(args: &ReportArgs, file: &FileConfig) -> Result<Self, CliError> {
        Ok(Self {
            out: resolve_out(args.out.as_ref(), file)?,
            metadata: args.metadata.clone().or_else(|| file.metadata.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_rejects_cascade_params() {
        let err = build_specs(1, &[0.6], &[0.4], None).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn model2_pairs_f_and_c_positionally() {
        let specs = build_specs(2, &[0.6, 0.7], &[0.4, 0.1], None).unwrap();
        assert_eq!(specs.len(), 2);
        let p = specs[0].params().unwrap();
        assert_eq!((p.reduction(), p.capacity_share()), (0.6, 0.4));
    }

    #[test]
    fn mismatched_grid_lengths_are_rejected() {
        assert!(build_specs(2, &[0.6], &[0.4, 0.1], None).is_err());
        assert!(build_specs(3, &[], &[], None).is_err());
    }

    #[test]
    fn out_of_range_params_are_config_errors() {
        assert!(build_specs(2, &[1.2], &[0.4], None).is_err());
        assert!(build_specs(1, &[], &[], Some(-1.0)).is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let file = FileConfig {
            out: Some(PathBuf::from("from_file")),
            format: Some("json".to_string()),
            ..FileConfig::default()
        };
        let args = StatsArgs {
            inputs: vec![PathBuf::from("x.csv")],
            out: Some(PathBuf::from("from_flag")),
            format: None,
            undirected_paths: false,
        };
        let cfg = StatsConfig::resolve(&args, &file).unwrap();
        assert_eq!(cfg.out, PathBuf::from("from_flag"));
        assert_eq!(cfg.format, OutputFormat::Json);
    }
}
