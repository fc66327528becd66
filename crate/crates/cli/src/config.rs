//! The JSON experiment file and its mapping onto [`ExperimentConfig`].
//!
//! Every object in the file is strict: unknown keys are rejected with the
//! path of the offending field.

use std::path::{Path, PathBuf};

use bootbias::experiments::{ChainKind, DeltaRule, DimRule, ExperimentConfig};
use bootbias::params::VectorRule;
use bootbias::registry::ComponentSpec;
use serde::Deserialize;
use serde_json::Value;

use crate::commands::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfigFile {
    /// One of `risk`, `normality`, `clt`, `sweep`, `oracle-check`.
    pub experiment: String,
    pub model: ComponentSpec,
    pub functional: ComponentSpec,
    #[serde(default)]
    pub theta: Option<VectorRule>,
    #[serde(default)]
    pub k: Option<usize>,
    pub grid: GridSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub delta: Option<DeltaValue>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub options: OptionsSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Vec<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(rename = "M", default)]
    pub m: Option<usize>,
    #[serde(rename = "R", default)]
    pub r: Option<usize>,
}

/// `"auto"`, `"inf"` or a positive number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DeltaValue {
    Number(f64),
    Word(String),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
    /// Record wall time per grid point (default true). Turn off for
    /// byte-reproducible CSVs.
    #[serde(default)]
    pub timing: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    #[serde(default)]
    pub chains: Option<ChainKind>,
    #[serde(default)]
    pub include_plugin: Option<bool>,
    #[serde(default)]
    pub sigma0: Option<f64>,
    #[serde(default)]
    pub projection: Option<VectorRule>,
    #[serde(default)]
    pub clt_samples: Option<usize>,
    #[serde(default)]
    pub retain_errors: Option<bool>,
}

/// Output file locations after resolving against the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// A parsed file together with its raw JSON, which the JSON mirror echoes.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub file: CliConfigFile,
    pub raw: Value,
}

impl LoadedConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let file: CliConfigFile = serde_path_to_error::deserialize(&raw).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(inner.to_string())
            } else {
                CliError::Config(format!("invalid config field `{path}`: {inner}"))
            }
        })?;
        Ok(LoadedConfig { file, raw })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl CliConfigFile {
    pub fn to_experiment(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::new(
            self.experiment.clone(),
            self.model.clone(),
            self.functional.clone(),
        );
        if let Some(theta) = &self.theta {
            cfg.theta = theta.clone();
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        cfg.grid = self.grid.n.clone();
        cfg.dim = match (self.grid.d, self.grid.alpha) {
            (Some(d), None) => DimRule::Fixed(d),
            (None, Some(a)) => DimRule::Alpha(a),
            (Some(_), Some(_)) => {
                return Err(field_error("grid", "give either `d` or `alpha`, not both"))
            }
            (None, None) => return Err(field_error("grid", "missing `d` or `alpha`")),
        };
        if let Some(m) = self.mc.m {
            cfg.m = m;
        }
        if let Some(r) = self.mc.r {
            cfg.r = r;
        }
        if let Some(delta) = &self.delta {
            cfg.delta = parse_delta(delta)?;
        }
        cfg.seed = self.seed;
        cfg.record_time = self.outputs.timing.unwrap_or(true);

        let o = &self.options;
        if let Some(c) = o.chains {
            cfg.chains = c;
        }
        if let Some(p) = o.include_plugin {
            cfg.include_plugin = p;
        }
        if let Some(s) = o.sigma0 {
            cfg.sigma0 = s;
        }
        if let Some(p) = &o.projection {
            cfg.projection = p.clone();
        }
        if let Some(c) = o.clt_samples {
            cfg.clt_samples = c;
        }
        if let Some(r) = o.retain_errors {
            cfg.retain_errors = r;
        }
        Ok(cfg)
    }

    /// Output paths resolved against `out_dir`. Without any configured
    /// output the CSV goes to `results.csv`.
    pub fn output_paths(&self, out_dir: &Path) -> OutputPaths {
        let o = &self.outputs;
        let mut csv = o.csv.clone();
        if csv.is_none() && o.json.is_none() {
            csv = Some(PathBuf::from("results.csv"));
        }
        let resolve = |p: &Option<PathBuf>| p.as_ref().map(|p| out_dir.join(p));
        OutputPaths {
            csv: resolve(&csv),
            json: resolve(&o.json),
            svg: resolve(&o.svg),
        }
    }
}

fn field_error(field: &str, message: &str) -> CliError {
    CliError::Config(format!("invalid config field `{field}`: {message}"))
}

fn parse_delta(v: &DeltaValue) -> Result<DeltaRule, CliError> {
    match v {
        DeltaValue::Number(x) if *x > 0.0 && x.is_finite() => Ok(DeltaRule::Value(*x)),
        DeltaValue::Number(_) => Err(field_error("delta", "must be a positive finite number")),
        DeltaValue::Word(w) => match w.as_str() {
            "auto" => Ok(DeltaRule::Auto),
            "inf" | "infinity" => Ok(DeltaRule::Infinite),
            other => Err(field_error(
                "delta",
                &format!("expected \"auto\", \"inf\" or a number, got \"{other}\""),
            )),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "experiment": "risk",
        "model": {"type": "gaussian_shift"},
        "functional": {"type": "quadratic_form"},
        "grid": {"n": [100], "d": 5}
    }"#;

    fn message(text: &str) -> String {
        match LoadedConfig::parse(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let loaded = LoadedConfig::parse(MINIMAL).unwrap();
        let cfg = loaded.file.to_experiment().unwrap();
        assert_eq!(cfg.kind, "risk");
        assert_eq!(cfg.dim, DimRule::Fixed(5));
        assert_eq!((cfg.k, cfg.m, cfg.r), (1, 1000, 2000));
        assert_eq!(cfg.delta, DeltaRule::Auto);
        assert!(cfg.record_time);
        let paths = loaded.file.output_paths(Path::new("out"));
        assert_eq!(paths.csv, Some(PathBuf::from("out/results.csv")));
        assert_eq!(paths.json, None);
    }

    #[test]
    fn full_config_maps_every_field() {
        let text = r#"{
            "experiment": "sweep",
            "model": {"type": "gaussian_shift", "sigma": 2.0},
            "functional": {"type": "power", "p": 3, "u": "e1"},
            "theta": {"constant": 0.5},
            "k": 2,
            "grid": {"n": [10, 20, 40], "alpha": 0.4},
            "mc": {"M": 30, "R": 400},
            "delta": "inf",
            "seed": 9,
            "outputs": {"csv": "a.csv", "json": "/tmp/a.json", "svg": "a.svg", "timing": false},
            "options": {"chains": "tilde", "include_plugin": true, "sigma0": 0.1,
                        "projection": "e1", "clt_samples": 500, "retain_errors": true}
        }"#;
        let loaded = LoadedConfig::parse(text).unwrap();
        let cfg = loaded.file.to_experiment().unwrap();
        assert_eq!(cfg.theta, VectorRule::Constant { constant: 0.5 });
        assert_eq!((cfg.k, cfg.m, cfg.r, cfg.seed), (2, 30, 400, 9));
        assert_eq!(cfg.dim, DimRule::Alpha(0.4));
        assert_eq!(cfg.delta, DeltaRule::Infinite);
        assert_eq!(cfg.chains, ChainKind::Tilde);
        assert!(cfg.include_plugin && cfg.retain_errors && !cfg.record_time);
        assert_eq!(cfg.sigma0, 0.1);
        assert_eq!(cfg.clt_samples, 500);
        let paths = loaded.file.output_paths(Path::new("o"));
        assert_eq!(paths.json, Some(PathBuf::from("/tmp/a.json")));
        assert_eq!(paths.svg, Some(PathBuf::from("o/a.svg")));
    }

    #[test]
    fn delta_forms() {
        assert_eq!(parse_delta(&DeltaValue::Number(0.3)).unwrap(), DeltaRule::Value(0.3));
        assert_eq!(parse_delta(&DeltaValue::Word("auto".into())).unwrap(), DeltaRule::Auto);
        assert!(parse_delta(&DeltaValue::Number(0.0)).is_err());
        assert!(parse_delta(&DeltaValue::Word("big".into())).is_err());
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let m = message(&MINIMAL.replace("\"grid\"", "\"gird\""));
        assert!(m.contains("gird"), "{m}");
        let m = message(&MINIMAL.replace("\"d\": 5", "\"d\": 5, \"beta\": 1"));
        assert!(m.contains("grid") && m.contains("beta"), "{m}");
        let m = message(&MINIMAL.replace("\"grid\"", "\"mc\": {\"N\": 3}, \"grid\""));
        assert!(m.contains("mc") && m.contains('N'), "{m}");
    }

    #[test]
    fn type_errors_name_their_path() {
        let m = message(&MINIMAL.replace("\"d\": 5", "\"d\": \"five\""));
        assert!(m.contains("grid.d"), "{m}");
        let m = message(&MINIMAL.replace("\"grid\"", "\"mc\": {\"R\": -1}, \"grid\""));
        assert!(m.contains("mc.R"), "{m}");
        assert!(message("{").contains("JSON"));
    }

    #[test]
    fn grid_needs_exactly_one_dimension_rule() {
        let both = MINIMAL.replace("\"d\": 5", "\"d\": 5, \"alpha\": 0.4");
        let file = LoadedConfig::parse(&both).unwrap().file;
        assert!(matches!(file.to_experiment(), Err(CliError::Config(_))));
        let neither = MINIMAL.replace(", \"d\": 5", "");
        let file = LoadedConfig::parse(&neither).unwrap().file;
        assert!(matches!(file.to_experiment(), Err(CliError::Config(_))));
    }
}
