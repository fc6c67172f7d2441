//! Flat `key = value` scenario files and command-line overrides.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use pedflow_core::{ExecutorKind, Model, ScenarioConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("malformed value for `{key}`: `{value}` ({reason})")]
    Malformed {
        key: String,
        value: String,
        reason: String,
    },

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Every key accepted in a config file, in serialization order.
pub const KEYS: [&str; 19] = [
    "width",
    "height",
    "agents_per_side",
    "model",
    "steps",
    "seed",
    "repeats",
    "executor",
    "threads",
    "d0",
    "sel_mu",
    "sel_sigma",
    "alpha",
    "beta",
    "rho",
    "tau0",
    "q",
    "out_dir",
    "timing",
];

/// Command-line overrides; each one wins over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` scenario file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub agents_per_side: Option<usize>,
    /// Movement policy: lem | aco
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// seq | par
    #[arg(long)]
    pub executor: Option<ExecutorKind>,
    /// Worker threads for the parallel executor (0 = all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub d0: Option<f64>,
    #[arg(long = "sel-mu")]
    pub sel_mu: Option<f64>,
    #[arg(long = "sel-sigma")]
    pub sel_sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Output directory for CSV files
    #[arg(long = "out", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Write zero for runtime columns so repeated runs give identical files
    #[arg(long)]
    pub no_timing: bool,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        macro_rules! push {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    out.push((stringify!($field), v.to_string()));
                })*
            };
        }
        push!(
            width,
            height,
            agents_per_side,
            model,
            steps,
            seed,
            repeats,
            executor,
            threads
        );
        push!(d0, sel_mu, sel_sigma, alpha, beta, rho, tau0, q);
        if let Some(p) = &self.out_dir {
            out.push(("out_dir", p.display().to_string()));
        }
        if self.no_timing {
            out.push(("timing", "false".into()));
        }
        out
    }
}

/// A validated config plus the keys that were set explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ScenarioConfig,
    pub explicit: BTreeSet<&'static str>,
}

impl ParsedConfig {
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }
}

fn malformed(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Malformed {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: ToString,
{
    value.parse::<T>().map_err(|e| malformed(key, value, e))
}

fn apply(config: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    let v = value.trim();
    match key {
        "width" => config.width = parse_value(key, v)?,
        "height" => config.height = parse_value(key, v)?,
        "agents_per_side" => config.agents_per_side = parse_value(key, v)?,
        "model" => config.model = parse_value(key, v)?,
        "steps" => config.steps = parse_value(key, v)?,
        "seed" => config.seed = parse_value(key, v)?,
        "repeats" => config.repeats = parse_value(key, v)?,
        "executor" => config.executor = parse_value(key, v)?,
        "threads" => config.threads = parse_value(key, v)?,
        "d0" => config.d0 = parse_value(key, v)?,
        "sel_mu" => config.sel_mu = parse_value(key, v)?,
        "sel_sigma" => config.sel_sigma = parse_value(key, v)?,
        "alpha" => config.alpha = parse_value(key, v)?,
        "beta" => config.beta = parse_value(key, v)?,
        "rho" => config.rho = parse_value(key, v)?,
        "tau0" => config.tau0 = parse_value(key, v)?,
        "q" => config.q = parse_value(key, v)?,
        "out_dir" => {
            if v.is_empty() {
                return Err(malformed(key, v, "empty path"));
            }
            config.out_dir = PathBuf::from(v)
        }
        "timing" => config.timing = parse_value(key, v)?,
        _ => unreachable!("key checked against KEYS"),
    }
    Ok(())
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

/// Parses config text, applies overrides and validates the result.
///
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<ParsedConfig, ConfigError> {
    let mut config = ScenarioConfig::default();
    let mut explicit = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim();
        let key = known_key(key).ok_or_else(|| ConfigError::UnknownKey {
            key: key.to_string(),
            line: i + 1,
        })?;
        apply(&mut config, key, value)?;
        explicit.insert(key);
    }

    for (key, value) in overrides.pairs() {
        apply(&mut config, key, &value)?;
        explicit.insert(key);
    }

    config.validate().map_err(|e| match e {
        pedflow_core::Error::InvalidConfig { key, reason } => ConfigError::Invalid {
            key: key.to_string(),
            reason,
        },
        other => ConfigError::Invalid {
            key: "config".into(),
            reason: other.to_string(),
        },
    })?;
    Ok(ParsedConfig { config, explicit })
}

/// Reads `overrides.config` (if any) and applies the remaining overrides.
pub fn parse_config(overrides: &Overrides) -> Result<ParsedConfig, ConfigError> {
    let text = match &overrides.config {
        Some(path) => read(path)?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every key of `config` in the file format accepted by [`parse_config_str`].
pub fn to_config_text(config: &ScenarioConfig) -> String {
    let mut s = String::new();
    let c = config;
    let values: [String; 19] = [
        c.width.to_string(),
        c.height.to_string(),
        c.agents_per_side.to_string(),
        c.model.to_string(),
        c.steps.to_string(),
        c.seed.to_string(),
        c.repeats.to_string(),
        c.executor.to_string(),
        c.threads.to_string(),
        c.d0.to_string(),
        c.sel_mu.to_string(),
        c.sel_sigma.to_string(),
        c.alpha.to_string(),
        c.beta.to_string(),
        c.rho.to_string(),
        c.tau0.to_string(),
        c.q.to_string(),
        c.out_dir.display().to_string(),
        c.timing.to_string(),
    ];
    for (k, v) in KEYS.iter().zip(values) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_gives_defaults() {
        let p = parse_config_str("", &Overrides::default()).unwrap();
        assert_eq!(p.config, ScenarioConfig::default());
        assert!(p.explicit.is_empty());
    }

    #[test]
    fn width_must_be_multiple_of_16() {
        let err = parse_config_str("width = 100\n", &Overrides::default()).unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "width"));
        assert!(err.to_string().contains("width"));
    }

    #[test]
    fn flags_win_over_file() {
        let o = Overrides {
            steps: Some(200),
            ..Default::default()
        };
        let p = parse_config_str("steps = 500\nseed = 3\n", &o).unwrap();
        assert_eq!(p.config.steps, 200);
        assert_eq!(p.config.seed, 3);
        assert!(p.is_explicit("steps") && p.is_explicit("seed"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# scenario\n\n  model = lem  \n# steps = 9\nseed = 4 # trailing\n";
        let p = parse_config_str(text, &Overrides::default()).unwrap();
        assert_eq!(p.config.model, Model::Lem);
        assert_eq!(p.config.steps, 25_000);
        assert_eq!(p.config.seed, 4);
    }

    #[test]
    fn distinct_errors_name_the_key() {
        let unknown = parse_config_str("speed = 3", &Overrides::default()).unwrap_err();
        assert!(matches!(&unknown, ConfigError::UnknownKey { key, line: 1 } if key == "speed"));
        assert!(unknown.to_string().contains("speed"));

        let bad = parse_config_str("steps = many", &Overrides::default()).unwrap_err();
        assert!(matches!(&bad, ConfigError::Malformed { key, .. } if key == "steps"));

        let bad = parse_config_str("model = both", &Overrides::default()).unwrap_err();
        assert!(matches!(&bad, ConfigError::Malformed { key, .. } if key == "model"));

        let range = parse_config_str("rho = 2", &Overrides::default()).unwrap_err();
        assert!(matches!(&range, ConfigError::Invalid { key, .. } if key == "rho"));

        let syntax = parse_config_str("steps 10", &Overrides::default()).unwrap_err();
        assert!(matches!(syntax, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn no_timing_flag() {
        let o = Overrides {
            no_timing: true,
            ..Default::default()
        };
        assert!(!parse_config_str("", &o).unwrap().config.timing);
    }

    #[test]
    fn missing_file() {
        let o = Overrides {
            config: Some(PathBuf::from("/nonexistent/pedflow.cfg")),
            ..Default::default()
        };
        assert!(matches!(parse_config(&o), Err(ConfigError::Io { .. })));
    }

    fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
        (
            (
                1usize..8,
                1usize..8,
                0usize..64,
                any::<bool>(),
                0u64..100_000,
                any::<u64>(),
            ),
            (
                1usize..20,
                any::<bool>(),
                0usize..16,
                1.0001f64..10.0,
                -2.0f64..2.0,
                0.0f64..3.0,
            ),
            (
                0.0f64..4.0,
                0.0f64..4.0,
                0.001f64..=1.0,
                1e-6f64..10.0,
                1e-6f64..10.0,
                any::<bool>(),
            ),
        )
            .prop_map(|(a, b, c)| ScenarioConfig {
                width: a.0 * 16,
                height: a.1 * 16,
                agents_per_side: a.2,
                model: if a.3 { Model::Lem } else { Model::Aco },
                steps: a.4,
                seed: a.5,
                repeats: b.0,
                executor: if b.1 {
                    ExecutorKind::Sequential
                } else {
                    ExecutorKind::Parallel
                },
                threads: b.2,
                d0: b.3,
                sel_mu: b.4,
                sel_sigma: b.5,
                alpha: c.0,
                beta: c.1,
                rho: c.2,
                tau0: c.3,
                q: c.4,
                out_dir: PathBuf::from("runs/out"),
                timing: c.5,
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(config in arb_config()) {
            prop_assume!(config.validate().is_ok());
            let text = to_config_text(&config);
            let parsed = parse_config_str(&text, &Overrides::default()).unwrap();
            prop_assert_eq!(parsed.config, config);
        }
    }
}
