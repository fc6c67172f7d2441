use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::aco::AcoParams;
use crate::error::{Error, Result};
use crate::grid::DistanceTable;
use crate::lem::LemParams;
use crate::metrics::band_height;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Lem,
    Aco,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Lem, Model::Aco];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Lem => "lem",
            Model::Aco => "aco",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lem" => Ok(Model::Lem),
            "aco" => Ok(Model::Aco),
            other => Err(format!("expected `lem` or `aco`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExecutorKind {
    #[serde(rename = "seq")]
    Sequential,
    #[serde(rename = "par")]
    Parallel,
}

impl ExecutorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecutorKind::Sequential => "seq",
            ExecutorKind::Parallel => "par",
        }
    }
}

impl fmt::Display for ExecutorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExecutorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "seq" | "sequential" => Ok(ExecutorKind::Sequential),
            "par" | "parallel" => Ok(ExecutorKind::Parallel),
            other => Err(format!("expected `seq` or `par`, got `{other}`")),
        }
    }
}

/// Movement policy with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Lem(LemParams),
    Aco(AcoParams),
}

impl Policy {
    pub fn model(&self) -> Model {
        match self {
            Policy::Lem(_) => Model::Lem,
            Policy::Aco(_) => Model::Aco,
        }
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub width: usize,
    pub height: usize,
    pub agents_per_side: usize,
    pub model: Model,
    pub steps: u64,
    pub seed: u64,
    pub repeats: usize,
    pub executor: ExecutorKind,
    /// Worker count for the parallel executor; 0 picks the machine default.
    pub threads: usize,
    pub d0: f64,
    pub sel_mu: f64,
    pub sel_sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub tau0: f64,
    pub q: f64,
    pub out_dir: PathBuf,
    /// When false, runtime columns are written as zero so output is byte-stable.
    pub timing: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let lem = LemParams::default();
        let aco = AcoParams::default();
        ScenarioConfig {
            width: 480,
            height: 480,
            agents_per_side: 1280,
            model: Model::Aco,
            steps: 25_000,
            seed: 0,
            repeats: 10,
            executor: ExecutorKind::Parallel,
            threads: 0,
            d0: 2.0,
            sel_mu: lem.mu_sel,
            sel_sigma: lem.sigma_sel,
            alpha: aco.alpha,
            beta: aco.beta,
            rho: aco.rho,
            tau0: aco.tau0,
            q: aco.q,
            out_dir: PathBuf::from("out"),
            timing: true,
        }
    }
}

impl ScenarioConfig {
    /// Small-grid convenience constructor used by tests and benches.
    pub fn small(width: usize, height: usize, agents_per_side: usize, model: Model) -> Self {
        ScenarioConfig {
            width,
            height,
            agents_per_side,
            model,
            steps: 0,
            repeats: 1,
            ..ScenarioConfig::default()
        }
    }

    pub fn agents_total(&self) -> usize {
        2 * self.agents_per_side
    }

    pub fn band(&self) -> usize {
        band_height(self.agents_per_side, self.width)
    }

    pub fn lem_params(&self) -> LemParams {
        LemParams {
            mu_sel: self.sel_mu,
            sigma_sel: self.sel_sigma,
        }
    }

    pub fn aco_params(&self) -> AcoParams {
        AcoParams {
            alpha: self.alpha,
            beta: self.beta,
            rho: self.rho,
            tau0: self.tau0,
            q: self.q,
        }
    }

    pub fn policy(&self) -> Policy {
        match self.model {
            Model::Lem => Policy::Lem(self.lem_params()),
            Model::Aco => Policy::Aco(self.aco_params()),
        }
    }

    pub fn distance_table(&self) -> Result<DistanceTable> {
        DistanceTable::new(self.d0)
    }

    /// Checks every range constraint; the error names the first offending key.
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("width", self.width), ("height", self.height)] {
            if v < 16 || v % 16 != 0 {
                return Err(Error::config(
                    key,
                    format!("must be a multiple of 16 and >= 16, got {v}"),
                ));
            }
        }
        if self.repeats < 1 {
            return Err(Error::config("repeats", "must be >= 1"));
        }
        let cells = self.width * self.height;
        if self.agents_total() > cells {
            return Err(Error::config(
                "agents_per_side",
                format!("{} agents do not fit in {cells} cells", self.agents_total()),
            ));
        }
        let band = self.band();
        if 2 * band > self.height {
            return Err(Error::config(
                "agents_per_side",
                format!(
                    "start bands of {band} rows per side exceed height {}",
                    self.height
                ),
            ));
        }
        self.distance_table()?;
        self.lem_params().validate()?;
        self.aco_params().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(
            (c.width, c.height, c.steps, c.repeats),
            (480, 480, 25_000, 10)
        );
    }

    #[test]
    fn rejects_non_multiple_of_16() {
        let c = ScenarioConfig {
            width: 100,
            ..Default::default()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidConfig { key: "width", .. })
        ));
        let c = ScenarioConfig {
            height: 0,
            ..Default::default()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidConfig { key: "height", .. })
        ));
    }

    #[test]
    fn rejects_over_capacity() {
        let c = ScenarioConfig::small(16, 16, 129, Model::Lem);
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidConfig {
                key: "agents_per_side",
                ..
            })
        ));
        // fits in the grid but the two bands would overlap
        let c = ScenarioConfig::small(16, 16, 128, Model::Lem);
        c.validate().unwrap();
        let c = ScenarioConfig::small(16, 32, 16 * 17, Model::Lem);
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidConfig {
                key: "agents_per_side",
                ..
            })
        ));
    }

    #[test]
    fn rejects_bad_policy_params() {
        let bad = [
            ScenarioConfig {
                rho: 0.0,
                ..Default::default()
            },
            ScenarioConfig {
                rho: 1.5,
                ..Default::default()
            },
            ScenarioConfig {
                tau0: 0.0,
                ..Default::default()
            },
            ScenarioConfig {
                q: -1.0,
                ..Default::default()
            },
            ScenarioConfig {
                alpha: -0.1,
                ..Default::default()
            },
            ScenarioConfig {
                sel_sigma: -1.0,
                ..Default::default()
            },
            ScenarioConfig {
                d0: 1.0,
                ..Default::default()
            },
            ScenarioConfig {
                repeats: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn enum_parsing() {
        assert_eq!("LEM".parse::<Model>().unwrap(), Model::Lem);
        assert_eq!(
            "par".parse::<ExecutorKind>().unwrap(),
            ExecutorKind::Parallel
        );
        assert!("both".parse::<Model>().is_err());
    }
}
