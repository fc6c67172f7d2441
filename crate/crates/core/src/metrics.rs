//! Throughput accounting and run aggregation.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::config::{ExecutorKind, Model, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::{AgentRecord, Group};

/// Rows of the start band for one side: `ceil(agents_per_side / width)`.
pub fn band_height(agents_per_side: usize, width: usize) -> usize {
    assert!(width > 0, "grid width must be positive");
    agents_per_side.div_ceil(width)
}

/// Whether the agent currently stands inside the opposite side's start band.
/// Stickiness is handled by the caller through `AgentRecord::crossed`.
pub fn in_goal_band(group: Group, row: usize, height: usize, band: usize) -> bool {
    match group {
        Group::Top => row + band >= height,
        Group::Bottom => row < band,
    }
}

/// Sticky crossing predicate.
pub fn crossed(agent: &AgentRecord, height: usize, band: usize) -> bool {
    agent.crossed || in_goal_band(agent.group, agent.row, height, band)
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepReport {
    pub step: u64,
    pub moved: usize,
    pub newly_crossed_top: usize,
    pub newly_crossed_bottom: usize,
}

/// Cumulative crossing counts after one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossedSample {
    pub step: u64,
    pub crossed_top: usize,
    pub crossed_bottom: usize,
    pub crossed_total: usize,
    pub moved: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub model: Model,
    pub executor: ExecutorKind,
    pub seed: u64,
    pub agents_total: usize,
    pub series: Vec<CrossedSample>,
    pub throughput: usize,
    pub runtime_seconds: f64,
}

impl RunReport {
    pub fn crossing_fraction(&self) -> f64 {
        if self.agents_total == 0 {
            0.0
        } else {
            self.throughput as f64 / self.agents_total as f64
        }
    }
}

/// Result of a two-proportion z-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionTest {
    pub z: f64,
    pub p_value: f64,
    /// Set when the test is undefined (no agents); `p_value` is then 1.
    pub undefined: bool,
}

/// Two-sided test of equal crossing probability between two runs with the
/// same population.
pub fn proportion_test(a: &RunReport, b: &RunReport) -> Result<ProportionTest> {
    if a.agents_total != b.agents_total {
        return Err(Error::config(
            "agents_per_side",
            format!(
                "runs differ in population: {} vs {}",
                a.agents_total, b.agents_total
            ),
        ));
    }
    Ok(two_proportion_z(a.throughput, b.throughput, a.agents_total))
}

/// Pooled two-proportion z-test for `x1` and `x2` successes out of `n` each.
pub fn two_proportion_z(x1: usize, x2: usize, n: usize) -> ProportionTest {
    if n == 0 {
        return ProportionTest {
            z: 0.0,
            p_value: 1.0,
            undefined: true,
        };
    }
    if x1 == x2 {
        return ProportionTest {
            z: 0.0,
            p_value: 1.0,
            undefined: false,
        };
    }
    let n = n as f64;
    let (p1, p2) = (x1 as f64 / n, x2 as f64 / n);
    let pooled = (p1 + p2) / 2.0;
    let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
    let z = (p1 - p2) / se;
    ProportionTest {
        z,
        p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
        undefined: false,
    }
}

/// One density row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub agents_total: usize,
    pub model: Model,
    pub repeats: usize,
    pub throughput_mean: f64,
    pub throughput_sd: f64,
    pub runtime_mean_seconds: f64,
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(reports: &[RunReport]) -> Result<SweepReport> {
    let first = reports.first().ok_or(Error::EmptyAggregate)?;
    let throughput: Vec<f64> = reports.iter().map(|r| r.throughput as f64).collect();
    let runtime: Vec<f64> = reports.iter().map(|r| r.runtime_seconds).collect();
    let (throughput_mean, throughput_sd) = mean_sd(&throughput);
    let (runtime_mean_seconds, _) = mean_sd(&runtime);
    Ok(SweepReport {
        agents_total: first.agents_total,
        model: first.model,
        repeats: reports.len(),
        throughput_mean,
        throughput_sd,
        runtime_mean_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(throughput: usize, agents_total: usize) -> RunReport {
        RunReport {
            config: ScenarioConfig::default(),
            model: Model::Aco,
            executor: ExecutorKind::Sequential,
            seed: 0,
            agents_total,
            series: Vec::new(),
            throughput,
            runtime_seconds: 0.5,
        }
    }

    #[test]
    fn band_heights() {
        assert_eq!(band_height(1280, 480), 3);
        assert_eq!(band_height(6720, 480), 14);
        assert_eq!(band_height(0, 480), 0);
        assert_eq!(band_height(480, 480), 1);
        assert_eq!(band_height(481, 480), 2);
    }

    #[test]
    fn crossing_predicate() {
        let (h, band) = (480, 3);
        let mut top = AgentRecord::new(Group::Top, 1, h - 1, 0);
        assert!(crossed(&top, h, band));
        top.row = h - band - 1;
        assert!(!crossed(&top, h, band));
        top.row = h - band;
        assert!(crossed(&top, h, band));
        let mut bottom = AgentRecord::new(Group::Bottom, 2, 0, 0);
        assert!(crossed(&bottom, h, band));
        bottom.row = band;
        assert!(!crossed(&bottom, h, band));
        bottom.crossed = true;
        assert!(crossed(&bottom, h, band), "sticky");
    }

    #[test]
    fn proportion_identical_runs() {
        let t = proportion_test(&report(100, 2560), &report(100, 2560)).unwrap();
        assert_eq!(t.p_value, 1.0);
        assert!(!t.undefined);
    }

    #[test]
    fn proportion_detects_large_gap() {
        let t = proportion_test(&report(17_417, 25_600), &report(25_600, 25_600)).unwrap();
        assert!(t.p_value < 1e-6, "{t:?}");
    }

    #[test]
    fn proportion_small_gap_not_significant() {
        let t = proportion_test(&report(100, 2560), &report(102, 2560)).unwrap();
        assert!(t.p_value > 0.05, "{t:?}");
        // hand computation: pooled 0.039453, se 0.0054412, z = -0.14358
        assert!((t.z + 0.14358).abs() < 1e-5, "{t:?}");
    }

    #[test]
    fn proportion_is_symmetric() {
        for (x1, x2) in [(3, 90), (50, 51), (0, 2560), (2000, 1000)] {
            let ab = two_proportion_z(x1, x2, 2560);
            let ba = two_proportion_z(x2, x1, 2560);
            assert_eq!(ab.p_value, ba.p_value);
        }
    }

    #[test]
    fn proportion_zero_agents() {
        let t = proportion_test(&report(0, 0), &report(0, 0)).unwrap();
        assert!(t.undefined);
        assert_eq!(t.p_value, 1.0);
        assert!(proportion_test(&report(0, 10), &report(0, 12)).is_err());
    }

    #[test]
    fn aggregate_stats() {
        let one = aggregate(&[report(10, 100)]).unwrap();
        assert_eq!((one.throughput_mean, one.throughput_sd), (10.0, 0.0));
        let two = aggregate(&[report(10, 100), report(20, 100)]).unwrap();
        assert_eq!(two.throughput_mean, 15.0);
        assert!((two.throughput_sd - 7.0711).abs() < 1e-4);
        assert_eq!(two.repeats, 2);
        let same = aggregate(&[report(7, 100), report(7, 100), report(7, 100)]).unwrap();
        assert_eq!(same.throughput_sd, 0.0);
        assert!(matches!(aggregate(&[]), Err(Error::EmptyAggregate)));
    }
}
