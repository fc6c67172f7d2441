//! Ant-system movement: pheromone-weighted transition numerators, roulette
//! selection with forward-cell priority, evaporation and tour-scaled deposits.

use crate::error::{Error, Result};
use crate::grid::{Direction, DistanceTable, Group, Neighborhood};
use crate::lem::{CandidateScores, Decision};
use crate::rng::{self, Phase, RngKey};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcoParams {
    /// Pheromone weight.
    pub alpha: f64,
    /// Heuristic weight.
    pub beta: f64,
    /// Evaporation rate in `(0, 1]`.
    pub rho: f64,
    /// Initial pheromone level.
    pub tau0: f64,
    /// Deposit scale.
    pub q: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            alpha: 1.0,
            beta: 2.0,
            rho: 0.05,
            tau0: 0.1,
            q: 1.0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |key, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        };
        let positive = |key, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        nonneg("alpha", self.alpha)?;
        nonneg("beta", self.beta)?;
        check_rho(self.rho)?;
        positive("tau0", self.tau0)?;
        positive("q", self.q)?;
        Ok(())
    }

    /// `(1 / d_i)^beta` per slot.
    pub fn heuristic_weights(&self, dtable: &DistanceTable) -> [f64; 8] {
        dtable.as_array().map(|d| (1.0 / d).powf(self.beta))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(
            "rho",
            format!("must lie in (0, 1], got {rho}"),
        ))
    }
}

/// One pheromone layer per group, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneField {
    pub width: usize,
    pub height: usize,
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
}

impl PheromoneField {
    pub fn uniform(width: usize, height: usize, tau0: f64) -> Self {
        PheromoneField {
            width,
            height,
            top: vec![tau0; width * height],
            bottom: vec![tau0; width * height],
        }
    }

    pub fn layer(&self, group: Group) -> &[f64] {
        match group {
            Group::Top => &self.top,
            Group::Bottom => &self.bottom,
        }
    }

    pub fn layer_mut(&mut self, group: Group) -> &mut [f64] {
        match group {
            Group::Top => &mut self.top,
            Group::Bottom => &mut self.bottom,
        }
    }

    pub fn at(&self, group: Group, row: usize, col: usize) -> f64 {
        self.layer(group)[row * self.width + col]
    }

    /// Sum over both layers.
    pub fn mass(&self) -> f64 {
        self.top.iter().chain(&self.bottom).sum()
    }
}

/// Transition numerators `tau^alpha * eta^beta` over free slots, reading only
/// the agent's own group layer. `eta` is `1 / d_i`.
pub fn aco_numerators(
    nbhd: &Neighborhood,
    field: &PheromoneField,
    group: Group,
    dtable: &DistanceTable,
    params: &AcoParams,
) -> CandidateScores {
    aco_numerators_weighted(
        nbhd,
        field.layer(group),
        field.width,
        params.alpha,
        &params.heuristic_weights(dtable),
    )
}

/// As [`aco_numerators`] with the heuristic weights precomputed.
#[inline]
pub(crate) fn aco_numerators_weighted(
    nbhd: &Neighborhood,
    layer: &[f64],
    width: usize,
    alpha: f64,
    eta_beta: &[f64; 8],
) -> CandidateScores {
    let mut out = CandidateScores::default();
    for (slot, s) in nbhd.slots.iter().enumerate() {
        if !s.is_free() {
            continue;
        }
        let (r, c) = s.cell.expect("free slots are in bounds");
        let tau = layer[r * width + c];
        let weight = if alpha == 1.0 { tau } else { tau.powf(alpha) };
        out.scores[slot] = weight * eta_beta[slot];
    }
    out
}

/// Transition probabilities over the free slots; all zero when no slot is free
/// or the numerators sum to zero.
pub fn transition_probabilities(scores: &CandidateScores) -> [f64; 8] {
    let total = scores.sum();
    if total > 0.0 {
        scores.scores.map(|s| s / total)
    } else {
        [0.0; 8]
    }
}

/// Picks the next cell for one agent using the [`Phase::AcoSelect`] stream.
pub fn aco_select(scores: &CandidateScores, nbhd: &Neighborhood, key: RngKey) -> Decision {
    if nbhd.forward_free() {
        return Decision::from_slot(nbhd, Some(Direction::Forward));
    }
    if nbhd.free_count() == 0 {
        return Decision::Stay;
    }
    let u = rng::uniform(RngKey {
        phase: Phase::AcoSelect,
        ..key
    });
    Decision::from_slot(nbhd, roulette(scores, nbhd, u))
}

/// Cumulative walk over the normalized numerators in canonical order. Falls
/// back to a uniform pick among free slots when every numerator is zero.
pub fn roulette(scores: &CandidateScores, nbhd: &Neighborhood, u: f64) -> Option<Direction> {
    let total = scores.sum();
    if total <= 0.0 {
        let free: Vec<usize> = (0..8).filter(|&i| nbhd.slots[i].is_free()).collect();
        if free.is_empty() {
            return None;
        }
        let pick = ((u * free.len() as f64) as usize).min(free.len() - 1);
        return Some(Direction::from_slot(free[pick]));
    }
    let mut cumulative = 0.0;
    let mut last = None;
    for (slot, &s) in scores.scores.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        cumulative += s / total;
        last = Some(slot);
        if cumulative > u {
            return Some(Direction::from_slot(slot));
        }
    }
    // rounding left the final cumulative just below u
    last.map(Direction::from_slot)
}

/// Multiplies both layers by `1 - rho`.
pub fn evaporate(field: &mut PheromoneField, rho: f64) -> Result<()> {
    check_rho(rho)?;
    let keep = 1.0 - rho;
    for v in field.top.iter_mut().chain(field.bottom.iter_mut()) {
        *v *= keep;
    }
    Ok(())
}

/// Walked distance of one move: 1 for orthogonal steps, sqrt(2) for diagonals.
pub fn tour_increment(direction: Direction) -> f64 {
    if direction.is_diagonal() {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// Pheromone added by an agent whose updated tour length is `tour_length`.
pub fn deposit_amount(q: f64, tour_length: f64) -> Result<f64> {
    if tour_length <= 0.0 {
        return Err(Error::Invariant(format!(
            "deposit with non-positive tour length {tour_length}"
        )));
    }
    Ok(q / tour_length)
}

/// Adds `q / L_k` at `cell` in the `group` layer.
pub fn deposit(
    field: &mut PheromoneField,
    group: Group,
    cell: (usize, usize),
    tour_length: f64,
    params: &AcoParams,
) -> Result<()> {
    let amount = deposit_amount(params.q, tour_length)?;
    let w = field.width;
    field.layer_mut(group)[cell.0 * w + cell.1] += amount;
    Ok(())
}
