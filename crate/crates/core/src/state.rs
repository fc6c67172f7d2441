//! The mutable world and its construction.

use crate::aco::PheromoneField;
use crate::config::{Model, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::{AgentRecord, CellState, DistanceTable, Group, Neighborhood};
use crate::lem::CandidateScores;
use crate::rng::{self, Phase, RngKey};

/// Grids, agent table, pheromone layers and per-agent score buffers.
///
/// `agents[i]` carries id `i + 1`; the index grid stores that id at the
/// agent's cell and 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub width: usize,
    pub height: usize,
    /// Start band height per side; also the crossing band.
    pub band: usize,
    pub seed: u64,
    pub step: u64,
    pub occupancy: Vec<CellState>,
    pub index: Vec<u32>,
    pub agents: Vec<AgentRecord>,
    /// Present for ant-system runs only.
    pub pheromone: Option<PheromoneField>,
    pub scores: Vec<CandidateScores>,
    pub dtable: DistanceTable,
}

/// Builds the initial world: each side's agents are spread uniformly without
/// collision over its start band. Top agents get ids `1..=n`, Bottom agents
/// `n+1..=2n`.
pub fn new_environment(config: &ScenarioConfig, seed: u64) -> Result<SimState> {
    config.validate()?;
    let (w, h) = (config.width, config.height);
    let n = config.agents_per_side;
    let band = config.band();

    let mut state = SimState {
        width: w,
        height: h,
        band,
        seed,
        step: 0,
        occupancy: vec![CellState::Empty; w * h],
        index: vec![0; w * h],
        agents: Vec::with_capacity(2 * n),
        pheromone: match config.model {
            Model::Aco => Some(PheromoneField::uniform(w, h, config.tau0)),
            Model::Lem => None,
        },
        scores: vec![CandidateScores::default(); 2 * n],
        dtable: config.distance_table()?,
    };

    for (group, first_row, first_id) in [
        (Group::Top, 0, 1u32),
        (Group::Bottom, h - band, n as u32 + 1),
    ] {
        let mut cells: Vec<usize> = (first_row * w..(first_row + band) * w).collect();
        // partial Fisher-Yates, one keyed draw per agent
        for i in 0..n {
            let id = first_id + i as u32;
            let u = rng::uniform(RngKey::new(seed, 0, Phase::Placement, id as u64));
            let j = i + ((u * (cells.len() - i) as f64) as usize).min(cells.len() - i - 1);
            cells.swap(i, j);
            state.place(AgentRecord::new(group, id, cells[i] / w, cells[i] % w))?;
        }
    }
    Ok(state)
}

impl SimState {
    /// Empty world without agents, used to build hand-made fixtures.
    pub fn empty(
        width: usize,
        height: usize,
        band: usize,
        model: Model,
        tau0: f64,
        dtable: DistanceTable,
    ) -> Self {
        SimState {
            width,
            height,
            band,
            seed: 0,
            step: 0,
            occupancy: vec![CellState::Empty; width * height],
            index: vec![0; width * height],
            agents: Vec::new(),
            pheromone: match model {
                Model::Aco => Some(PheromoneField::uniform(width, height, tau0)),
                Model::Lem => None,
            },
            scores: Vec::new(),
            dtable,
        }
    }

    /// Appends an agent; its id must be the next free one and its cell empty.
    pub fn place(&mut self, agent: AgentRecord) -> Result<()> {
        if agent.index as usize != self.agents.len() + 1 {
            return Err(Error::Invariant(format!(
                "agent id {} placed out of order",
                agent.index
            )));
        }
        let cell = self.cell_index(agent.row, agent.col);
        if !self.occupancy[cell].is_empty() {
            return Err(Error::Invariant(format!(
                "cell ({}, {}) already occupied",
                agent.row, agent.col
            )));
        }
        self.occupancy[cell] = agent.group.into();
        self.index[cell] = agent.index;
        self.agents.push(agent);
        if self.scores.len() < self.agents.len() {
            self.scores
                .resize(self.agents.len(), CandidateScores::default());
        }
        Ok(())
    }

    #[inline]
    pub fn cell_index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn at(&self, row: usize, col: usize) -> CellState {
        self.occupancy[self.cell_index(row, col)]
    }

    pub fn agent(&self, id: u32) -> &AgentRecord {
        &self.agents[id as usize - 1]
    }

    pub fn neighborhood(&self, agent: &AgentRecord) -> Neighborhood {
        Neighborhood::read(
            &self.occupancy,
            self.width,
            self.height,
            agent.row,
            agent.col,
            agent.group,
        )
    }

    pub fn count(&self, group: Group) -> usize {
        self.agents.iter().filter(|a| a.group == group).count()
    }

    pub fn crossed_counts(&self) -> (usize, usize) {
        self.agents
            .iter()
            .filter(|a| a.crossed)
            .fold((0, 0), |(t, b), a| match a.group {
                Group::Top => (t + 1, b),
                Group::Bottom => (t, b + 1),
            })
    }

    /// Full-scan check of the grid/agent-table consistency invariants.
    pub fn check_consistency(&self) -> Result<()> {
        let mut seen = vec![false; self.agents.len()];
        for (cell, (&occ, &id)) in self.occupancy.iter().zip(&self.index).enumerate() {
            match (occ, id) {
                (CellState::Empty, 0) => {}
                (CellState::Empty, _) | (_, 0) => {
                    return Err(Error::Invariant(format!(
                        "cell {cell}: occupancy {occ:?} vs index {id}"
                    )))
                }
                (occ, id) => {
                    let a = self.agents.get(id as usize - 1).ok_or_else(|| {
                        Error::Invariant(format!("cell {cell}: unknown agent {id}"))
                    })?;
                    if seen[id as usize - 1] {
                        return Err(Error::Invariant(format!("agent {id} appears twice")));
                    }
                    seen[id as usize - 1] = true;
                    if CellState::from(a.group) != occ || self.cell_index(a.row, a.col) != cell {
                        return Err(Error::Invariant(format!(
                            "agent {id} record does not match cell {cell}"
                        )));
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Invariant(format!(
                "agent {} not on the grid",
                missing + 1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_band() {
        let c = ScenarioConfig::small(480, 480, 1280, Model::Lem);
        let s = new_environment(&c, 1).unwrap();
        assert_eq!(s.band, 3);
        for a in &s.agents {
            match a.group {
                Group::Top => assert!(a.row < 3),
                Group::Bottom => assert!(a.row >= 477),
            }
        }
        assert_eq!(s.count(Group::Top), 1280);
        assert_eq!(s.count(Group::Bottom), 1280);
        s.check_consistency().unwrap();
    }

    #[test]
    fn empty_scenario() {
        let s = new_environment(&ScenarioConfig::small(16, 16, 0, Model::Aco), 1).unwrap();
        assert!(s.agents.is_empty());
        assert!(s.occupancy.iter().all(|c| c.is_empty()));
        s.check_consistency().unwrap();
    }

    #[test]
    fn full_band_is_forced() {
        let s = new_environment(&ScenarioConfig::small(16, 16, 16, Model::Lem), 5).unwrap();
        assert_eq!(s.band, 1);
        assert!((0..16).all(|c| s.at(0, c) == CellState::Top));
        assert!((0..16).all(|c| s.at(15, c) == CellState::Bottom));
    }

    #[test]
    fn initial_state_fields() {
        let c = ScenarioConfig::small(32, 32, 40, Model::Aco);
        let s = new_environment(&c, 3).unwrap();
        let field = s.pheromone.as_ref().unwrap();
        assert!(field.top.iter().chain(&field.bottom).all(|&t| t == c.tau0));
        for (i, a) in s.agents.iter().enumerate() {
            assert_eq!(a.index as usize, i + 1);
            assert_eq!(a.future(), a.position());
            assert_eq!(a.tour_length, 0.0);
            assert!(!a.crossed);
        }
    }

    #[test]
    fn placement_is_reproducible() {
        let c = ScenarioConfig::small(64, 64, 100, Model::Lem);
        assert_eq!(
            new_environment(&c, 9).unwrap(),
            new_environment(&c, 9).unwrap()
        );
        assert_ne!(
            new_environment(&c, 9).unwrap().occupancy,
            new_environment(&c, 10).unwrap().occupancy
        );
    }

    #[test]
    fn capacity_errors() {
        let c = ScenarioConfig::small(16, 16, 200, Model::Lem);
        assert!(matches!(
            new_environment(&c, 0),
            Err(Error::InvalidConfig { .. })
        ));
    }

    #[test]
    fn consistency_detects_corruption() {
        let mut s = new_environment(&ScenarioConfig::small(16, 16, 10, Model::Lem), 2).unwrap();
        let a = s.agents[0];
        let cell = s.cell_index(a.row, a.col);
        s.index[cell] = 0;
        assert!(s.check_consistency().is_err());
    }
}
