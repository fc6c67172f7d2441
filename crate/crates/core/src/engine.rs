//! Synchronous step orchestration.
//!
//! A step runs four phases separated by barriers:
//!
//! 1. **score**: every agent fills its candidate scores from the step-start
//!    occupancy (and its own group's pheromone layer for ant-system runs);
//! 2. **intention**: every agent picks a future cell;
//! 3. **movement**: every cell that was empty gathers the agents that want it
//!    and admits one at random; winners commit, then the pheromone layers
//!    evaporate and movers deposit;
//! 4. **reset**: score buffers and futures are cleared and the step advances.
//!
//! Phases 1, 2 and the agent half of 3 write only to per-agent rows. The
//! gather and the grid/pheromone commit write only to per-cell entries. Every
//! random draw is keyed by (seed, step, phase, entity), so the sequential and
//! parallel executors produce bit-identical worlds for any worker count.

use std::ops::Add;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::aco::{aco_numerators_weighted, aco_select, tour_increment};
use crate::config::{ExecutorKind, Policy, ScenarioConfig};
use crate::error::{Error, Result};
use crate::grid::{AgentRecord, CellState, Direction, Group, Neighborhood};
use crate::lem::{lem_scores, lem_select, CandidateScores, Decision};
use crate::metrics::{in_goal_band, CrossedSample, RunReport, StepReport};
use crate::rng::{self, Phase, RngKey};
use crate::state::{new_environment, SimState};

/// Minimum items handed to one parallel task.
const MIN_CHUNK: usize = 1024;

/// Neighbor offsets scanned when gathering contenders, in row-major order.
pub const GATHER_ORDER: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Index of the winner among `k` contenders for the draw `u` in `[0, 1)`.
#[inline]
pub fn pick_winner(k: usize, u: f64) -> usize {
    ((u * k as f64) as usize).min(k - 1)
}

/// Runs the step phases either inline or on a dedicated worker pool.
pub struct Engine {
    pool: Option<ThreadPool>,
    check_invariants: bool,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("kind", &self.kind())
            .field("threads", &self.threads())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    moved: usize,
    crossed_top: usize,
    crossed_bottom: usize,
    violations: usize,
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            moved: self.moved + o.moved,
            crossed_top: self.crossed_top + o.crossed_top,
            crossed_bottom: self.crossed_bottom + o.crossed_bottom,
            violations: self.violations + o.violations,
        }
    }
}

impl Engine {
    pub fn sequential() -> Self {
        Engine {
            pool: None,
            check_invariants: cfg!(debug_assertions),
        }
    }

    /// Parallel executor with `threads` workers (0 lets rayon pick).
    pub fn parallel(threads: usize) -> Result<Self> {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(|i| format!("pedflow-worker-{i}"))
            .build()?;
        Ok(Engine {
            pool: Some(pool),
            check_invariants: cfg!(debug_assertions),
        })
    }

    pub fn new(kind: ExecutorKind, threads: usize) -> Result<Self> {
        match kind {
            ExecutorKind::Sequential => Ok(Engine::sequential()),
            ExecutorKind::Parallel => Engine::parallel(threads),
        }
    }

    /// Enables or disables the full consistency scan after every step.
    pub fn with_checks(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn kind(&self) -> ExecutorKind {
        if self.pool.is_some() {
            ExecutorKind::Parallel
        } else {
            ExecutorKind::Sequential
        }
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    fn for_each<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match &self.pool {
            None => items.iter_mut().enumerate().for_each(|(i, x)| f(i, x)),
            Some(pool) => pool.install(|| {
                items
                    .par_iter_mut()
                    .with_min_len(MIN_CHUNK)
                    .enumerate()
                    .for_each(|(i, x)| f(i, x))
            }),
        }
    }

    fn for_each_ref<T, F>(&self, items: &[T], f: F)
    where
        T: Sync,
        F: Fn(&T) + Sync + Send,
    {
        match &self.pool {
            None => items.iter().for_each(f),
            Some(pool) => pool.install(|| items.par_iter().with_min_len(MIN_CHUNK).for_each(f)),
        }
    }

    fn for_each_pair<A, B, F>(&self, a: &mut [A], b: &mut [B], f: F)
    where
        A: Send,
        B: Send,
        F: Fn(usize, &mut A, &mut B) + Sync + Send,
    {
        match &self.pool {
            None => a
                .iter_mut()
                .zip(b.iter_mut())
                .enumerate()
                .for_each(|(i, (x, y))| f(i, x, y)),
            Some(pool) => pool.install(|| {
                a.par_iter_mut()
                    .zip(b.par_iter_mut())
                    .with_min_len(MIN_CHUNK)
                    .enumerate()
                    .for_each(|(i, (x, y))| f(i, x, y))
            }),
        }
    }

    fn tally<T, F>(&self, items: &mut [T], f: F) -> Tally
    where
        T: Send,
        F: Fn(usize, &mut T) -> Tally + Sync + Send,
    {
        match &self.pool {
            None => items
                .iter_mut()
                .enumerate()
                .map(|(i, x)| f(i, x))
                .fold(Tally::default(), Tally::add),
            Some(pool) => pool.install(|| {
                items
                    .par_iter_mut()
                    .with_min_len(MIN_CHUNK)
                    .enumerate()
                    .map(|(i, x)| f(i, x))
                    .reduce(Tally::default, Tally::add)
            }),
        }
    }

    /// Fills every agent's score buffer from the step-start snapshot.
    pub fn score_phase(&self, state: &mut SimState, policy: &Policy) -> Result<()> {
        let SimState {
            width,
            height,
            occupancy,
            agents,
            scores,
            pheromone,
            dtable,
            ..
        } = state;
        let (w, h) = (*width, *height);
        let occupancy = &occupancy[..];
        let agents = &agents[..];
        let scores = &mut scores[..agents.len()];
        match policy {
            Policy::Lem(_) => self.for_each(scores, |i, s| {
                let a = &agents[i];
                let nbhd = Neighborhood::read(occupancy, w, h, a.row, a.col, a.group);
                *s = lem_scores(&nbhd, dtable);
            }),
            Policy::Aco(params) => {
                let field = pheromone.as_ref().ok_or_else(|| {
                    Error::Invariant("ant-system step without pheromone field".into())
                })?;
                let eta = params.heuristic_weights(dtable);
                let alpha = params.alpha;
                self.for_each(scores, |i, s| {
                    let a = &agents[i];
                    let nbhd = Neighborhood::read(occupancy, w, h, a.row, a.col, a.group);
                    *s = aco_numerators_weighted(&nbhd, field.layer(a.group), w, alpha, &eta);
                });
            }
        }
        Ok(())
    }

    /// Sets every agent's future cell.
    pub fn intention_phase(&self, state: &mut SimState, policy: &Policy) {
        let SimState {
            width,
            height,
            seed,
            step,
            occupancy,
            agents,
            scores,
            ..
        } = state;
        let (w, h, seed, step) = (*width, *height, *seed, *step);
        let occupancy = &occupancy[..];
        let scores = &scores[..];
        self.for_each(agents, |i, a| {
            let nbhd = Neighborhood::read(occupancy, w, h, a.row, a.col, a.group);
            let key = RngKey::new(seed, step, Phase::LemSelect, a.index as u64);
            let decision = match policy {
                Policy::Lem(params) => lem_select(&scores[i], &nbhd, params, key),
                Policy::Aco(_) => aco_select(&scores[i], &nbhd, key),
            };
            (a.future_row, a.future_col) = match decision {
                Decision::MoveTo(r, c) => (r, c),
                Decision::Stay => (a.row, a.col),
            };
        });
    }

    /// For every cell empty at step start, the id of the admitted agent (0 if
    /// nobody asked for it). Contenders are ordered by [`GATHER_ORDER`].
    pub fn resolve_contenders(&self, state: &SimState) -> Vec<u32> {
        let (w, h, seed, step) = (state.width, state.height, state.seed, state.step);
        let occupancy = &state.occupancy[..];
        let index = &state.index[..];
        let agents = &state.agents[..];

        // Flag requested cells first so the gather can skip the rest. Every
        // store writes the same value, so the flags do not depend on order.
        let wanted: Vec<AtomicBool> = (0..occupancy.len())
            .map(|_| AtomicBool::new(false))
            .collect();
        self.for_each_ref(agents, |a| {
            if a.intends_to_move() {
                wanted[a.future_row * w + a.future_col].store(true, Ordering::Relaxed);
            }
        });

        let mut winners = vec![0u32; occupancy.len()];
        self.for_each(&mut winners, |cell, winner| {
            if !wanted[cell].load(Ordering::Relaxed) || !occupancy[cell].is_empty() {
                return;
            }
            let (row, col) = (cell / w, cell % w);
            let mut contenders = [0u32; 8];
            let mut k = 0;
            for (dr, dc) in GATHER_ORDER {
                let (r, c) = (row as isize + dr, col as isize + dc);
                if r < 0 || c < 0 || r as usize >= h || c as usize >= w {
                    continue;
                }
                let id = index[r as usize * w + c as usize];
                if id != 0 && agents[id as usize - 1].future() == (row, col) {
                    contenders[k] = id;
                    k += 1;
                }
            }
            *winner = match k {
                0 => 0,
                1 => contenders[0],
                _ => {
                    let u = rng::uniform(RngKey::new(seed, step, Phase::Resolve, cell as u64));
                    contenders[pick_winner(k, u)]
                }
            };
        });
        winners
    }

    /// Resolves conflicts and commits moves, tour lengths and pheromone.
    pub fn movement_phase(&self, state: &mut SimState, policy: &Policy) -> Result<StepReport> {
        let winners = self.resolve_contenders(state);
        let winners = &winners[..];
        let SimState {
            width,
            height,
            band,
            step,
            occupancy,
            index,
            agents,
            pheromone,
            ..
        } = state;
        let (w, h, band) = (*width, *height, *band);
        let track_tour = matches!(policy, Policy::Aco(_));

        // agent half: every agent only touches its own record
        let tally = {
            let occupancy = &occupancy[..];
            self.tally(agents, |_, a| {
                commit_agent(a, occupancy, winners, w, h, band, track_tour)
            })
        };
        if tally.violations > 0 {
            return Err(Error::Invariant(format!(
                "{} agents targeted an occupied or non-adjacent cell at step {}",
                tally.violations, step
            )));
        }

        // cell half: each cell derives its new contents from its own winner
        // and from whether its previous occupant left
        let agents = &agents[..];
        self.for_each_pair(index, occupancy, |cell, id, occ| {
            let winner = winners[cell];
            if winner != 0 {
                *id = winner;
                *occ = agents[winner as usize - 1].group.into();
            } else if *id != 0 {
                let a = &agents[*id as usize - 1];
                if a.row * w + a.col != cell {
                    *id = 0;
                    *occ = CellState::Empty;
                }
            }
        });

        if let Policy::Aco(params) = policy {
            let field = pheromone.as_mut().ok_or_else(|| {
                Error::Invariant("ant-system step without pheromone field".into())
            })?;
            let keep = 1.0 - params.rho;
            let q = params.q;
            // evaporation precedes the deposit within every cell
            self.for_each_pair(&mut field.top, &mut field.bottom, |cell, top, bottom| {
                *top *= keep;
                *bottom *= keep;
                let winner = winners[cell];
                if winner != 0 {
                    let a = &agents[winner as usize - 1];
                    let amount = q / a.tour_length;
                    match a.group {
                        Group::Top => *top += amount,
                        Group::Bottom => *bottom += amount,
                    }
                }
            });
        }

        Ok(StepReport {
            step: *step,
            moved: tally.moved,
            newly_crossed_top: tally.crossed_top,
            newly_crossed_bottom: tally.crossed_bottom,
        })
    }

    /// Clears score buffers and futures, then advances the step counter.
    pub fn reset_phase(&self, state: &mut SimState) {
        self.for_each(&mut state.scores, |_, s| *s = CandidateScores::default());
        self.for_each(&mut state.agents, |_, a| {
            a.future_row = a.row;
            a.future_col = a.col;
        });
        state.step += 1;
    }

    /// One full synchronous step.
    pub fn step(&self, state: &mut SimState, policy: &Policy) -> Result<StepReport> {
        self.score_phase(state, policy)?;
        self.intention_phase(state, policy);
        let report = self.movement_phase(state, policy)?;
        self.reset_phase(state);
        if self.check_invariants {
            state.check_consistency()?;
        }
        Ok(report)
    }
}

#[inline]
fn commit_agent(
    a: &mut AgentRecord,
    occupancy: &[CellState],
    winners: &[u32],
    w: usize,
    h: usize,
    band: usize,
    track_tour: bool,
) -> Tally {
    let mut t = Tally::default();
    if !a.intends_to_move() {
        return t;
    }
    let target = a.future_row * w + a.future_col;
    if !occupancy[target].is_empty() {
        t.violations = 1;
        return t;
    }
    if winners[target] != a.index {
        return t;
    }
    let dr = a.future_row as isize - a.row as isize;
    let dc = a.future_col as isize - a.col as isize;
    let Some(dir) = Direction::from_offset(a.group, dr, dc) else {
        t.violations = 1;
        return t;
    };
    if track_tour {
        a.tour_length += tour_increment(dir);
    }
    a.row = a.future_row;
    a.col = a.future_col;
    t.moved = 1;
    if !a.crossed && in_goal_band(a.group, a.row, h, band) {
        a.crossed = true;
        match a.group {
            Group::Top => t.crossed_top = 1,
            Group::Bottom => t.crossed_bottom = 1,
        }
    }
    t
}

/// Builds the initial world from `config` and advances it `config.steps` times.
pub fn run(config: &ScenarioConfig, executor: ExecutorKind) -> Result<RunReport> {
    let engine = Engine::new(executor, config.threads)?;
    run_with(config, &engine)
}

/// As [`run`] with a caller-supplied engine.
pub fn run_with(config: &ScenarioConfig, engine: &Engine) -> Result<RunReport> {
    let mut state = new_environment(config, config.seed)?;
    let policy = config.policy();
    let mut series = Vec::with_capacity(config.steps as usize);
    let (mut top, mut bottom) = (0, 0);

    let start = Instant::now();
    for _ in 0..config.steps {
        let r = engine.step(&mut state, &policy)?;
        top += r.newly_crossed_top;
        bottom += r.newly_crossed_bottom;
        series.push(CrossedSample {
            step: r.step,
            crossed_top: top,
            crossed_bottom: bottom,
            crossed_total: top + bottom,
            moved: r.moved,
        });
    }
    let runtime_seconds = if config.steps == 0 {
        0.0
    } else {
        start.elapsed().as_secs_f64()
    };

    Ok(RunReport {
        config: config.clone(),
        model: config.model,
        executor: engine.kind(),
        seed: config.seed,
        agents_total: state.agents.len(),
        series,
        throughput: top + bottom,
        runtime_seconds,
    })
}
