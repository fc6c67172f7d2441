//! Least-effort movement: distance-ratio scores and clamped-normal selection
//! with forward-cell priority.

use crate::error::{Error, Result};
use crate::grid::{Direction, DistanceTable, Neighborhood};
use crate::rng::{self, Phase, RngKey};

/// One score per goal-relative slot; zero marks a slot that cannot be entered.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CandidateScores {
    pub scores: [f64; 8],
}

impl CandidateScores {
    pub fn get(&self, dir: Direction) -> f64 {
        self.scores[dir.slot()]
    }

    pub fn max(&self) -> f64 {
        self.scores.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    MoveTo(usize, usize),
    Stay,
}

impl Decision {
    pub(crate) fn from_slot(nbhd: &Neighborhood, dir: Option<Direction>) -> Decision {
        match dir.and_then(|d| nbhd.slot(d).cell) {
            Some((r, c)) => Decision::MoveTo(r, c),
            None => Decision::Stay,
        }
    }
}

/// Mean and spread of the selection draw, as multiples of the best score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemParams {
    pub mu_sel: f64,
    pub sigma_sel: f64,
}

impl Default for LemParams {
    fn default() -> Self {
        LemParams {
            mu_sel: 1.0,
            sigma_sel: 0.5,
        }
    }
}

impl LemParams {
    pub fn validate(&self) -> Result<()> {
        if !self.mu_sel.is_finite() {
            return Err(Error::config("sel_mu", "must be finite"));
        }
        if !self.sigma_sel.is_finite() || self.sigma_sel < 0.0 {
            return Err(Error::config("sel_sigma", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `C_i = (1 - n_i) * D_min / D_i`, where `D_min` is the forward distance.
pub fn lem_scores(nbhd: &Neighborhood, dtable: &DistanceTable) -> CandidateScores {
    let d_min = dtable.min();
    let mut out = CandidateScores::default();
    for dir in Direction::ALL {
        if nbhd.slot(dir).is_free() {
            out.scores[dir.slot()] = d_min / dtable.get(dir);
        }
    }
    out
}

/// Picks the next cell for one agent.
///
/// `key` identifies the agent and step; the normal draw uses the
/// [`Phase::LemSelect`] stream and ties use [`Phase::TieBreak`].
pub fn lem_select(
    scores: &CandidateScores,
    nbhd: &Neighborhood,
    params: &LemParams,
    key: RngKey,
) -> Decision {
    if nbhd.forward_free() {
        return Decision::from_slot(nbhd, Some(Direction::Forward));
    }
    let c_max = scores.max();
    if c_max <= 0.0 {
        return Decision::Stay;
    }
    let r = rng::normal(
        RngKey {
            phase: Phase::LemSelect,
            ..key
        },
        params.mu_sel * c_max,
        params.sigma_sel * c_max,
    );
    let dir = nearest_candidate(scores, r, || {
        rng::uniform(RngKey {
            phase: Phase::TieBreak,
            ..key
        })
    });
    Decision::from_slot(nbhd, dir)
}

/// Clamps `r` into `[0, C_max]` and returns the nonzero-score slot closest to
/// it. Equal distances are split by `tie_draw()`, uniformly over the tied slots
/// in canonical order; the draw is only requested when a tie exists.
pub fn nearest_candidate(
    scores: &CandidateScores,
    r: f64,
    tie_draw: impl FnOnce() -> f64,
) -> Option<Direction> {
    let c_max = scores.max();
    let r = if r.is_nan() { 0.0 } else { r.clamp(0.0, c_max) };

    let mut best = f64::INFINITY;
    let mut tied = [0usize; 8];
    let mut n_tied = 0;
    for (slot, &c) in scores.scores.iter().enumerate() {
        if c <= 0.0 {
            continue;
        }
        let gap = (c - r).abs();
        if gap < best {
            best = gap;
            tied[0] = slot;
            n_tied = 1;
        } else if gap == best {
            tied[n_tied] = slot;
            n_tied += 1;
        }
    }
    match n_tied {
        0 => None,
        1 => Some(Direction::from_slot(tied[0])),
        k => {
            let pick = ((tie_draw() * k as f64) as usize).min(k - 1);
            Some(Direction::from_slot(tied[pick]))
        }
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // expected values are written out by hand
mod tests {
    use super::*;
    use crate::grid::{CellState, Group};

    const W: usize = 16;

    fn grid_with(occupied: &[(usize, usize)]) -> Vec<CellState> {
        let mut cells = vec![CellState::Empty; W * W];
        for &(r, c) in occupied {
            cells[r * W + c] = CellState::Bottom;
        }
        cells
    }

    fn nbhd(cells: &[CellState]) -> Neighborhood {
        Neighborhood::read(cells, W, W, 5, 5, Group::Top)
    }

    #[test]
    fn all_empty_scores() {
        let s = lem_scores(&nbhd(&grid_with(&[])), &DistanceTable::default());
        let want = [
            1.0, 0.70711, 0.70711, 0.44721, 0.44721, 0.33333, 0.31623, 0.31623,
        ];
        for (got, want) in s.scores.iter().zip(want) {
            assert!((got - want).abs() < 5e-6, "{got} vs {want}");
        }
        assert_eq!(s.get(Direction::Forward), 1.0);
    }

    #[test]
    fn all_occupied_scores_zero() {
        let around: Vec<_> = (4..=6)
            .flat_map(|r| (4..=6).map(move |c| (r, c)))
            .filter(|&p| p != (5, 5))
            .collect();
        let s = lem_scores(&nbhd(&grid_with(&around)), &DistanceTable::default());
        assert_eq!(s.scores, [0.0; 8]);
        let d = lem_select(
            &s,
            &nbhd(&grid_with(&around)),
            &LemParams::default(),
            RngKey::new(0, 0, Phase::LemSelect, 1),
        );
        assert_eq!(d, Decision::Stay);
    }

    #[test]
    fn forward_occupied_leaves_others() {
        let t = DistanceTable::default();
        let free = lem_scores(&nbhd(&grid_with(&[])), &t);
        let blocked = lem_scores(&nbhd(&grid_with(&[(6, 5)])), &t);
        assert_eq!(blocked.get(Direction::Forward), 0.0);
        for dir in &Direction::ALL[1..] {
            assert_eq!(blocked.get(*dir), free.get(*dir));
        }
    }

    #[test]
    fn forward_free_moves_forward() {
        let cells = grid_with(&[(6, 6), (6, 4)]);
        let n = nbhd(&cells);
        let s = lem_scores(&n, &DistanceTable::default());
        for e in 0..200 {
            let d = lem_select(
                &s,
                &n,
                &LemParams::default(),
                RngKey::new(3, e, Phase::LemSelect, 1),
            );
            assert_eq!(d, Decision::MoveTo(6, 5));
        }
    }

    #[test]
    fn clamped_draw_with_tie_picks_first_for_low_u() {
        let n = nbhd(&grid_with(&[(6, 5)]));
        let s = lem_scores(&n, &DistanceTable::default());
        // r above C_max clamps to C_max = 0.70711; FL and FR tie.
        let dir = nearest_candidate(&s, 5.0, || 0.3);
        assert_eq!(dir, Some(Direction::ForwardLeft));
        let dir = nearest_candidate(&s, 5.0, || 0.7);
        assert_eq!(dir, Some(Direction::ForwardRight));
        assert_eq!(
            Decision::from_slot(&n, Some(Direction::ForwardLeft)),
            Decision::MoveTo(6, 6)
        );
    }

    #[test]
    fn negative_draw_clamps_to_zero() {
        let n = nbhd(&grid_with(&[(6, 5)]));
        let s = lem_scores(&n, &DistanceTable::default());
        let dir = nearest_candidate(&s, -3.0, || 0.0);
        assert_eq!(dir, Some(Direction::BackLeft));
    }

    #[test]
    fn no_tie_draw_without_tie() {
        let n = nbhd(&grid_with(&[(6, 5), (6, 4)]));
        let s = lem_scores(&n, &DistanceTable::default());
        let dir = nearest_candidate(&s, 0.7, || panic!("tie draw requested"));
        assert_eq!(dir, Some(Direction::ForwardLeft));
    }

    #[test]
    fn forward_dominance_frequencies() {
        let n = nbhd(&grid_with(&[(6, 5)]));
        let s = lem_scores(&n, &DistanceTable::default());
        let mut counts = [0usize; 8];
        for agent in 0..100_000u64 {
            let d = lem_select(
                &s,
                &n,
                &LemParams::default(),
                RngKey::new(9, 0, Phase::LemSelect, agent),
            );
            let Decision::MoveTo(r, c) = d else {
                panic!("stayed")
            };
            let dir = Direction::from_offset(Group::Top, r as isize - 5, c as isize - 5).unwrap();
            counts[dir.slot()] += 1;
        }
        let diag = counts[1] + counts[2];
        let lateral = counts[3] + counts[4];
        let back = counts[5];
        let back_diag = counts[6] + counts[7];
        assert_eq!(counts[0], 0);
        assert!(diag > lateral, "{counts:?}");
        assert!(lateral > back && lateral > back_diag, "{counts:?}");
    }
}
