//! World geometry: cell states, goal-relative neighborhoods and the
//! distance table shared by both movement policies.

use crate::error::{Error, Result};
use serde::Serialize;

/// Contents of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum CellState {
    #[default]
    Empty = 0,
    Top = 1,
    Bottom = 2,
}

impl CellState {
    pub fn is_empty(self) -> bool {
        self == CellState::Empty
    }
}

/// The side an agent starts on. Top agents walk south, Bottom agents north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Top,
    Bottom,
}

impl Group {
    /// Row step taken by a forward move.
    pub fn forward_row_step(self) -> isize {
        match self {
            Group::Top => 1,
            Group::Bottom => -1,
        }
    }
}

impl From<Group> for CellState {
    fn from(g: Group) -> Self {
        match g {
            Group::Top => CellState::Top,
            Group::Bottom => CellState::Bottom,
        }
    }
}

/// Goal-relative neighbor slot. Discriminants give the canonical slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward = 0,
    ForwardLeft = 1,
    ForwardRight = 2,
    Left = 3,
    Right = 4,
    Back = 5,
    BackLeft = 6,
    BackRight = 7,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Forward,
        Direction::ForwardLeft,
        Direction::ForwardRight,
        Direction::Left,
        Direction::Right,
        Direction::Back,
        Direction::BackLeft,
        Direction::BackRight,
    ];

    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn from_slot(slot: usize) -> Direction {
        Self::ALL[slot]
    }

    /// (forward, left) components: forward is +1/0/-1, left is +1/0/-1.
    fn components(self) -> (isize, isize) {
        match self {
            Direction::Forward => (1, 0),
            Direction::ForwardLeft => (1, 1),
            Direction::ForwardRight => (1, -1),
            Direction::Left => (0, 1),
            Direction::Right => (0, -1),
            Direction::Back => (-1, 0),
            Direction::BackLeft => (-1, 1),
            Direction::BackRight => (-1, -1),
        }
    }

    /// Absolute (row, col) offset for an agent of `group`.
    ///
    /// A Top agent faces south, so its left hand points east (+col). A Bottom
    /// agent faces north and sees the same layout rotated by 180 degrees.
    pub fn offset(self, group: Group) -> (isize, isize) {
        let (f, l) = self.components();
        let s = group.forward_row_step();
        (f * s, l * s)
    }

    /// Inverse of [`Direction::offset`]; `None` for (0, 0) or non-adjacent offsets.
    pub fn from_offset(group: Group, dr: isize, dc: isize) -> Option<Direction> {
        Self::ALL.into_iter().find(|d| d.offset(group) == (dr, dc))
    }

    pub fn is_diagonal(self) -> bool {
        let (f, l) = self.components();
        f != 0 && l != 0
    }
}

/// Distance from each neighbor slot to the goal row, in canonical slot order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceTable {
    d: [f64; 8],
    d0: f64,
}

impl DistanceTable {
    /// Builds the table from the nominal forward distance `d0`:
    /// `d = sqrt((d0 - f)^2 + l^2)` with `f` the forward component and `l` the
    /// lateral offset of the slot.
    pub fn new(d0: f64) -> Result<Self> {
        if !d0.is_finite() || d0 <= 1.0 {
            return Err(Error::config(
                "d0",
                format!("must be a finite value > 1, got {d0}"),
            ));
        }
        let mut d = [0.0; 8];
        for dir in Direction::ALL {
            let (f, l) = dir.components();
            let along = d0 - f as f64;
            let across = l.abs() as f64;
            d[dir.slot()] = (along * along + across * across).sqrt();
        }
        Ok(DistanceTable { d, d0 })
    }

    pub fn get(&self, dir: Direction) -> f64 {
        self.d[dir.slot()]
    }

    pub fn as_array(&self) -> &[f64; 8] {
        &self.d
    }

    /// Smallest entry; always the forward slot.
    pub fn min(&self) -> f64 {
        self.d[Direction::Forward.slot()]
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }
}

impl Default for DistanceTable {
    fn default() -> Self {
        DistanceTable::new(2.0).expect("default d0 is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    /// Absolute (row, col); `None` outside the grid.
    pub cell: Option<(usize, usize)>,
    pub state: CellState,
}

impl Slot {
    /// Out-of-bounds slots count as occupied.
    pub fn is_free(&self) -> bool {
        self.cell.is_some() && self.state.is_empty()
    }
}

/// The eight goal-relative neighbors of an agent at the step-start snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighborhood {
    pub slots: [Slot; 8],
}

impl Neighborhood {
    /// Reads the neighborhood of `(row, col)` for an agent of `group` from a
    /// row-major occupancy buffer.
    pub fn read(
        cells: &[CellState],
        width: usize,
        height: usize,
        row: usize,
        col: usize,
        group: Group,
    ) -> Self {
        let mut slots = [Slot {
            cell: None,
            state: CellState::Empty,
        }; 8];
        for dir in Direction::ALL {
            let (dr, dc) = dir.offset(group);
            let r = row as isize + dr;
            let c = col as isize + dc;
            if r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width {
                let (r, c) = (r as usize, c as usize);
                slots[dir.slot()] = Slot {
                    cell: Some((r, c)),
                    state: cells[r * width + c],
                };
            }
        }
        Neighborhood { slots }
    }

    pub fn slot(&self, dir: Direction) -> &Slot {
        &self.slots[dir.slot()]
    }

    pub fn forward_free(&self) -> bool {
        self.slot(Direction::Forward).is_free()
    }

    pub fn free_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_free()).count()
    }
}

/// Per-agent row of the property table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentRecord {
    pub group: Group,
    /// 1-based id; matches the value stored in the index grid.
    pub index: u32,
    pub row: usize,
    pub col: usize,
    pub future_row: usize,
    pub future_col: usize,
    /// Accumulated walked distance (ant-system runs only).
    pub tour_length: f64,
    /// Sticky: set once the agent enters the opposite band.
    pub crossed: bool,
}

impl AgentRecord {
    pub fn new(group: Group, index: u32, row: usize, col: usize) -> Self {
        AgentRecord {
            group,
            index,
            row,
            col,
            future_row: row,
            future_col: col,
            tour_length: 0.0,
            crossed: false,
        }
    }

    pub fn position(&self) -> (usize, usize) {
        (self.row, self.col)
    }

    pub fn future(&self) -> (usize, usize) {
        (self.future_row, self.future_col)
    }

    pub fn intends_to_move(&self) -> bool {
        self.position() != self.future()
    }
}
