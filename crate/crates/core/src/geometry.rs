//! Grid coordinates, facing directions and the atomic action set.
//!
//! Coordinates are `(x, y)` with `x` growing East and `y` growing South,
//! matching the textual map format where `(0, 0)` is the top-left cell.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub x: i32,
    pub y: i32,
}

impl GridPos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: GridPos) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn offset(self, dx: i32, dy: i32) -> GridPos {
        GridPos::new(self.x + dx, self.y + dy)
    }

    pub fn step(self, dir: Orientation) -> GridPos {
        let (dx, dy) = dir.delta();
        self.offset(dx, dy)
    }

    pub fn neighbors(self) -> [GridPos; 4] {
        Orientation::ALL.map(|o| self.step(o))
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Grid dimensions: `width` columns by `height` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub width: i32,
    pub height: i32,
}

impl Dims {
    pub fn contains(self, p: GridPos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn center(self) -> GridPos {
        GridPos::new(self.width / 2, self.height / 2)
    }

    pub fn cells(self) -> impl Iterator<Item = GridPos> {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| GridPos::new(x, y)))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    N,
    E,
    S,
    W,
}

impl Orientation {
    /// Clockwise order starting North.
    pub const ALL: [Orientation; 4] = [Orientation::N, Orientation::E, Orientation::S, Orientation::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Orientation::N => (0, -1),
            Orientation::E => (1, 0),
            Orientation::S => (0, 1),
            Orientation::W => (-1, 0),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }

    pub fn right(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn left(self) -> Self {
        Self::from_index(self.index() + 3)
    }

    pub fn opposite(self) -> Self {
        Self::from_index(self.index() + 2)
    }

    pub fn letter(self) -> char {
        match self {
            Orientation::N => 'N',
            Orientation::E => 'E',
            Orientation::S => 'S',
            Orientation::W => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'N' => Some(Orientation::N),
            'E' => Some(Orientation::E),
            'S' => Some(Orientation::S),
            'W' => Some(Orientation::W),
            _ => None,
        }
    }

    /// Direction from `from` to an orthogonally adjacent `to`.
    pub fn towards(from: GridPos, to: GridPos) -> Option<Self> {
        Self::ALL.into_iter().find(|o| from.step(*o) == to)
    }

    /// Number of clockwise quarter turns needed to go from `self` to `target`.
    pub fn clockwise_turns_to(self, target: Orientation) -> usize {
        (target.index() + 4 - self.index()) % 4
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The eight primitive actions every substrate accepts.
///
/// Steps are relative to the current facing and never rotate the player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicAction {
    StepForward,
    StepBackward,
    StepLeft,
    StepRight,
    TurnLeft,
    TurnRight,
    FireBeam,
    Noop,
}

impl AtomicAction {
    pub const ALL: [AtomicAction; 8] = [
        AtomicAction::StepForward,
        AtomicAction::StepBackward,
        AtomicAction::StepLeft,
        AtomicAction::StepRight,
        AtomicAction::TurnLeft,
        AtomicAction::TurnRight,
        AtomicAction::FireBeam,
        AtomicAction::Noop,
    ];

    /// World direction of travel for a step action given the facing.
    pub fn move_direction(self, facing: Orientation) -> Option<Orientation> {
        match self {
            AtomicAction::StepForward => Some(facing),
            AtomicAction::StepBackward => Some(facing.opposite()),
            AtomicAction::StepLeft => Some(facing.left()),
            AtomicAction::StepRight => Some(facing.right()),
            _ => None,
        }
    }

    /// The step action that travels in world direction `dir` while facing `facing`.
    pub fn step_towards(facing: Orientation, dir: Orientation) -> AtomicAction {
        match facing.clockwise_turns_to(dir) {
            0 => AtomicAction::StepForward,
            1 => AtomicAction::StepRight,
            2 => AtomicAction::StepBackward,
            _ => AtomicAction::StepLeft,
        }
    }

    pub fn is_step(self) -> bool {
        self.move_direction(Orientation::N).is_some()
    }
}
