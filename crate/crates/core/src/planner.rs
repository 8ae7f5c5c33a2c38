//! Action planner: compiles subgoal calls into atomic actions.
//!
//! Movement uses A* over grid cells. Step actions are relative to the facing
//! and never rotate the player, so a path of `n` cells costs exactly `n`
//! actions and turning is only needed to face an interaction target.

use crate::geometry::{AtomicAction, Dims, GridPos, Orientation};
use crate::layout::{Fixture, Layout};
use crate::perception::PotView;
use crate::substrate::ResourceKind;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use thiserror::Error;

pub const FIRE_AT_BUDGET: u32 = 100;
pub const FIRE_AT_RADIUS: u32 = 2;
/// Opponents this close make `fire_at` alternate between moving and holding.
pub const HOLD_RADIUS: u32 = 4;
pub const WAIT_BUDGET: u32 = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("no path from {src} to {dst}")]
    Unreachable { src: GridPos, dst: GridPos },
    #[error("{0} is outside the map")]
    OutOfBounds(GridPos),
    #[error("no interactable entity at {0}")]
    NotAnEntity(GridPos),
    #[error("no pot at {0}")]
    NotAPot(GridPos),
}

/// Which resource cells may be walked over, least permissive first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleTier {
    AvoidAllOtherResources,
    AllowSameKindAsTarget,
    AllowAny,
}

impl ObstacleTier {
    pub const ORDER: [ObstacleTier; 3] =
        [ObstacleTier::AvoidAllOtherResources, ObstacleTier::AllowSameKindAsTarget, ObstacleTier::AllowAny];
}

/// What the planner knows about the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridView {
    pub dims: Dims,
    /// Walls, fixtures and anything else never to be entered.
    pub blocked: BTreeSet<GridPos>,
    /// Resource cells believed present.
    pub resources: BTreeMap<GridPos, ResourceKind>,
    pub fixtures: BTreeMap<GridPos, Fixture>,
}

impl GridView {
    pub fn new(dims: Dims) -> Self {
        Self { dims, blocked: BTreeSet::new(), resources: BTreeMap::new(), fixtures: BTreeMap::new() }
    }

    pub fn from_layout(layout: &Layout) -> Self {
        let mut blocked = layout.walls.clone();
        blocked.extend(layout.fixtures.keys().copied());
        Self { dims: layout.dims, blocked, resources: BTreeMap::new(), fixtures: layout.fixtures.clone() }
    }

    pub fn with_resources(mut self, resources: BTreeMap<GridPos, ResourceKind>) -> Self {
        self.resources = resources;
        self
    }

    pub fn passable(&self, p: GridPos) -> bool {
        self.dims.contains(p) && !self.blocked.contains(&p)
    }

    fn resource_blocks(&self, p: GridPos, dst: GridPos, tier: ObstacleTier, kind: Option<ResourceKind>) -> bool {
        if p == dst {
            return false;
        }
        match (self.resources.get(&p), tier) {
            (None, _) | (Some(_), ObstacleTier::AllowAny) => false,
            (Some(_), ObstacleTier::AvoidAllOtherResources) => true,
            (Some(k), ObstacleTier::AllowSameKindAsTarget) => Some(*k) != kind,
        }
    }
}

/// Shortest cell path from `src` to `dst` (both included) with A* and a
/// Manhattan heuristic, or `None`.
fn astar(view: &GridView, src: GridPos, dst: GridPos, blocked: impl Fn(GridPos) -> bool) -> Option<Vec<GridPos>> {
    let mut open = BinaryHeap::new();
    let mut g: BTreeMap<GridPos, u32> = BTreeMap::new();
    let mut parent: BTreeMap<GridPos, GridPos> = BTreeMap::new();
    g.insert(src, 0);
    open.push(Reverse((src.manhattan(dst), 0u32, src)));
    while let Some(Reverse((_, cost, p))) = open.pop() {
        if p == dst {
            let mut path = vec![p];
            let mut cur = p;
            while let Some(prev) = parent.get(&cur) {
                path.push(*prev);
                cur = *prev;
            }
            path.reverse();
            return Some(path);
        }
        if cost > g[&p] {
            continue;
        }
        for q in p.neighbors() {
            if !view.passable(q) || blocked(q) {
                continue;
            }
            let nc = cost + 1;
            if g.get(&q).is_none_or(|&old| nc < old) {
                g.insert(q, nc);
                parent.insert(q, p);
                open.push(Reverse((nc + q.manhattan(dst), nc, q)));
            }
        }
    }
    None
}

/// Breadth-first path from `src` to the nearest cell satisfying `goal`.
pub fn bfs_path(
    view: &GridView,
    src: GridPos,
    goal: impl Fn(GridPos) -> bool,
    blocked: impl Fn(GridPos) -> bool,
) -> Option<Vec<GridPos>> {
    let mut parent: BTreeMap<GridPos, GridPos> = BTreeMap::new();
    let mut seen = BTreeSet::from([src]);
    let mut queue = VecDeque::from([src]);
    while let Some(p) = queue.pop_front() {
        if goal(p) {
            let mut path = vec![p];
            let mut cur = p;
            while let Some(prev) = parent.get(&cur) {
                path.push(*prev);
                cur = *prev;
            }
            path.reverse();
            return Some(path);
        }
        for q in p.neighbors() {
            if view.passable(q) && !blocked(q) && seen.insert(q) {
                parent.insert(q, p);
                queue.push_back(q);
            }
        }
    }
    None
}

/// Step actions that walk `path` while keeping `facing`.
pub fn path_actions(path: &[GridPos], facing: Orientation) -> Vec<AtomicAction> {
    path.windows(2)
        .map(|w| {
            let dir = Orientation::towards(w[0], w[1]).expect("path cells are adjacent");
            AtomicAction::step_towards(facing, dir)
        })
        .collect()
}

/// Turn actions that rotate `from` to `to` the short way.
pub fn turn_actions(from: Orientation, to: Orientation) -> Vec<AtomicAction> {
    match from.clockwise_turns_to(to) {
        0 => vec![],
        1 => vec![AtomicAction::TurnRight],
        2 => vec![AtomicAction::TurnRight, AtomicAction::TurnRight],
        _ => vec![AtomicAction::TurnLeft],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovePlan {
    pub actions: Vec<AtomicAction>,
    pub path: Vec<GridPos>,
    pub tier: ObstacleTier,
}

/// Shortest path to `dst` under the least permissive feasible tier. The
/// target kind for the middle tier is the resource at `dst`, if any.
pub fn compile_move_to(view: &GridView, src: GridPos, facing: Orientation, dst: GridPos) -> Result<MovePlan, PlannerError> {
    compile_move_to_kind(view, src, facing, dst, view.resources.get(&dst).copied())
}

/// [`compile_move_to`] with an explicit target kind for the middle tier.
pub fn compile_move_to_kind(
    view: &GridView,
    src: GridPos,
    facing: Orientation,
    dst: GridPos,
    kind: Option<ResourceKind>,
) -> Result<MovePlan, PlannerError> {
    if !view.dims.contains(dst) {
        return Err(PlannerError::OutOfBounds(dst));
    }
    if src == dst {
        return Ok(MovePlan { actions: vec![], path: vec![src], tier: ObstacleTier::AvoidAllOtherResources });
    }
    for tier in ObstacleTier::ORDER {
        if tier == ObstacleTier::AllowSameKindAsTarget && kind.is_none() {
            continue;
        }
        if let Some(path) = astar(view, src, dst, |p| view.resource_blocks(p, dst, tier, kind)) {
            return Ok(MovePlan { actions: path_actions(&path, facing), path, tier });
        }
    }
    Err(PlannerError::Unreachable { src, dst })
}

/// Walk to a cell next to `target`, face it and interact.
pub fn compile_interact(view: &GridView, src: GridPos, facing: Orientation, target: GridPos) -> Result<Vec<AtomicAction>, PlannerError> {
    if !view.fixtures.contains_key(&target) {
        return Err(PlannerError::NotAnEntity(target));
    }
    let path = bfs_path(view, src, |p| p.manhattan(target) == 1, |_| false)
        .ok_or(PlannerError::Unreachable { src, dst: target })?;
    let stand = *path.last().expect("non-empty path");
    let mut actions = path_actions(&path, facing);
    let face = Orientation::towards(stand, target).expect("adjacent");
    actions.extend(turn_actions(facing, face));
    actions.push(AtomicAction::FireBeam);
    Ok(actions)
}

/// Alive players along the beam: `Some(distance)` if `other` is within
/// `beam` cells straight ahead of `pos` with no blocked cell in between.
pub fn beam_distance(view: &GridView, pos: GridPos, facing: Orientation, other: GridPos, beam: i32) -> Option<i32> {
    let mut p = pos;
    for d in 1..=beam {
        p = p.step(facing);
        if !view.dims.contains(p) || (view.blocked.contains(&p) && p != other) {
            return None;
        }
        if p == other {
            return Some(d);
        }
    }
    None
}

/// Stateful `fire_at` behavior: approach the target area, turn to and zap
/// any opponent in line, otherwise scan clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct FireAtProgram {
    pub target: GridPos,
    pub budget: u32,
    pub radius: u32,
    pub beam: i32,
    used: u32,
}

impl FireAtProgram {
    pub fn new(target: GridPos) -> Self {
        Self { target, budget: FIRE_AT_BUDGET, radius: FIRE_AT_RADIUS, beam: 3, used: 0 }
    }

    pub fn steps_used(&self) -> u32 {
        self.used
    }

    /// Next action, or `None` once the budget is spent.
    pub fn next_action(&mut self, view: &GridView, pos: GridPos, facing: Orientation, opponents: &[GridPos]) -> Option<AtomicAction> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        Some(self.choose(view, pos, facing, opponents))
    }

    fn choose(&self, view: &GridView, pos: GridPos, facing: Orientation, opponents: &[GridPos]) -> AtomicAction {
        if opponents.iter().any(|o| beam_distance(view, pos, facing, *o, self.beam).is_some()) {
            return AtomicAction::FireBeam;
        }
        for o in opponents {
            for dir in Orientation::ALL {
                if beam_distance(view, pos, dir, *o, self.beam).is_some() {
                    return turn_actions(facing, dir)[0];
                }
            }
        }
        // A nearby opponent is usually lining up too. Holding still every
        // other step, facing it, stops both sides strafing in lockstep.
        if let Some(o) = opponents.iter().filter(|o| o.manhattan(pos) <= HOLD_RADIUS).min_by_key(|o| o.manhattan(pos)) {
            if self.used.is_multiple_of(2) {
                let (dx, dy) = (o.x as i64 - pos.x as i64, o.y as i64 - pos.y as i64);
                let dir = match (dx.abs() >= dy.abs(), dx > 0, dy > 0) {
                    (true, true, _) => Orientation::E,
                    (true, false, _) => Orientation::W,
                    (false, _, true) => Orientation::S,
                    (false, _, false) => Orientation::N,
                };
                return turn_actions(facing, dir).first().copied().unwrap_or(AtomicAction::Noop);
            }
        }
        let avoid = |p: GridPos| view.resources.contains_key(&p) || opponents.contains(&p);
        if !opponents.is_empty() {
            let in_line = |p: GridPos| {
                opponents.iter().any(|o| Orientation::ALL.iter().any(|d| beam_distance(view, p, *d, *o, self.beam).is_some()))
            };
            let path = bfs_path(view, pos, in_line, avoid).or_else(|| bfs_path(view, pos, in_line, |p| opponents.contains(&p)));
            if let Some(path) = path.filter(|p| p.len() > 1) {
                return path_actions(&path[..2], facing)[0];
            }
        }
        if pos.manhattan(self.target) > self.radius {
            let near = |p: GridPos| p.manhattan(self.target) <= self.radius;
            let path = bfs_path(view, pos, near, avoid).or_else(|| bfs_path(view, pos, near, |p| opponents.contains(&p)));
            if let Some(path) = path.filter(|p| p.len() > 1) {
                return path_actions(&path[..2], facing)[0];
            }
        }
        AtomicAction::TurnRight
    }
}

/// Stateful `wait` behavior: noops until the pot is seen cooked or the
/// budget runs out.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitProgram {
    pub pot: GridPos,
    pub budget: u32,
    used: u32,
}

impl WaitProgram {
    pub fn new(view: &GridView, pot: GridPos) -> Result<Self, PlannerError> {
        if view.fixtures.get(&pot) != Some(&Fixture::Pot) {
            return Err(PlannerError::NotAPot(pot));
        }
        Ok(Self { pot, budget: WAIT_BUDGET, used: 0 })
    }

    pub fn next_action(&mut self, pot: Option<&PotView>) -> Option<AtomicAction> {
        if self.used >= self.budget || pot.is_some_and(|p| p.cooked) {
            return None;
        }
        self.used += 1;
        Some(AtomicAction::Noop)
    }
}
