//! Turning a high-level plan plus the current state into subgoal calls.
//!
//! This module renders the state description blocks shared by every agent
//! variant and runs the ask / parse / retry loop for action plans.

use crate::cooking::HeldItem;
use crate::error::Result;
use crate::geometry::GridPos;
use crate::layout::{Fixture, Layout};
use crate::literal::{parse_response_map, LiteralValue};
use crate::memory::EntityMemory;
use crate::perception::{serialize_observation, EntityKind, PotView, StructuredObservation};
use crate::plan::{parse_action_plan, SubgoalCall};
use crate::planner::GridView;
use crate::prompts::{self, PromptKind};
use crate::reasoner::{ReasonerClient, ReasonerError};
use crate::substrate::SubstrateId;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

fn coord_list(cells: impl IntoIterator<Item = GridPos>) -> String {
    let parts: Vec<String> = cells.into_iter().map(|p| p.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Walkable cells reachable from `from`, including it.
pub fn reachable_cells(layout: &Layout, from: GridPos) -> BTreeSet<GridPos> {
    let view = GridView::from_layout(layout);
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        for q in p.neighbors() {
            if view.passable(q) && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    seen
}

/// Cells a `move_to` may target.
pub fn valid_cells(layout: &Layout, pos: Option<GridPos>) -> Vec<GridPos> {
    match (layout.substrate, pos) {
        (SubstrateId::Cooking, Some(p)) => reachable_cells(layout, p).into_iter().collect(),
        _ => layout.walkable_cells(),
    }
}

/// Last-seen pot and counter contents in the kitchen.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KitchenMemory {
    pub pots: BTreeMap<GridPos, PotView>,
    pub counters: BTreeMap<GridPos, HeldItem>,
}

impl KitchenMemory {
    /// Every pot starts out known and empty.
    pub fn seeded(layout: &Layout) -> Self {
        let pots = layout
            .fixtures_of(Fixture::Pot)
            .into_iter()
            .map(|pos| (pos, PotView { pos, tomatoes: 0, cooked: false }))
            .collect();
        Self { pots, counters: BTreeMap::new() }
    }

    pub fn update(&mut self, obs: &StructuredObservation) {
        for v in &obs.pots {
            self.pots.insert(v.pos, *v);
        }
        for c in obs.visible(EntityKind::Fixture(Fixture::Counter)) {
            match obs.counter_items.get(&c) {
                Some(item) => self.counters.insert(c, *item),
                None => self.counters.remove(&c),
            };
        }
    }

    pub fn pot(&self, pos: GridPos) -> Option<&PotView> {
        self.pots.get(&pos)
    }
}

/// The "Current State Description" block for matrix substrates.
pub fn matrix_state(obs: &StructuredObservation, memory: &EntityMemory, layout: &Layout) -> Result<String> {
    let (pos, facing) = obs.pose.unwrap_or((GridPos::new(0, 0), crate::geometry::Orientation::N));
    let window = obs.substrate.window();
    let inventory = obs.inventory.as_ref().map_or_else(|| "{}".to_string(), |i| i.to_literal().to_string());
    let opponents: Vec<String> = obs.opponents.iter().map(|(id, (p, _))| format!("'{id}': {p}")).collect();
    let order = EntityKind::for_substrate(obs.substrate);
    prompts::render(
        prompts::STATE_MATRIX,
        &[
            ("map_size", &layout.dims.to_string()),
            ("movable_locations", &coord_list(valid_cells(layout, Some(pos)))),
            ("player_position", &pos.to_string()),
            ("player_orientation", &facing.to_string()),
            ("player_inventory", &inventory),
            ("window", &format!("{}x{}", window.rows(), window.cols())),
            ("observable_locations", &serialize_observation(obs)),
            ("opponent_locations", &format!("{{{}}}", opponents.join(", "))),
            ("memory", &memory.render(&order, pos)),
        ],
    )
}

/// The "Current State Description" block for the kitchen.
pub fn cooking_state(
    obs: &StructuredObservation,
    memory: &EntityMemory,
    kitchen: &KitchenMemory,
    layout: &Layout,
) -> Result<String> {
    let (pos, facing) = obs.pose.unwrap_or((GridPos::new(0, 0), crate::geometry::Orientation::N));
    let reachable = reachable_cells(layout, pos);
    let held = obs.held.unwrap_or(HeldItem::Nothing);
    let pots: Vec<String> =
        kitchen.pots.values().map(|v| format!("({}, {}, '{}')", v.pos, v.tomatoes, v.status())).collect();
    let counters: Vec<String> = kitchen.counters.iter().map(|(p, h)| format!("({p}, '{}')", h.label())).collect();
    let mut entities = Vec::new();
    for kind in EntityKind::for_substrate(SubstrateId::Cooking) {
        let EntityKind::Fixture(f) = kind else { continue };
        let mine: Vec<GridPos> =
            layout.fixtures_of(f).into_iter().filter(|c| c.neighbors().iter().any(|n| reachable.contains(n))).collect();
        if !mine.is_empty() {
            entities.push(format!("'{}': {}", kind.memory_key(), coord_list(mine)));
        }
    }
    let order = EntityKind::for_substrate(SubstrateId::Cooking);
    prompts::render(
        prompts::STATE_COOKING,
        &[
            ("map_size", &layout.dims.to_string()),
            ("movable_locations", &coord_list(reachable.iter().copied())),
            ("player_position", &pos.to_string()),
            ("player_orientation", &facing.to_string()),
            ("held_item", &format!("'{}'", held.label())),
            ("observation", &serialize_observation(obs)),
            ("pots", &format!("[{}]", pots.join(", "))),
            ("counter_items", &format!("[{}]", counters.join(", "))),
            ("entities", &format!("{{{}}}", entities.join(", "))),
            ("memory", &memory.render(&order, pos)),
        ],
    )
}

/// Result of one subgoal request.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgoalResult {
    /// Empty when both attempts failed; the agent then idles one step.
    pub calls: Vec<SubgoalCall>,
    /// The whole parsed response map of the accepted attempt.
    pub response: Option<LiteralValue>,
    /// Diagnostic of the last failed attempt, if any.
    pub error: Option<String>,
}

fn check(text: &str, valid: &BTreeSet<GridPos>) -> std::result::Result<(LiteralValue, Vec<SubgoalCall>), String> {
    let map = parse_response_map(text).map_err(|e| e.to_string())?;
    let calls = parse_action_plan(&map).map_err(|e| e.to_string())?;
    for c in &calls {
        if let SubgoalCall::MoveTo { dst, .. } = c {
            if !valid.contains(dst) {
                return Err(format!("{c} targets {dst}, which is not a valid location for move_to"));
            }
        }
    }
    Ok((map, calls))
}

/// Asks for an action plan. `render` builds the prompt from the text of the
/// errors section; a failed parse is retried once with the error shown.
pub fn plan_subgoals(
    client: &mut ReasonerClient,
    kind: PromptKind,
    valid: &BTreeSet<GridPos>,
    previous_errors: &str,
    render: impl Fn(&str) -> Result<String>,
) -> std::result::Result<SubgoalResult, SubgoalError> {
    let mut errors = previous_errors.to_string();
    let mut last_error = None;
    for _ in 0..2 {
        let prompt = render(&errors)?;
        let text = client.ask(kind.name(), &prompt)?;
        match check(&text, valid) {
            Ok((map, calls)) => return Ok(SubgoalResult { calls, response: Some(map), error: last_error }),
            Err(e) => {
                errors = e.clone();
                last_error = Some(e);
            }
        }
    }
    Ok(SubgoalResult { calls: Vec::new(), response: None, error: last_error })
}

#[derive(Debug, thiserror::Error)]
pub enum SubgoalError {
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Prompt(#[from] crate::error::HmError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{PlayerId, WorldState};
    use crate::reasoner::{Completion, PromptExchange, Reasoner};
    use std::sync::{Arc, Mutex};

    struct Scripted(Mutex<VecDeque<&'static str>>);

    impl Reasoner for Scripted {
        fn name(&self) -> String {
            "scripted".into()
        }
        fn complete(&self, _: &PromptExchange) -> std::result::Result<Completion, ReasonerError> {
            let text = self.0.lock().unwrap().pop_front().unwrap_or("nothing");
            Ok(Completion { text: text.into(), retries: 0 })
        }
    }

    fn client(replies: &[&'static str]) -> ReasonerClient {
        ReasonerClient::new(Arc::new(Scripted(Mutex::new(replies.iter().copied().collect()))), "sys")
    }

    #[test]
    fn bad_plan_is_retried_with_the_error() {
        let valid: BTreeSet<GridPos> = [GridPos::new(1, 1), GridPos::new(2, 1)].into();
        let mut c = client(&["{'action_plan': ['move_to((1, 1), (9, 9))']}", "{'action_plan': ['move_to((1, 1), (2, 1))']}"]);
        let seen = Mutex::new(Vec::new());
        let r = plan_subgoals(&mut c, PromptKind::SubgoalMatrix, &valid, "None", |e| {
            seen.lock().unwrap().push(e.to_string());
            Ok(format!("errors: {e}"))
        })
        .unwrap();
        assert_eq!(r.calls, vec![SubgoalCall::MoveTo { src: GridPos::new(1, 1), dst: GridPos::new(2, 1) }]);
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen[0], "None");
        assert!(seen[1].contains("not a valid location"));
    }

    #[test]
    fn double_failure_gives_an_empty_plan() {
        let mut c = client(&["no plan", "still no plan"]);
        let r = plan_subgoals(&mut c, PromptKind::SubgoalMatrix, &BTreeSet::new(), "None", |_| Ok("p".into())).unwrap();
        assert!(r.calls.is_empty());
        assert!(r.error.is_some());
        assert_eq!(c.drain_traces().len(), 2);
    }

    #[test]
    fn cooking_state_lists_only_own_side() {
        let w = WorldState::builtin(SubstrateId::Cooking, 10, 0).unwrap();
        let obs = w.observe(PlayerId(0));
        let mut mem = EntityMemory::new();
        mem.update(&obs, w.layout.dims);
        let text = cooking_state(&obs, &mem, &KitchenMemory::seeded(&w.layout), &w.layout).unwrap();
        assert!(text.contains("'tomato_dispenser': [(3, 1)]"), "{text}");
        assert!(text.contains("'pot': [(4, 2), (4, 4)]"));
        assert!(text.contains("- Held Item: 'nothing'"));
        assert!(text.contains("((4, 2), 0, 'filling')"));
        assert!(!text.contains("(7, 5)"), "{text}");
    }

    #[test]
    fn matrix_state_has_every_field() {
        let w = WorldState::builtin(SubstrateId::RwsRepeated, 10, 0).unwrap();
        let obs = w.observe(PlayerId(0));
        let text = matrix_state(&obs, &EntityMemory::new(), &w.layout).unwrap();
        assert!(text.contains("- Global Map Size: 23x15 grid"));
        assert!(text.contains("- Player Inventory: {'rock/yellow': 1, 'paper/purple': 1, 'scissors/blue': 1}"));
        assert!(text.contains("grid around your agent"));
    }
}
