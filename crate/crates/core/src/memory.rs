//! The two-part agent memory: last-seen entity locations and the history of
//! the agent's own interactions.

use crate::game::PlayerId;
use crate::geometry::{Dims, GridPos};
use crate::literal::LiteralValue;
use crate::perception::{window_cells, EntityKind, StructuredObservation};
use crate::substrate::{Inventory, ResourceKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntityMemory {
    pub entries: BTreeMap<EntityKind, BTreeMap<GridPos, u64>>,
    pub opponents: BTreeMap<PlayerId, (GridPos, u64)>,
}

impl EntityMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Upserts everything visible at the observation's step and drops
    /// remembered entries that lie inside the window but are no longer seen.
    pub fn update(&mut self, obs: &StructuredObservation, dims: Dims) {
        let Some((pos, facing)) = obs.pose else {
            return;
        };
        let window: BTreeSet<GridPos> = window_cells(obs.substrate.window(), dims, pos, facing).into_iter().collect();
        for (kind, seen) in &obs.entities {
            let remembered = self.entries.entry(*kind).or_default();
            remembered.retain(|p, _| !window.contains(p) || seen.contains(p));
            for p in seen {
                remembered.insert(*p, obs.step);
            }
        }
        self.entries.retain(|_, m| !m.is_empty());
        self.opponents.retain(|id, (p, _)| obs.opponents.contains_key(id) || !window.contains(p));
        for (id, (p, _)) in &obs.opponents {
            self.opponents.insert(*id, (*p, obs.step));
        }
    }

    pub fn forget_opponent(&mut self, id: PlayerId) {
        self.opponents.remove(&id);
    }

    pub fn positions(&self, kind: EntityKind) -> impl Iterator<Item = (GridPos, u64)> + '_ {
        self.entries.get(&kind).into_iter().flatten().map(|(p, s)| (*p, *s))
    }

    pub fn resources_of(&self, kind: ResourceKind) -> impl Iterator<Item = GridPos> + '_ {
        self.positions(EntityKind::Resource(kind)).map(|(p, _)| p)
    }

    /// Known resource cells of every kind.
    pub fn resource_map(&self) -> BTreeMap<GridPos, ResourceKind> {
        let mut out = BTreeMap::new();
        for (kind, cells) in &self.entries {
            if let EntityKind::Resource(k) = kind {
                for p in cells.keys() {
                    out.insert(*p, *k);
                }
            }
        }
        out
    }

    /// `{'yellow_box': [((13, 3), 'Step: 1087', 2), ...], 'player_1': [...]}`
    /// with kinds in `order`, coordinates ascending and the Manhattan distance
    /// from `from` last. Kinds with no entries are omitted.
    pub fn render(&self, order: &[EntityKind], from: GridPos) -> String {
        let entry = |p: GridPos, step: u64| {
            LiteralValue::Tuple(vec![
                LiteralValue::coord(p.x as i64, p.y as i64),
                LiteralValue::Str(format!("Step: {step}")),
                LiteralValue::Int(p.manhattan(from) as i64),
            ])
        };
        let mut map = Vec::new();
        for kind in order {
            if let Some(cells) = self.entries.get(kind).filter(|c| !c.is_empty()) {
                let items = cells.iter().map(|(p, s)| entry(*p, *s)).collect();
                map.push((kind.memory_key().to_string(), LiteralValue::List(items)));
            }
        }
        for (id, (p, s)) in &self.opponents {
            map.push((id.label(), LiteralValue::List(vec![entry(*p, *s)])));
        }
        LiteralValue::Map(map).to_string()
    }
}

/// One interaction as the focal agent experienced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub step: u64,
    pub opponent: PlayerId,
    pub own_inventory: Inventory,
    pub reward: f64,
    /// Filled in by the first ToM step.
    pub estimated_opponent: Option<Inventory>,
}

impl InteractionRecord {
    pub fn own_play(&self) -> ResourceKind {
        self.own_inventory.argmax()
    }

    pub fn opponent_play(&self) -> Option<ResourceKind> {
        self.estimated_opponent.as_ref().map(Inventory::argmax)
    }

    /// `{'your_inventory': {...}, 'rewards': 3.571, 'possible_opponent_inventory': {...}}`
    pub fn to_literal(&self) -> LiteralValue {
        let mut m = vec![
            ("your_inventory".to_string(), self.own_inventory.to_literal()),
            ("rewards".to_string(), LiteralValue::Real((self.reward * 1000.0).round() / 1000.0)),
        ];
        if let Some(est) = &self.estimated_opponent {
            m.push(("possible_opponent_inventory".to_string(), est.to_literal()));
        }
        LiteralValue::Map(m)
    }
}

pub fn history_literal(records: &[InteractionRecord]) -> String {
    LiteralValue::List(records.iter().map(InteractionRecord::to_literal).collect()).to_string()
}
