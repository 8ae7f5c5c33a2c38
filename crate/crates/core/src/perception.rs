//! Egocentric observations and their prompt-visible text form.
//!
//! The text is a comma-separated list of `Label: literal` sections:
//!
//! ```text
//! Player Position: {'player_0-S': [(21, 4)]}, Observable Yellow Box Locations: [(13, 10), (14, 11)], Observable Blue Box Locations: [], Observable Purple Box Locations: [(13, 11), (15, 11)]
//! ```
//!
//! Entity lists always appear, in a fixed per-substrate order. Opponents,
//! inventory, held item, pots, counter items and respawn status are appended
//! only when present. The step is not part of the text.

use crate::cooking::HeldItem;
use crate::error::{HmError, Result};
use crate::game::{PlayerId, WorldState};
use crate::geometry::{Dims, GridPos, Orientation};
use crate::layout::Fixture;
use crate::literal::{parse_literal, LiteralValue};
use crate::substrate::{Inventory, ResourceKind, SubstrateId, WindowSpec};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Resource(ResourceKind),
    Fixture(Fixture),
}

impl EntityKind {
    /// Kinds listed in observations for a substrate, in serialization order.
    pub fn for_substrate(s: SubstrateId) -> Vec<EntityKind> {
        use ResourceKind::*;
        match s {
            SubstrateId::RwsRepeated | SubstrateId::RwsArena => {
                vec![EntityKind::Resource(Rock), EntityKind::Resource(Scissors), EntityKind::Resource(Paper)]
            }
            SubstrateId::PdRepeated => vec![EntityKind::Resource(Cooperate), EntityKind::Resource(Defect)],
            SubstrateId::Cooking => [
                Fixture::TomatoDispenser,
                Fixture::DishDispenser,
                Fixture::Pot,
                Fixture::Delivery,
                Fixture::Counter,
            ]
            .into_iter()
            .map(EntityKind::Fixture)
            .collect(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EntityKind::Resource(k) => k.entity_label(),
            EntityKind::Fixture(Fixture::TomatoDispenser) => "Tomato Dispenser",
            EntityKind::Fixture(Fixture::DishDispenser) => "Dish Dispenser",
            EntityKind::Fixture(Fixture::Pot) => "Pot",
            EntityKind::Fixture(Fixture::Delivery) => "Delivery",
            EntityKind::Fixture(Fixture::Counter) => "Counter",
        }
    }

    pub fn memory_key(self) -> &'static str {
        match self {
            EntityKind::Resource(k) => k.memory_key(),
            EntityKind::Fixture(Fixture::TomatoDispenser) => "tomato_dispenser",
            EntityKind::Fixture(Fixture::DishDispenser) => "dish_dispenser",
            EntityKind::Fixture(Fixture::Pot) => "pot",
            EntityKind::Fixture(Fixture::Delivery) => "delivery",
            EntityKind::Fixture(Fixture::Counter) => "counter",
        }
    }

    fn section_label(self) -> String {
        format!("Observable {} Locations", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotView {
    pub pos: GridPos,
    pub tomatoes: u8,
    pub cooked: bool,
}

impl PotView {
    pub fn status(&self) -> &'static str {
        if self.cooked {
            "cooked"
        } else if self.tomatoes >= 3 {
            "cooking"
        } else {
            "filling"
        }
    }

    pub fn is_full(&self) -> bool {
        self.tomatoes >= 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredObservation {
    pub substrate: SubstrateId,
    pub player: PlayerId,
    pub step: u64,
    /// `None` while respawning.
    pub pose: Option<(GridPos, Orientation)>,
    /// Every kind of the substrate is a key, possibly with an empty set.
    pub entities: BTreeMap<EntityKind, BTreeSet<GridPos>>,
    pub opponents: BTreeMap<PlayerId, (GridPos, Orientation)>,
    pub inventory: Option<Inventory>,
    pub held: Option<HeldItem>,
    pub pots: Vec<PotView>,
    pub counter_items: BTreeMap<GridPos, HeldItem>,
}

impl StructuredObservation {
    pub fn empty(substrate: SubstrateId, player: PlayerId, step: u64) -> Self {
        Self {
            substrate,
            player,
            step,
            pose: None,
            entities: EntityKind::for_substrate(substrate).into_iter().map(|k| (k, BTreeSet::new())).collect(),
            opponents: BTreeMap::new(),
            inventory: None,
            held: None,
            pots: Vec::new(),
            counter_items: BTreeMap::new(),
        }
    }

    pub fn is_respawning(&self) -> bool {
        self.pose.is_none()
    }

    pub fn position(&self) -> Option<GridPos> {
        self.pose.map(|(p, _)| p)
    }

    pub fn visible(&self, kind: EntityKind) -> impl Iterator<Item = GridPos> + '_ {
        self.entities.get(&kind).into_iter().flatten().copied()
    }

    pub fn pot_at(&self, p: GridPos) -> Option<&PotView> {
        self.pots.iter().find(|v| v.pos == p)
    }
}

/// In-bounds cells of the egocentric window for a pose.
pub fn window_cells(window: WindowSpec, dims: Dims, pos: GridPos, facing: Orientation) -> Vec<GridPos> {
    let (fx, fy) = facing.delta();
    let (rx, ry) = facing.right().delta();
    let mut cells = Vec::new();
    for a in -window.behind..=window.ahead {
        for l in -window.side..=window.side {
            let p = GridPos::new(pos.x + a * fx + l * rx, pos.y + a * fy + l * ry);
            if dims.contains(p) {
                cells.push(p);
            }
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalCell {
    Wall,
    Floor,
    Entity(EntityKind),
    Player(PlayerId),
}

/// Egocentric view as rows from farthest-ahead to behind, columns left to
/// right. Cells beyond the map boundary read as walls.
pub fn local_view(world: &WorldState, p: PlayerId) -> Vec<Vec<LocalCell>> {
    let window = world.substrate.window();
    let me = &world.players[p.0];
    if !me.is_alive() {
        return Vec::new();
    }
    let (fx, fy) = me.orientation.delta();
    let (rx, ry) = me.orientation.right().delta();
    (-window.behind..=window.ahead)
        .rev()
        .map(|a| {
            (-window.side..=window.side)
                .map(|l| {
                    let c = GridPos::new(me.pos.x + a * fx + l * rx, me.pos.y + a * fy + l * ry);
                    if world.layout.is_wall(c) {
                        LocalCell::Wall
                    } else if let Some(other) = world.player_at(c) {
                        LocalCell::Player(other)
                    } else if let Some(k) = world.matrix().and_then(|m| m.present_resource(c)) {
                        LocalCell::Entity(EntityKind::Resource(k))
                    } else if let Some(f) = world.layout.fixtures.get(&c) {
                        LocalCell::Entity(EntityKind::Fixture(*f))
                    } else {
                        LocalCell::Floor
                    }
                })
                .collect()
        })
        .collect()
}

/// The observation function: what `p` sees of `world`.
pub fn observe(world: &WorldState, p: PlayerId) -> StructuredObservation {
    let mut obs = StructuredObservation::empty(world.substrate, p, world.step);
    obs.inventory = world.inventory(p).cloned();
    obs.held = world.kitchen().map(|k| k.held[p.0]);
    let me = &world.players[p.0];
    if !me.is_alive() {
        return obs;
    }
    obs.pose = Some((me.pos, me.orientation));
    for c in window_cells(world.substrate.window(), world.layout.dims, me.pos, me.orientation) {
        if let Some(other) = world.player_at(c).filter(|o| *o != p) {
            obs.opponents.insert(other, (c, world.players[other.0].orientation));
        }
        if let Some(k) = world.matrix().and_then(|m| m.present_resource(c)) {
            obs.entities.entry(EntityKind::Resource(k)).or_default().insert(c);
        }
        if let Some(f) = world.layout.fixtures.get(&c) {
            obs.entities.entry(EntityKind::Fixture(*f)).or_default().insert(c);
        }
        if let Some(k) = world.kitchen() {
            if let Some(pot) = k.pot_at(c) {
                obs.pots.push(PotView { pos: c, tomatoes: pot.tomatoes, cooked: pot.cooked });
            }
            if let Some(item) = k.counter_items.get(&c) {
                obs.counter_items.insert(c, *item);
            }
        }
    }
    obs.pots.sort_by_key(|v| v.pos);
    obs
}

fn coord_list(cells: impl IntoIterator<Item = GridPos>) -> String {
    let parts: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn pose_key(p: PlayerId, o: Orientation) -> String {
    format!("{p}-{o}")
}

pub fn serialize_observation(obs: &StructuredObservation) -> String {
    let mut sections = Vec::new();
    let position = match obs.pose {
        Some((pos, o)) => format!("{{'{}': [{pos}]}}", pose_key(obs.player, o)),
        None => "{}".to_string(),
    };
    sections.push(format!("Player Position: {position}"));
    for kind in EntityKind::for_substrate(obs.substrate) {
        sections.push(format!("{}: {}", kind.section_label(), coord_list(obs.visible(kind))));
    }
    if !obs.opponents.is_empty() {
        let parts: Vec<String> =
            obs.opponents.iter().map(|(id, (pos, o))| format!("'{}': [{pos}]", pose_key(*id, *o))).collect();
        sections.push(format!("Observable Opponent Locations: {{{}}}", parts.join(", ")));
    }
    if let Some(inv) = &obs.inventory {
        sections.push(format!("Inventory: {inv}"));
    }
    if let Some(h) = obs.held {
        sections.push(format!("Held Item: '{}'", h.label()));
    }
    if !obs.pots.is_empty() {
        let parts: Vec<String> =
            obs.pots.iter().map(|v| format!("({}, {}, '{}')", v.pos, v.tomatoes, v.status())).collect();
        sections.push(format!("Pots: [{}]", parts.join(", ")));
    }
    if !obs.counter_items.is_empty() {
        let parts: Vec<String> = obs.counter_items.iter().map(|(p, h)| format!("({p}, '{}')", h.label())).collect();
        sections.push(format!("Counter Items: [{}]", parts.join(", ")));
    }
    if obs.pose.is_none() {
        sections.push("Status: 'respawning'".to_string());
    }
    sections.join(", ")
}

fn obs_err(msg: impl Into<String>) -> HmError {
    HmError::Observation(msg.into())
}

fn to_pos(v: &LiteralValue) -> Result<GridPos> {
    let (x, y) = v.as_coord().ok_or_else(|| obs_err(format!("expected a coordinate, found {v}")))?;
    Ok(GridPos::new(x as i32, y as i32))
}

fn parse_pose_key(key: &str) -> Result<(PlayerId, Orientation)> {
    let (id, o) = key.rsplit_once('-').ok_or_else(|| obs_err(format!("bad pose key {key:?}")))?;
    let id = PlayerId::from_label(id).ok_or_else(|| obs_err(format!("bad player label {id:?}")))?;
    let mut chars = o.chars();
    let o = match (chars.next().and_then(Orientation::from_letter), chars.next()) {
        (Some(o), None) => o,
        _ => return Err(obs_err(format!("bad orientation in {key:?}"))),
    };
    Ok((id, o))
}

fn single_pose(v: &LiteralValue) -> Result<Option<(PlayerId, GridPos, Orientation)>> {
    let map = v.as_map().ok_or_else(|| obs_err("pose section must be a map"))?;
    match map {
        [] => Ok(None),
        [(key, cells)] => {
            let (id, o) = parse_pose_key(key)?;
            match cells.as_seq() {
                Some([c]) => Ok(Some((id, to_pos(c)?, o))),
                _ => Err(obs_err(format!("pose {key:?} must list exactly one coordinate"))),
            }
        }
        _ => Err(obs_err("player position lists more than one player")),
    }
}

/// Splits observation text into `(label, value text)` sections.
fn split_sections<'a>(text: &'a str, labels: &[String]) -> Result<Vec<(String, &'a str)>> {
    let mut starts: Vec<(usize, &String)> = Vec::new();
    for label in labels {
        let needle = format!("{label}: ");
        let mut from = 0;
        while let Some(i) = text[from..].find(&needle) {
            let at = from + i;
            if at == 0 || text[..at].ends_with(", ") {
                starts.push((at, label));
            }
            from = at + needle.len();
        }
    }
    starts.sort();
    if starts.first().map(|(i, _)| *i) != Some(0) {
        return Err(obs_err("observation must start with a known section"));
    }
    let mut out = Vec::new();
    for (n, (at, label)) in starts.iter().enumerate() {
        let value_start = at + label.len() + 2;
        let value_end = match starts.get(n + 1) {
            Some((next, _)) => next - 2,
            None => text.len(),
        };
        if value_end < value_start {
            return Err(obs_err(format!("empty section {label:?}")));
        }
        out.push(((*label).clone(), &text[value_start..value_end]));
    }
    Ok(out)
}

/// Inverse of [`serialize_observation`]. The step is not carried by the text
/// and is supplied by the caller.
pub fn parse_observation(text: &str, substrate: SubstrateId, player: PlayerId, step: u64) -> Result<StructuredObservation> {
    let kinds = EntityKind::for_substrate(substrate);
    let mut labels: Vec<String> = vec!["Player Position".into()];
    labels.extend(kinds.iter().map(|k| k.section_label()));
    labels.extend(
        ["Observable Opponent Locations", "Inventory", "Held Item", "Pots", "Counter Items", "Status"].map(String::from),
    );
    let mut obs = StructuredObservation::empty(substrate, player, step);
    let mut respawning = false;
    let mut seen = BTreeSet::new();
    for (label, raw) in split_sections(text, &labels)? {
        if !seen.insert(label.clone()) {
            return Err(obs_err(format!("section {label:?} appears twice")));
        }
        let v = parse_literal(raw)?;
        match label.as_str() {
            "Player Position" => {
                if let Some((id, pos, o)) = single_pose(&v)? {
                    if id != player {
                        return Err(obs_err(format!("observation belongs to {id}, expected {player}")));
                    }
                    obs.pose = Some((pos, o));
                }
            }
            "Observable Opponent Locations" => {
                for (key, cells) in v.as_map().ok_or_else(|| obs_err("opponent section must be a map"))? {
                    let (id, o) = parse_pose_key(key)?;
                    let pos = match cells.as_seq() {
                        Some([c]) => to_pos(c)?,
                        _ => return Err(obs_err(format!("opponent {key:?} must list one coordinate"))),
                    };
                    obs.opponents.insert(id, (pos, o));
                }
            }
            "Inventory" => {
                let set = substrate.resource_set().ok_or_else(|| obs_err("inventory on a substrate without resources"))?;
                obs.inventory = Some(Inventory::from_literal(set, &v)?);
            }
            "Held Item" => {
                let s = v.as_str().ok_or_else(|| obs_err("held item must be a string"))?;
                obs.held = Some(HeldItem::from_label(s).ok_or_else(|| obs_err(format!("unknown held item {s:?}")))?);
            }
            "Pots" => {
                for item in v.as_seq().ok_or_else(|| obs_err("pots must be a list"))? {
                    match item.as_seq() {
                        Some([pos, n, status]) => {
                            let tomatoes = n.as_i64().filter(|n| (0..=3).contains(n)).ok_or_else(|| obs_err("bad pot count"))? as u8;
                            let cooked = match status.as_str() {
                                Some("cooked") => true,
                                Some("cooking") | Some("filling") => false,
                                _ => return Err(obs_err(format!("bad pot status {status}"))),
                            };
                            obs.pots.push(PotView { pos: to_pos(pos)?, tomatoes, cooked });
                        }
                        _ => return Err(obs_err(format!("bad pot entry {item}"))),
                    }
                }
            }
            "Counter Items" => {
                for item in v.as_seq().ok_or_else(|| obs_err("counter items must be a list"))? {
                    match item.as_seq() {
                        Some([pos, label]) => {
                            let h = label.as_str().and_then(HeldItem::from_label).ok_or_else(|| obs_err("bad counter item"))?;
                            obs.counter_items.insert(to_pos(pos)?, h);
                        }
                        _ => return Err(obs_err(format!("bad counter entry {item}"))),
                    }
                }
            }
            "Status" => respawning = v.as_str() == Some("respawning"),
            _ => {
                let kind = kinds.iter().find(|k| k.section_label() == label).expect("label list built from kinds");
                let cells = v.as_seq().ok_or_else(|| obs_err(format!("{label} must be a list")))?;
                let set = obs.entities.entry(*kind).or_default();
                for c in cells {
                    set.insert(to_pos(c)?);
                }
            }
        }
    }
    if respawning != obs.pose.is_none() {
        return Err(obs_err("respawn status disagrees with player position"));
    }
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AtomicAction;

    #[test]
    fn paper_example_string() {
        let mut obs = StructuredObservation::empty(SubstrateId::RwsRepeated, PlayerId(0), 0);
        obs.pose = Some((GridPos::new(21, 4), Orientation::S));
        obs.entities.insert(EntityKind::Resource(ResourceKind::Rock), [GridPos::new(13, 10), GridPos::new(14, 11)].into());
        obs.entities.insert(EntityKind::Resource(ResourceKind::Paper), [GridPos::new(13, 11), GridPos::new(15, 11)].into());
        let text = serialize_observation(&obs);
        assert_eq!(
            text,
            "Player Position: {'player_0-S': [(21, 4)]}, Observable Yellow Box Locations: [(13, 10), (14, 11)], \
             Observable Blue Box Locations: [], Observable Purple Box Locations: [(13, 11), (15, 11)]"
        );
        assert_eq!(parse_observation(&text, SubstrateId::RwsRepeated, PlayerId(0), 0).unwrap(), obs);
    }

    #[test]
    fn empty_window_lists_are_empty() {
        let mut obs = StructuredObservation::empty(SubstrateId::PdRepeated, PlayerId(1), 3);
        obs.pose = Some((GridPos::new(2, 2), Orientation::E));
        assert_eq!(
            serialize_observation(&obs),
            "Player Position: {'player_1-E': [(2, 2)]}, Observable Green Box Locations: [], Observable Red Box Locations: []"
        );
    }

    #[test]
    fn window_is_five_by_five_in_open_space() {
        let w = WorldState::builtin(SubstrateId::RwsRepeated, 10, 0).unwrap();
        let cells = window_cells(SubstrateId::RwsRepeated.window(), w.layout.dims, GridPos::new(11, 7), Orientation::S);
        assert_eq!(cells.len(), 25);
        assert!(cells.contains(&GridPos::new(11, 10)));
        assert!(cells.contains(&GridPos::new(11, 6)));
        assert!(!cells.contains(&GridPos::new(11, 5)));
        assert!(cells.contains(&GridPos::new(9, 7)) && cells.contains(&GridPos::new(13, 7)));
    }

    #[test]
    fn arena_window_is_skewed_forward() {
        let cells = window_cells(SubstrateId::RwsArena.window(), Dims { width: 100, height: 100 }, GridPos::new(50, 50), Orientation::N);
        assert_eq!(cells.len(), 121);
        assert!(cells.contains(&GridPos::new(50, 41)));
        assert!(cells.contains(&GridPos::new(50, 51)));
        assert!(!cells.contains(&GridPos::new(50, 52)));
    }

    #[test]
    fn corner_view_pads_with_walls() {
        let mut w = WorldState::builtin(SubstrateId::RwsRepeated, 10, 0).unwrap();
        w.players[0].pos = GridPos::new(1, 1);
        w.players[0].orientation = Orientation::N;
        let view = local_view(&w, PlayerId(0));
        assert_eq!(view.len(), 5);
        assert!(view[0].iter().all(|c| *c == LocalCell::Wall));
        assert_eq!(view[3][0], LocalCell::Wall);
    }

    #[test]
    fn observation_round_trips_from_live_worlds() {
        for s in SubstrateId::ALL {
            let mut w = WorldState::builtin(s, 40, 5).unwrap();
            for t in 0..30 {
                let joint: Vec<AtomicAction> =
                    (0..w.player_count()).map(|i| AtomicAction::ALL[(t * 3 + i * 5) % 6]).collect();
                w.step(&joint).unwrap();
                for i in 0..w.player_count() {
                    let obs = w.observe(PlayerId(i));
                    let text = serialize_observation(&obs);
                    let back = parse_observation(&text, s, PlayerId(i), obs.step).unwrap();
                    assert_eq!(back, obs, "{text}");
                }
            }
        }
    }

    #[test]
    fn cooking_sections() {
        let w = WorldState::builtin(SubstrateId::Cooking, 10, 0).unwrap();
        let text = serialize_observation(&w.observe(PlayerId(0)));
        assert!(text.contains("Held Item: 'nothing'"), "{text}");
        assert!(text.contains("Pots: [((4, 2), 0, 'filling'), ((4, 4), 0, 'filling')]"), "{text}");
    }

    #[test]
    fn respawning_observation() {
        let mut obs = StructuredObservation::empty(SubstrateId::RwsRepeated, PlayerId(0), 7);
        obs.inventory = Some(Inventory::rps(1, 1, 1));
        let text = serialize_observation(&obs);
        assert!(text.ends_with("Status: 'respawning'"));
        assert_eq!(parse_observation(&text, SubstrateId::RwsRepeated, PlayerId(0), 7).unwrap(), obs);
    }
}
