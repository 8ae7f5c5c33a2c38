//! Scripted background bots for every evaluation scenario.
//!
//! Bots are privileged: their controller reads the full world state. Their
//! strategic choices are small state machines over the interaction history;
//! embodiment is shared: collect the target kind up to the commitment level,
//! then find the nearest player and fire.

use crate::cooking::HeldItem;
use crate::error::{HmError, Result};
use crate::game::{derive_seed, ActContext, Controller, GameEvent, PlayerId, WorldState};
use crate::geometry::{AtomicAction, GridPos, Orientation};
use crate::layout::{Fixture, Layout};
use crate::planner::{beam_distance, bfs_path, compile_interact, path_actions, turn_actions, GridView};
use crate::substrate::{ResourceKind, SubstrateId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const BUILTIN_CATALOG: &str = include_str!("../data/scenarios.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum Behavior {
    Pure { kind: ResourceKind },
    BestResponse,
    FlipAfter2 { initial: ResourceKind },
    FlipAfter1 { initial: ResourceKind },
    Gullible,
    Cooperator,
    Defector,
    Grim { trigger: u32 },
    TitForTat,
    NoisyTitForTat { noise: f64 },
    CooperateThenDefect { switch_round: u32 },
    Corrigible { trigger: u32, noise: f64 },
    SkilledChef,
    SemiSkilledChef { error_prob: f64 },
    Unhelpful,
}

impl Behavior {
    pub fn is_cooking(&self) -> bool {
        matches!(self, Behavior::SkilledChef | Behavior::SemiSkilledChef { .. } | Behavior::Unhelpful)
    }

    pub fn is_pd(&self) -> bool {
        matches!(
            self,
            Behavior::Cooperator
                | Behavior::Defector
                | Behavior::Grim { .. }
                | Behavior::TitForTat
                | Behavior::NoisyTitForTat { .. }
                | Behavior::CooperateThenDefect { .. }
                | Behavior::Corrigible { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotSpec {
    pub substrate: SubstrateId,
    pub behavior: Behavior,
    /// Resources collected before seeking an interaction.
    pub commitment: u32,
    pub seed: u64,
}

impl BotSpec {
    pub fn new(substrate: SubstrateId, behavior: Behavior, commitment: u32, seed: u64) -> Result<Self> {
        if ![1, 3, 5].contains(&commitment) {
            return Err(HmError::Catalog(format!("commitment must be 1, 3 or 5, got {commitment}")));
        }
        let fits = match substrate {
            SubstrateId::Cooking => behavior.is_cooking(),
            SubstrateId::PdRepeated => behavior.is_pd(),
            _ => !behavior.is_cooking() && !behavior.is_pd(),
        };
        if !fits {
            return Err(HmError::Catalog(format!("behavior {behavior:?} is not valid for {substrate}")));
        }
        match behavior {
            Behavior::Pure { kind } | Behavior::FlipAfter1 { initial: kind } | Behavior::FlipAfter2 { initial: kind }
                if kind.set() != crate::substrate::ResourceSet::Rps =>
            {
                return Err(HmError::Catalog(format!("{kind:?} is not a rock-paper-scissors kind")));
            }
            Behavior::NoisyTitForTat { noise: p } | Behavior::Corrigible { noise: p, .. } | Behavior::SemiSkilledChef { error_prob: p }
                if !(0.0..=1.0).contains(&p) =>
            {
                return Err(HmError::Catalog(format!("probability {p} out of range")));
            }
            Behavior::Grim { trigger: 0 } | Behavior::Corrigible { trigger: 0, .. } | Behavior::CooperateThenDefect { switch_round: 0 } => {
                return Err(HmError::Catalog("trigger counts and switch rounds start at 1".into()));
            }
            _ => {}
        }
        Ok(Self { substrate, behavior, commitment, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotState {
    pub interactions: u32,
    /// Opponent plays, one per interaction.
    pub focal_plays: Vec<ResourceKind>,
    pub own_plays: Vec<ResourceKind>,
    pub focal_defections: u32,
    pub grim_fired: bool,
    pub persuaded: bool,
    pub target: ResourceKind,
    pub commitment: u32,
    /// Random pure kind used before any history exists.
    pub first_kind: ResourceKind,
    rng: ChaCha8Rng,
}

impl BotState {
    pub fn new(spec: &BotSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let kinds = spec.substrate.resource_kinds();
        let first_kind = kinds.choose(&mut rng).copied().unwrap_or(ResourceKind::Rock);
        Self {
            interactions: 0,
            focal_plays: Vec::new(),
            own_plays: Vec::new(),
            focal_defections: 0,
            grim_fired: false,
            persuaded: false,
            target: first_kind,
            commitment: spec.commitment,
            first_kind,
            rng,
        }
    }

    pub fn record_interaction(&mut self, own: ResourceKind, opponent: ResourceKind) {
        self.interactions += 1;
        self.own_plays.push(own);
        self.focal_plays.push(opponent);
        if opponent == ResourceKind::Defect {
            self.focal_defections += 1;
        }
    }
}

fn flip(kind: ResourceKind) -> ResourceKind {
    kind.counter().counter()
}

/// Next target kind and commitment for a rock-paper-scissors bot.
pub fn rws_next_target(spec: &BotSpec, st: &mut BotState) -> (ResourceKind, u32) {
    match spec.behavior {
        Behavior::Pure { kind } => (kind, spec.commitment),
        Behavior::BestResponse => match st.focal_plays.last() {
            Some(last) => (last.counter(), spec.commitment),
            None => (st.first_kind, spec.commitment),
        },
        Behavior::FlipAfter2 { initial } => {
            if st.interactions < 2 {
                (initial, spec.commitment)
            } else {
                (flip(initial), 5)
            }
        }
        Behavior::FlipAfter1 { initial } => {
            if st.interactions < 1 {
                (initial, spec.commitment)
            } else {
                (flip(initial), spec.commitment)
            }
        }
        Behavior::Gullible => {
            let mut counts: BTreeMap<ResourceKind, usize> = BTreeMap::new();
            for k in &st.focal_plays {
                *counts.entry(*k).or_default() += 1;
            }
            let Some(max) = counts.values().max().copied() else {
                return (st.first_kind, spec.commitment);
            };
            let tied: Vec<ResourceKind> = counts.iter().filter(|(_, n)| **n == max).map(|(k, _)| *k).collect();
            let pick = *tied.choose(&mut st.rng).expect("non-empty");
            (pick.counter(), spec.commitment)
        }
        _ => (st.target, spec.commitment),
    }
}

fn tit_for_tat(st: &BotState) -> ResourceKind {
    st.focal_plays.last().copied().unwrap_or(ResourceKind::Cooperate)
}

fn with_noise(play: ResourceKind, noise: f64, st: &mut BotState) -> ResourceKind {
    if play == ResourceKind::Cooperate && noise > 0.0 && st.rng.gen::<f64>() < noise {
        ResourceKind::Defect
    } else {
        play
    }
}

/// Next play for a prisoner's dilemma bot.
pub fn pd_next_play(spec: &BotSpec, st: &mut BotState) -> ResourceKind {
    use ResourceKind::{Cooperate as C, Defect as D};
    match spec.behavior {
        Behavior::Cooperator => C,
        Behavior::Defector => D,
        Behavior::Grim { trigger } => {
            if st.focal_defections >= trigger {
                st.grim_fired = true;
            }
            if st.grim_fired {
                D
            } else {
                C
            }
        }
        Behavior::TitForTat => tit_for_tat(st),
        Behavior::NoisyTitForTat { noise } => with_noise(tit_for_tat(st), noise, st),
        Behavior::CooperateThenDefect { switch_round } => {
            if st.interactions + 1 >= switch_round {
                D
            } else {
                C
            }
        }
        Behavior::Corrigible { trigger, noise } => {
            if st.focal_defections >= trigger {
                st.persuaded = true;
            }
            if st.persuaded {
                with_noise(tit_for_tat(st), noise, st)
            } else {
                D
            }
        }
        _ => st.target,
    }
}

/// Catalog entry for one mixture component.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MixEntry {
    pub weight: u32,
    pub behavior: String,
    pub kind: Option<String>,
    pub commitment: u32,
    pub trigger: Option<u32>,
    pub noise: Option<f64>,
    pub switch_round: Option<u32>,
    pub error_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScenarioDef {
    pub substrate: String,
    pub id: u32,
    pub description: String,
    pub bots: usize,
    pub mix: Vec<MixEntry>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScenarioCatalog {
    pub version: u32,
    pub scenario: Vec<ScenarioDef>,
}

fn need<T>(v: Option<T>, what: &str, behavior: &str) -> Result<T> {
    v.ok_or_else(|| HmError::Catalog(format!("behavior {behavior:?} needs {what:?}")))
}

impl MixEntry {
    fn resolve(&self, substrate: SubstrateId, rng: &mut ChaCha8Rng) -> Result<Behavior> {
        let b = self.behavior.as_str();
        let mut kind = || -> Result<ResourceKind> {
            let k = need(self.kind.as_deref(), "kind", b)?;
            if k == "random" {
                return Ok(*substrate.resource_kinds().choose(rng).expect("kinds"));
            }
            ResourceKind::from_word(k).ok_or_else(|| HmError::Catalog(format!("unknown kind {k:?}")))
        };
        Ok(match b {
            "pure" => Behavior::Pure { kind: kind()? },
            "best_response" => Behavior::BestResponse,
            "flip_after_2" => Behavior::FlipAfter2 { initial: kind()? },
            "flip_after_1" => Behavior::FlipAfter1 { initial: kind()? },
            "gullible" => Behavior::Gullible,
            "cooperator" => Behavior::Cooperator,
            "defector" => Behavior::Defector,
            "grim" => Behavior::Grim { trigger: need(self.trigger, "trigger", b)? },
            "tit_for_tat" => Behavior::TitForTat,
            "noisy_tit_for_tat" => Behavior::NoisyTitForTat { noise: need(self.noise, "noise", b)? },
            "cooperate_then_defect" => Behavior::CooperateThenDefect { switch_round: need(self.switch_round, "switch_round", b)? },
            "corrigible" => Behavior::Corrigible { trigger: need(self.trigger, "trigger", b)?, noise: self.noise.unwrap_or(0.0) },
            "skilled_chef" => Behavior::SkilledChef,
            "semi_skilled_chef" => Behavior::SemiSkilledChef { error_prob: need(self.error_prob, "error_prob", b)? },
            "unhelpful" => Behavior::Unhelpful,
            other => return Err(HmError::Catalog(format!("unknown behavior {other:?}"))),
        })
    }
}

impl ScenarioCatalog {
    pub fn parse(text: &str) -> Result<Self> {
        let cat: Self = toml::from_str(text).map_err(|e| HmError::Catalog(e.to_string()))?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CATALOG).expect("builtin catalog is valid")
    }

    /// Every scenario id of every substrate defined exactly once, with sane
    /// mixtures that resolve to valid bot specs.
    pub fn validate(&self) -> Result<()> {
        for s in SubstrateId::ALL {
            for id in 0..s.scenario_count() {
                let n = self.scenario.iter().filter(|d| d.substrate == s.as_str() && d.id == id).count();
                if n != 1 {
                    return Err(HmError::Catalog(format!("{s} scenario {id} defined {n} times")));
                }
            }
        }
        for d in &self.scenario {
            let s: SubstrateId = d.substrate.parse().map_err(|_| HmError::Catalog(format!("unknown substrate {:?}", d.substrate)))?;
            if d.id >= s.scenario_count() {
                return Err(HmError::Catalog(format!("{s} has no scenario {}", d.id)));
            }
            if d.bots + 1 != s.player_count() {
                return Err(HmError::Catalog(format!("{s} scenario {} needs {} bots", d.id, s.player_count() - 1)));
            }
            if d.mix.is_empty() || d.mix.iter().all(|m| m.weight == 0) {
                return Err(HmError::Catalog(format!("{s} scenario {} has an empty mixture", d.id)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for m in &d.mix {
                BotSpec::new(s, m.resolve(s, &mut rng)?, m.commitment, 0)?;
            }
        }
        Ok(())
    }

    pub fn get(&self, substrate: SubstrateId, id: u32) -> Result<&ScenarioDef> {
        self.scenario
            .iter()
            .find(|d| d.substrate == substrate.as_str() && d.id == id)
            .ok_or_else(|| HmError::UnknownScenario { substrate: substrate.to_string(), id })
    }

    /// Samples the background bots of a scenario.
    pub fn build(&self, substrate: SubstrateId, id: u32, seed: u64) -> Result<Vec<BotSpec>> {
        let def = self.get(substrate, id)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1000));
        let total: u32 = def.mix.iter().map(|m| m.weight).sum();
        (0..def.bots)
            .map(|i| {
                let mut draw = rng.gen_range(0..total);
                let entry = def
                    .mix
                    .iter()
                    .find(|m| {
                        if draw < m.weight {
                            true
                        } else {
                            draw -= m.weight;
                            false
                        }
                    })
                    .expect("draw below total weight");
                let behavior = entry.resolve(substrate, &mut rng)?;
                BotSpec::new(substrate, behavior, entry.commitment, derive_seed(seed, 2000 + i as u64))
            })
            .collect()
    }
}

/// Background bots for `(substrate, scenario_id)` from the built-in catalog.
pub fn build_scenario(substrate: SubstrateId, scenario_id: u32, seed: u64) -> Result<Vec<BotSpec>> {
    ScenarioCatalog::builtin().build(substrate, scenario_id, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChefRole {
    /// Fetches tomatoes and fills pots.
    Tomatoes,
    /// Fetches dishes, plates soup and delivers.
    Dishes,
}

fn nearest_adjacent_distance(view: &GridView, from: GridPos, target: GridPos) -> usize {
    bfs_path(view, from, |p| p.manhattan(target) == 1, |_| false).map_or(usize::MAX, |p| p.len())
}

/// The role a skilled chef takes on its side: whichever of tomato dispenser
/// and delivery location is closer to the pots.
pub fn chef_role(layout: &Layout, spawn: GridPos) -> ChefRole {
    let view = &GridView::from_layout(layout);
    let reachable = |p: GridPos| nearest_adjacent_distance(view, spawn, p) != usize::MAX;
    let pots: Vec<GridPos> = layout.fixtures_of(Fixture::Pot);
    let dist_to = |kind: Fixture| {
        layout
            .fixtures_of(kind)
            .into_iter()
            .filter(|p| reachable(*p))
            .flat_map(|f| {
                let stand = bfs_path(view, spawn, |p| p.manhattan(f) == 1, |_| false).and_then(|p| p.last().copied());
                pots.iter().filter_map(move |pot| stand.map(|s| nearest_adjacent_distance(view, s, *pot)))
            })
            .min()
            .unwrap_or(usize::MAX)
    };
    if dist_to(Fixture::TomatoDispenser) <= dist_to(Fixture::Delivery) {
        ChefRole::Tomatoes
    } else {
        ChefRole::Dishes
    }
}

/// Fixture the skilled chef wants to interact with next, if any.
fn chef_goal(world: &WorldState, p: PlayerId, role: ChefRole, view: &GridView) -> Option<GridPos> {
    let k = world.kitchen()?;
    let me = &world.players[p.0];
    let reachable = |target: GridPos| bfs_path(view, me.pos, |c| c.manhattan(target) == 1, |_| false).map(|path| path.len());
    let nearest = |kind: Fixture| {
        world.layout.fixtures_of(kind).into_iter().filter_map(|f| reachable(f).map(|d| (d, f))).min().map(|(_, f)| f)
    };
    let nearest_pot = |pred: &dyn Fn(&crate::cooking::Pot) -> bool| {
        k.pots.iter().filter(|pot| pred(pot)).filter_map(|pot| reachable(pot.pos).map(|d| (d, pot.pos))).min().map(|(_, f)| f)
    };
    let free_counter = || {
        world
            .layout
            .fixtures_of(Fixture::Counter)
            .into_iter()
            .filter(|c| !k.counter_items.contains_key(c))
            .filter_map(|f| reachable(f).map(|d| (d, f)))
            .min()
            .map(|(_, f)| f)
    };
    let fillable = |pot: &crate::cooking::Pot| !pot.is_full() && !pot.cooked;
    match (role, k.held[p.0]) {
        (_, HeldItem::SoupInDish) => nearest(Fixture::Delivery).or_else(free_counter),
        (ChefRole::Tomatoes, HeldItem::Nothing) => nearest_pot(&fillable).and(nearest(Fixture::TomatoDispenser)),
        (_, HeldItem::Tomato) => nearest_pot(&fillable).or_else(|| if role == ChefRole::Tomatoes { None } else { free_counter() }),
        (ChefRole::Tomatoes, HeldItem::Dish) => nearest_pot(&|pot| pot.cooked).or_else(free_counter),
        (ChefRole::Dishes, HeldItem::Nothing) => {
            nearest_pot(&|pot| pot.is_full() || pot.cooked).and(nearest(Fixture::DishDispenser))
        }
        (ChefRole::Dishes, HeldItem::Dish) => nearest_pot(&|pot| pot.cooked),
    }
}

/// Scripted cooking partner policy.
pub fn cooking_partner_policy(spec: &BotSpec, st: &mut BotState, ctx: &ActContext<'_>, role: ChefRole) -> AtomicAction {
    let error_prob = match spec.behavior {
        Behavior::Unhelpful => return AtomicAction::Noop,
        Behavior::SemiSkilledChef { error_prob } => error_prob,
        _ => 0.0,
    };
    let world = ctx.world;
    let me = &world.players[ctx.player.0];
    let view = GridView::from_layout(&world.layout);
    let intended = match chef_goal(world, ctx.player, role, &view) {
        Some(target) => compile_interact(&view, me.pos, me.orientation, target)
            .ok()
            .and_then(|a| a.first().copied())
            .unwrap_or(AtomicAction::Noop),
        None => AtomicAction::Noop,
    };
    if error_prob > 0.0 && st.rng.gen::<f64>() < error_prob {
        AtomicAction::Noop
    } else {
        intended
    }
}

/// Movement toward a set of goal cells for a matrix bot: avoid resources of
/// other kinds and other players when possible.
fn matrix_step(world: &WorldState, me: PlayerId, goal: impl Fn(GridPos) -> bool, keep: Option<ResourceKind>) -> Option<AtomicAction> {
    let view = GridView::from_layout(&world.layout);
    let m = world.matrix()?;
    let pos = world.players[me.0].pos;
    let facing = world.players[me.0].orientation;
    let occupied = |p: GridPos| world.player_at(p).is_some_and(|o| o != me);
    let strict = |p: GridPos| occupied(p) || m.present_resource(p).is_some_and(|k| Some(k) != keep);
    let path = bfs_path(&view, pos, &goal, strict).or_else(|| bfs_path(&view, pos, &goal, occupied))?;
    (path.len() > 1).then(|| path_actions(&path[..2], facing)[0])
}

fn matrix_policy(world: &WorldState, me: PlayerId, st: &BotState) -> AtomicAction {
    let Some(m) = world.matrix() else {
        return AtomicAction::Noop;
    };
    let state = &world.players[me.0];
    let inv = &m.inventories[me.0];
    if inv.count(st.target) < 1 + st.commitment {
        let target = st.target;
        let step = matrix_step(world, me, |p| m.present_resource(p) == Some(target), Some(target))
            // all regrowing: wait beside the nearest patch cell
            .or_else(|| {
                let nearest = m.resources.iter().filter(|(_, c)| c.kind == target).map(|(p, _)| *p).min_by_key(|p| p.manhattan(state.pos))?;
                matrix_step(world, me, |p| p.manhattan(nearest) <= 1, Some(target))
            });
        return step.unwrap_or(AtomicAction::Noop);
    }
    let view = GridView::from_layout(&world.layout);
    let others: Vec<GridPos> = (0..world.player_count())
        .filter(|i| *i != me.0 && world.players[*i].is_alive())
        .map(|i| world.players[i].pos)
        .collect();
    if others.is_empty() {
        return AtomicAction::Noop;
    }
    let beam = m.rules.beam_length;
    if others.iter().any(|o| beam_distance(&view, state.pos, state.orientation, *o, beam).is_some()) {
        return AtomicAction::FireBeam;
    }
    for o in &others {
        for dir in Orientation::ALL {
            if beam_distance(&view, state.pos, dir, *o, beam).is_some() {
                return turn_actions(state.orientation, dir)[0];
            }
        }
    }
    let in_line = |p: GridPos| others.iter().any(|o| Orientation::ALL.iter().any(|d| beam_distance(&view, p, *d, *o, beam).is_some()));
    matrix_step(world, me, in_line, None).unwrap_or(AtomicAction::TurnRight)
}

/// Controller wrapping a bot spec.
pub struct ScriptedBot {
    pub spec: BotSpec,
    pub state: BotState,
    started: bool,
    role: Option<ChefRole>,
}

impl ScriptedBot {
    pub fn new(spec: BotSpec) -> Self {
        let state = BotState::new(&spec);
        Self { spec, state, started: false, role: None }
    }

    fn retarget(&mut self) {
        if self.spec.substrate == SubstrateId::PdRepeated {
            self.state.target = pd_next_play(&self.spec, &mut self.state);
        } else if self.spec.substrate.is_matrix() {
            let (k, c) = rws_next_target(&self.spec, &mut self.state);
            self.state.target = k;
            self.state.commitment = c;
        }
    }
}

impl Controller for ScriptedBot {
    fn name(&self) -> String {
        let b = serde_json::to_value(self.spec.behavior).ok();
        let tag = b.as_ref().and_then(|v| v.get("behavior")).and_then(|v| v.as_str()).unwrap_or("bot");
        format!("bot:{tag}")
    }

    fn act(&mut self, ctx: &ActContext<'_>) -> Result<AtomicAction> {
        if !self.started {
            self.started = true;
            if self.spec.substrate == SubstrateId::Cooking {
                self.role = Some(chef_role(ctx.layout, ctx.world.players[ctx.player.0].pos));
            }
            self.retarget();
        }
        for e in ctx.events {
            if let GameEvent::Interaction { shooter, target, shooter_inventory, target_inventory, .. } = e {
                let (own, other) = if *shooter == ctx.player {
                    (shooter_inventory, target_inventory)
                } else if *target == ctx.player {
                    (target_inventory, shooter_inventory)
                } else {
                    continue;
                };
                self.state.record_interaction(own.argmax(), other.argmax());
                self.retarget();
            }
        }
        if !ctx.world.players[ctx.player.0].is_alive() {
            return Ok(AtomicAction::Noop);
        }
        Ok(match self.role {
            Some(role) => cooking_partner_policy(&self.spec, &mut self.state, ctx, role),
            None => matrix_policy(ctx.world, ctx.player, &self.state),
        })
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(&self.spec).unwrap_or(serde_json::Value::Null)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ResourceKind::*;

    fn spec(substrate: SubstrateId, behavior: Behavior, commitment: u32) -> BotSpec {
        BotSpec::new(substrate, behavior, commitment, 7).unwrap()
    }

    #[test]
    fn best_response_counters_last_focal_play() {
        let s = spec(SubstrateId::RwsRepeated, Behavior::BestResponse, 5);
        let mut st = BotState::new(&s);
        st.record_interaction(Scissors, Rock);
        assert_eq!(rws_next_target(&s, &mut st), (Paper, 5));
    }

    #[test]
    fn flip_after_two_goes_to_best_response_of_best_response() {
        let s = spec(SubstrateId::RwsRepeated, Behavior::FlipAfter2 { initial: Rock }, 1);
        let mut st = BotState::new(&s);
        let mut plays = Vec::new();
        for _ in 0..4 {
            let (k, c) = rws_next_target(&s, &mut st);
            plays.push((k, c));
            st.record_interaction(k, Paper);
        }
        assert_eq!(plays, vec![(Rock, 1), (Rock, 1), (Scissors, 5), (Scissors, 5)]);
    }

    #[test]
    fn flip_after_one_keeps_flipped_kind() {
        let s = spec(SubstrateId::RwsRepeated, Behavior::FlipAfter1 { initial: Paper }, 5);
        let mut st = BotState::new(&s);
        assert_eq!(rws_next_target(&s, &mut st).0, Paper);
        for _ in 0..3 {
            st.record_interaction(Paper, Rock);
            assert_eq!(rws_next_target(&s, &mut st).0, Rock);
        }
    }

    #[test]
    fn pure_scissors_ignores_history() {
        let s = spec(SubstrateId::RwsRepeated, Behavior::Pure { kind: Scissors }, 5);
        let mut st = BotState::new(&s);
        st.record_interaction(Scissors, Rock);
        assert_eq!(rws_next_target(&s, &mut st), (Scissors, 5));
    }

    #[test]
    fn gullible_counters_most_frequent() {
        let s = spec(SubstrateId::RwsRepeated, Behavior::Gullible, 3);
        let mut st = BotState::new(&s);
        st.record_interaction(Rock, Scissors);
        st.record_interaction(Rock, Scissors);
        st.record_interaction(Rock, Paper);
        assert_eq!(rws_next_target(&s, &mut st).0, Rock);
    }

    #[test]
    fn tit_for_tat_and_grim() {
        let tft = spec(SubstrateId::PdRepeated, Behavior::TitForTat, 3);
        let mut st = BotState::new(&tft);
        assert_eq!(pd_next_play(&tft, &mut st), Cooperate);
        st.record_interaction(Cooperate, Defect);
        assert_eq!(pd_next_play(&tft, &mut st), Defect);

        let grim = spec(SubstrateId::PdRepeated, Behavior::Grim { trigger: 1 }, 3);
        let mut st = BotState::new(&grim);
        assert_eq!(pd_next_play(&grim, &mut st), Cooperate);
        st.record_interaction(Cooperate, Defect);
        for _ in 0..5 {
            assert_eq!(pd_next_play(&grim, &mut st), Defect);
            st.record_interaction(Defect, Cooperate);
        }
    }

    #[test]
    fn cooperate_then_defect_switches_at_round() {
        let s = spec(SubstrateId::PdRepeated, Behavior::CooperateThenDefect { switch_round: 5 }, 3);
        let mut st = BotState::new(&s);
        let mut plays = Vec::new();
        for _ in 0..6 {
            let p = pd_next_play(&s, &mut st);
            plays.push(p);
            st.record_interaction(p, Cooperate);
        }
        assert_eq!(plays, vec![Cooperate, Cooperate, Cooperate, Cooperate, Defect, Defect]);
    }

    #[test]
    fn corrigible_needs_two_punishments() {
        let s = spec(SubstrateId::PdRepeated, Behavior::Corrigible { trigger: 2, noise: 0.0 }, 3);
        let mut st = BotState::new(&s);
        assert_eq!(pd_next_play(&s, &mut st), Defect);
        st.record_interaction(Defect, Defect);
        assert_eq!(pd_next_play(&s, &mut st), Defect);
        st.record_interaction(Defect, Defect);
        assert_eq!(pd_next_play(&s, &mut st), Defect); // tit-for-tat of the last defection
        st.record_interaction(Defect, Cooperate);
        assert_eq!(pd_next_play(&s, &mut st), Cooperate);
        assert!(st.persuaded);
    }

    #[test]
    fn catalog_examples() {
        let bots = build_scenario(SubstrateId::RwsRepeated, 6, 11).unwrap();
        assert_eq!(bots.len(), 1);
        assert_eq!((bots[0].behavior, bots[0].commitment), (Behavior::Pure { kind: Rock }, 5));
        let bots = build_scenario(SubstrateId::RwsArena, 5, 11).unwrap();
        assert_eq!(bots.len(), 7);
        assert!(bots.iter().all(|b| b.behavior == Behavior::Pure { kind: Paper }));
        assert!(matches!(build_scenario(SubstrateId::RwsRepeated, 9, 0), Err(HmError::UnknownScenario { .. })));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BotSpec::new(SubstrateId::RwsRepeated, Behavior::Pure { kind: Rock }, 4, 0).is_err());
        assert!(BotSpec::new(SubstrateId::RwsRepeated, Behavior::TitForTat, 3, 0).is_err());
        assert!(BotSpec::new(SubstrateId::PdRepeated, Behavior::Grim { trigger: 0 }, 3, 0).is_err());
    }

    #[test]
    fn chef_roles_follow_the_kitchen_asymmetry() {
        let layout = Layout::builtin(SubstrateId::Cooking);
        assert_eq!(chef_role(&layout, GridPos::new(2, 3)), ChefRole::Tomatoes);
        assert_eq!(chef_role(&layout, GridPos::new(6, 3)), ChefRole::Dishes);
    }
}
