//! Partially observable Markov game engine: world state, simultaneous
//! joint-action stepping and the seeded episode loop.

use crate::cooking::{CookingEvent, KitchenState, DELIVERY_REWARD};
use crate::error::{HmError, Result};
use crate::geometry::{AtomicAction, GridPos, Orientation};
use crate::layout::Layout;
use crate::matrix::{fire_interaction, MatrixRules, MatrixWorld};
use crate::perception::{observe, StructuredObservation};
use crate::reasoner::ReasonerTrace;
use crate::substrate::{Inventory, ResourceKind, SubstrateId};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_MAX_STEPS: u64 = 1200;
pub const COOK_DURATION: u32 = 20;
pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn label(self) -> String {
        format!("player_{}", self.0)
    }

    pub fn from_label(s: &str) -> Option<Self> {
        s.trim().strip_prefix("player_")?.parse().ok().map(PlayerId)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player_{}", self.0)
    }
}

/// Independent seed for stream `stream` of a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_add(1));
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    Interaction {
        step: u64,
        shooter: PlayerId,
        target: PlayerId,
        shooter_inventory: Inventory,
        target_inventory: Inventory,
        shooter_reward: f64,
        target_reward: f64,
    },
    Pickup {
        player: PlayerId,
        kind: ResourceKind,
        pos: GridPos,
    },
    Respawn {
        player: PlayerId,
        pos: GridPos,
    },
    Cooking {
        player: PlayerId,
        event: CookingEvent,
        target: GridPos,
    },
}

impl GameEvent {
    pub fn involves(&self, p: PlayerId) -> bool {
        match self {
            GameEvent::Interaction { shooter, target, .. } => *shooter == p || *target == p,
            GameEvent::Pickup { player, .. } | GameEvent::Respawn { player, .. } | GameEvent::Cooking { player, .. } => {
                *player == p
            }
        }
    }
}

/// One player's side of an interaction, as that player experienced it.
#[derive(Debug, Clone, PartialEq)]
pub struct OwnInteraction {
    pub step: u64,
    pub opponent: PlayerId,
    pub own_inventory: Inventory,
    pub reward: f64,
}

/// Extracts `p`'s view of an interaction event: own inventory and reward only.
pub fn own_interaction(event: &GameEvent, p: PlayerId) -> Option<OwnInteraction> {
    match event {
        GameEvent::Interaction { step, shooter, target, shooter_inventory, target_inventory, shooter_reward, target_reward } => {
            if *shooter == p {
                Some(OwnInteraction { step: *step, opponent: *target, own_inventory: shooter_inventory.clone(), reward: *shooter_reward })
            } else if *target == p {
                Some(OwnInteraction { step: *step, opponent: *shooter, own_inventory: target_inventory.clone(), reward: *target_reward })
            } else {
                None
            }
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub pos: GridPos,
    pub orientation: Orientation,
    /// Steps until reappearing; 0 when present in the world.
    pub respawn_timer: u32,
}

impl PlayerState {
    pub fn is_alive(&self) -> bool {
        self.respawn_timer == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubstrateState {
    Matrix(MatrixWorld),
    Kitchen(KitchenState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub rewards: Vec<f64>,
    pub events: Vec<GameEvent>,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub substrate: SubstrateId,
    pub layout: Arc<Layout>,
    pub step: u64,
    pub max_steps: u64,
    pub players: Vec<PlayerState>,
    pub state: SubstrateState,
    rng: ChaCha8Rng,
}

fn facing_center(p: GridPos, center: GridPos) -> Orientation {
    let (dx, dy) = (center.x - p.x, center.y - p.y);
    if dy.abs() >= dx.abs() {
        if dy >= 0 {
            Orientation::S
        } else {
            Orientation::N
        }
    } else if dx > 0 {
        Orientation::E
    } else {
        Orientation::W
    }
}

impl WorldState {
    pub fn new(substrate: SubstrateId, layout: Arc<Layout>, max_steps: u64, seed: u64) -> Result<Self> {
        if max_steps == 0 {
            return Err(HmError::Config("max_steps must be positive".into()));
        }
        if layout.substrate != substrate {
            return Err(HmError::Config(format!("layout is for {} not {substrate}", layout.substrate)));
        }
        let n = substrate.player_count();
        let spawns = &layout.spawns;
        if spawns.len() < n {
            return Err(HmError::Map(format!("{substrate} needs {n} spawn points, map has {}", spawns.len())));
        }
        // evenly spaced over the spawn list, first and last included
        let center = layout.dims.center();
        let players = (0..n)
            .map(|i| {
                let idx = if n == 1 { 0 } else { i * (spawns.len() - 1) / (n - 1) };
                let pos = spawns[idx];
                PlayerState { pos, orientation: facing_center(pos, center), respawn_timer: 0 }
            })
            .collect();
        let state = match substrate.resource_set() {
            Some(set) => SubstrateState::Matrix(MatrixWorld::new(set, MatrixRules::for_set(set), &layout.resources, n)),
            None => SubstrateState::Kitchen(KitchenState::new(&layout, n, COOK_DURATION)),
        };
        Ok(Self { substrate, layout, step: 0, max_steps, players, state, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn builtin(substrate: SubstrateId, max_steps: u64, seed: u64) -> Result<Self> {
        Self::new(substrate, Arc::new(Layout::builtin(substrate)), max_steps, seed)
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.max_steps
    }

    pub fn matrix(&self) -> Option<&MatrixWorld> {
        match &self.state {
            SubstrateState::Matrix(m) => Some(m),
            SubstrateState::Kitchen(_) => None,
        }
    }

    pub fn matrix_mut(&mut self) -> Option<&mut MatrixWorld> {
        match &mut self.state {
            SubstrateState::Matrix(m) => Some(m),
            SubstrateState::Kitchen(_) => None,
        }
    }

    pub fn kitchen(&self) -> Option<&KitchenState> {
        match &self.state {
            SubstrateState::Kitchen(k) => Some(k),
            SubstrateState::Matrix(_) => None,
        }
    }

    pub fn kitchen_mut(&mut self) -> Option<&mut KitchenState> {
        match &mut self.state {
            SubstrateState::Kitchen(k) => Some(k),
            SubstrateState::Matrix(_) => None,
        }
    }

    pub fn inventory(&self, p: PlayerId) -> Option<&Inventory> {
        self.matrix().map(|m| &m.inventories[p.0])
    }

    /// Alive player standing on `p`, if any.
    pub fn player_at(&self, p: GridPos) -> Option<PlayerId> {
        self.players.iter().position(|s| s.is_alive() && s.pos == p).map(PlayerId)
    }

    pub fn observe(&self, p: PlayerId) -> StructuredObservation {
        observe(self, p)
    }

    /// Advances the world by one tick.
    ///
    /// Order within a tick: movement and turning in player-index order (a
    /// lower index claims a contested cell first, and matrix resources are
    /// collected on entry), then beam/interact actions in index order, then
    /// regrowth, pot and respawn timers.
    pub fn step(&mut self, joint: &[AtomicAction]) -> Result<StepResult> {
        let n = self.players.len();
        if joint.len() != n {
            return Err(HmError::Contract(format!("joint action has {} entries for {n} players", joint.len())));
        }
        if self.is_done() {
            return Err(HmError::Contract("step called on a finished episode".into()));
        }
        let mut rewards = vec![0.0; n];
        let mut events = Vec::new();

        for (i, action) in joint.iter().enumerate() {
            if !self.players[i].is_alive() {
                continue;
            }
            let facing = self.players[i].orientation;
            match action {
                AtomicAction::TurnLeft => self.players[i].orientation = facing.left(),
                AtomicAction::TurnRight => self.players[i].orientation = facing.right(),
                a if a.is_step() => {
                    let dir = a.move_direction(facing).expect("step action");
                    let to = self.players[i].pos.step(dir);
                    if self.layout.is_walkable(to) && self.player_at(to).is_none() {
                        self.players[i].pos = to;
                        if let Some(m) = self.matrix_mut() {
                            events.extend(m.collect(PlayerId(i), to));
                        }
                    }
                }
                _ => {}
            }
        }

        let mut busy = BTreeSet::new();
        for (i, action) in joint.iter().enumerate() {
            if *action != AtomicAction::FireBeam || !self.players[i].is_alive() {
                continue;
            }
            if self.matrix().is_some() {
                for e in fire_interaction(self, PlayerId(i), &mut busy)? {
                    if let GameEvent::Interaction { shooter, target, shooter_reward, target_reward, .. } = &e {
                        rewards[shooter.0] += shooter_reward;
                        rewards[target.0] += target_reward;
                    }
                    events.push(e);
                }
            } else {
                let from = self.players[i].pos;
                let target = from.step(self.players[i].orientation);
                let layout = Arc::clone(&self.layout);
                let kitchen = self.kitchen_mut().expect("non-matrix substrate is a kitchen");
                let event = kitchen.interact_with(&layout, PlayerId(i), from, target);
                if event == CookingEvent::DeliveredSoup {
                    for r in rewards.iter_mut() {
                        *r += DELIVERY_REWARD;
                    }
                }
                events.push(GameEvent::Cooking { player: PlayerId(i), event, target });
            }
        }

        self.end_of_step_ticks(&mut events);
        self.step += 1;
        Ok(StepResult { rewards, events, done: self.is_done() })
    }

    fn end_of_step_ticks(&mut self, events: &mut Vec<GameEvent>) {
        let occupied: BTreeSet<GridPos> = self.players.iter().filter(|p| p.is_alive()).map(|p| p.pos).collect();
        match &mut self.state {
            SubstrateState::Matrix(m) => m.tick_regrowth(&occupied),
            SubstrateState::Kitchen(k) => k.tick_pots(),
        }
        for i in 0..self.players.len() {
            if self.players[i].respawn_timer == 0 {
                continue;
            }
            self.players[i].respawn_timer -= 1;
            if self.players[i].respawn_timer > 0 {
                continue;
            }
            let free: Vec<GridPos> =
                self.layout.spawns.iter().copied().filter(|s| self.player_at(*s).is_none()).collect();
            match free.choose(&mut self.rng).copied() {
                Some(pos) => {
                    let orientation = *Orientation::ALL.choose(&mut self.rng).expect("four orientations");
                    self.players[i].pos = pos;
                    self.players[i].orientation = orientation;
                    events.push(GameEvent::Respawn { player: PlayerId(i), pos });
                }
                // every spawn occupied: try again next tick
                None => self.players[i].respawn_timer = 1,
            }
        }
    }
}

/// Everything a controller may look at when choosing its next action.
///
/// Focal agents restrict themselves to `obs`, their own side of `events` and
/// the static `layout`; scripted bots are privileged and may read `world`.
pub struct ActContext<'a> {
    pub player: PlayerId,
    pub obs: &'a StructuredObservation,
    /// Events produced by the previous tick.
    pub events: &'a [GameEvent],
    pub world: &'a WorldState,
    pub layout: &'a Layout,
}

pub trait Controller: Send {
    fn name(&self) -> String;

    fn act(&mut self, ctx: &ActContext<'_>) -> Result<AtomicAction>;

    /// Log records produced since the last drain (reasoner traces, ToM
    /// snapshots, plans).
    fn drain_records(&mut self) -> Vec<LogRecord> {
        Vec::new()
    }

    /// Parameters worth recording in the episode header.
    fn describe(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Always returns `noop`.
#[derive(Debug, Default, Clone)]
pub struct NoopController;

impl Controller for NoopController {
    fn name(&self) -> String {
        "noop".into()
    }

    fn act(&mut self, _ctx: &ActContext<'_>) -> Result<AtomicAction> {
        Ok(AtomicAction::Noop)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub substrate: SubstrateId,
    pub scenario: u32,
    pub seed: u64,
    pub max_steps: u64,
}

impl EpisodeConfig {
    pub fn new(substrate: SubstrateId, scenario: u32, seed: u64) -> Self {
        Self { substrate, scenario, seed, max_steps: DEFAULT_MAX_STEPS }
    }
}

/// One line of an episode results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Header {
        schema_version: u32,
        config: EpisodeConfig,
        controllers: Vec<String>,
        parameters: Vec<serde_json::Value>,
    },
    Event {
        step: u64,
        event: GameEvent,
    },
    Reward {
        step: u64,
        rewards: Vec<f64>,
    },
    Trace {
        step: u64,
        player: PlayerId,
        trace: ReasonerTrace,
    },
    Tom {
        step: u64,
        player: PlayerId,
        snapshot: serde_json::Value,
    },
    Plan {
        step: u64,
        player: PlayerId,
        calls: Vec<String>,
    },
    Note {
        step: u64,
        player: PlayerId,
        message: String,
    },
    Failure {
        step: u64,
        message: String,
    },
    Summary {
        steps: u64,
        total_rewards: Vec<f64>,
        interactions: usize,
        deliveries: usize,
        failed: bool,
    },
}

/// Seeded, replayable record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub config: EpisodeConfig,
    pub records: Vec<LogRecord>,
    pub total_rewards: Vec<f64>,
    pub steps: u64,
    pub failure: Option<String>,
}

impl EpisodeResult {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records: Vec<LogRecord> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        let config = match records.first() {
            Some(LogRecord::Header { config, .. }) => config.clone(),
            _ => return Err(HmError::Config("results file does not start with a header record".into())),
        };
        let (total_rewards, steps, failed) = match records.last() {
            Some(LogRecord::Summary { total_rewards, steps, failed, .. }) => (total_rewards.clone(), *steps, *failed),
            _ => return Err(HmError::Config("results file has no summary record".into())),
        };
        let failure = if failed {
            records.iter().find_map(|r| match r {
                LogRecord::Failure { message, .. } => Some(message.clone()),
                _ => None,
            })
        } else {
            None
        };
        Ok(Self { config, records, total_rewards, steps, failure })
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, &GameEvent)> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Event { step, event } => Some((*step, event)),
            _ => None,
        })
    }

    /// Sum of the per-step reward records.
    pub fn reward_ledger(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.total_rewards.len()];
        for r in &self.records {
            if let LogRecord::Reward { rewards, .. } = r {
                for (t, x) in totals.iter_mut().zip(rewards) {
                    *t += x;
                }
            }
        }
        totals
    }
}

/// Runs one episode with one controller per player.
///
/// A controller error aborts the episode; the result then carries a failure
/// record and `failure` is set.
pub fn run_episode(config: &EpisodeConfig, controllers: &mut [Box<dyn Controller>]) -> Result<EpisodeResult> {
    let mut world = WorldState::builtin(config.substrate, config.max_steps, config.seed)?;
    run_episode_in(config, &mut world, controllers)
}

/// Like [`run_episode`] on a caller-supplied initial world.
pub fn run_episode_in(
    config: &EpisodeConfig,
    world: &mut WorldState,
    controllers: &mut [Box<dyn Controller>],
) -> Result<EpisodeResult> {
    let n = world.player_count();
    if controllers.len() != n {
        return Err(HmError::Config(format!("{} controllers for {n} players", controllers.len())));
    }
    let mut records = vec![LogRecord::Header {
        schema_version: RESULTS_SCHEMA_VERSION,
        config: config.clone(),
        controllers: controllers.iter().map(|c| c.name()).collect(),
        parameters: controllers.iter().map(|c| c.describe()).collect(),
    }];
    let mut totals = vec![0.0; n];
    let mut last_events: Vec<GameEvent> = Vec::new();
    let mut failure = None;
    let (mut interactions, mut deliveries) = (0, 0);
    let layout = Arc::clone(&world.layout);

    while !world.is_done() {
        let step = world.step;
        let mut joint = Vec::with_capacity(n);
        for (i, controller) in controllers.iter_mut().enumerate() {
            let obs = world.observe(PlayerId(i));
            let ctx = ActContext { player: PlayerId(i), obs: &obs, events: &last_events, world, layout: &layout };
            let action = controller.act(&ctx);
            records.extend(controller.drain_records());
            match action {
                Ok(a) => joint.push(a),
                Err(e) => {
                    failure = Some(HmError::Controller { player: i, message: e.to_string() }.to_string());
                    break;
                }
            }
        }
        if let Some(message) = &failure {
            records.push(LogRecord::Failure { step, message: message.clone() });
            break;
        }
        let result = world.step(&joint)?;
        for e in &result.events {
            match e {
                GameEvent::Interaction { .. } => interactions += 1,
                GameEvent::Cooking { event: CookingEvent::DeliveredSoup, .. } => deliveries += 1,
                _ => {}
            }
            records.push(LogRecord::Event { step, event: e.clone() });
        }
        if result.rewards.iter().any(|r| *r != 0.0) {
            for (t, r) in totals.iter_mut().zip(&result.rewards) {
                *t += r;
            }
            records.push(LogRecord::Reward { step, rewards: result.rewards.clone() });
        }
        last_events = result.events;
    }
    records.push(LogRecord::Summary {
        steps: world.step,
        total_rewards: totals.clone(),
        interactions,
        deliveries,
        failed: failure.is_some(),
    });
    Ok(EpisodeResult { config: config.clone(), records, total_rewards: totals, steps: world.step, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rws(seed: u64) -> WorldState {
        WorldState::builtin(SubstrateId::RwsRepeated, 50, seed).unwrap()
    }

    #[test]
    fn noop_only_advances_the_counter() {
        let mut w = rws(1);
        let before = (w.players.clone(), w.matrix().cloned());
        let r = w.step(&[AtomicAction::Noop; 2]).unwrap();
        assert_eq!(w.step, 1);
        assert_eq!((w.players.clone(), w.matrix().cloned()), before);
        assert!(r.events.is_empty());
        assert_eq!(r.rewards, vec![0.0, 0.0]);
    }

    #[test]
    fn wall_blocks_movement() {
        let mut w = rws(1);
        w.players[0].pos = GridPos::new(1, 1);
        w.players[0].orientation = Orientation::N;
        w.step(&[AtomicAction::StepForward, AtomicAction::Noop]).unwrap();
        assert_eq!(w.players[0].pos, GridPos::new(1, 1));
        assert_eq!(w.step, 1);
    }

    #[test]
    fn stepping_onto_yellow_collects_it() {
        let mut w = rws(1);
        // (3,2) is a yellow patch cell
        w.players[0].pos = GridPos::new(2, 2);
        w.players[0].orientation = Orientation::E;
        let r = w.step(&[AtomicAction::StepForward, AtomicAction::Noop]).unwrap();
        assert_eq!(w.inventory(PlayerId(0)).unwrap(), &Inventory::rps(2, 1, 1));
        assert!(w.matrix().unwrap().present_resource(GridPos::new(3, 2)).is_none());
        assert!(matches!(r.events[0], GameEvent::Pickup { kind: ResourceKind::Rock, .. }));
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let mut w = rws(1);
        assert!(matches!(w.step(&[AtomicAction::Noop]), Err(HmError::Contract(_))));
    }

    #[test]
    fn lower_index_wins_contested_cell() {
        let mut w = rws(1);
        w.players[0].pos = GridPos::new(5, 4);
        w.players[0].orientation = Orientation::E;
        w.players[1].pos = GridPos::new(7, 4);
        w.players[1].orientation = Orientation::W;
        w.step(&[AtomicAction::StepForward, AtomicAction::StepForward]).unwrap();
        assert_eq!(w.players[0].pos, GridPos::new(6, 4));
        assert_eq!(w.players[1].pos, GridPos::new(7, 4));
    }

    fn duel_setup(behind: bool) -> WorldState {
        let mut w = rws(3);
        w.players[0].pos = GridPos::new(5, 4);
        w.players[0].orientation = Orientation::E;
        w.players[1].pos = if behind { GridPos::new(4, 4) } else { GridPos::new(7, 4) };
        let m = w.matrix_mut().unwrap();
        m.inventories[0] = Inventory::rps(1, 5, 1);
        m.inventories[1] = Inventory::rps(5, 1, 1);
        w
    }

    #[test]
    fn beam_two_ahead_starts_a_zero_sum_duel() {
        let mut w = duel_setup(false);
        let r = w.step(&[AtomicAction::FireBeam, AtomicAction::Noop]).unwrap();
        assert_eq!(r.rewards[0] + r.rewards[1], 0.0);
        assert!(r.rewards[0] > 0.0);
        let m = w.matrix().unwrap();
        assert_eq!(m.inventories[0], Inventory::rps(1, 1, 1));
        assert_eq!(m.inventories[1], Inventory::rps(1, 1, 1));
        assert!(!w.players[0].is_alive() && !w.players[1].is_alive());
    }

    #[test]
    fn beam_does_not_reach_behind() {
        let mut w = duel_setup(true);
        let r = w.step(&[AtomicAction::FireBeam, AtomicAction::Noop]).unwrap();
        assert!(r.events.is_empty());
    }

    #[test]
    fn ineligible_shooter_is_a_no_op() {
        let mut w = duel_setup(false);
        w.matrix_mut().unwrap().inventories[0] = Inventory::rps(1, 1, 1);
        let r = w.step(&[AtomicAction::FireBeam, AtomicAction::Noop]).unwrap();
        assert!(r.events.is_empty());
    }

    #[test]
    fn respawn_takes_exactly_the_delay() {
        let mut w = duel_setup(false);
        w.step(&[AtomicAction::FireBeam, AtomicAction::Noop]).unwrap();
        let mut absent = 0;
        while !w.players[0].is_alive() {
            absent += 1;
            w.step(&[AtomicAction::Noop; 2]).unwrap();
        }
        assert_eq!(absent, 5);
        assert!(w.layout.spawns.contains(&w.players[0].pos));
    }

    #[test]
    fn regrowth_after_delay() {
        let mut w = rws(1);
        w.players[0].pos = GridPos::new(2, 2);
        w.players[0].orientation = Orientation::E;
        w.step(&[AtomicAction::StepForward, AtomicAction::Noop]).unwrap();
        w.step(&[AtomicAction::StepBackward, AtomicAction::Noop]).unwrap();
        let cell = GridPos::new(3, 2);
        let mut absent = 1;
        while w.matrix().unwrap().present_resource(cell).is_none() {
            w.step(&[AtomicAction::Noop; 2]).unwrap();
            absent += 1;
        }
        assert_eq!(absent, 10);
    }

    #[test]
    fn noop_episode_has_zero_reward() {
        let cfg = EpisodeConfig { substrate: SubstrateId::RwsRepeated, scenario: 0, seed: 9, max_steps: 10 };
        let mut ctrls: Vec<Box<dyn Controller>> = vec![Box::new(NoopController), Box::new(NoopController)];
        let r = run_episode(&cfg, &mut ctrls).unwrap();
        assert_eq!(r.steps, 10);
        assert_eq!(r.total_rewards, vec![0.0, 0.0]);
        let back = EpisodeResult::from_jsonl(&r.to_jsonl()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn player_labels() {
        assert_eq!(PlayerId(3).to_string(), "player_3");
        assert_eq!(PlayerId::from_label("player_12"), Some(PlayerId(12)));
    }
}
