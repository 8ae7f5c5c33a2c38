//! Reasoner-driven agents: Hypothetical Minds and the ReAct, Reflexion and
//! PlanReAct baselines.
//!
//! All variants share the state description, the subgoal executor and the
//! re-plan rule (plan exhausted, a step failed, or a new high-level plan).
//! They differ only in where the plan comes from:
//!
//! * Hypothetical Minds runs the theory-of-mind pipeline on every trigger
//!   event (an own interaction, or a delivered dish in the kitchen) and plans
//!   subgoals for the resulting high-level plan.
//! * PlanReAct asks for a high-level plan on the same triggers, without
//!   hypotheses.
//! * ReAct asks for reasoning and an action plan in a single call.
//! * Reflexion is ReAct plus an evaluator that writes a reflection after each
//!   plan; the last three reflections go into later prompts.

use crate::cooking::{CookingEvent, HeldItem};
use crate::error::{HmError, Result};
use crate::game::{own_interaction, ActContext, Controller, GameEvent, LogRecord, PlayerId};
use crate::geometry::{AtomicAction, GridPos};
use crate::literal::LiteralValue;
use crate::matrix::{resolve_interaction, PayoffMatrix};
use crate::memory::{history_literal, EntityMemory, InteractionRecord};
use crate::plan::SubgoalCall;
use crate::planner::{compile_interact, compile_move_to, FireAtProgram, GridView, WaitProgram};
use crate::prompts::{self, PromptKind};
use crate::reasoner::{Reasoner, ReasonerClient, ReasonerError, SamplingConfig};
use crate::subgoal::{self, KitchenMemory, SubgoalError};
use crate::substrate::{Inventory, ResourceKind, ResourceSet, SubstrateId};
use crate::tom::{outcome_reward, BehaviorFeature, HypothesisBank, TomMode, TomParams};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

/// Reflections kept in Reflexion prompts.
pub const REFLECTION_MEMORY: usize = 3;
/// Rewards closer to zero than this count as neutral outcomes.
pub const NEUTRAL_BAND: f64 = 1.0;
const NO_HISTORY_HYPOTHESIS: &str = "No interactions have happened yet.";
const NO_TEAMMATE_STRATEGY: &str = "No observations of my teammate yet.";
const MOVE_SLACK: u32 = 10;
const INTERACT_BUDGET: u32 = 60;
/// Teammate actions shown when inferring their strategy.
const TEAMMATE_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    HypotheticalMinds,
    React,
    Reflexion,
    PlanReact,
}

impl std::str::FromStr for AgentKind {
    type Err = HmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hm" | "hypothetical_minds" => Ok(AgentKind::HypotheticalMinds),
            "react" => Ok(AgentKind::React),
            "reflexion" => Ok(AgentKind::Reflexion),
            "planreact" | "plan_react" => Ok(AgentKind::PlanReact),
            other => Err(HmError::Config(format!("unknown agent {other:?}"))),
        }
    }
}

/// Agent variant and flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub tom_mode: TomMode,
    /// Defaults depend on the mode when unset.
    pub tom_params: Option<TomParams>,
    /// Evaluate each finished plan and feed the reflection back.
    pub reflect: bool,
    pub sampling: SamplingConfig,
}

impl AgentSpec {
    /// Defaults for a variant on a substrate. Hypothetical Minds reflects on
    /// its plans in the kitchen only.
    pub fn new(kind: AgentKind, substrate: SubstrateId) -> Self {
        let reflect = match kind {
            AgentKind::Reflexion => true,
            AgentKind::HypotheticalMinds => substrate == SubstrateId::Cooking,
            _ => false,
        };
        Self { kind, tom_mode: TomMode::Modular, tom_params: None, reflect, sampling: SamplingConfig::default() }
    }

    pub fn params(&self) -> TomParams {
        self.tom_params.unwrap_or(match self.tom_mode {
            TomMode::Counterfactual => TomParams::counterfactual(),
            _ => TomParams::default(),
        })
    }

    /// Hypothetical Minds without its theory-of-mind module is PlanReAct.
    pub fn effective_kind(&self) -> AgentKind {
        match (self.kind, self.tom_mode) {
            (AgentKind::HypotheticalMinds, TomMode::Disabled) => AgentKind::PlanReact,
            (k, _) => k,
        }
    }
}

/// The current high-level plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighLevelPlan {
    pub text: String,
    /// Matrix substrates only.
    pub target: Option<Inventory>,
    /// Players to look for, most preferred first.
    pub seek: Vec<PlayerId>,
}

#[derive(Debug, Clone, PartialEq)]
enum Program {
    Move { dst: GridPos, left: Option<u32> },
    Fire(FireAtProgram),
    Interact { target: GridPos, left: u32, fired: bool },
    Wait { pot: GridPos, wait: WaitProgram, left: u32 },
}

enum Tick {
    Act(AtomicAction),
    Done,
    Failed(String),
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn string_list<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    LiteralValue::List(items.into_iter().map(|t| LiteralValue::str(t.clone())).collect()).to_string()
}

/// A reasoner-driven controller for one player.
pub struct LlmAgent {
    spec: AgentSpec,
    kind: AgentKind,
    substrate: SubstrateId,
    me: PlayerId,
    client: ReasonerClient,
    memory: EntityMemory,
    kitchen: KitchenMemory,
    history: Vec<InteractionRecord>,
    bank: HypothesisBank,
    /// Latest predicted inventory of each opponent under its active hypothesis.
    predicted: BTreeMap<PlayerId, Inventory>,
    /// Strategy executed in the current round, counterfactual mode only.
    executed: Option<usize>,
    plan: Option<HighLevelPlan>,
    queue: VecDeque<SubgoalCall>,
    program: Option<(SubgoalCall, Program)>,
    plan_calls: Vec<SubgoalCall>,
    outcomes: Vec<String>,
    errors: String,
    total_reward: f64,
    teammate_actions: Vec<String>,
    since_trigger: Vec<String>,
    reflections: Vec<String>,
    plan_before: Option<String>,
    plan_reward: f64,
    plan_failed: bool,
    started: bool,
    step: u64,
    records: Vec<LogRecord>,
}

impl LlmAgent {
    pub fn new(spec: AgentSpec, substrate: SubstrateId, me: PlayerId, reasoner: Arc<dyn Reasoner>) -> Result<Self> {
        let system = prompts::render(prompts::system_prompt(substrate), &[("agent_id", &me.label())])?;
        let mut client = ReasonerClient::new(reasoner, system);
        client.sampling = spec.sampling;
        let bank = HypothesisBank::new(spec.params());
        Ok(Self {
            kind: spec.effective_kind(),
            spec,
            substrate,
            me,
            client,
            memory: EntityMemory::new(),
            kitchen: KitchenMemory::default(),
            history: Vec::new(),
            bank,
            predicted: BTreeMap::new(),
            executed: None,
            plan: None,
            queue: VecDeque::new(),
            program: None,
            plan_calls: Vec::new(),
            outcomes: Vec::new(),
            errors: "None".into(),
            total_reward: 0.0,
            teammate_actions: Vec::new(),
            since_trigger: Vec::new(),
            reflections: Vec::new(),
            plan_before: None,
            plan_reward: 0.0,
            plan_failed: false,
            started: false,
            step: 0,
            records: Vec::new(),
        })
    }

    pub fn bank(&self) -> &HypothesisBank {
        &self.bank
    }

    pub fn history(&self) -> &[InteractionRecord] {
        &self.history
    }

    pub fn current_plan(&self) -> Option<&HighLevelPlan> {
        self.plan.as_ref()
    }

    pub fn reflections(&self) -> &[String] {
        &self.reflections
    }

    fn set(&self) -> ResourceSet {
        self.substrate.resource_set().unwrap_or(ResourceSet::Rps)
    }

    fn note(&mut self, message: String) {
        log::debug!("{}: {message}", self.me);
        self.records.push(LogRecord::Note { step: self.step, player: self.me, message });
    }

    /// Malformed responses degrade to "no answer"; an unavailable backend
    /// ends the episode.
    fn soft<T>(&mut self, r: std::result::Result<T, ReasonerError>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(ReasonerError::BadResponse(m)) => {
                self.note(format!("reasoner returned a malformed response: {m}"));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn ask_map(&mut self, kind: PromptKind, vars: &[(&str, String)]) -> Result<Option<LiteralValue>> {
        let vars: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let prompt = prompts::render(kind.template(), &vars)?;
        let r = self.client.ask_map(kind.name(), &prompt);
        Ok(self.soft(r)?.flatten())
    }

    fn flush(&mut self) {
        let (step, player) = (self.step, self.me);
        let traces = self.client.drain_traces();
        self.records.extend(traces.into_iter().map(|trace| LogRecord::Trace { step, player, trace }));
    }

    fn tom_snapshot(&mut self, round: usize, opponent: Option<PlayerId>) {
        let active = opponent.and_then(|o| self.bank.select_active(o).ok()).map(|h| h.text.clone());
        let snapshot = serde_json::json!({
            "round": round,
            "opponent": opponent.map(PlayerId::label),
            "active": active,
            "plan": self.plan.as_ref().map(|p| p.text.clone()),
            "bank": self.bank.snapshot(),
        });
        self.records.push(LogRecord::Tom { step: self.step, player: self.me, snapshot });
    }

    fn others(&self, ctx: &ActContext<'_>) -> Vec<PlayerId> {
        (0..ctx.world.player_count()).map(PlayerId).filter(|p| *p != self.me).collect()
    }

    fn opponent_label(&self, ctx: &ActContext<'_>) -> String {
        match self.others(ctx).as_slice() {
            [one] => one.label(),
            _ => "the other players".into(),
        }
    }

    fn rewards_text(&self) -> String {
        format!("{:.3}", self.total_reward)
    }

    fn history_with(&self, opponent: PlayerId) -> String {
        let h: Vec<InteractionRecord> = self.history.iter().filter(|r| r.opponent == opponent).cloned().collect();
        history_literal(&h)
    }

    // ------------------------------------------------------------ main loop

    fn act_inner(&mut self, ctx: &ActContext<'_>) -> Result<AtomicAction> {
        self.step = ctx.obs.step;
        self.memory.update(ctx.obs, ctx.layout.dims);
        if self.substrate == SubstrateId::Cooking {
            if !self.started {
                self.kitchen = KitchenMemory::seeded(ctx.layout);
            }
            self.kitchen.update(ctx.obs);
        }

        let mut interactions = Vec::new();
        let mut delivered = false;
        for e in ctx.events {
            if let Some(oi) = own_interaction(e, self.me) {
                self.total_reward += oi.reward;
                self.plan_reward += oi.reward;
                self.memory.forget_opponent(oi.opponent);
                interactions.push(InteractionRecord {
                    step: oi.step,
                    opponent: oi.opponent,
                    own_inventory: oi.own_inventory,
                    reward: oi.reward,
                    estimated_opponent: None,
                });
            }
            if let GameEvent::Cooking { player, event, target } = e {
                if *player == self.me {
                    if *event == CookingEvent::Blocked {
                        self.fail(format!("interact({target}) did not change the state of the world"));
                    }
                } else {
                    let phrase = event.teammate_phrase().to_string();
                    self.teammate_actions.push(phrase.clone());
                    self.since_trigger.push(phrase);
                }
                if *event == CookingEvent::DeliveredSoup {
                    self.total_reward += crate::cooking::DELIVERY_REWARD;
                    self.plan_reward += crate::cooking::DELIVERY_REWARD;
                    delivered = true;
                }
            }
        }

        if !self.started {
            self.started = true;
            self.initial_plan(ctx)?;
        }
        for rec in interactions {
            self.history.push(rec);
            self.on_interaction(ctx)?;
        }
        if delivered {
            self.on_delivery(ctx)?;
        }
        if ctx.obs.is_respawning() {
            return Ok(AtomicAction::Noop);
        }
        self.next_action(ctx)
    }

    fn next_action(&mut self, ctx: &ActContext<'_>) -> Result<AtomicAction> {
        let mut replanned = false;
        for _ in 0..16 {
            if self.program.is_none() {
                if let Some(call) = self.queue.pop_front() {
                    match self.start(ctx, &call) {
                        Ok(p) => self.program = Some((call, p)),
                        Err(m) => self.fail(format!("{call} could not be executed: {m}")),
                    }
                    continue;
                }
                if replanned {
                    break;
                }
                self.end_plan(ctx)?;
                self.replan(ctx)?;
                replanned = true;
                continue;
            }
            let (call, mut program) = self.program.take().expect("checked above");
            match self.tick(ctx, &mut program) {
                Tick::Act(a) => {
                    self.program = Some((call, program));
                    return Ok(a);
                }
                Tick::Done => self.outcomes.push(format!("{call} completed")),
                Tick::Failed(m) => self.fail(format!("{call} failed: {m}")),
            }
        }
        Ok(AtomicAction::Noop)
    }

    fn fail(&mut self, message: String) {
        self.note(message.clone());
        self.outcomes.push(message);
        self.queue.clear();
        self.program = None;
        self.plan_failed = true;
    }

    /// Drops the current subgoals so the next step plans afresh.
    fn interrupt(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        self.end_plan(ctx)?;
        self.queue.clear();
        self.program = None;
        Ok(())
    }

    // ------------------------------------------------------------ execution

    fn view(&self, ctx: &ActContext<'_>, block_players: bool) -> GridView {
        let mut view = GridView::from_layout(ctx.layout).with_resources(self.memory.resource_map());
        if block_players {
            view.blocked.extend(ctx.obs.opponents.values().map(|(p, _)| *p));
        }
        view
    }

    fn start(&self, ctx: &ActContext<'_>, call: &SubgoalCall) -> std::result::Result<Program, String> {
        Ok(match call {
            SubgoalCall::MoveTo { dst, .. } => Program::Move { dst: *dst, left: None },
            SubgoalCall::FireAt { target } => {
                if self.substrate == SubstrateId::Cooking {
                    return Err("fire_at is not available in the kitchen".into());
                }
                Program::Fire(FireAtProgram::new(*target))
            }
            SubgoalCall::Interact { target } => {
                if !ctx.layout.fixtures.contains_key(target) {
                    return Err(format!("no interactable entity at {target}"));
                }
                Program::Interact { target: *target, left: INTERACT_BUDGET, fired: false }
            }
            SubgoalCall::Wait { target } => {
                let wait = WaitProgram::new(&self.view(ctx, false), *target).map_err(|e| e.to_string())?;
                Program::Wait { pot: *target, wait, left: INTERACT_BUDGET }
            }
        })
    }

    /// Next action toward standing next to `target` and facing it; `None`
    /// once there.
    fn approach(&self, ctx: &ActContext<'_>, target: GridPos) -> std::result::Result<Option<AtomicAction>, String> {
        let (pos, facing) = ctx.obs.pose.ok_or("respawning")?;
        let actions = compile_interact(&self.view(ctx, true), pos, facing, target)
            .or_else(|_| compile_interact(&self.view(ctx, false), pos, facing, target))
            .map_err(|e| e.to_string())?;
        Ok(match actions.as_slice() {
            [AtomicAction::FireBeam] => None,
            _ => actions.first().copied(),
        })
    }

    fn tick(&mut self, ctx: &ActContext<'_>, program: &mut Program) -> Tick {
        let Some((pos, facing)) = ctx.obs.pose else {
            return Tick::Act(AtomicAction::Noop);
        };
        match program {
            Program::Move { dst, left } => {
                if pos == *dst {
                    return Tick::Done;
                }
                let plan = compile_move_to(&self.view(ctx, true), pos, facing, *dst)
                    .or_else(|_| compile_move_to(&self.view(ctx, false), pos, facing, *dst));
                let plan = match plan {
                    Ok(p) => p,
                    Err(e) => return Tick::Failed(e.to_string()),
                };
                let budget = left.get_or_insert(plan.actions.len() as u32 * 2 + MOVE_SLACK);
                if *budget == 0 {
                    return Tick::Failed(format!("did not reach {dst}"));
                }
                *budget -= 1;
                match plan.actions.first() {
                    Some(a) => Tick::Act(*a),
                    None => Tick::Done,
                }
            }
            Program::Fire(fire) => {
                let view = self.view(ctx, false);
                let opponents: Vec<GridPos> = ctx.obs.opponents.values().map(|(p, _)| *p).collect();
                match fire.next_action(&view, pos, facing, &opponents) {
                    Some(a) => Tick::Act(a),
                    None => Tick::Done,
                }
            }
            Program::Interact { target, left, fired } => {
                if *fired {
                    return Tick::Done;
                }
                if *left == 0 {
                    return Tick::Failed(format!("could not reach {target}"));
                }
                *left -= 1;
                match self.approach(ctx, *target) {
                    Ok(Some(a)) => Tick::Act(a),
                    Ok(None) => {
                        *fired = true;
                        Tick::Act(AtomicAction::FireBeam)
                    }
                    Err(m) => Tick::Failed(m),
                }
            }
            Program::Wait { pot, wait, left } => {
                if *left == 0 {
                    return Tick::Failed(format!("could not reach {pot}"));
                }
                match self.approach(ctx, *pot) {
                    Ok(Some(a)) => {
                        *left -= 1;
                        Tick::Act(a)
                    }
                    Ok(None) => {
                        let seen = ctx.obs.pot_at(*pot).or_else(|| self.kitchen.pot(*pot));
                        match wait.next_action(seen) {
                            Some(a) => Tick::Act(a),
                            None => Tick::Done,
                        }
                    }
                    Err(m) => Tick::Failed(m),
                }
            }
        }
    }

    // ------------------------------------------------------------ planning

    fn salient_state(&self, ctx: &ActContext<'_>) -> String {
        let pos = ctx.obs.position().map_or_else(|| "respawning".to_string(), |p| p.to_string());
        if self.substrate == SubstrateId::Cooking {
            let held = ctx.obs.held.unwrap_or(HeldItem::Nothing);
            let pots: Vec<String> =
                self.kitchen.pots.values().map(|v| format!("({}, {}, '{}')", v.pos, v.tomatoes, v.status())).collect();
            format!("position {pos}, holding '{}', pots [{}]", held.label(), pots.join(", "))
        } else {
            let inv = ctx.obs.inventory.as_ref().map_or_else(|| "{}".to_string(), |i| i.to_literal().to_string());
            format!("position {pos}, inventory {inv}")
        }
    }

    /// Closes the running plan: evaluates it if reflection is on.
    fn end_plan(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let Some(before) = self.plan_before.take() else {
            return Ok(());
        };
        if !self.spec.reflect || self.plan_calls.is_empty() {
            return Ok(());
        }
        let after = self.salient_state(ctx);
        let failed = self.plan_failed || after == before;
        let preamble = if failed { prompts::REFLECT_FAILED } else { prompts::REFLECT_SUCCEEDED };
        let plan: Vec<String> = self.plan_calls.iter().map(ToString::to_string).collect();
        let reply = self.ask_map(
            PromptKind::Reflect,
            &[
                ("preamble", preamble.trim_end().to_string()),
                ("plan", string_list(&plan)),
                ("before", before),
                ("after", after),
                ("reward", format!("{:.3}", self.plan_reward)),
            ],
        )?;
        if let Some(text) = reply.as_ref().and_then(|m| m.get_ci("reflection")).and_then(LiteralValue::as_str) {
            self.reflections.push(text.to_string());
            let keep = self.reflections.len().saturating_sub(REFLECTION_MEMORY);
            self.reflections.drain(..keep);
        }
        Ok(())
    }

    fn reflections_block(&self) -> String {
        if self.reflections.is_empty() {
            return String::new();
        }
        let lines: Vec<String> = self.reflections.iter().map(|r| format!("- {r}")).collect();
        format!("Reflections on your previous plans:\n{}\n\n", lines.join("\n"))
    }

    fn outcomes_text(&self) -> String {
        if self.outcomes.is_empty() {
            "None".into()
        } else {
            self.outcomes.join("\n")
        }
    }

    fn hypotheses_text(&self) -> String {
        let entries = self
            .bank
            .streams
            .keys()
            .filter_map(|o| {
                let h = self.bank.select_active(*o).ok()?;
                Some((
                    o.label(),
                    LiteralValue::Map(vec![
                        ("hypothesis".into(), LiteralValue::str(h.text.clone())),
                        ("value".into(), LiteralValue::Real((h.value * 1000.0).round() / 1000.0)),
                    ]),
                ))
            })
            .collect();
        LiteralValue::Map(entries).to_string()
    }

    fn replan(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let Some(pos) = ctx.obs.position() else {
            return Ok(());
        };
        let state = if self.substrate == SubstrateId::Cooking {
            subgoal::cooking_state(ctx.obs, &self.memory, &self.kitchen, ctx.layout)?
        } else {
            subgoal::matrix_state(ctx.obs, &self.memory, ctx.layout)?
        };
        let valid: BTreeSet<GridPos> = subgoal::valid_cells(ctx.layout, Some(pos)).into_iter().collect();
        let step = s(self.step);
        let agent_id = self.me.label();
        let outcomes = self.outcomes_text();
        let previous_errors = std::mem::replace(&mut self.errors, "None".into());
        let set = self.set();
        let react = matches!(self.kind, AgentKind::React | AgentKind::Reflexion);
        let (kind, base): (PromptKind, Vec<(&str, String)>) = match (self.substrate == SubstrateId::Cooking, react) {
            (false, false) => {
                let plan = self.plan.clone().unwrap_or_else(|| HighLevelPlan {
                    text: "Collect resources and duel.".into(),
                    target: None,
                    seek: Vec::new(),
                });
                let target = plan.target.unwrap_or_else(|| Inventory::ones(set));
                let seek: Vec<String> = plan.seek.iter().map(|p| p.label()).collect();
                (
                    PromptKind::SubgoalMatrix,
                    vec![
                        ("rewards", self.rewards_text()),
                        ("strategy", plan.text),
                        ("target_inventory", target.to_literal().to_string()),
                        ("opponents_to_seekout", string_list(&seek)),
                        ("hypotheses", self.hypotheses_text()),
                        ("threshold", s(self.bank.params.v_thr)),
                    ],
                )
            }
            (true, false) => {
                let strategy = self.plan.as_ref().map_or_else(|| "Cook and deliver tomato soup.".into(), |p| p.text.clone());
                let reflection = self.reflections.last().cloned().unwrap_or_else(|| "None".into());
                (PromptKind::SubgoalCooking, vec![("strategy", strategy), ("reflection", reflection)])
            }
            (false, true) => (
                PromptKind::ReactMatrix,
                vec![
                    ("rewards", self.rewards_text()),
                    ("history", history_literal(&self.history)),
                    ("reflections", self.reflections_block()),
                    ("example_inventory", Inventory::pure(set.kinds()[0], 4).to_literal().to_string()),
                ],
            ),
            (true, true) => (
                PromptKind::ReactCooking,
                vec![("teammate_actions", string_list(&self.teammate_actions)), ("reflections", self.reflections_block())],
            ),
        };
        let mut vars = base;
        vars.extend([("state", state), ("execution_outcomes", outcomes), ("step", step), ("agent_id", agent_id)]);
        let result = subgoal::plan_subgoals(&mut self.client, kind, &valid, &previous_errors, |errors| {
            let mut all: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
            all.push(("errors", errors));
            prompts::render(kind.template(), &all)
        });
        let result = match result {
            Ok(r) => r,
            Err(SubgoalError::Prompt(e)) => return Err(e),
            Err(SubgoalError::Reasoner(e)) => {
                self.soft::<()>(Err(e))?;
                return Ok(());
            }
        };
        if let Some(e) = &result.error {
            self.errors = e.clone();
        }
        if result.calls.is_empty() {
            self.note("no usable action plan; idling this step".into());
            return Ok(());
        }
        if react && self.substrate.is_matrix() {
            let target = result.response.as_ref().and_then(|m| m.get("my_next_inventory")).and_then(|v| Inventory::from_literal(set, v).ok());
            if let Some(target) = target {
                let text = format!("Collect a strong {} inventory and then duel.", target.argmax().strategy());
                self.plan = Some(HighLevelPlan { text, target: Some(target), seek: Vec::new() });
            }
        }
        self.records.push(LogRecord::Plan {
            step: self.step,
            player: self.me,
            calls: result.calls.iter().map(ToString::to_string).collect(),
        });
        self.outcomes.clear();
        self.plan_calls = result.calls.clone();
        self.queue = result.calls.into();
        self.plan_before = Some(self.salient_state(ctx));
        self.plan_reward = 0.0;
        self.plan_failed = false;
        Ok(())
    }

    // ------------------------------------------------------------ triggers

    fn initial_plan(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        match (self.kind, self.substrate) {
            (AgentKind::React | AgentKind::Reflexion, _) => Ok(()),
            (AgentKind::PlanReact, SubstrateId::Cooking) => self.plan_cooking(),
            (AgentKind::PlanReact, _) => self.plan_matrix(ctx),
            (AgentKind::HypotheticalMinds, SubstrateId::Cooking) => {
                self.cooking_strategy(NO_TEAMMATE_STRATEGY.to_string())?;
                self.tom_snapshot(0, None);
                Ok(())
            }
            (AgentKind::HypotheticalMinds, _) => {
                match self.spec.tom_mode {
                    TomMode::Counterfactual => self.counterfactual_strategy(ctx, None)?,
                    _ => {
                        let label = self.opponent_label(ctx);
                        if let Some((_, mine)) = self.predict_call(ctx, &label, "[]", NO_HISTORY_HYPOTHESIS, None)? {
                            self.plan = Some(HighLevelPlan {
                                text: format!("Collect a strong {} inventory and then duel.", mine.argmax().strategy()),
                                target: Some(mine),
                                seek: Vec::new(),
                            });
                        }
                    }
                }
                self.tom_snapshot(0, None);
                Ok(())
            }
        }
    }

    fn on_interaction(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        self.interrupt(ctx)?;
        match self.kind {
            AgentKind::React | AgentKind::Reflexion => Ok(()),
            AgentKind::PlanReact => self.plan_matrix(ctx),
            AgentKind::HypotheticalMinds => {
                match self.spec.tom_mode {
                    TomMode::Vanilla => self.tom_vanilla(ctx)?,
                    TomMode::Counterfactual => self.tom_counterfactual(ctx)?,
                    _ => self.tom_modular(ctx)?,
                }
                let round = self.history.len();
                let opponent = self.history.last().map(|r| r.opponent);
                self.tom_snapshot(round, opponent);
                Ok(())
            }
        }
    }

    fn on_delivery(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let previous = self.plan.as_ref().map(|p| p.text.clone());
        match self.kind {
            AgentKind::React | AgentKind::Reflexion => return Ok(()),
            AgentKind::PlanReact => self.plan_cooking()?,
            AgentKind::HypotheticalMinds => {
                self.tom_cooking(ctx)?;
                let round = self.history.len();
                self.tom_snapshot(round, self.others(ctx).first().copied());
            }
        }
        self.since_trigger.clear();
        if self.plan.as_ref().map(|p| p.text.clone()) != previous {
            self.interrupt(ctx)?;
        }
        Ok(())
    }

    fn plan_matrix(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let set = self.set();
        let kind0 = set.kinds()[0];
        let reply = self.ask_map(
            PromptKind::PlanMatrix,
            &[
                ("rewards", self.rewards_text()),
                ("history", history_literal(&self.history)),
                ("step", s(self.step)),
                ("agent_id", self.me.label()),
                ("example_kind", kind0.strategy().to_string()),
                ("example_inventory", Inventory::pure(kind0, 4).to_literal().to_string()),
            ],
        )?;
        let Some(map) = reply else {
            return Ok(());
        };
        let text = map.get_ci("high_level_plan").and_then(LiteralValue::as_str).unwrap_or("Collect resources and duel.");
        let target = map.get("my_next_inventory").and_then(|v| Inventory::from_literal(set, v).ok());
        self.plan = Some(HighLevelPlan { text: text.to_string(), target, seek: self.others(ctx) });
        Ok(())
    }

    fn plan_cooking(&mut self) -> Result<()> {
        let reply = self.ask_map(
            PromptKind::PlanCooking,
            &[
                ("teammate_actions", string_list(&self.teammate_actions)),
                ("step", s(self.step)),
                ("agent_id", self.me.label()),
            ],
        )?;
        if let Some(text) = reply.as_ref().and_then(|m| m.get_ci("high_level_plan")).and_then(LiteralValue::as_str) {
            self.plan = Some(HighLevelPlan { text: text.to_string(), target: None, seek: Vec::new() });
        }
        Ok(())
    }

    // ------------------------------------------------------------ theory of mind: matrix games

    fn last_interaction_text(rec: &InteractionRecord) -> String {
        LiteralValue::Map(vec![
            ("your_inventory".into(), rec.own_inventory.to_literal()),
            ("rewards".into(), LiteralValue::Real((rec.reward * 1000.0).round() / 1000.0)),
        ])
        .to_string()
    }

    fn event_line(rec: &InteractionRecord) -> String {
        format!("An interaction with {} has occurred at step {}, {}", rec.opponent, rec.step, Self::last_interaction_text(rec))
    }

    /// Worked payoff examples shown when estimating an opponent's inventory.
    fn payoff_examples(set: ResourceSet) -> String {
        let pairs: Vec<(Inventory, Inventory)> = match set {
            ResourceSet::Rps => vec![
                (Inventory::rps(5, 1, 1), Inventory::rps(1, 1, 6)),
                (Inventory::rps(3, 1, 1), Inventory::rps(1, 5, 1)),
                (Inventory::rps(1, 4, 1), Inventory::rps(3, 1, 1)),
            ],
            ResourceSet::Pd => vec![
                (Inventory::pd(5, 1), Inventory::pd(1, 5)),
                (Inventory::pd(5, 1), Inventory::pd(5, 1)),
                (Inventory::pd(1, 5), Inventory::pd(1, 5)),
            ],
        };
        let payoff = PayoffMatrix::for_set(set);
        pairs
            .iter()
            .filter_map(|(a, b)| {
                let (r, _) = resolve_interaction(a, b, &payoff).ok()?;
                Some(format!(
                    "- your_inventory={}, opponent_inventory={}, rewards={:.3}",
                    a.to_literal(),
                    b.to_literal(),
                    r
                ))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Step 1: the opponent's likely inventory in the interaction.
    fn estimate(&mut self, idx: usize) -> Result<Option<Inventory>> {
        let set = self.set();
        let rec = self.history[idx].clone();
        let reply = self.ask_map(
            PromptKind::TomEstimate,
            &[
                ("step", s(rec.step)),
                ("last_interaction", Self::last_interaction_text(&rec)),
                ("ones_inventory", Inventory::ones(set).to_literal().to_string()),
                ("examples", Self::payoff_examples(set)),
                ("example_inventory", Inventory::pure(*set.kinds().last().expect("kinds"), 4).to_literal().to_string()),
            ],
        )?;
        let est = reply
            .as_ref()
            .and_then(|m| m.get_ci("possible_opponent_inventory"))
            .and_then(|v| Inventory::from_literal(set, v).ok())
            .filter(|i| i.total() > 0);
        self.history[idx].estimated_opponent = est.clone();
        Ok(est)
    }

    /// Scores pending predictions for the opponent of the latest interaction.
    fn evaluate_round(&mut self, opponent: PlayerId, est: Option<&Inventory>) {
        let round = self.history.len();
        match est {
            Some(inv) => self.bank.evaluate(opponent, &BehaviorFeature::Resource(inv.argmax()), round),
            None => self.bank.evaluate_with(opponent, round, None, |_| None),
        }
    }

    fn fallback_hypothesis(&self, est: Option<&Inventory>) -> String {
        let k = est.map_or(self.set().kinds()[0], Inventory::argmax);
        format!(
            "I think my opponent is always playing a pure {} strategy and collecting around 5 {} resources.",
            k.strategy(),
            k.color()
        )
    }

    fn refinement_text(&self, opponent: PlayerId) -> Result<String> {
        let top: Vec<LiteralValue> = self
            .bank
            .refinement_context(opponent)
            .iter()
            .map(|h| {
                LiteralValue::Map(vec![
                    ("hypothesis".into(), LiteralValue::str(h.text.clone())),
                    ("value".into(), LiteralValue::Real((h.value * 1000.0).round() / 1000.0)),
                ])
            })
            .collect();
        if top.is_empty() {
            return Ok(String::new());
        }
        let text = prompts::render(prompts::REFINEMENT, &[("top_hypotheses", &LiteralValue::List(top).to_string())])?;
        Ok(format!("{text}\n"))
    }

    /// Steps 2-3: a new or refined hypothesis.
    fn generate(&mut self, idx: usize, est: Option<&Inventory>) -> Result<()> {
        let rec = self.history[idx].clone();
        let o = rec.opponent;
        let k = self.set().kinds()[0];
        let reply = self.ask_map(
            PromptKind::TomHypothesis,
            &[
                ("rewards", self.rewards_text()),
                ("opponent", o.label()),
                ("step", s(rec.step)),
                ("last_interaction", Self::last_interaction_text(&rec)),
                ("history", self.history_with(o)),
                ("refinement", self.refinement_text(o)?),
                ("example_kind", k.strategy().to_string()),
                ("example_color", k.color().to_string()),
            ],
        )?;
        let text = reply
            .as_ref()
            .and_then(|m| m.get_ci("Opponent_strategy"))
            .and_then(LiteralValue::as_str)
            .map(str::to_string)
            .filter(|t| !t.trim().is_empty())
            .unwrap_or_else(|| self.fallback_hypothesis(est));
        self.bank.add(o, &text, self.history.len());
        Ok(())
    }

    /// Step 4 for one hypothesis: (predicted opponent inventory, my counter).
    fn predict_call(
        &mut self,
        ctx: &ActContext<'_>,
        opponent: &str,
        history: &str,
        hypothesis: &str,
        rec: Option<&InteractionRecord>,
    ) -> Result<Option<(Inventory, Inventory)>> {
        let set = self.set();
        let kinds = set.kinds();
        let (a, b) = (kinds[0], kinds[kinds.len() - 1]);
        let counter = |k: ResourceKind| match set {
            ResourceSet::Rps => k.counter(),
            ResourceSet::Pd => k,
        };
        let event_line = rec.map_or_else(|| format!("No interaction has occurred yet at step {}.", ctx.obs.step), Self::event_line);
        let reply = self.ask_map(
            PromptKind::TomPredict,
            &[
                ("event_line", event_line),
                ("opponent", opponent.to_string()),
                ("history", history.to_string()),
                ("hypothesis", hypothesis.to_string()),
                ("kind_a", a.strategy().to_string()),
                ("inventory_a", Inventory::pure(a, 4).to_literal().to_string()),
                ("counter_a", Inventory::pure(counter(a), 4).to_literal().to_string()),
                ("kind_b", b.strategy().to_string()),
                ("inventory_b", Inventory::pure(b, 4).to_literal().to_string()),
                ("counter_b", Inventory::pure(counter(b), 4).to_literal().to_string()),
            ],
        )?;
        let Some(map) = reply else {
            return Ok(None);
        };
        let inv = |key: &str| map.get_ci(key).and_then(|v| Inventory::from_literal(set, v).ok()).filter(|i| i.total() > 0);
        Ok(inv("predicted_opponent_next_inventory").zip(inv("my_next_inventory")))
    }

    fn tom_modular(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let idx = self.history.len() - 1;
        let rec = self.history[idx].clone();
        let o = rec.opponent;
        let est = self.estimate(idx)?;
        self.evaluate_round(o, est.as_ref());
        if self.bank.validated(o).is_none() {
            self.generate(idx, est.as_ref())?;
        }
        let active = self.bank.select_active(o)?.id;
        let history = self.history_with(o);
        let mut target = None;
        for id in self.bank.predictors(o) {
            let text = self.bank.get(o, id).map(|h| h.text.clone()).unwrap_or_default();
            let Some((predicted, mine)) = self.predict_call(ctx, &o.label(), &history, &text, Some(&rec))? else {
                continue;
            };
            self.bank.set_prediction(o, id, BehaviorFeature::Resource(predicted.argmax()));
            if id == active {
                self.predicted.insert(o, predicted);
                target = Some(mine);
            }
        }
        let mut seek = vec![o];
        if self.substrate == SubstrateId::RwsArena {
            if let Some((list, mine)) = self.seekout(&rec)? {
                seek = list;
                target = Some(mine).or(target);
            }
        }
        if let Some(target) = target {
            let names: Vec<String> = seek.iter().map(|p| p.label()).collect();
            self.plan = Some(HighLevelPlan {
                text: format!("Collect a strong {} inventory and then duel {}.", target.argmax().strategy(), names.join(" or ")),
                target: Some(target),
                seek,
            });
        }
        Ok(())
    }

    /// Step 5 in the arena: whom to look for and what to play.
    fn seekout(&mut self, rec: &InteractionRecord) -> Result<Option<(Vec<PlayerId>, Inventory)>> {
        let set = self.set();
        let mut guesses = Vec::new();
        for o in self.bank.streams.keys().copied().collect::<Vec<_>>() {
            let Ok(h) = self.bank.select_active(o) else { continue };
            let Some(predicted) = self.predicted.get(&o) else { continue };
            guesses.push((
                o.label(),
                LiteralValue::Map(vec![
                    ("hypothesis".into(), LiteralValue::str(h.text.clone())),
                    ("value".into(), LiteralValue::Real((h.value * 1000.0).round() / 1000.0)),
                    ("predicted_next_inventory".into(), predicted.to_literal()),
                ]),
            ));
        }
        let reply = self.ask_map(
            PromptKind::TomSeekout,
            &[
                ("opponent", rec.opponent.label()),
                ("step", s(rec.step)),
                ("last_interaction", Self::last_interaction_text(rec)),
                ("history", self.history_with(rec.opponent)),
                ("overall_history", history_literal(&self.history)),
                ("guesses", LiteralValue::Map(guesses).to_string()),
                ("threshold", s(self.bank.params.v_thr)),
                ("agent_id", self.me.label()),
            ],
        )?;
        let Some(map) = reply else {
            return Ok(None);
        };
        let seek: Vec<PlayerId> = map
            .get_ci("opponents_to_seekout")
            .and_then(LiteralValue::as_seq)
            .unwrap_or_default()
            .iter()
            .filter_map(|v| v.as_str().and_then(PlayerId::from_label))
            .filter(|p| *p != self.me)
            .collect();
        let mine = map.get_ci("my_next_inventory").and_then(|v| Inventory::from_literal(set, v).ok()).filter(|i| i.total() > 0);
        Ok(mine.map(|m| (seek, m)))
    }

    fn tom_vanilla(&mut self, _ctx: &ActContext<'_>) -> Result<()> {
        let set = self.set();
        let idx = self.history.len() - 1;
        let rec = self.history[idx].clone();
        let o = rec.opponent;
        let k = set.kinds()[0];
        let counter = match set {
            ResourceSet::Rps => k.counter(),
            ResourceSet::Pd => k,
        };
        let reply = self.ask_map(
            PromptKind::TomVanilla,
            &[
                ("rewards", self.rewards_text()),
                ("opponent", o.label()),
                ("step", s(rec.step)),
                ("last_interaction", Self::last_interaction_text(&rec)),
                ("history", self.history_with(o)),
                ("example_inventory", Inventory::pure(k, 4).to_literal().to_string()),
                ("example_kind", k.strategy().to_string()),
                ("example_counter", Inventory::pure(counter, 4).to_literal().to_string()),
            ],
        )?;
        let inv = |key: &str| {
            reply.as_ref().and_then(|m| m.get_ci(key)).and_then(|v| Inventory::from_literal(set, v).ok()).filter(|i| i.total() > 0)
        };
        let est = inv("possible_opponent_inventory");
        self.history[idx].estimated_opponent = est.clone();
        self.evaluate_round(o, est.as_ref());
        let text = reply
            .as_ref()
            .and_then(|m| m.get_ci("Opponent_strategy"))
            .and_then(LiteralValue::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| self.fallback_hypothesis(est.as_ref()));
        let id = self.bank.add(o, &text, self.history.len());
        if let Some(predicted) = inv("predicted_opponent_next_inventory") {
            self.bank.set_prediction(o, id, BehaviorFeature::Resource(predicted.argmax()));
            self.predicted.insert(o, predicted);
        }
        if let Some(target) = inv("my_next_inventory") {
            self.plan = Some(HighLevelPlan {
                text: format!("Collect a strong {} inventory and then duel {o}.", target.argmax().strategy()),
                target: Some(target),
                seek: vec![o],
            });
        }
        Ok(())
    }

    /// Counterfactual mode: strategies are scored by the realized reward of
    /// the executed one and by judged outcomes of the others.
    fn tom_counterfactual(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let idx = self.history.len() - 1;
        let rec = self.history[idx].clone();
        self.estimate(idx)?;
        let stream = self.me;
        let c = self.bank.params.c;
        if let Some(executed) = self.executed {
            let r = if rec.reward >= NEUTRAL_BAND {
                c
            } else if rec.reward <= -NEUTRAL_BAND {
                -c
            } else {
                0.0
            };
            self.bank.reward(stream, executed, r);
        }
        let others: Vec<(usize, Inventory)> = self
            .bank
            .top_k(stream)
            .iter()
            .filter(|h| Some(h.id) != self.executed)
            .filter_map(|h| Some((h.id, h.target.clone()?)))
            .collect();
        for (id, candidate) in others {
            let reply = self.ask_map(
                PromptKind::HehrCounterfactual,
                &[
                    ("opponent", rec.opponent.label()),
                    ("step", s(rec.step)),
                    ("last_interaction", Self::last_interaction_text(&rec)),
                    ("candidate_inventory", candidate.to_literal().to_string()),
                ],
            )?;
            let verdict = reply.as_ref().and_then(|m| m.get_ci("counterfactual_reward")).and_then(LiteralValue::as_str);
            match verdict.and_then(|v| outcome_reward(v, c)) {
                Some(r) => self.bank.reward(stream, id, r),
                None => self.note(format!("counterfactual for strategy {id} was not usable")),
            }
        }
        self.counterfactual_strategy(ctx, Some(&rec))
    }

    fn counterfactual_strategy(&mut self, ctx: &ActContext<'_>, rec: Option<&InteractionRecord>) -> Result<()> {
        let set = self.set();
        let stream = self.me;
        let top: Vec<LiteralValue> = self
            .bank
            .top_k(stream)
            .iter()
            .filter_map(|h| {
                Some(LiteralValue::Map(vec![
                    ("strategy".into(), LiteralValue::str(h.text.clone())),
                    ("value".into(), LiteralValue::Real((h.value * 1000.0).round() / 1000.0)),
                    ("my_next_inventory".into(), h.target.as_ref()?.to_literal()),
                ]))
            })
            .collect();
        let (opponent, history) = match rec {
            Some(r) => (r.opponent.label(), self.history_with(r.opponent)),
            None => (self.opponent_label(ctx), "[]".to_string()),
        };
        let k = set.kinds()[0];
        let reply = self.ask_map(
            PromptKind::HehrStrategy,
            &[
                ("rewards", self.rewards_text()),
                ("event_line", rec.map_or_else(|| "No interaction has occurred yet.".to_string(), Self::event_line)),
                ("opponent", opponent),
                ("history", history),
                ("top_strategies", LiteralValue::List(top).to_string()),
                ("example_kind", k.strategy().to_string()),
                ("example_inventory", Inventory::pure(k, 4).to_literal().to_string()),
            ],
        )?;
        let Some(map) = reply else {
            return Ok(());
        };
        let text = map.get_ci("my_strategy").and_then(LiteralValue::as_str).map(str::to_string);
        let target = map.get_ci("my_next_inventory").and_then(|v| Inventory::from_literal(set, v).ok()).filter(|i| i.total() > 0);
        if let (Some(text), Some(target)) = (text, target) {
            let id = self.bank.add(stream, &text, self.history.len());
            self.bank.set_target(stream, id, target.clone());
            self.executed = Some(id);
            let seek = rec.map(|r| vec![r.opponent]).unwrap_or_default();
            self.plan = Some(HighLevelPlan { text, target: Some(target), seek });
        }
        Ok(())
    }

    // ------------------------------------------------------------ theory of mind: kitchen

    fn tom_cooking(&mut self, ctx: &ActContext<'_>) -> Result<()> {
        let Some(teammate) = self.others(ctx).first().copied() else {
            return Ok(());
        };
        let round = self.history.len() + self.bank.hypotheses(teammate).iter().map(|h| h.log.len()).sum::<usize>();
        let latest = string_list(&self.since_trigger);
        // evaluate each pending prediction with a separate judgment
        let pending: Vec<(usize, BehaviorFeature)> = self
            .bank
            .hypotheses(teammate)
            .iter()
            .filter_map(|h| Some((h.id, h.pending.clone()?)))
            .collect();
        let mut verdicts = BTreeMap::new();
        for (id, predicted) in &pending {
            let reply = self.ask_map(
                PromptKind::CookingEvaluate,
                &[
                    ("step", s(self.step)),
                    ("teammate", teammate.label()),
                    ("predicted_next_behavior", predicted.to_string()),
                    ("latest_teammate_actions", latest.clone()),
                ],
            )?;
            let verdict = reply.as_ref().and_then(|m| m.get_ci("evaluate_predicted_behavior")).and_then(LiteralValue::as_bool);
            verdicts.insert(*id, verdict);
        }
        if !pending.is_empty() {
            let by_label: BTreeMap<String, Option<bool>> =
                pending.iter().map(|(id, p)| (p.to_string(), verdicts.get(id).copied().flatten())).collect();
            let actual = BehaviorFeature::Label(self.since_trigger.last().cloned().unwrap_or_else(|| "nothing".into()));
            self.bank.evaluate_with(teammate, round, Some(&actual), |p| by_label.get(&p.to_string()).copied().flatten());
        }

        if self.bank.validated(teammate).is_none() {
            let start = self.teammate_actions.len().saturating_sub(TEAMMATE_WINDOW);
            let recent = string_list(&self.teammate_actions[start..]);
            let top: Vec<String> = self.bank.refinement_context(teammate).iter().map(|h| h.text.clone()).collect();
            let reply = self.ask_map(
                PromptKind::CookingInfer,
                &[("teammate", teammate.label()), ("teammate_actions", recent), ("top_hypotheses", string_list(&top))],
            )?;
            let text = reply
                .as_ref()
                .and_then(|m| m.get_ci("Teammate_strategy"))
                .and_then(LiteralValue::as_str)
                .map(str::to_string)
                .unwrap_or_else(|| "My teammate is not doing anything useful in the kitchen.".into());
            self.bank.add(teammate, &text, round);
        }

        let active = self.bank.select_active(teammate)?.id;
        for id in self.bank.predictors(teammate) {
            let text = self.bank.get(teammate, id).map(|h| h.text.clone()).unwrap_or_default();
            let reply = self.ask_map(
                PromptKind::CookingPredict,
                &[("step", s(self.step)), ("teammate", teammate.label()), ("hypothesis", text)],
            )?;
            if let Some(label) = reply.as_ref().and_then(|m| m.get_ci("predicted_next_behavior")).and_then(LiteralValue::as_str) {
                self.bank.set_prediction(teammate, id, BehaviorFeature::Label(label.to_string()));
            }
        }
        let active_text = self.bank.get(teammate, active).map(|h| h.text.clone()).unwrap_or_default();
        self.cooking_strategy(active_text)
    }

    fn cooking_strategy(&mut self, teammate_strategy: String) -> Result<()> {
        let reply = self.ask_map(
            PromptKind::CookingStrategy,
            &[("step", s(self.step)), ("agent_id", self.me.label()), ("teammate_strategy", teammate_strategy)],
        )?;
        if let Some(text) = reply.as_ref().and_then(|m| m.get_ci("high_level_strategy")).and_then(LiteralValue::as_str) {
            self.plan = Some(HighLevelPlan { text: text.to_string(), target: None, seek: Vec::new() });
        }
        Ok(())
    }
}

impl Controller for LlmAgent {
    fn name(&self) -> String {
        let kind = serde_json::to_value(self.spec.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        format!("agent:{kind}")
    }

    fn act(&mut self, ctx: &ActContext<'_>) -> Result<AtomicAction> {
        let r = self.act_inner(ctx);
        self.flush();
        r
    }

    fn drain_records(&mut self) -> Vec<LogRecord> {
        self.flush();
        std::mem::take(&mut self.records)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "agent": self.spec,
            "effective_kind": self.kind,
            "tom_params": self.bank.params,
            "backend": self.client.backend_name(),
        })
    }
}

/// Scripted background bots for a scenario plus the agent as player 0.
pub fn scenario_controllers(
    spec: &AgentSpec,
    config: &crate::game::EpisodeConfig,
    reasoner: Arc<dyn Reasoner>,
) -> Result<Vec<Box<dyn Controller>>> {
    let bots = crate::bots::build_scenario(config.substrate, config.scenario, config.seed)?;
    let mut out: Vec<Box<dyn Controller>> = vec![Box::new(LlmAgent::new(spec.clone(), config.substrate, PlayerId(0), reasoner)?)];
    out.extend(bots.into_iter().map(|b| Box::new(crate::bots::ScriptedBot::new(b)) as Box<dyn Controller>));
    Ok(out)
}

/// Layout-independent helper: a fresh agent for tests and tools.
pub fn oracle_agent(kind: AgentKind, substrate: SubstrateId, me: PlayerId) -> Result<LlmAgent> {
    LlmAgent::new(AgentSpec::new(kind, substrate), substrate, me, Arc::new(crate::reasoner::OracleReasoner))
}
