//! Acceptance suite. Runs with a plain `main` so every criterion prints its
//! PASS/FAIL line even when the run succeeds; any FAIL makes the process exit
//! non-zero. Only the offline oracle backend is used.

use hm_core::agents::{scenario_controllers, AgentKind, AgentSpec};
use hm_core::bots::{build_scenario, pd_next_play, rws_next_target, Behavior, BotSpec, BotState, ScriptedBot};
use hm_core::cooking::{CookingEvent, DELIVERY_REWARD, TOMATOES_PER_SOUP};
use hm_core::game::{
    own_interaction, run_episode, Controller, EpisodeConfig, EpisodeResult, GameEvent, LogRecord, PlayerId, COOK_DURATION,
};
use hm_core::geometry::{Dims, GridPos, Orientation};
use hm_core::harness::{self, first_validation, interaction_offset_analysis};
use hm_core::literal::{parse_literal, parse_response_map, LiteralValue};
use hm_core::matrix::{resolve_interaction, PayoffMatrix};
use hm_core::perception::{parse_observation, serialize_observation, EntityKind, StructuredObservation};
use hm_core::planner::{compile_move_to, GridView, ObstacleTier};
use hm_core::reasoner::{Cassette, CassetteMode, CassetteReasoner, OracleReasoner, Reasoner};
use hm_core::substrate::{Inventory, ResourceKind, SubstrateId};
use hm_core::tom::{rescorla_wagner, BehaviorFeature, HypothesisBank, TomParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

const PAYOFF_TOL: f64 = 1e-3;
const VALUE_TOL: f64 = 1e-9;
const RANDOM_PAIRS: usize = 10_000;
const EPISODE_SEEDS: u64 = 20;
const VALIDATED_FRACTION: f64 = 0.90;
const COUNTER_FRACTION: f64 = 0.95;
const RANDOM_MAPS: usize = 1000;
const LITERALS: usize = 10_000;
const MIX_DRAWS: u64 = 10_000;
const MIX_TOL: f64 = 0.02;
const MIN_SCRIPTED_DISHES: usize = 10;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn oracle_episode(sub: SubstrateId, scenario: u32, seed: u64) -> EpisodeResult {
    let cfg = EpisodeConfig::new(sub, scenario, seed);
    let spec = AgentSpec::new(AgentKind::HypotheticalMinds, sub);
    let mut c = scenario_controllers(&spec, &cfg, Arc::new(OracleReasoner)).expect("controllers");
    run_episode(&cfg, &mut c).expect("episode")
}

fn sweep(sub: SubstrateId, scenario: u32) -> Vec<EpisodeResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..EPISODE_SEEDS).map(|seed| s.spawn(move || oracle_episode(sub, scenario, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("episode thread")).collect()
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Both inventories of every interaction player 0 took part in, own first.
fn focal_duels(r: &EpisodeResult) -> Vec<(Inventory, Inventory)> {
    r.events()
        .filter_map(|(_, e)| match e {
            GameEvent::Interaction { shooter, target, shooter_inventory, target_inventory, .. } => {
                if shooter.0 == 0 {
                    Some((shooter_inventory.clone(), target_inventory.clone()))
                } else if target.0 == 0 {
                    Some((target_inventory.clone(), shooter_inventory.clone()))
                } else {
                    None
                }
            }
            _ => None,
        })
        .collect()
}

// ------------------------------------------------------------ 1, 2: payoffs

fn c1_payoff_examples() -> Outcome {
    let a = PayoffMatrix::rock_paper_scissors();
    let cases = [
        (Inventory::rps(5, 1, 1), Inventory::rps(1, 1, 6), 3.571),
        (Inventory::rps(3, 1, 1), Inventory::rps(1, 5, 1), -2.286),
        (Inventory::rps(1, 4, 1), Inventory::rps(3, 1, 1), 2.0),
    ];
    let mut got = Vec::new();
    for (row, col, want) in cases {
        let (r, _) = resolve_interaction(&row, &col, &a).map_err(|e| e.to_string())?;
        check((r - want).abs() <= PAYOFF_TOL, || format!("{} vs {}: {r}, want {want}", row.tuple_string(), col.tuple_string()))?;
        got.push(format!("{r:+.3}"));
    }
    Ok(format!("rewards {} within {PAYOFF_TOL}", got.join(", ")))
}

fn random_inventory(rng: &mut ChaCha8Rng) -> Inventory {
    loop {
        let inv = Inventory::rps(rng.gen_range(0..12), rng.gen_range(0..12), rng.gen_range(0..12));
        if inv.total() > 0 {
            return inv;
        }
    }
}

fn c2_zero_sum_and_scale() -> Outcome {
    let a = PayoffMatrix::rock_paper_scissors();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..RANDOM_PAIRS {
        let (x, y) = (random_inventory(&mut rng), random_inventory(&mut rng));
        let (r, c) = resolve_interaction(&x, &y, &a).map_err(|e| e.to_string())?;
        check(r + c == 0.0, || format!("{x:?} vs {y:?}: {r} + {c} != 0"))?;
        let (k, m) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let (rs, _) = resolve_interaction(&x.scaled(k), &y.scaled(m), &a).map_err(|e| e.to_string())?;
        check(rs == r, || format!("{x:?}x{k} vs {y:?}x{m}: {rs} != {r}"))?;
    }
    Ok(format!("{RANDOM_PAIRS} pairs exactly zero-sum and scale-invariant"))
}

// ------------------------------------------------------------ 3: values

fn c3_value_dynamics() -> Outcome {
    let p = PlayerId(1);
    let rock = BehaviorFeature::Resource(ResourceKind::Rock);
    let paper = BehaviorFeature::Resource(ResourceKind::Paper);
    let mut bank = HypothesisBank::new(TomParams::default());
    let id = bank.add(p, "always rock", 0);
    for round in 1..=4 {
        check(bank.validated(p).is_none(), || format!("validated early at round {round}"))?;
        bank.set_prediction(p, id, rock.clone());
        bank.evaluate(p, &rock, round);
    }
    let v = bank.get(p, id).unwrap().value;
    check((v - 0.7599).abs() <= VALUE_TOL, || format!("value {v} after four hits"))?;
    check(bank.validated(p).is_some(), || "not validated after four hits".into())?;

    bank.set_prediction(p, id, rock.clone());
    bank.evaluate(p, &paper, 5);
    let after_miss = bank.get(p, id).unwrap().value;
    check(bank.validated(p).is_none(), || format!("one miss left value {after_miss} validated"))?;

    // boundedness over random reward streams, for both parameter sets
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for params in [TomParams::default(), TomParams::counterfactual()] {
        for _ in 0..1000 {
            let mut v = 0.0;
            for _ in 0..100 {
                let r = [-params.c, 0.0, params.c][rng.gen_range(0..3)];
                v = rescorla_wagner(v, r, params.alpha);
                check(v.abs() <= params.c, || format!("value {v} escaped [-{0}, {0}]", params.c))?;
            }
        }
    }
    Ok(format!("V={v:.4} after 4 hits, {after_miss:.4} after one miss; bounded"))
}

// ------------------------------------------------------------ 4-6: episodes

fn c4_pure_opponents(results: &BTreeMap<u32, Vec<EpisodeResult>>) -> Outcome {
    let mut lines = Vec::new();
    for sc in [6, 7, 8] {
        let eps = &results[&sc];
        check(eps.iter().all(|r| r.failure.is_none()), || format!("SC{sc}: failed episodes"))?;
        check(eps.iter().all(|r| r.steps == 1200), || format!("SC{sc}: episode shorter than 1200 steps"))?;
        let validated = eps.iter().filter(|r| first_validation(r, PlayerId(0)).is_some()).count();
        let frac = validated as f64 / eps.len() as f64;
        check(frac >= VALIDATED_FRACTION, || format!("SC{sc}: {validated}/{} validated", eps.len()))?;

        let (mut hits, mut total) = (0usize, 0usize);
        for r in eps {
            let Some(v) = first_validation(r, PlayerId(0)) else { continue };
            for (own, opp) in focal_duels(r).into_iter().skip(v) {
                total += 1;
                hits += usize::from(own.argmax() == opp.argmax().counter());
            }
        }
        let counter = hits as f64 / total.max(1) as f64;
        check(total > 0 && counter >= COUNTER_FRACTION, || format!("SC{sc}: counter rate {hits}/{total}"))?;

        let m = mean(&eps.iter().map(|r| r.total_rewards[0]).collect::<Vec<_>>());
        check(m > 0.0, || format!("SC{sc}: mean reward {m}"))?;
        lines.push(format!("SC{sc} validated {:.0}% counter {:.1}% reward {m:.1}", frac * 100.0, counter * 100.0));
    }
    Ok(lines.join("; "))
}

fn c5_best_response_opponent(eps: &[EpisodeResult]) -> Outcome {
    check(eps.iter().all(|r| r.failure.is_none()), || "failed episodes".into())?;
    let m = mean(&eps.iter().map(|r| r.total_rewards[0]).collect::<Vec<_>>());
    check(m > 0.0, || format!("mean reward {m}"))?;
    for (seed, r) in eps.iter().enumerate() {
        let kinds: BTreeSet<ResourceKind> =
            r.events().filter_map(|(_, e)| own_interaction(e, PlayerId(0))).map(|o| o.own_inventory.argmax()).collect();
        check(kinds.len() == 3, || format!("seed {seed}: plays only {kinds:?}"))?;
    }
    Ok(format!("mean reward {m:.1}, every episode plays all three kinds"))
}

fn c6_offset(all: &[EpisodeResult]) -> Outcome {
    let curve = interaction_offset_analysis(all, PlayerId(0));
    let (Some(pre), Some(post)) = (curve.pre_mean, curve.post_mean) else {
        return Err(format!("missing side of the curve: {:?} / {:?}", curve.pre_mean, curve.post_mean));
    };
    check(post > pre, || format!("post {post} <= pre {pre}"))?;
    Ok(format!("pre {pre:.3} < post {post:.3} over {} episodes", curve.episodes_used))
}

// ------------------------------------------------------------ 7: planner

fn bfs_distance(view: &GridView, src: GridPos, dst: GridPos, blocked: impl Fn(GridPos) -> bool) -> Option<usize> {
    let mut dist = HashMap::from([(src, 0usize)]);
    let mut q = VecDeque::from([src]);
    while let Some(p) = q.pop_front() {
        if p == dst {
            return Some(dist[&p]);
        }
        for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
            let n = GridPos::new(p.x + dx, p.y + dy);
            if view.dims.contains(n) && !view.blocked.contains(&n) && !blocked(n) && !dist.contains_key(&n) {
                dist.insert(n, dist[&p] + 1);
                q.push_back(n);
            }
        }
    }
    None
}

fn random_view(rng: &mut ChaCha8Rng, with_resources: bool) -> GridView {
    let mut view = GridView::new(Dims { width: 15, height: 15 });
    for p in view.dims.cells() {
        if rng.gen_bool(0.2) {
            view.blocked.insert(p);
        } else if with_resources && rng.gen_bool(0.2) {
            view.resources.insert(p, [ResourceKind::Rock, ResourceKind::Paper, ResourceKind::Scissors][rng.gen_range(0..3)]);
        }
    }
    view
}

fn random_open_cell(rng: &mut ChaCha8Rng, view: &GridView) -> GridPos {
    loop {
        let p = GridPos::new(rng.gen_range(0..15), rng.gen_range(0..15));
        if !view.blocked.contains(&p) {
            return p;
        }
    }
}

/// Replays the plan's actions from `src` and checks it is a legal walk to `dst`.
fn walk_is_legal(view: &GridView, src: GridPos, facing: Orientation, dst: GridPos, plan: &hm_core::planner::MovePlan) -> bool {
    let mut p = src;
    for a in &plan.actions {
        let Some(dir) = a.move_direction(facing) else { return false };
        p = p.step(dir);
        if !view.passable(p) {
            return false;
        }
    }
    p == dst && plan.path.len() == plan.actions.len() + 1
}

fn c7_move_to() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut reachable = 0;
    for i in 0..RANDOM_MAPS {
        let view = random_view(&mut rng, false);
        let (src, dst) = (random_open_cell(&mut rng, &view), random_open_cell(&mut rng, &view));
        let facing = Orientation::from_index(rng.gen_range(0..4));
        match (compile_move_to(&view, src, facing, dst), bfs_distance(&view, src, dst, |_| false)) {
            (Ok(plan), Some(d)) => {
                reachable += 1;
                check(plan.actions.len() == d, || format!("map {i}: {} steps, BFS {d}", plan.actions.len()))?;
                check(walk_is_legal(&view, src, facing, dst, &plan), || format!("map {i}: illegal walk"))?;
            }
            (Err(_), None) => {}
            (a, b) => return Err(format!("map {i}: planner {:?} vs BFS {b:?}", a.map(|p| p.actions.len()))),
        }
    }

    // tier minimality with resources on the grid
    let mut tiers = BTreeMap::new();
    for i in 0..RANDOM_MAPS {
        let view = random_view(&mut rng, true);
        let (src, dst) = (random_open_cell(&mut rng, &view), random_open_cell(&mut rng, &view));
        if src == dst {
            continue;
        }
        let kind = view.resources.get(&dst).copied();
        let rule = |tier: ObstacleTier| {
            let view = &view;
            move |p: GridPos| {
                p != dst
                    && match (view.resources.get(&p), tier) {
                        (None, _) | (_, ObstacleTier::AllowAny) => false,
                        (Some(_), ObstacleTier::AvoidAllOtherResources) => true,
                        (Some(k), ObstacleTier::AllowSameKindAsTarget) => Some(*k) != kind,
                    }
            }
        };
        let expected = ObstacleTier::ORDER
            .into_iter()
            .filter(|t| *t != ObstacleTier::AllowSameKindAsTarget || kind.is_some())
            .find_map(|t| bfs_distance(&view, src, dst, rule(t)).map(|d| (t, d)));
        match (compile_move_to(&view, src, Orientation::N, dst), expected) {
            (Ok(plan), Some((tier, d))) => {
                check(plan.tier == tier && plan.actions.len() == d, || {
                    format!("map {i}: {:?}/{} vs expected {tier:?}/{d}", plan.tier, plan.actions.len())
                })?;
                check(plan.path.iter().skip(1).all(|p| !rule(tier)(*p)), || format!("map {i}: path crosses a tier obstacle"))?;
                *tiers.entry(format!("{tier:?}")).or_insert(0) += 1;
            }
            (Err(_), None) => {}
            (a, b) => return Err(format!("map {i}: planner {:?} vs expected {b:?}", a.map(|p| p.tier))),
        }
    }
    check(tiers.len() == 3, || format!("tier coverage too thin: {tiers:?}"))?;
    Ok(format!("{RANDOM_MAPS} maps ({reachable} reachable) match BFS; tiers minimal {tiers:?}"))
}

// ------------------------------------------------------------ 8: parser

fn random_string(rng: &mut ChaCha8Rng) -> String {
    const CHARS: &[char] = &['a', 'b', 'Z', '0', ' ', '_', '/', '\'', '"', '\\', '\n', '\t', 'é', '{', ']', ':', ','];
    (0..rng.gen_range(0..8)).map(|_| CHARS[rng.gen_range(0..CHARS.len())]).collect()
}

fn random_literal(rng: &mut ChaCha8Rng, depth: u32) -> LiteralValue {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return match rng.gen_range(0..4) {
            0 => LiteralValue::Int(if rng.gen_bool(0.1) { [i64::MIN, i64::MAX][rng.gen_range(0..2)] } else { rng.gen_range(-1000..1000) }),
            1 => {
                let x: f64 = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-20..20));
                LiteralValue::Real(x)
            }
            2 => LiteralValue::Bool(rng.gen()),
            _ => LiteralValue::Str(random_string(rng)),
        };
    }
    let n = rng.gen_range(0..4);
    match rng.gen_range(0..3) {
        0 => LiteralValue::List((0..n).map(|_| random_literal(rng, depth - 1)).collect()),
        1 => LiteralValue::Tuple((0..n).map(|_| random_literal(rng, depth - 1)).collect()),
        _ => {
            let mut keys = BTreeSet::new();
            let mut entries = Vec::new();
            for _ in 0..n {
                let k = random_string(rng);
                if keys.insert(k.clone()) {
                    entries.push((k, random_literal(rng, depth - 1)));
                }
            }
            LiteralValue::Map(entries)
        }
    }
}

fn c8_parser() -> Outcome {
    use LiteralValue::*;
    let goldens: Vec<(&str, LiteralValue)> = vec![
        (
            "{'rock/yellow': 5, 'paper/purple': 1, 'scissors/blue': 1}",
            Map(vec![("rock/yellow".into(), Int(5)), ("paper/purple".into(), Int(1)), ("scissors/blue".into(), Int(1))]),
        ),
        ("{'evaluate_predicted_behavior': True}", Map(vec![("evaluate_predicted_behavior".into(), Bool(true))])),
        (
            "{'action_plan': ['move_to((21, 4), (13, 10))', 'fire_at((14, 11))']}",
            Map(vec![(
                "action_plan".into(),
                List(vec![Str("move_to((21, 4), (13, 10))".into()), Str("fire_at((14, 11))".into())]),
            )]),
        ),
        ("[(1, 2), (3, -4),]", List(vec![Tuple(vec![Int(1), Int(2)]), Tuple(vec![Int(3), Int(-4)])])),
        ("((7,))", Tuple(vec![Int(7)])),
        ("{\"x\": -1.5e2, 'y': \"it's\"}", Map(vec![("x".into(), Real(-150.0)), ("y".into(), Str("it's".into()))])),
    ];
    for (text, want) in &goldens {
        let got = parse_literal(text).map_err(|e| format!("{text}: {e}"))?;
        check(&got == want, || format!("{text}: got {got:?}"))?;
    }
    let fenced = "Sure.\n```python\n{'my_next_inventory': {'rock/yellow': 1, 'paper/purple': 5, 'scissors/blue': 1}}\n```\n";
    let v = parse_response_map(fenced).map_err(|e| e.to_string())?;
    check(v.get("my_next_inventory").is_some(), || "fenced block not extracted".into())?;
    let err = parse_literal("{'a': [}").err().ok_or("malformed input accepted")?;
    check((err.line, err.column) == (1, 8), || format!("error at {}:{}", err.line, err.column))?;
    check(parse_literal("__import__('os')").is_err(), || "identifier accepted".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..LITERALS {
        let v = random_literal(&mut rng, 4);
        let text = v.to_string();
        let back = parse_literal(&text).map_err(|e| format!("literal {i} {text:?}: {e}"))?;
        check(back == v, || format!("literal {i}: {text:?} came back as {back:?}"))?;
    }
    Ok(format!("{} goldens, {LITERALS} random literals round-trip", goldens.len()))
}

// ------------------------------------------------------------ 9: bots

fn c9_bots() -> Outcome {
    use ResourceKind::{Cooperate as C, Defect as D, Paper, Rock, Scissors};
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pd = SubstrateId::PdRepeated;
    for trial in 0..200 {
        let focal: Vec<ResourceKind> = (0..30).map(|_| if rng.gen_bool(0.5) { C } else { D }).collect();

        let tft = BotSpec::new(pd, Behavior::TitForTat, 3, trial).unwrap();
        let mut st = BotState::new(&tft);
        let mut prev = None;
        for &f in &focal {
            let play = pd_next_play(&tft, &mut st);
            check(play == prev.unwrap_or(C), || format!("tit-for-tat played {play:?} after {prev:?}"))?;
            st.record_interaction(play, f);
            prev = Some(f);
        }

        let trigger = rng.gen_range(1..4);
        let grim = BotSpec::new(pd, Behavior::Grim { trigger }, 3, trial).unwrap();
        let mut st = BotState::new(&grim);
        let (mut defections, mut fired) = (0, false);
        for &f in &focal {
            let play = pd_next_play(&grim, &mut st);
            fired |= defections >= trigger;
            check(play == if fired { D } else { C }, || format!("grim({trigger}) played {play:?} after {defections} defections"))?;
            st.record_interaction(play, f);
            defections += u32::from(f == D);
        }
    }
    for initial in [Rock, Paper, Scissors] {
        let spec = BotSpec::new(SubstrateId::RwsRepeated, Behavior::FlipAfter2 { initial }, 1, 0).unwrap();
        let mut st = BotState::new(&spec);
        for n in 0..8 {
            let (kind, commitment) = rws_next_target(&spec, &mut st);
            let want = if n < 2 { (initial, 1) } else { (initial.counter().counter(), 5) };
            check((kind, commitment) == want, || format!("flip from {initial:?}: round {n} played {kind:?}/{commitment}"))?;
            st.record_interaction(kind, [Rock, Paper, Scissors][rng.gen_range(0..3)]);
        }
        let spec = BotSpec::new(SubstrateId::RwsRepeated, Behavior::Pure { kind: initial }, 5, 0).unwrap();
        let mut st = BotState::new(&spec);
        for _ in 0..50 {
            check(rws_next_target(&spec, &mut st) == (initial, 5), || format!("pure {initial:?} changed"))?;
            st.record_interaction(initial, [Rock, Paper, Scissors][rng.gen_range(0..3)]);
        }
    }

    // mixture draws: scenario 2 is pure 3/4, best response 1/4 with random pure kinds
    let mut pure = 0u64;
    let mut kinds: BTreeMap<ResourceKind, u64> = BTreeMap::new();
    for seed in 0..MIX_DRAWS {
        let bots = build_scenario(SubstrateId::RwsRepeated, 2, seed).map_err(|e| e.to_string())?;
        if let Behavior::Pure { kind } = bots[0].behavior {
            pure += 1;
            *kinds.entry(kind).or_default() += 1;
        }
    }
    let frac = pure as f64 / MIX_DRAWS as f64;
    check((frac - 0.75).abs() <= MIX_TOL, || format!("pure fraction {frac}"))?;
    for (k, n) in &kinds {
        let f = *n as f64 / pure as f64;
        check((f - 1.0 / 3.0).abs() <= MIX_TOL, || format!("kind {k:?} fraction {f}"))?;
    }
    Ok(format!("contracts hold; pure share {:.3} (want 0.75 +/- {MIX_TOL}), kinds uniform", frac))
}

// ------------------------------------------------------------ 10: cooking

/// Checks every delivery against the state that must precede it and returns
/// the number of deliveries.
fn causal_chain(r: &EpisodeResult) -> Result<usize, String> {
    let mut pots: HashMap<GridPos, (u8, u64)> = HashMap::new();
    let mut holding_soup: HashMap<PlayerId, bool> = HashMap::new();
    let mut deliveries = 0;
    let mut rewards_at: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for rec in &r.records {
        if let LogRecord::Reward { step, rewards } = rec {
            rewards_at.insert(*step, rewards.clone());
        }
    }
    let mut delivered_at: BTreeMap<u64, usize> = BTreeMap::new();
    for (step, e) in r.events() {
        let GameEvent::Cooking { player, event, target } = e else { continue };
        match event {
            CookingEvent::PutTomatoInPot => {
                let pot = pots.entry(*target).or_insert((0, 0));
                pot.0 += 1;
                if pot.0 == TOMATOES_PER_SOUP {
                    pot.1 = step;
                }
                check(pot.0 <= TOMATOES_PER_SOUP, || format!("step {step}: pot {target} overfilled"))?;
            }
            CookingEvent::PlatedSoup => {
                let pot = pots.get(target).copied().unwrap_or((0, 0));
                check(pot.0 == TOMATOES_PER_SOUP && step >= pot.1 + u64::from(COOK_DURATION), || {
                    format!("step {step}: plated from pot {target} holding {} tomatoes filled at {}", pot.0, pot.1)
                })?;
                pots.insert(*target, (0, 0));
                holding_soup.insert(*player, true);
            }
            CookingEvent::DeliveredSoup => {
                check(holding_soup.insert(*player, false) == Some(true), || format!("step {step}: {player} delivered without soup"))?;
                deliveries += 1;
                *delivered_at.entry(step).or_default() += 1;
            }
            _ => {}
        }
    }
    for (step, rewards) in &rewards_at {
        let n = delivered_at.get(step).copied().unwrap_or(0) as f64;
        check(rewards.iter().all(|x| *x == n * DELIVERY_REWARD), || format!("step {step}: rewards {rewards:?} for {n} deliveries"))?;
    }
    check(delivered_at.keys().all(|s| rewards_at.contains_key(s)), || "delivery without reward".into())?;
    let total = deliveries as f64 * DELIVERY_REWARD;
    check(r.total_rewards.iter().all(|x| *x == total), || format!("totals {:?} for {deliveries} deliveries", r.total_rewards))?;
    Ok(deliveries)
}

fn c10_cooking() -> Outcome {
    let cfg = EpisodeConfig::new(SubstrateId::Cooking, 0, 0);
    let partner = build_scenario(SubstrateId::Cooking, 0, 0).map_err(|e| e.to_string())?.remove(0);
    let me = BotSpec::new(SubstrateId::Cooking, Behavior::SkilledChef, 1, 77).map_err(|e| e.to_string())?;
    let mut bots: Vec<Box<dyn Controller>> = vec![Box::new(ScriptedBot::new(me)), Box::new(ScriptedBot::new(partner))];
    let scripted = run_episode(&cfg, &mut bots).map_err(|e| e.to_string())?;
    let dishes = causal_chain(&scripted)?;
    check(dishes >= MIN_SCRIPTED_DISHES, || format!("scripted pair delivered {dishes}"))?;

    let hm = oracle_episode(SubstrateId::Cooking, 2, 0);
    check(hm.failure.is_none(), || format!("agent episode failed: {:?}", hm.failure))?;
    let hm_dishes = causal_chain(&hm)?;
    check(hm_dishes >= 1, || "agent with unhelpful partner delivered nothing".into())?;
    Ok(format!("scripted pair {dishes} dishes, agent with unhelpful partner {hm_dishes}, +{DELIVERY_REWARD} each"))
}

// ------------------------------------------------------------ 11: replay

fn c11_replay() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = EpisodeConfig::new(SubstrateId::RwsRepeated, 1, 3);
    let a = oracle_episode(cfg.substrate, cfg.scenario, cfg.seed);
    let b = oracle_episode(cfg.substrate, cfg.scenario, cfg.seed);
    check(a.to_jsonl() == b.to_jsonl(), || "two runs of one seed differ".into())?;
    let path = harness::episode_path(dir.path(), &cfg);
    std::fs::write(&path, a.to_jsonl()).map_err(|e| e.to_string())?;
    let report = harness::replay_file(&path).map_err(|e| e.to_string())?;
    check(report.identical, || format!("oracle replay differs at record {:?}", report.first_difference))?;

    // record through a cassette, then answer only from it
    let cfg = EpisodeConfig::new(SubstrateId::RwsRepeated, 6, 4);
    let spec = AgentSpec::new(AgentKind::HypotheticalMinds, cfg.substrate);
    let cassette = Cassette::open(harness::cassette_path(dir.path(), &cfg), CassetteMode::Record).map_err(|e| e.to_string())?;
    let inner: Arc<dyn Reasoner> = Arc::new(OracleReasoner);
    let recorder = Arc::new(CassetteReasoner::new(Some(inner), cassette));
    let mut c = scenario_controllers(&spec, &cfg, recorder).map_err(|e| e.to_string())?;
    let recorded = run_episode(&cfg, &mut c).map_err(|e| e.to_string())?;
    let path = harness::episode_path(dir.path(), &cfg);
    std::fs::write(&path, recorded.to_jsonl()).map_err(|e| e.to_string())?;
    let cassette_report = harness::replay_file(&path).map_err(|e| e.to_string())?;
    check(cassette_report.identical, || format!("cassette replay differs at record {:?}", cassette_report.first_difference))?;
    Ok(format!("oracle replay identical over {} records, cassette replay over {}", report.records, cassette_report.records))
}

// ------------------------------------------------------------ 12: observation text

fn c12_observation_string() -> Outcome {
    let mut obs = StructuredObservation::empty(SubstrateId::RwsRepeated, PlayerId(0), 0);
    obs.pose = Some((GridPos::new(21, 4), Orientation::S));
    obs.entities.insert(EntityKind::Resource(ResourceKind::Rock), [GridPos::new(13, 10), GridPos::new(14, 11)].into());
    obs.entities.insert(EntityKind::Resource(ResourceKind::Paper), [GridPos::new(13, 11), GridPos::new(15, 11)].into());
    let want = "Player Position: {'player_0-S': [(21, 4)]}, Observable Yellow Box Locations: [(13, 10), (14, 11)], \
                Observable Blue Box Locations: [], Observable Purple Box Locations: [(13, 11), (15, 11)]";
    let got = serialize_observation(&obs);
    check(got == want, || format!("got {got:?}"))?;
    let back = parse_observation(&got, SubstrateId::RwsRepeated, PlayerId(0), 0).map_err(|e| e.to_string())?;
    check(back == obs, || "parsed observation differs".into())?;
    Ok("exact string, parses back".into())
}

fn main() {
    let results: BTreeMap<u32, Vec<EpisodeResult>> = [1, 6, 7, 8].into_iter().map(|sc| (sc, sweep(SubstrateId::RwsRepeated, sc))).collect();
    let pure: Vec<EpisodeResult> = [6, 7, 8].iter().flat_map(|sc| results[sc].iter().cloned()).collect();

    let criteria: Vec<(&str, Outcome)> = vec![
        ("payoff examples", c1_payoff_examples()),
        ("zero-sum and scale invariance", c2_zero_sum_and_scale()),
        ("hypothesis value dynamics", c3_value_dynamics()),
        ("pure opponents, scenarios 6-8", c4_pure_opponents(&results)),
        ("best-response opponent, scenario 1", c5_best_response_opponent(&results[&1])),
        ("reward offset around validation", c6_offset(&pure)),
        ("move_to against BFS", c7_move_to()),
        ("literal parser", c8_parser()),
        ("bot contracts and mixtures", c9_bots()),
        ("cooking deliveries", c10_cooking()),
        ("replay", c11_replay()),
        ("observation string", c12_observation_string()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in criteria.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
