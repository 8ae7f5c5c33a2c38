//! The "in the Matrix" substrates: resource collection, zap-beam duels and
//! inventory-weighted matrix-game payoffs.

use crate::error::{HmError, Result};
use crate::game::{GameEvent, PlayerId, WorldState};
use crate::geometry::GridPos;
use crate::substrate::{Inventory, ResourceKind, ResourceSet};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Row-player payoff matrix `A_row`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn rock_paper_scissors() -> Self {
        Self { entries: vec![vec![0.0, -10.0, 10.0], vec![10.0, 0.0, -10.0], vec![-10.0, 10.0, 0.0]] }
    }

    pub fn prisoners_dilemma() -> Self {
        Self { entries: vec![vec![3.0, 0.0], vec![5.0, 1.0]] }
    }

    pub fn for_set(set: ResourceSet) -> Self {
        match set {
            ResourceSet::Rps => Self::rock_paper_scissors(),
            ResourceSet::Pd => Self::prisoners_dilemma(),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == -self.entries[j][i]))
    }

    /// `a^T A b`.
    fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, ai) in a.iter().enumerate() {
            let row: f64 = self.entries[i].iter().zip(b).map(|(m, bj)| m * bj).sum();
            total += ai * row;
        }
        total
    }
}

/// Payoffs for a duel between two inventories.
///
/// Each inventory is L1-normalized; the row reward is `v_row^T A v_col`. For an
/// antisymmetric (zero-sum) matrix the column reward is exactly `-r_row`,
/// otherwise the column player evaluates the same matrix from its own side,
/// `v_col^T A v_row`.
pub fn resolve_interaction(inv_row: &Inventory, inv_col: &Inventory, payoff: &PayoffMatrix) -> Result<(f64, f64)> {
    if inv_row.set != inv_col.set || inv_row.counts.len() != payoff.size() {
        return Err(HmError::Contract("inventories and payoff matrix disagree on resource kinds".into()));
    }
    let v_row = inv_row.normalized()?;
    let v_col = inv_col.normalized()?;
    let r_row = payoff.bilinear(&v_row, &v_col);
    let r_col = if payoff.is_antisymmetric() { -r_row } else { payoff.bilinear(&v_col, &v_row) };
    Ok((r_row, r_col))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRules {
    pub payoff: PayoffMatrix,
    /// Cells the beam reaches straight ahead.
    pub beam_length: i32,
    pub respawn_delay: u32,
    pub regrow_delay: u32,
}

impl MatrixRules {
    pub fn for_set(set: ResourceSet) -> Self {
        Self { payoff: PayoffMatrix::for_set(set), beam_length: 3, respawn_delay: 5, regrow_delay: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCell {
    pub kind: ResourceKind,
    pub present: bool,
    pub regrow_timer: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixWorld {
    pub set: ResourceSet,
    pub rules: MatrixRules,
    pub resources: BTreeMap<GridPos, ResourceCell>,
    pub inventories: Vec<Inventory>,
}

impl MatrixWorld {
    pub fn new(set: ResourceSet, rules: MatrixRules, layout_resources: &BTreeMap<GridPos, ResourceKind>, players: usize) -> Self {
        let resources = layout_resources
            .iter()
            .map(|(p, k)| (*p, ResourceCell { kind: *k, present: true, regrow_timer: 0 }))
            .collect();
        Self { set, rules, resources, inventories: vec![Inventory::ones(set); players] }
    }

    pub fn present_resource(&self, p: GridPos) -> Option<ResourceKind> {
        self.resources.get(&p).filter(|c| c.present).map(|c| c.kind)
    }

    /// Picks up the resource under `player` at `pos`, if one is present.
    pub fn collect(&mut self, player: PlayerId, pos: GridPos) -> Option<GameEvent> {
        let cell = self.resources.get_mut(&pos).filter(|c| c.present)?;
        cell.present = false;
        // +1 so the tick at the end of this step leaves exactly `regrow_delay` steps.
        cell.regrow_timer = self.rules.regrow_delay + 1;
        let kind = cell.kind;
        self.inventories[player.0].add(kind);
        Some(GameEvent::Pickup { player, kind, pos })
    }

    /// Advances regrow timers; a resource reappears once its timer expires and
    /// the cell is unoccupied.
    pub fn tick_regrowth(&mut self, occupied: &BTreeSet<GridPos>) {
        for (p, cell) in self.resources.iter_mut() {
            if cell.present {
                continue;
            }
            cell.regrow_timer = cell.regrow_timer.saturating_sub(1);
            if cell.regrow_timer == 0 && !occupied.contains(p) {
                cell.present = true;
            }
        }
    }
}

/// First alive player along the shooter's beam, stopping at walls.
pub fn beam_target(world: &WorldState, shooter: PlayerId, beam_length: i32) -> Option<PlayerId> {
    let me = &world.players[shooter.0];
    let mut p = me.pos;
    for _ in 0..beam_length {
        p = p.step(me.orientation);
        if world.layout.is_wall(p) {
            return None;
        }
        if let Some(other) = world.player_at(p) {
            return Some(other);
        }
    }
    None
}

/// Fires the shooter's interaction beam. A hit on an alive player starts a
/// duel when both inventories are eligible; both participants then respawn
/// with fresh all-ones inventories. Players already in a duel this step are
/// skipped.
pub fn fire_interaction(world: &mut WorldState, shooter: PlayerId, busy: &mut BTreeSet<PlayerId>) -> Result<Vec<GameEvent>> {
    if busy.contains(&shooter) || !world.players[shooter.0].is_alive() {
        return Ok(Vec::new());
    }
    let (beam_length, respawn_delay, payoff) = match world.matrix() {
        Some(m) => (m.rules.beam_length, m.rules.respawn_delay, m.rules.payoff.clone()),
        None => return Err(HmError::Contract("fire_interaction on a non-matrix substrate".into())),
    };
    let Some(target) = beam_target(world, shooter, beam_length) else {
        return Ok(Vec::new());
    };
    if busy.contains(&target) {
        return Ok(Vec::new());
    }
    let step = world.step;
    let m = world.matrix_mut().expect("checked above");
    let inv_row = m.inventories[shooter.0].clone();
    let inv_col = m.inventories[target.0].clone();
    if !inv_row.is_interaction_eligible() || !inv_col.is_interaction_eligible() {
        return Ok(Vec::new());
    }
    let (r_row, r_col) = resolve_interaction(&inv_row, &inv_col, &payoff)?;
    m.inventories[shooter.0] = Inventory::ones(m.set);
    m.inventories[target.0] = Inventory::ones(m.set);
    for p in [shooter, target] {
        world.players[p.0].respawn_timer = respawn_delay + 1;
        busy.insert(p);
    }
    Ok(vec![GameEvent::Interaction {
        step,
        shooter,
        target,
        shooter_inventory: inv_row,
        target_inventory: inv_col,
        shooter_reward: r_row,
        target_reward: r_col,
    }])
}
