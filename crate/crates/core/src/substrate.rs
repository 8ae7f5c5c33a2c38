//! Substrate identifiers, resource kinds and inventories.

use crate::error::{HmError, Result};
use crate::literal::LiteralValue;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstrateId {
    RwsRepeated,
    RwsArena,
    PdRepeated,
    Cooking,
}

impl SubstrateId {
    pub const ALL: [SubstrateId; 4] =
        [SubstrateId::RwsRepeated, SubstrateId::RwsArena, SubstrateId::PdRepeated, SubstrateId::Cooking];

    pub fn as_str(self) -> &'static str {
        match self {
            SubstrateId::RwsRepeated => "rws_repeated",
            SubstrateId::RwsArena => "rws_arena",
            SubstrateId::PdRepeated => "pd_repeated",
            SubstrateId::Cooking => "cooking",
        }
    }

    pub fn player_count(self) -> usize {
        match self {
            SubstrateId::RwsArena => 8,
            _ => 2,
        }
    }

    pub fn scenario_count(self) -> u32 {
        match self {
            SubstrateId::RwsRepeated => 9,
            SubstrateId::RwsArena => 8,
            SubstrateId::PdRepeated => 10,
            SubstrateId::Cooking => 3,
        }
    }

    pub fn is_matrix(self) -> bool {
        self != SubstrateId::Cooking
    }

    pub fn resource_set(self) -> Option<ResourceSet> {
        match self {
            SubstrateId::RwsRepeated | SubstrateId::RwsArena => Some(ResourceSet::Rps),
            SubstrateId::PdRepeated => Some(ResourceSet::Pd),
            SubstrateId::Cooking => None,
        }
    }

    pub fn resource_kinds(self) -> &'static [ResourceKind] {
        self.resource_set().map(ResourceSet::kinds).unwrap_or(&[])
    }

    /// Egocentric observation window.
    pub fn window(self) -> WindowSpec {
        match self {
            SubstrateId::RwsArena => WindowSpec { ahead: 9, behind: 1, side: 5 },
            _ => WindowSpec { ahead: 3, behind: 1, side: 2 },
        }
    }
}

impl fmt::Display for SubstrateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubstrateId {
    type Err = HmError;

    fn from_str(s: &str) -> Result<Self> {
        SubstrateId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| HmError::UnknownSubstrate(s.to_string()))
    }
}

/// Cells visible ahead of, behind and to each side of the player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub ahead: i32,
    pub behind: i32,
    pub side: i32,
}

impl WindowSpec {
    pub fn rows(self) -> i32 {
        self.ahead + 1 + self.behind
    }

    pub fn cols(self) -> i32 {
        2 * self.side + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceSet {
    Rps,
    Pd,
}

impl ResourceSet {
    pub fn kinds(self) -> &'static [ResourceKind] {
        match self {
            ResourceSet::Rps => &[ResourceKind::Rock, ResourceKind::Paper, ResourceKind::Scissors],
            ResourceSet::Pd => &[ResourceKind::Cooperate, ResourceKind::Defect],
        }
    }

    #[allow(clippy::len_without_is_empty)] // a set always has kinds
    pub fn len(self) -> usize {
        self.kinds().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Rock,
    Paper,
    Scissors,
    Cooperate,
    Defect,
}

impl ResourceKind {
    pub fn set(self) -> ResourceSet {
        match self {
            ResourceKind::Rock | ResourceKind::Paper | ResourceKind::Scissors => ResourceSet::Rps,
            ResourceKind::Cooperate | ResourceKind::Defect => ResourceSet::Pd,
        }
    }

    /// Position within the substrate's inventory vector.
    pub fn index(self) -> usize {
        match self {
            ResourceKind::Rock | ResourceKind::Cooperate => 0,
            ResourceKind::Paper | ResourceKind::Defect => 1,
            ResourceKind::Scissors => 2,
        }
    }

    /// Inventory dictionary key, e.g. `rock/yellow`.
    pub fn key(self) -> &'static str {
        match self {
            ResourceKind::Rock => "rock/yellow",
            ResourceKind::Paper => "paper/purple",
            ResourceKind::Scissors => "scissors/blue",
            ResourceKind::Cooperate => "cooperate/green",
            ResourceKind::Defect => "defect/red",
        }
    }

    pub fn strategy(self) -> &'static str {
        self.key().split('/').next().unwrap_or_default()
    }

    pub fn color(self) -> &'static str {
        self.key().split('/').nth(1).unwrap_or_default()
    }

    /// Label used in observation text, e.g. `Yellow Box`.
    pub fn entity_label(self) -> &'static str {
        match self {
            ResourceKind::Rock => "Yellow Box",
            ResourceKind::Paper => "Purple Box",
            ResourceKind::Scissors => "Blue Box",
            ResourceKind::Cooperate => "Green Box",
            ResourceKind::Defect => "Red Box",
        }
    }

    /// Key used in the entity memory, e.g. `yellow_box`.
    pub fn memory_key(self) -> &'static str {
        match self {
            ResourceKind::Rock => "yellow_box",
            ResourceKind::Paper => "purple_box",
            ResourceKind::Scissors => "blue_box",
            ResourceKind::Cooperate => "green_box",
            ResourceKind::Defect => "red_box",
        }
    }

    pub fn map_char(self) -> char {
        match self {
            ResourceKind::Rock => 'a',
            ResourceKind::Paper => 'b',
            ResourceKind::Scissors => 'c',
            ResourceKind::Cooperate => 'g',
            ResourceKind::Defect => 'r',
        }
    }

    pub fn from_map_char(c: char) -> Option<Self> {
        Self::all().iter().copied().find(|k| k.map_char() == c)
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::all().iter().copied().find(|k| k.key() == key)
    }

    /// Accepts a key, strategy name or colour (`rock`, `yellow`, `rock/yellow`).
    pub fn from_word(word: &str) -> Option<Self> {
        let w = word.trim().to_ascii_lowercase();
        Self::all().iter().copied().find(|k| k.key() == w || k.strategy() == w || k.color() == w)
    }

    pub fn all() -> &'static [ResourceKind] {
        &[
            ResourceKind::Rock,
            ResourceKind::Paper,
            ResourceKind::Scissors,
            ResourceKind::Cooperate,
            ResourceKind::Defect,
        ]
    }

    /// The rock-paper-scissors kind that beats `self`: paper beats rock,
    /// scissors beats paper, rock beats scissors. PD kinds map to themselves.
    pub fn counter(self) -> ResourceKind {
        match self {
            ResourceKind::Rock => ResourceKind::Paper,
            ResourceKind::Paper => ResourceKind::Scissors,
            ResourceKind::Scissors => ResourceKind::Rock,
            other => other,
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.strategy())
    }
}

/// Per-player resource counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inventory {
    pub set: ResourceSet,
    pub counts: Vec<u32>,
}

impl Inventory {
    pub fn new(set: ResourceSet, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != set.len() {
            return Err(HmError::Contract(format!(
                "inventory for {set:?} needs {} counts, got {}",
                set.len(),
                counts.len()
            )));
        }
        Ok(Self { set, counts })
    }

    /// The respawn inventory: one of each kind.
    pub fn ones(set: ResourceSet) -> Self {
        Self { set, counts: vec![1; set.len()] }
    }

    /// `ones + extra * e_kind`.
    pub fn pure(kind: ResourceKind, extra: u32) -> Self {
        let mut inv = Self::ones(kind.set());
        inv.counts[kind.index()] += extra;
        inv
    }

    pub fn rps(rock: u32, paper: u32, scissors: u32) -> Self {
        Self { set: ResourceSet::Rps, counts: vec![rock, paper, scissors] }
    }

    pub fn pd(cooperate: u32, defect: u32) -> Self {
        Self { set: ResourceSet::Pd, counts: vec![cooperate, defect] }
    }

    pub fn count(&self, kind: ResourceKind) -> u32 {
        self.counts[kind.index()]
    }

    pub fn add(&mut self, kind: ResourceKind) {
        self.counts[kind.index()] += 1;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Most-held kind; ties resolve to the lowest index.
    pub fn argmax(&self) -> ResourceKind {
        let kinds = self.set.kinds();
        let mut best = 0;
        for i in 1..self.counts.len() {
            if self.counts[i] > self.counts[best] {
                best = i;
            }
        }
        kinds[best]
    }

    /// Some kind held at least twice.
    pub fn is_interaction_eligible(&self) -> bool {
        self.counts.iter().any(|&c| c >= 2)
    }

    /// L1-normalized strategy vector.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if total == 0 {
            return Err(HmError::Contract("inventory has zero total".into()));
        }
        Ok(self.counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn scaled(&self, k: u32) -> Self {
        Self { set: self.set, counts: self.counts.iter().map(|c| c * k).collect() }
    }

    pub fn to_literal(&self) -> LiteralValue {
        LiteralValue::Map(
            self.set
                .kinds()
                .iter()
                .map(|k| (k.key().to_string(), LiteralValue::Int(self.count(*k) as i64)))
                .collect(),
        )
    }

    /// Reads an inventory map such as `{'rock/yellow': 5, 'paper/purple': 1, 'scissors/blue': 1}`.
    /// Missing kinds default to 1.
    pub fn from_literal(set: ResourceSet, value: &LiteralValue) -> Result<Self> {
        let entries = value
            .as_map()
            .ok_or_else(|| HmError::Contract(format!("inventory must be a map, got {value}")))?;
        let mut inv = Self::ones(set);
        for (key, v) in entries {
            let kind = ResourceKind::from_word(key)
                .filter(|k| k.set() == set)
                .ok_or_else(|| HmError::Contract(format!("unknown inventory key {key:?}")))?;
            let n = v
                .as_f64()
                .filter(|n| *n >= 0.0)
                .ok_or_else(|| HmError::Contract(format!("inventory count for {key:?} must be a nonnegative number")))?;
            inv.counts[kind.index()] = n.round() as u32;
        }
        Ok(inv)
    }

    /// Tuple form `(5, 1, 1)`.
    pub fn tuple_string(&self) -> String {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for Inventory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}
