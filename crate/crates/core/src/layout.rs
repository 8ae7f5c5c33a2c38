//! Map layout data files.
//!
//! A map file is a versioned header line followed by one text row per grid
//! row, one character per cell:
//!
//! ```text
//! hm-map v1 <substrate>
//! #######
//! #S.a..#
//! #######
//! ```
//!
//! Legend:
//!
//! | char | meaning                                   |
//! |------|-------------------------------------------|
//! | `#`  | wall                                      |
//! | `.`  | floor                                     |
//! | `S`  | spawn point (floor)                       |
//! | `a`  | rock / yellow resource                    |
//! | `b`  | paper / purple resource                   |
//! | `c`  | scissors / blue resource                  |
//! | `g`  | cooperate / green resource                |
//! | `r`  | defect / red resource                     |
//! | `T`  | tomato dispenser (cooking)                |
//! | `D`  | dish dispenser (cooking)                  |
//! | `O`  | cooking pot (cooking)                     |
//! | `X`  | delivery location (cooking)               |
//! | `C`  | counter (cooking)                         |

use crate::error::{HmError, Result};
use crate::geometry::{Dims, GridPos};
use crate::substrate::{ResourceKind, SubstrateId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const MAP_HEADER: &str = "hm-map v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    TomatoDispenser,
    DishDispenser,
    Pot,
    Delivery,
    Counter,
}

impl Fixture {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'T' => Some(Fixture::TomatoDispenser),
            'D' => Some(Fixture::DishDispenser),
            'O' => Some(Fixture::Pot),
            'X' => Some(Fixture::Delivery),
            'C' => Some(Fixture::Counter),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Fixture::TomatoDispenser => 'T',
            Fixture::DishDispenser => 'D',
            Fixture::Pot => 'O',
            Fixture::Delivery => 'X',
            Fixture::Counter => 'C',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub substrate: SubstrateId,
    pub dims: Dims,
    pub walls: BTreeSet<GridPos>,
    pub spawns: Vec<GridPos>,
    pub resources: BTreeMap<GridPos, ResourceKind>,
    pub fixtures: BTreeMap<GridPos, Fixture>,
}

impl Layout {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| HmError::Map("empty map file".into()))?;
        let rest = header
            .strip_prefix(MAP_HEADER)
            .ok_or_else(|| HmError::Map(format!("bad header line {header:?}")))?;
        let substrate: SubstrateId = rest.trim().parse()?;
        let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
        if rows.is_empty() {
            return Err(HmError::Map("map has no rows".into()));
        }
        let width = rows[0].chars().count();
        let mut layout = Layout {
            substrate,
            dims: Dims { width: width as i32, height: rows.len() as i32 },
            walls: BTreeSet::new(),
            spawns: Vec::new(),
            resources: BTreeMap::new(),
            fixtures: BTreeMap::new(),
        };
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(HmError::Map(format!("row {y} has width {} (expected {width})", row.chars().count())));
            }
            for (x, c) in row.chars().enumerate() {
                let p = GridPos::new(x as i32, y as i32);
                match c {
                    '#' => {
                        layout.walls.insert(p);
                    }
                    '.' => {}
                    'S' => layout.spawns.push(p),
                    _ => {
                        if let Some(kind) = ResourceKind::from_map_char(c) {
                            if !substrate.resource_kinds().contains(&kind) {
                                return Err(HmError::Map(format!("resource {c:?} at {p} not valid for {substrate}")));
                            }
                            layout.resources.insert(p, kind);
                        } else if let Some(f) = Fixture::from_char(c) {
                            if substrate != SubstrateId::Cooking {
                                return Err(HmError::Map(format!("fixture {c:?} at {p} only valid in cooking maps")));
                            }
                            layout.fixtures.insert(p, f);
                        } else {
                            return Err(HmError::Map(format!("unknown map character {c:?} at {p}")));
                        }
                    }
                }
            }
        }
        if layout.spawns.is_empty() {
            return Err(HmError::Map("map has no spawn points".into()));
        }
        Ok(layout)
    }

    /// Built-in layout shipped with the crate for a substrate.
    pub fn builtin(substrate: SubstrateId) -> Self {
        let text = match substrate {
            SubstrateId::RwsRepeated => include_str!("../maps/rws_repeated.map"),
            SubstrateId::RwsArena => include_str!("../maps/rws_arena.map"),
            SubstrateId::PdRepeated => include_str!("../maps/pd_repeated.map"),
            SubstrateId::Cooking => include_str!("../maps/cooking.map"),
        };
        Self::parse(text).expect("builtin map is valid")
    }

    pub fn is_wall(&self, p: GridPos) -> bool {
        !self.dims.contains(p) || self.walls.contains(&p)
    }

    /// Cells a player may stand on: in bounds, not a wall, not a fixture.
    pub fn is_walkable(&self, p: GridPos) -> bool {
        !self.is_wall(p) && !self.fixtures.contains_key(&p)
    }

    pub fn walkable_cells(&self) -> Vec<GridPos> {
        self.dims.cells().filter(|p| self.is_walkable(*p)).collect()
    }

    pub fn fixtures_of(&self, kind: Fixture) -> Vec<GridPos> {
        self.fixtures.iter().filter(|(_, f)| **f == kind).map(|(p, _)| *p).collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{MAP_HEADER} {}\n", self.substrate);
        for y in 0..self.dims.height {
            for x in 0..self.dims.width {
                let p = GridPos::new(x, y);
                let c = if self.walls.contains(&p) {
                    '#'
                } else if let Some(k) = self.resources.get(&p) {
                    k.map_char()
                } else if let Some(f) = self.fixtures.get(&p) {
                    f.to_char()
                } else if self.spawns.contains(&p) {
                    'S'
                } else {
                    '.'
                };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_maps_have_documented_dimensions() {
        let rws = Layout::builtin(SubstrateId::RwsRepeated);
        assert_eq!((rws.dims.width, rws.dims.height), (23, 15));
        assert_eq!(Layout::builtin(SubstrateId::PdRepeated).dims, rws.dims);
        let arena = Layout::builtin(SubstrateId::RwsArena);
        assert_eq!((arena.dims.width, arena.dims.height), (25, 24));
        assert_eq!(arena.spawns.len(), 8);
        let kitchen = Layout::builtin(SubstrateId::Cooking);
        assert_eq!(kitchen.fixtures_of(Fixture::Pot).len(), 2);
    }

    #[test]
    fn render_round_trips() {
        for s in SubstrateId::ALL {
            let l = Layout::builtin(s);
            assert_eq!(Layout::parse(&l.render()).unwrap(), l);
        }
    }

    #[test]
    fn walls_and_resources_are_disjoint() {
        for s in SubstrateId::ALL {
            let l = Layout::builtin(s);
            for p in l.resources.keys() {
                assert!(!l.walls.contains(p));
            }
            for p in &l.spawns {
                assert!(l.is_walkable(*p));
            }
        }
    }

    #[test]
    fn rejects_malformed_maps() {
        assert!(Layout::parse("hm-map v2 rws_repeated\n#S#\n").is_err());
        assert!(Layout::parse("hm-map v1 rws_repeated\n#S#\n##\n").is_err());
        assert!(Layout::parse("hm-map v1 rws_repeated\n#Sg#\n").is_err());
        assert!(Layout::parse("hm-map v1 rws_repeated\n#SO#\n").is_err());
        assert!(Layout::parse("hm-map v1 rws_repeated\n#..#\n").is_err());
    }
}
