//! Action-function call grammar: `IDENT '(' coordinate-args ')'`.

use crate::geometry::GridPos;
use crate::literal::{parse_literal, LiteralValue};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "fn")]
pub enum SubgoalCall {
    MoveTo { src: GridPos, dst: GridPos },
    FireAt { target: GridPos },
    Interact { target: GridPos },
    Wait { target: GridPos },
}

impl SubgoalCall {
    pub fn name(&self) -> &'static str {
        match self {
            SubgoalCall::MoveTo { .. } => "move_to",
            SubgoalCall::FireAt { .. } => "fire_at",
            SubgoalCall::Interact { .. } => "interact",
            SubgoalCall::Wait { .. } => "wait",
        }
    }
}

impl fmt::Display for SubgoalCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgoalCall::MoveTo { src, dst } => write!(f, "move_to({src}, {dst})"),
            SubgoalCall::FireAt { target } => write!(f, "fire_at({target})"),
            SubgoalCall::Interact { target } => write!(f, "interact({target})"),
            SubgoalCall::Wait { target } => write!(f, "wait({target})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("response has no 'action_plan' key")]
    MissingKey,
    #[error("'action_plan' must be a list of strings")]
    NotAList,
    #[error("action_plan element {index} is not a string")]
    NonString { index: usize },
    #[error("malformed call {call:?}: {message}")]
    Syntax { call: String, message: String },
    #[error("unknown function in call {call:?}")]
    UnknownFunction { call: String },
    #[error("call {call:?} takes {expected} coordinate argument(s), found {found}")]
    BadArity { call: String, expected: usize, found: usize },
    #[error("call {call:?} has a non-coordinate argument")]
    BadCoordinate { call: String },
    #[error("action_plan is empty")]
    Empty,
}

fn to_pos(v: &LiteralValue) -> Option<GridPos> {
    let (x, y) = v.as_coord()?;
    Some(GridPos::new(i32::try_from(x).ok()?, i32::try_from(y).ok()?))
}

/// Parses one call string such as `move_to((21, 10), (20, 10))`.
pub fn parse_call(call: &str) -> Result<SubgoalCall, PlanError> {
    let text = call.trim();
    let open = text.find('(').ok_or_else(|| PlanError::Syntax {
        call: call.to_string(),
        message: "missing '('".into(),
    })?;
    let ident = text[..open].trim();
    if ident.is_empty() || !ident.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(PlanError::Syntax { call: call.to_string(), message: format!("bad function name {ident:?}") });
    }
    let expected = match ident {
        "move_to" => 2,
        "fire_at" | "interact" | "wait" => 1,
        _ => return Err(PlanError::UnknownFunction { call: call.to_string() }),
    };
    let args_value = parse_literal(&text[open..])
        .map_err(|e| PlanError::Syntax { call: call.to_string(), message: e.message })?;
    let args: Vec<LiteralValue> = if args_value.as_coord().is_some() {
        vec![args_value]
    } else {
        match args_value {
            LiteralValue::Tuple(items) => items,
            _ => return Err(PlanError::BadCoordinate { call: call.to_string() }),
        }
    };
    if args.len() != expected {
        return Err(PlanError::BadArity { call: call.to_string(), expected, found: args.len() });
    }
    let coords: Vec<GridPos> = args
        .iter()
        .map(to_pos)
        .collect::<Option<_>>()
        .ok_or_else(|| PlanError::BadCoordinate { call: call.to_string() })?;
    Ok(match ident {
        "move_to" => SubgoalCall::MoveTo { src: coords[0], dst: coords[1] },
        "fire_at" => SubgoalCall::FireAt { target: coords[0] },
        "interact" => SubgoalCall::Interact { target: coords[0] },
        _ => SubgoalCall::Wait { target: coords[0] },
    })
}

/// Reads the `action_plan` list out of a parsed response map.
pub fn parse_action_plan(v: &LiteralValue) -> Result<Vec<SubgoalCall>, PlanError> {
    let list = v.get("action_plan").ok_or(PlanError::MissingKey)?;
    let items = match list {
        LiteralValue::List(items) => items,
        _ => return Err(PlanError::NotAList),
    };
    if items.is_empty() {
        return Err(PlanError::Empty);
    }
    items
        .iter()
        .enumerate()
        .map(|(index, item)| {
            let s = item.as_str().ok_or(PlanError::NonString { index })?;
            parse_call(s)
        })
        .collect()
}

/// Renders calls back into the `{'action_plan': [...]}` form.
pub fn action_plan_literal(calls: &[SubgoalCall]) -> LiteralValue {
    LiteralValue::Map(vec![(
        "action_plan".to_string(),
        LiteralValue::List(calls.iter().map(|c| LiteralValue::Str(c.to_string())).collect()),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::parse_literal;

    #[test]
    fn move_to_from_subgoal_output() {
        let v = parse_literal("{'action_plan': ['move_to((21, 10), (20, 10))']}").unwrap();
        assert_eq!(
            parse_action_plan(&v).unwrap(),
            vec![SubgoalCall::MoveTo { src: GridPos::new(21, 10), dst: GridPos::new(20, 10) }]
        );
    }

    #[test]
    fn interact_single_arg() {
        let v = parse_literal("{'action_plan': ['interact((5, 1))']}").unwrap();
        assert_eq!(parse_action_plan(&v).unwrap(), vec![SubgoalCall::Interact { target: GridPos::new(5, 1) }]);
    }

    #[test]
    fn unknown_function_names_the_call() {
        let v = parse_literal("{'action_plan': ['teleport((1,1))']}").unwrap();
        let err = parse_action_plan(&v).unwrap_err();
        assert_eq!(err, PlanError::UnknownFunction { call: "teleport((1,1))".into() });
        assert_eq!(err.to_string(), "unknown function in call \"teleport((1,1))\"");
    }

    #[test]
    fn arity_and_shape_errors() {
        assert!(matches!(parse_call("move_to((1, 2))"), Err(PlanError::BadArity { expected: 2, found: 1, .. })));
        assert!(matches!(parse_call("fire_at('x')"), Err(PlanError::BadCoordinate { .. })));
        let v = parse_literal("{'action_plan': [3]}").unwrap();
        assert_eq!(parse_action_plan(&v), Err(PlanError::NonString { index: 0 }));
        let v = parse_literal("{'plan': []}").unwrap();
        assert_eq!(parse_action_plan(&v), Err(PlanError::MissingKey));
    }

    #[test]
    fn display_reparses() {
        let calls = vec![
            SubgoalCall::MoveTo { src: GridPos::new(11, 7), dst: GridPos::new(9, 5) },
            SubgoalCall::FireAt { target: GridPos::new(3, 4) },
            SubgoalCall::Wait { target: GridPos::new(4, 2) },
        ];
        assert_eq!(parse_action_plan(&action_plan_literal(&calls)).unwrap(), calls);
    }
}
