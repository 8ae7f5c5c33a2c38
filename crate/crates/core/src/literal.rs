//! Literal-expression parser for reasoner output.
//!
//! Accepts the dictionary/list/tuple/string/number/boolean subset of Python
//! literal syntax that the prompts request. Nothing is ever evaluated; the
//! parser is a total function from text to value-or-error.
//!
//! ```text
//! value  := map | list | tuple | string | number | bool
//! map    := '{' [ string ':' value { ',' string ':' value } [','] ] '}'
//! list   := '[' [ value { ',' value } [','] ] ']'
//! tuple  := '(' ')' | '(' value ',' [ value { ',' value } [','] ] ')'
//! group  := '(' value ')'                       (same as value)
//! string := '\'' chars '\'' | '"' chars '"'
//! number := ['+'|'-'] digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//! bool   := 'True' | 'False' | 'true' | 'false'
//! ```

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LiteralValue {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Tuple(Vec<LiteralValue>),
    List(Vec<LiteralValue>),
    Map(Vec<(String, LiteralValue)>),
}

impl LiteralValue {
    pub fn as_map(&self) -> Option<&[(String, LiteralValue)]> {
        match self {
            LiteralValue::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&LiteralValue> {
        self.as_map()?.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Case-insensitive key lookup.
    pub fn get_ci(&self, key: &str) -> Option<&LiteralValue> {
        self.as_map()?.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            LiteralValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            LiteralValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            LiteralValue::Int(i) => Some(*i as f64),
            LiteralValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            LiteralValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Elements of a list or tuple.
    pub fn as_seq(&self) -> Option<&[LiteralValue]> {
        match self {
            LiteralValue::List(v) | LiteralValue::Tuple(v) => Some(v),
            _ => None,
        }
    }

    /// An integer pair `(x, y)` (list form accepted).
    pub fn as_coord(&self) -> Option<(i64, i64)> {
        match self.as_seq()? {
            [x, y] => Some((x.as_i64()?, y.as_i64()?)),
            _ => None,
        }
    }

    pub fn str(s: impl Into<String>) -> Self {
        LiteralValue::Str(s.into())
    }

    pub fn coord(x: i64, y: i64) -> Self {
        LiteralValue::Tuple(vec![LiteralValue::Int(x), LiteralValue::Int(y)])
    }

    /// Multi-line rendering used inside fenced response blocks. Top-level maps
    /// get one entry per line; nested values use the compact form.
    pub fn pretty(&self) -> String {
        match self {
            LiteralValue::Map(entries) if !entries.is_empty() => {
                let mut out = String::from("{\n");
                for (i, (k, v)) in entries.iter().enumerate() {
                    out.push_str("  ");
                    write_str_literal(&mut out, k);
                    out.push_str(": ");
                    out.push_str(&v.to_string());
                    if i + 1 < entries.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push('}');
                out
            }
            other => other.to_string(),
        }
    }
}

fn write_str_literal(out: &mut String, s: &str) {
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('\'');
}

fn write_seq(f: &mut fmt::Formatter<'_>, items: &[LiteralValue]) -> fmt::Result {
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for LiteralValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiteralValue::Int(i) => write!(f, "{i}"),
            LiteralValue::Real(r) => write!(f, "{r:?}"),
            LiteralValue::Bool(true) => f.write_str("True"),
            LiteralValue::Bool(false) => f.write_str("False"),
            LiteralValue::Str(s) => {
                let mut out = String::new();
                write_str_literal(&mut out, s);
                f.write_str(&out)
            }
            LiteralValue::List(items) => {
                f.write_str("[")?;
                write_seq(f, items)?;
                f.write_str("]")
            }
            LiteralValue::Tuple(items) => {
                f.write_str("(")?;
                write_seq(f, items)?;
                if items.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
            LiteralValue::Map(entries) => {
                f.write_str("{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    let mut key = String::new();
                    write_str_literal(&mut key, k);
                    write!(f, "{key}: {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column} (offset {offset}): {message}")]
pub struct ParseError {
    pub message: String,
    /// Character offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.chars().collect(), pos: 0, _src: src }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let mut line = 1;
        let mut column = 1;
        for &c in self.chars.iter().take(offset) {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        ParseError { message: message.into(), offset, line, column }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error_at(self.pos, format!("expected {want:?}, found {c:?}"))),
            None => Err(self.error_at(self.pos, format!("expected {want:?}, found end of input"))),
        }
    }

    fn value(&mut self) -> Result<LiteralValue, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error_at(self.pos, "unexpected end of input")),
            Some('{') => self.map(),
            Some('[') => self.list(),
            Some('(') => self.tuple(),
            Some('\'') | Some('"') => Ok(LiteralValue::Str(self.string()?)),
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.keyword(),
            Some(c) => Err(self.error_at(self.pos, format!("unexpected character {c:?}"))),
        }
    }

    /// Comma-separated items up to `close`; returns items and whether any comma was seen.
    fn items(&mut self, close: char) -> Result<(Vec<LiteralValue>, bool), ParseError> {
        let mut items = Vec::new();
        let mut saw_comma = false;
        loop {
            self.skip_ws();
            if self.peek() == Some(close) {
                self.pos += 1;
                return Ok((items, saw_comma));
            }
            items.push(self.value()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    saw_comma = true;
                }
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok((items, saw_comma));
                }
                Some(c) => return Err(self.error_at(self.pos, format!("expected ',' or {close:?}, found {c:?}"))),
                None => return Err(self.error_at(self.pos, format!("expected ',' or {close:?}, found end of input"))),
            }
        }
    }

    fn list(&mut self) -> Result<LiteralValue, ParseError> {
        self.pos += 1;
        Ok(LiteralValue::List(self.items(']')?.0))
    }

    fn tuple(&mut self) -> Result<LiteralValue, ParseError> {
        self.pos += 1;
        let (mut items, saw_comma) = self.items(')')?;
        if items.len() == 1 && !saw_comma {
            return Ok(items.remove(0));
        }
        Ok(LiteralValue::Tuple(items))
    }

    fn map(&mut self) -> Result<LiteralValue, ParseError> {
        self.pos += 1;
        let mut entries: Vec<(String, LiteralValue)> = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('}') => {
                    self.pos += 1;
                    return Ok(LiteralValue::Map(entries));
                }
                Some('\'') | Some('"') => {}
                Some(c) => return Err(self.error_at(self.pos, format!("expected string key or '}}', found {c:?}"))),
                None => return Err(self.error_at(self.pos, "expected string key or '}', found end of input")),
            }
            let key_offset = self.pos;
            let key = self.string()?;
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(self.error_at(key_offset, format!("duplicate map key {key:?}")));
            }
            self.expect(':')?;
            let v = self.value()?;
            entries.push((key, v));
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(LiteralValue::Map(entries));
                }
                Some(c) => return Err(self.error_at(self.pos, format!("expected ',' or '}}', found {c:?}"))),
                None => return Err(self.error_at(self.pos, "expected ',' or '}', found end of input")),
            }
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        let quote = self.chars[self.pos];
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error_at(start, "unterminated string")),
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        None => return Err(self.error_at(start, "unterminated string")),
                        Some(e) => {
                            self.pos += 1;
                            match e {
                                'n' => out.push('\n'),
                                't' => out.push('\t'),
                                'r' => out.push('\r'),
                                '\\' => out.push('\\'),
                                '\'' => out.push('\''),
                                '"' => out.push('"'),
                                other => {
                                    out.push('\\');
                                    out.push(other);
                                }
                            }
                        }
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn number(&mut self) -> Result<LiteralValue, ParseError> {
        let start = self.pos;
        let mut text = String::new();
        if let Some(c @ ('-' | '+')) = self.peek() {
            text.push(c);
            self.pos += 1;
        }
        let mut digits = 0;
        let mut is_real = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits += 1;
            } else if c == '.' && !is_real {
                is_real = true;
            } else {
                break;
            }
            text.push(c);
            self.pos += 1;
        }
        if digits == 0 {
            return Err(self.error_at(start, "malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            is_real = true;
            text.push(e);
            self.pos += 1;
            if let Some(c @ ('-' | '+')) = self.peek() {
                text.push(c);
                self.pos += 1;
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                self.pos += 1;
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.error_at(start, "malformed exponent"));
            }
        }
        if is_real {
            text.parse::<f64>()
                .map(LiteralValue::Real)
                .map_err(|_| self.error_at(start, format!("malformed number {text:?}")))
        } else {
            text.parse::<i64>()
                .map(LiteralValue::Int)
                .map_err(|_| self.error_at(start, format!("integer out of range {text:?}")))
        }
    }

    fn keyword(&mut self) -> Result<LiteralValue, ParseError> {
        let start = self.pos;
        let mut word = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
            word.push(c);
            self.pos += 1;
        }
        match word.as_str() {
            "True" | "true" => Ok(LiteralValue::Bool(true)),
            "False" | "false" => Ok(LiteralValue::Bool(false)),
            _ => Err(self.error_at(start, format!("unknown identifier {word:?}"))),
        }
    }
}

/// Parses one literal value; trailing non-whitespace is an error.
pub fn parse_literal(text: &str) -> Result<LiteralValue, ParseError> {
    let mut p = Parser::new(text);
    let v = p.value()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error_at(p.pos, format!("unexpected trailing input starting with {c:?}")));
    }
    Ok(v)
}

/// Returns the body of the first fenced code block, else the first balanced
/// `{...}` region, else the whole text.
pub fn extract_block(text: &str) -> &str {
    if let Some(open) = text.find("```") {
        let after = &text[open + 3..];
        // optional language tag on the fence line
        let body_start = match after.find('\n') {
            Some(nl) if after[..nl].trim().chars().all(|c| c.is_ascii_alphanumeric()) => nl + 1,
            _ => 0,
        };
        let body = &after[body_start..];
        let end = body.find("```").unwrap_or(body.len());
        return body[..end].trim();
    }
    if let Some(region) = first_brace_region(text) {
        return region;
    }
    text
}

fn first_brace_region(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '\'' | '"' => quote = Some(c),
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extracts and parses the map a reasoner response carries. Tolerates a bare
/// `'key': value` body without enclosing braces and doubled `{{ }}` braces.
pub fn parse_response_map(text: &str) -> Result<LiteralValue, ParseError> {
    let bare = text.trim();
    if !bare.contains("```") && (bare.starts_with('\'') || bare.starts_with('"')) {
        if let Ok(v @ LiteralValue::Map(_)) = parse_literal(&format!("{{{bare}}}")) {
            return Ok(v);
        }
    }
    let block = extract_block(text);
    let first = match parse_literal(block) {
        Ok(v @ LiteralValue::Map(_)) => return Ok(v),
        Ok(other) => Err(Parser::new(block).error_at(0, format!("expected a map, found {other}"))),
        Err(e) => Err(e),
    };
    let trimmed = block.trim();
    if trimmed.starts_with("{{") && trimmed.ends_with("}}") {
        if let Ok(v @ LiteralValue::Map(_)) = parse_literal(&trimmed[1..trimmed.len() - 1]) {
            return Ok(v);
        }
    }
    if !trimmed.starts_with('{') {
        if let Ok(v @ LiteralValue::Map(_)) = parse_literal(&format!("{{{trimmed}}}")) {
            return Ok(v);
        }
        // fenced block absent: a bare entry inside prose
        if let Some(region) = first_brace_region(text) {
            if let Ok(v @ LiteralValue::Map(_)) = parse_literal(region) {
                return Ok(v);
            }
        }
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_map() {
        let v = parse_literal("{'rock/yellow': 5, 'paper/purple': 1, 'scissors/blue': 1}").unwrap();
        assert_eq!(v.get("rock/yellow"), Some(&LiteralValue::Int(5)));
        assert_eq!(v.as_map().unwrap().len(), 3);
    }

    #[test]
    fn boolean_verdict() {
        let v = parse_literal("{'evaluate_predicted_behavior': True}").unwrap();
        assert_eq!(v.get("evaluate_predicted_behavior"), Some(&LiteralValue::Bool(true)));
    }

    #[test]
    fn error_points_at_offending_char() {
        let e = parse_literal("{'a': [}").unwrap_err();
        assert_eq!(e.offset, 7);
        assert_eq!((e.line, e.column), (1, 8));
    }

    #[test]
    fn error_line_column_multiline() {
        let e = parse_literal("{\n  'a': 1,\n  'b' 2\n}").unwrap_err();
        assert_eq!((e.line, e.column), (3, 7));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let e = parse_literal("{'a': 1, 'a': 2}").unwrap_err();
        assert!(e.message.contains("duplicate map key"));
        assert_eq!(e.offset, 9);
    }

    #[test]
    fn tuples_groups_and_trailing_commas() {
        assert_eq!(parse_literal("(5)").unwrap(), LiteralValue::Int(5));
        assert_eq!(parse_literal("(5,)").unwrap(), LiteralValue::Tuple(vec![LiteralValue::Int(5)]));
        assert_eq!(parse_literal("()").unwrap(), LiteralValue::Tuple(vec![]));
        assert_eq!(parse_literal("[1, 2,]").unwrap(), LiteralValue::List(vec![LiteralValue::Int(1), LiteralValue::Int(2)]));
        assert_eq!(parse_literal("{\"k\": -3.428,}").unwrap().get("k"), Some(&LiteralValue::Real(-3.428)));
    }

    #[test]
    fn no_evaluation() {
        assert!(parse_literal("__import__('os')").is_err());
        assert!(parse_literal("1 + 2").is_err());
        assert!(parse_literal("None").is_err());
    }

    #[test]
    fn extract_fenced_block() {
        let text = "Reasoning...\n```python\n{'a': 1}\n```\ntrailing";
        assert_eq!(extract_block(text), "{'a': 1}");
        let bare = "I think {'a': {'b': '}'}} is it";
        assert_eq!(extract_block(bare), "{'a': {'b': '}'}}");
        assert_eq!(extract_block("no structure"), "no structure");
    }

    #[test]
    fn response_map_tolerates_bare_entries() {
        let v = parse_response_map("'possible_opponent_inventory': {'rock/yellow': 1, 'paper/purple': 1, 'scissors/blue': 5}")
            .unwrap();
        assert!(v.get("possible_opponent_inventory").is_some());
        let v = parse_response_map("{{ 'action_plan': ['interact((5, 1))'] }}").unwrap();
        assert!(v.get("action_plan").is_some());
    }

    #[test]
    fn display_is_python_repr() {
        let v = parse_literal("{'s': 'it\\'s', 't': (1,), 'r': 2.0, 'b': False}").unwrap();
        assert_eq!(v.to_string(), "{'s': 'it\\'s', 't': (1,), 'r': 2.0, 'b': False}");
    }
}
