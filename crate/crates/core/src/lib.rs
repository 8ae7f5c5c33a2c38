//! Theory-of-mind agents for multi-agent grid worlds: the hypothesis-driven
//! agent and its baselines, four game substrates, scripted scenario bots and
//! a benchmark harness.

pub mod agents;
pub mod bots;
pub mod cooking;
pub mod error;
pub mod game;
pub mod harness;
pub mod geometry;
pub mod layout;
pub mod literal;
pub mod matrix;
pub mod memory;
pub mod perception;
pub mod plan;
pub mod prompts;
pub mod planner;
pub mod reasoner;
pub mod subgoal;
pub mod substrate;
pub mod tom;

pub use error::{HmError, Result};
