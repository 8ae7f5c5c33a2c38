//! Prompt templates shipped as data files, and their rendering.
//!
//! Templates use `{name}` placeholders; `{{` and `}}` stand for literal
//! braces. Every template carries a marker phrase that identifies its kind,
//! which is how the oracle backend knows what it is being asked.

use crate::error::{HmError, Result};
use crate::substrate::SubstrateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PromptKind {
    TomEstimate,
    TomHypothesis,
    TomPredict,
    TomSeekout,
    TomVanilla,
    HehrStrategy,
    HehrCounterfactual,
    SubgoalMatrix,
    SubgoalCooking,
    ReactMatrix,
    ReactCooking,
    PlanMatrix,
    PlanCooking,
    CookingInfer,
    CookingPredict,
    CookingEvaluate,
    CookingStrategy,
    Reflect,
}

impl PromptKind {
    /// Detection order: a template whose text contains another template's
    /// marker is listed before it.
    pub const ALL: [PromptKind; 18] = [
        PromptKind::TomVanilla,
        PromptKind::TomSeekout,
        PromptKind::HehrCounterfactual,
        PromptKind::HehrStrategy,
        PromptKind::TomPredict,
        PromptKind::TomEstimate,
        PromptKind::TomHypothesis,
        PromptKind::Reflect,
        PromptKind::CookingEvaluate,
        PromptKind::CookingPredict,
        PromptKind::CookingInfer,
        PromptKind::CookingStrategy,
        PromptKind::PlanCooking,
        PromptKind::PlanMatrix,
        PromptKind::ReactCooking,
        PromptKind::ReactMatrix,
        PromptKind::SubgoalCooking,
        PromptKind::SubgoalMatrix,
    ];

    pub fn marker(self) -> &'static str {
        match self {
            PromptKind::TomEstimate => "What was my opponent's likely inventory in the last round",
            PromptKind::TomHypothesis => "What is your opponent's likely policy",
            PromptKind::TomPredict => "predict what this opponent will play the next time",
            PromptKind::TomSeekout => "High-level strategy Request:",
            PromptKind::TomVanilla => "Answer all four parts in one response",
            PromptKind::HehrStrategy => "Propose a high-level strategy for the next interaction",
            PromptKind::HehrCounterfactual => "would the reward have been positive, negative, or neutral",
            PromptKind::SubgoalMatrix => "Select subgoals in order to achieve the strategy",
            PromptKind::SubgoalCooking => "Your previously specified high-level strategy is:",
            PromptKind::ReactMatrix => "Think about the other players' strategies and come up with a subgoal plan",
            PromptKind::ReactCooking => "Think about your teammate's behavior and come up with a subgoal plan",
            PromptKind::PlanMatrix => "Provide the next high-level plan for your player",
            PromptKind::PlanCooking => "which part of the recipe should you focus on",
            PromptKind::CookingInfer => "what do you think their strategy is?",
            PromptKind::CookingPredict => "what do you think they will do next?",
            PromptKind::CookingEvaluate => "Did your prediction match the observed behavior?",
            PromptKind::CookingStrategy => "what strategy do you want to take next and why?",
            PromptKind::Reflect => "You are an action plan evaluator.",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            PromptKind::TomEstimate => include_str!("../prompts/tom_estimate.txt"),
            PromptKind::TomHypothesis => include_str!("../prompts/tom_hypothesis.txt"),
            PromptKind::TomPredict => include_str!("../prompts/tom_predict.txt"),
            PromptKind::TomSeekout => include_str!("../prompts/tom_seekout.txt"),
            PromptKind::TomVanilla => include_str!("../prompts/tom_vanilla.txt"),
            PromptKind::HehrStrategy => include_str!("../prompts/tom_hehr_strategy.txt"),
            PromptKind::HehrCounterfactual => include_str!("../prompts/tom_hehr_counterfactual.txt"),
            PromptKind::SubgoalMatrix => include_str!("../prompts/subgoal_matrix.txt"),
            PromptKind::SubgoalCooking => include_str!("../prompts/subgoal_cooking.txt"),
            PromptKind::ReactMatrix => include_str!("../prompts/react_matrix.txt"),
            PromptKind::ReactCooking => include_str!("../prompts/react_cooking.txt"),
            PromptKind::PlanMatrix => include_str!("../prompts/plan_matrix.txt"),
            PromptKind::PlanCooking => include_str!("../prompts/plan_cooking.txt"),
            PromptKind::CookingInfer => include_str!("../prompts/cooking_infer.txt"),
            PromptKind::CookingPredict => include_str!("../prompts/cooking_predict.txt"),
            PromptKind::CookingEvaluate => include_str!("../prompts/cooking_evaluate.txt"),
            PromptKind::CookingStrategy => include_str!("../prompts/cooking_strategy.txt"),
            PromptKind::Reflect => include_str!("../prompts/reflect.txt"),
        }
    }

    /// Short name used in reasoner traces.
    pub fn name(self) -> &'static str {
        match self {
            PromptKind::TomEstimate => "tom_estimate",
            PromptKind::TomHypothesis => "tom_hypothesis",
            PromptKind::TomPredict => "tom_predict",
            PromptKind::TomSeekout => "tom_seekout",
            PromptKind::TomVanilla => "tom_vanilla",
            PromptKind::HehrStrategy => "hehr_strategy",
            PromptKind::HehrCounterfactual => "hehr_counterfactual",
            PromptKind::SubgoalMatrix => "subgoal_matrix",
            PromptKind::SubgoalCooking => "subgoal_cooking",
            PromptKind::ReactMatrix => "react_matrix",
            PromptKind::ReactCooking => "react_cooking",
            PromptKind::PlanMatrix => "plan_matrix",
            PromptKind::PlanCooking => "plan_cooking",
            PromptKind::CookingInfer => "cooking_infer",
            PromptKind::CookingPredict => "cooking_predict",
            PromptKind::CookingEvaluate => "cooking_evaluate",
            PromptKind::CookingStrategy => "cooking_strategy",
            PromptKind::Reflect => "reflect",
        }
    }

    /// Which template a prompt was rendered from.
    pub fn detect(text: &str) -> Option<PromptKind> {
        Self::ALL.into_iter().find(|k| text.contains(k.marker()))
    }
}

pub const REFINEMENT: &str = include_str!("../prompts/tom_refinement.txt");
pub const STATE_MATRIX: &str = include_str!("../prompts/state_matrix.txt");
pub const STATE_COOKING: &str = include_str!("../prompts/state_cooking.txt");
pub const REFLECT_FAILED: &str = include_str!("../prompts/reflect_failed.txt");
pub const REFLECT_SUCCEEDED: &str = include_str!("../prompts/reflect_succeeded.txt");

pub fn system_prompt(substrate: SubstrateId) -> &'static str {
    match substrate {
        SubstrateId::RwsRepeated => include_str!("../prompts/system_rws_repeated.txt"),
        SubstrateId::RwsArena => include_str!("../prompts/system_rws_arena.txt"),
        SubstrateId::PdRepeated => include_str!("../prompts/system_pd_repeated.txt"),
        SubstrateId::Cooking => include_str!("../prompts/system_cooking.txt"),
    }
}

/// Fills `{name}` placeholders from `vars`. Every placeholder must be bound;
/// unused bindings are allowed. A trailing newline in the template is dropped.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template.strip_suffix('\n').unwrap_or(template);
    while let Some(i) = rest.find(['{', '}']) {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        if let Some(after) = tail.strip_prefix("{{") {
            out.push('{');
            rest = after;
        } else if let Some(after) = tail.strip_prefix("}}") {
            out.push('}');
            rest = after;
        } else if tail.starts_with('}') {
            return Err(HmError::Template(format!("unmatched '}}' at byte {}", template.len() - tail.len())));
        } else {
            let end = tail.find('}').ok_or_else(|| HmError::Template("unterminated placeholder".into()))?;
            let name = &tail[1..end];
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(HmError::Template(format!("bad placeholder {{{name}}}")));
            }
            let value = vars
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| HmError::Template(format!("no value for placeholder {{{name}}}")))?;
            out.push_str(value);
            rest = &tail[end + 1..];
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Placeholder names used by a template, in order of first use.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let mut rest = template;
    while let Some(i) = rest.find(['{', '}']) {
        let tail = &rest[i..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            rest = &tail[2..];
        } else if let Some(after) = tail.strip_prefix('}') {
            rest = after;
        } else {
            let end = tail.find('}').unwrap_or(tail.len() - 1);
            let name = tail[1..end].to_string();
            if !names.contains(&name) {
                names.push(name);
            }
            rest = &tail[end + 1..];
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escaped_braces_and_placeholders() {
        let s = render("{{'a': {x}}}", &[("x", "5")]).unwrap();
        assert_eq!(s, "{'a': 5}");
    }

    #[test]
    fn missing_placeholder_is_an_error() {
        let e = render("step {step}", &[]).unwrap_err();
        assert_eq!(e.to_string(), "template error: no value for placeholder {step}");
    }

    #[test]
    fn every_template_detects_as_itself() {
        for kind in PromptKind::ALL {
            let names = placeholders(kind.template());
            let vars: Vec<(&str, &str)> = names.iter().map(|n| (n.as_str(), "x")).collect();
            let text = render(kind.template(), &vars).unwrap();
            assert_eq!(PromptKind::detect(&text), Some(kind), "{}", kind.name());
        }
    }

    #[test]
    fn system_prompts_render() {
        for s in [SubstrateId::RwsRepeated, SubstrateId::RwsArena, SubstrateId::PdRepeated, SubstrateId::Cooking] {
            let text = render(system_prompt(s), &[("agent_id", "player_0")]).unwrap();
            assert!(text.contains("player_0"));
        }
    }
}
