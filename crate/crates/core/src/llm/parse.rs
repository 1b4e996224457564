//! Strict extraction of `Selected viewpoint:` / `Selected object:` lines from
//! model output.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;
use crate::scene::DetectedObject;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecisionError {
    #[error("no `Selected viewpoint:` line in model output")]
    Parse,
    #[error("selected viewpoint `{0}` is not in the action space")]
    InvalidAction(String),
    #[error("selected object `{0}` is not among the current proposals")]
    InvalidObject(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    pub raw_text: String,
    pub reasoning: String,
}

static VIEWPOINT_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[\s*_#>-]*selected viewpoint[\s*_]*:(?P<tok>.*)$").unwrap());
static OBJECT_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[\s*_#>-]*selected object[\s*_]*:(?P<tok>.*)$").unwrap());

fn clean_token(raw: &str) -> &str {
    raw.trim_matches(|c: char| c.is_whitespace() || "*_`'\"<>.[]".contains(c))
}

/// Canonical two-line rendering of a decision, which `parse_decision` reads back.
pub fn render_decision(action: &Action, object: Option<&str>) -> String {
    format!("Selected viewpoint: {}\nSelected object: {}", action, object.unwrap_or("none"))
}

pub fn parse_decision(
    text: &str,
    action_space: &[Action],
    proposals: &[DetectedObject],
) -> Result<Decision, DecisionError> {
    let lines: Vec<&str> = text.lines().collect();
    let (line_idx, token) = lines
        .iter()
        .enumerate()
        .rev()
        .find_map(|(i, l)| VIEWPOINT_LINE.captures(l).map(|c| (i, clean_token(c.name("tok").unwrap().as_str()))))
        .ok_or(DecisionError::Parse)?;
    if token.is_empty() {
        return Err(DecisionError::Parse);
    }
    let action = if token.eq_ignore_ascii_case("stop") {
        Action::Stop
    } else {
        action_space
            .iter()
            .find(|a| a.as_viewpoint() == Some(token))
            .cloned()
            .ok_or_else(|| DecisionError::InvalidAction(token.to_string()))?
    };
    if action.is_stop() && !action_space.contains(&Action::Stop) {
        return Err(DecisionError::InvalidAction(token.to_string()));
    }

    let object = lines
        .iter()
        .rev()
        .find_map(|l| OBJECT_LINE.captures(l).map(|c| clean_token(c.name("tok").unwrap().as_str())))
        .filter(|t| !matches!(t.to_ascii_lowercase().as_str(), "" | "none" | "null" | "n/a" | "-"))
        .map(|t| {
            proposals
                .iter()
                .find(|p| p.proposal_id == t)
                .map(|p| p.proposal_id.clone())
                .ok_or_else(|| DecisionError::InvalidObject(t.to_string()))
        })
        .transpose()?;

    Ok(Decision {
        action,
        object,
        raw_text: text.to_string(),
        reasoning: lines[..line_idx].join("\n").trim().to_string(),
    })
}
