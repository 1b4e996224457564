//! Prompt assembly for navigation inference and chain-of-thought mining.
//!
//! A prompt is a prefix (task settings, format contract, sub-tasks) plus an
//! input (instruction, map text, demonstration or revealed decision,
//! history). Canonical wording lives in `templates/`; a directory with files
//! of the same names overrides them.

mod template;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::action::Action;
use crate::cot::CoTExample;
use crate::scene::{DetectedObject, ProposalRef};
use crate::task::TaskMode;

pub use template::Template;

pub const DEFAULT_CHAR_BUDGET: usize = 24_000;
pub const DEMO_HEADER: &str = "Demonstration example";
pub const FORMAT_REMINDER: &str = "\n\nYour previous answer could not be parsed. End your answer with exactly two lines:\nSelected viewpoint: <one ID from the action space, or STOP>\nSelected object: <one proposal ID, or none>";

const HISTORY_ELIDED: &str = "(earlier steps omitted)";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("template `{template}` uses unknown placeholder `{{{placeholder}}}`")]
    UnknownPlaceholder { template: String, placeholder: String },
    #[error("template `{template}` is malformed at byte {offset}: {reason}")]
    Malformed { template: String, offset: usize, reason: String },
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Inference,
    Mining,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub prefix: String,
    pub input: String,
    pub mode: PromptMode,
}

impl PromptBundle {
    pub fn len_chars(&self) -> usize {
        self.prefix.chars().count() + self.input.chars().count()
    }

    /// SHA-256 over prefix, a NUL separator, and input.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.prefix.as_bytes());
        h.update([0u8]);
        h.update(self.input.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn has_demo(&self) -> bool {
        self.input.contains(DEMO_HEADER)
    }

    pub fn with_format_reminder(&self) -> PromptBundle {
        PromptBundle { input: format!("{}{FORMAT_REMINDER}", self.input), ..self.clone() }
    }
}

const TEMPLATE_FILES: [(&str, &str, &[&str]); 7] = [
    ("inference_prefix", include_str!("../../templates/inference_prefix.txt"), &["subtasks"]),
    (
        "inference_input",
        include_str!("../../templates/inference_input.txt"),
        &["instruction", "demo", "map", "actions", "objects", "history"],
    ),
    ("mining_prefix", include_str!("../../templates/mining_prefix.txt"), &["subtasks"]),
    ("mining_input", include_str!("../../templates/mining_input.txt"), &["instruction", "map", "decision"]),
    ("subtasks_inference", include_str!("../../templates/subtasks_inference.txt"), &[]),
    ("subtasks_reverie", include_str!("../../templates/subtasks_reverie.txt"), &[]),
    ("subtasks_mining", include_str!("../../templates/subtasks_mining.txt"), &[]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplates {
    templates: HashMap<&'static str, Template>,
}

impl PromptTemplates {
    pub fn builtin() -> Self {
        let templates = TEMPLATE_FILES
            .iter()
            .map(|(name, text, allowed)| {
                (*name, Template::parse(name, text, allowed).expect("built-in templates parse"))
            })
            .collect();
        PromptTemplates { templates }
    }

    /// Built-ins overridden by any `<name>.txt` present in `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut out = Self::builtin();
        for (name, _, allowed) in TEMPLATE_FILES {
            let path = dir.join(format!("{name}.txt"));
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| PromptError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            out.templates.insert(name, Template::parse(name, &text, allowed)?);
        }
        Ok(out)
    }

    fn get(&self, name: &str) -> &Template {
        &self.templates[name]
    }

    /// Raw text of a sub-task block (no placeholders).
    pub fn block(&self, name: &str) -> String {
        self.get(name).render(&HashMap::new())
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn render_demo(example: &CoTExample) -> String {
    let mut out = format!(
        "{DEMO_HEADER} (destination room type: {}):\nInstruction: {}\n",
        example.room_type, example.instruction
    );
    for (i, step) in example.steps.iter().enumerate() {
        out.push_str(&format!("Step {} at {}: {}\n", i + 1, step.viewpoint, step.explanation.trim()));
        out.push_str(&format!("Selected viewpoint: {}\n", step.action));
        if let Some(obj) = &step.object {
            out.push_str(&format!("Selected object: {}\n", obj.proposal_id));
        }
    }
    out.push('\n');
    out
}

pub fn render_actions(actions: &[Action]) -> String {
    actions.iter().map(|a| format!("- {a}")).collect::<Vec<_>>().join("\n")
}

fn render_objects(proposals: &[DetectedObject]) -> String {
    if proposals.is_empty() {
        return "(none)".into();
    }
    proposals
        .iter()
        .map(|p| format!("- {}: {}", p.proposal_id, p.label))
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_decision(gt: &Action, object: Option<&ProposalRef>) -> String {
    match (gt, object) {
        (Action::Stop, Some(o)) => format!(
            "Your decision: STOP here and point out object {}.\nExplain why stopping here is correct and why this object is the referred one.",
            o.proposal_id
        ),
        (Action::Stop, None) => {
            "Your decision: STOP here.\nExplain why stopping here is correct.".to_string()
        }
        (Action::Viewpoint(id), Some(o)) => format!(
            "Your decision: move to viewpoint {id} and note object {}.\nExplain the reason behind this selection step by step.",
            o.proposal_id
        ),
        (Action::Viewpoint(id), None) => format!(
            "Your decision: move to viewpoint {id}.\nExplain the reason behind this selection step by step."
        ),
    }
}

#[derive(Debug, Clone)]
pub struct PromptManager {
    templates: PromptTemplates,
    task_mode: TaskMode,
    char_budget: usize,
}

impl PromptManager {
    pub fn new(templates: PromptTemplates, task_mode: TaskMode, char_budget: usize) -> Self {
        PromptManager { templates, task_mode, char_budget }
    }

    pub fn templates(&self) -> &PromptTemplates {
        &self.templates
    }

    /// Sub-task block that only appears in inference prompts.
    pub fn inference_block(&self) -> String {
        let mut block = self.templates.block("subtasks_inference");
        if self.task_mode == TaskMode::Reverie {
            block.push_str(&self.templates.block("subtasks_reverie"));
        }
        block
    }

    /// Sub-task block that only appears in mining prompts.
    pub fn mining_block(&self) -> String {
        self.templates.block("subtasks_mining")
    }

    /// Navigation prompt. When the result exceeds the character budget the
    /// oldest history lines are dropped first; map and instruction are kept.
    pub fn build_inference_prompt(
        &self,
        map_text: &str,
        instruction: &str,
        demo: Option<&CoTExample>,
        action_space: &[Action],
        proposals: &[DetectedObject],
        history: &[Action],
    ) -> PromptBundle {
        let block = self.inference_block();
        let prefix = self.templates.get("inference_prefix").render(&HashMap::from([("subtasks", block.as_str())]));
        let demo_text = demo.map(render_demo).unwrap_or_default();
        let actions = render_actions(action_space);
        let objects = render_objects(proposals);
        let lines: Vec<String> =
            history.iter().enumerate().map(|(t, a)| format!("step {t}: moved to {a}")).collect();

        let input_for = |skip: usize| {
            let history_text = if lines.is_empty() {
                "(none)".to_string()
            } else if skip == 0 {
                lines.join("\n")
            } else {
                std::iter::once(HISTORY_ELIDED.to_string())
                    .chain(lines[skip..].iter().cloned())
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            self.templates.get("inference_input").render(&HashMap::from([
                ("instruction", instruction),
                ("demo", demo_text.as_str()),
                ("map", map_text),
                ("actions", actions.as_str()),
                ("objects", objects.as_str()),
                ("history", history_text.as_str()),
            ]))
        };

        let prefix_len = prefix.chars().count();
        let mut skip = 0;
        let mut input = input_for(0);
        while prefix_len + input.chars().count() > self.char_budget && skip < lines.len() {
            skip += 1;
            input = input_for(skip);
        }
        PromptBundle { prefix, input, mode: PromptMode::Inference }
    }

    /// Annotator-role prompt revealing the ground-truth decision and asking
    /// for its explanation.
    pub fn build_mining_prompt(
        &self,
        map_text: &str,
        instruction: &str,
        gt_viewpoint: &Action,
        gt_object: Option<&ProposalRef>,
    ) -> PromptBundle {
        let block = self.mining_block();
        let prefix = self.templates.get("mining_prefix").render(&HashMap::from([("subtasks", block.as_str())]));
        let decision = render_decision(gt_viewpoint, gt_object);
        let input = self.templates.get("mining_input").render(&HashMap::from([
            ("instruction", instruction),
            ("map", map_text),
            ("decision", decision.as_str()),
        ]));
        PromptBundle { prefix, input, mode: PromptMode::Mining }
    }
}

impl Default for PromptManager {
    fn default() -> Self {
        PromptManager::new(PromptTemplates::builtin(), TaskMode::Reverie, DEFAULT_CHAR_BUDGET)
    }
}
