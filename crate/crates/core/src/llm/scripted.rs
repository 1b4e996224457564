use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{LlmBackend, LlmError, LlmSession, StepContext};
use crate::prompt::PromptBundle;
use crate::scene::Episode;

/// Script file: canned responses per episode, consumed in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptFile {
    pub responses: BTreeMap<String, Vec<String>>,
    /// Returned once an episode's list is used up (or absent), instead of
    /// failing with `ScriptExhausted`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

impl ScriptFile {
    pub fn load(path: &str) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path).map_err(|e| LlmError::Config(format!("script {path}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("script {path}: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    script: Arc<ScriptFile>,
}

impl ScriptedBackend {
    pub fn new(script: ScriptFile) -> Self {
        ScriptedBackend { script: Arc::new(script) }
    }
}

pub struct ScriptedSession {
    script: Arc<ScriptFile>,
    cursor: HashMap<String, usize>,
    episode_id: String,
}

impl LlmBackend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn session(&self, episode: &Episode) -> Box<dyn LlmSession> {
        Box::new(ScriptedSession {
            script: Arc::clone(&self.script),
            cursor: HashMap::new(),
            episode_id: episode.episode_id.clone(),
        })
    }
}

impl LlmSession for ScriptedSession {
    fn complete(&mut self, _prompt: &PromptBundle, _ctx: &StepContext) -> Result<String, LlmError> {
        let index = self.cursor.entry(self.episode_id.clone()).or_insert(0);
        let reply = self
            .script
            .responses
            .get(&self.episode_id)
            .and_then(|list| list.get(*index))
            .or(self.script.fallback.as_ref())
            .cloned()
            .ok_or_else(|| LlmError::ScriptExhausted { episode: self.episode_id.clone(), index: *index })?;
        *index += 1;
        Ok(reply)
    }
}
