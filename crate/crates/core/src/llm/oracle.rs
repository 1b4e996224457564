use super::{render_decision, LlmBackend, LlmError, LlmSession, StepContext};
use crate::action::Action;
use crate::prompt::PromptBundle;
use crate::scene::Episode;

/// Ignores the prompt and answers with the ground-truth route: the next
/// gt_path viewpoint, then STOP (pointing at the target object, if any).
#[derive(Debug, Clone, Default)]
pub struct OracleBackend;

pub struct OracleSession {
    episode: Episode,
}

impl LlmBackend for OracleBackend {
    fn name(&self) -> &str {
        "oracle"
    }

    fn session(&self, episode: &Episode) -> Box<dyn LlmSession> {
        Box::new(OracleSession { episode: episode.clone() })
    }
}

impl LlmSession for OracleSession {
    fn complete(&mut self, _prompt: &PromptBundle, ctx: &StepContext) -> Result<String, LlmError> {
        let path = &self.episode.gt_path;
        let missing = || LlmError::OracleMissingPath {
            episode: self.episode.episode_id.clone(),
            step: ctx.step,
            at: ctx.at.clone(),
        };
        if path.get(ctx.step) != Some(&ctx.at) {
            return Err(missing());
        }
        let text = match path.get(ctx.step + 1) {
            Some(next) => format!("Following the ground-truth route.\n{}", render_decision(&Action::viewpoint(next), None)),
            None => {
                let object = self
                    .episode
                    .target_object
                    .as_ref()
                    .filter(|t| t.viewpoint == ctx.at)
                    .map(|t| t.proposal_id.as_str());
                format!("Reached the destination.\n{}", render_decision(&Action::Stop, object))
            }
        };
        Ok(text)
    }
}
