//! Chain-of-thought mining: replay each sampled ground-truth path, reveal the
//! annotator's decision at every step, and ask the LLM to explain it.

use super::store::{CoTExample, CoTStep, ExampleSet};
use super::CotError;
use crate::action::Action;
use crate::llm::{LlmBackend, LlmError, StepContext};
use crate::memory_map::{render_map_text, MemoryMap};
use crate::planner::{execute_path, shortest_path};
use crate::prompt::PromptManager;
use crate::scene::{Episode, SceneSet};

#[derive(Debug, Clone, PartialEq)]
pub struct MiningParams {
    pub embedder_id: String,
    pub cluster_k: Option<usize>,
    pub seed: u64,
}

pub fn mine_examples(
    sampled: &[(Episode, String)],
    scenes: &SceneSet,
    backend: &dyn LlmBackend,
    prompts: &PromptManager,
    params: &MiningParams,
) -> Result<ExampleSet, CotError> {
    let mut examples = Vec::with_capacity(sampled.len());
    for (episode, room_type) in sampled {
        examples.push(mine_one(episode, room_type, scenes, backend, prompts, params)?);
    }
    Ok(ExampleSet::new(params.embedder_id.clone(), examples))
}

fn mine_one(
    episode: &Episode,
    room_type: &str,
    scenes: &SceneSet,
    backend: &dyn LlmBackend,
    prompts: &PromptManager,
    params: &MiningParams,
) -> Result<CoTExample, CotError> {
    let scene = scenes.for_episode(episode)?;
    let walk_err = |step: usize, reason: String| CotError::Walk {
        episode: episode.episode_id.clone(),
        step,
        reason,
    };
    if episode.gt_path.first() != Some(&episode.start) {
        return Err(walk_err(0, "gt_path does not begin at start".into()));
    }
    let mut session = backend.session(episode);
    let mut map = MemoryMap::new();
    let mut steps = Vec::with_capacity(episode.gt_path.len());

    for (n, at) in episode.gt_path.iter().enumerate() {
        if map.current().is_some_and(|cur| cur != at) {
            return Err(walk_err(n, format!("agent at `{}` instead of `{at}`", map.current().unwrap_or_default())));
        }
        let obs = scene.get_observation(at)?;
        map.update(&obs).map_err(|e| walk_err(n, e.to_string()))?;

        let action = match episode.gt_path.get(n + 1) {
            Some(next) => Action::viewpoint(next.clone()),
            None => Action::Stop,
        };
        if !map.global_action_space().contains(&action) {
            return Err(walk_err(n, format!("`{action}` is not reachable from `{at}`")));
        }
        let object = match action {
            Action::Stop => episode.target_object.clone().filter(|t| &t.viewpoint == at),
            Action::Viewpoint(_) => None,
        };

        let clusters = map.clusters(params.cluster_k, params.seed);
        let map_text = render_map_text(&map, &clusters);
        let prompt = prompts.build_mining_prompt(&map_text, &episode.instruction, &action, object.as_ref());
        let llm_err = |source: LlmError| CotError::Llm { episode: episode.episode_id.clone(), step: n, source };
        let explanation = session
            .complete(&prompt, &StepContext { step: n, at: at.clone() })
            .map_err(llm_err)?;
        if explanation.trim().is_empty() {
            return Err(llm_err(LlmError::BadResponse("empty explanation".into())));
        }
        steps.push(CoTStep { viewpoint: at.clone(), action: action.clone(), object, explanation });

        let Action::Viewpoint(next) = action else { break };
        let path = shortest_path(&map, at, &next).map_err(|e| walk_err(n, e.to_string()))?;
        execute_path(&mut map, &path, scene).map_err(|e| walk_err(n, e.to_string()))?;
    }

    Ok(CoTExample {
        example_id: episode.episode_id.clone(),
        instruction: episode.instruction.clone(),
        room_type: room_type.to_string(),
        steps,
    })
}
