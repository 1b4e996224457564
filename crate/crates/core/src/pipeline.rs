//! Episode execution: observe, grow the map, retrieve a demonstration,
//! prompt the backend, parse its decision, and walk to the chosen viewpoint
//! until STOP or the step budget runs out.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;
use crate::cot::{default_lexicon, demo_queries, CoTExample, CotError, DemoQuery, Embedder, ExampleSet};
use crate::llm::{parse_decision, BackendConfig, Decision, LlmBackend, LlmError, StepContext};
use crate::memory_map::{render_map_text, MemoryMap};
use crate::planner::{execute_path, shortest_path};
use crate::prompt::{PromptManager, PromptMode};
use crate::scene::{Episode, ProposalRef, Scene, SceneError, SceneSet};
use crate::task::TaskMode;

pub const PARSE_FAILURE_FLAG: &str = "degraded: parse_failure";
pub const DEMO_DRIFT_FLAG: &str = "degraded: demo_drift";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("episode {episode}, step {step}: {source}")]
    Backend {
        episode: String,
        step: usize,
        #[source]
        source: LlmError,
    },
    #[error("episode {episode}, step {step}: {message}")]
    Data { episode: String, step: usize, message: String },
    #[error(transparent)]
    Cot(#[from] CotError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("run config: {0}")]
    Config(String),
    #[error("results file: {0}")]
    Results(String),
}

fn default_max_steps() -> usize {
    15
}

fn default_query() -> String {
    "room-type".into()
}

fn default_embedder() -> String {
    "trigram".into()
}

fn default_budget() -> usize {
    crate::prompt::DEFAULT_CHAR_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_max_steps")]
    pub max_episode_length: usize,
    #[serde(default)]
    pub task_mode: TaskMode,
    /// Demo query strategy: `room-type`, `instruction` or `none`.
    #[serde(default = "default_query")]
    pub demo_query: String,
    /// Keep only the first N demonstration steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo_steps: Option<usize>,
    pub backend: BackendConfig,
    #[serde(default = "default_embedder")]
    pub embedder_id: String,
    #[serde(default)]
    pub seed: u64,
    /// Fixed k for object clustering; silhouette selection when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_k: Option<usize>,
    #[serde(default = "default_budget")]
    pub char_budget: usize,
    /// Re-query the demonstration every step and flag any drift.
    #[serde(default)]
    pub debug_requery: bool,
    /// Store full prompt text in the prompt log.
    #[serde(default)]
    pub keep_prompts: bool,
}

impl RunConfig {
    pub fn new(backend: BackendConfig) -> Self {
        RunConfig {
            max_episode_length: default_max_steps(),
            task_mode: TaskMode::Reverie,
            demo_query: default_query(),
            demo_steps: None,
            backend,
            embedder_id: default_embedder(),
            seed: 0,
            cluster_k: None,
            char_budget: default_budget(),
            debug_requery: false,
            keep_prompts: false,
        }
    }

    pub fn demo_enabled(&self) -> bool {
        self.demo_query != "none"
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.max_episode_length < 1 {
            return Err(PipelineError::Config("max_episode_length must be at least 1".into()));
        }
        if self.cluster_k == Some(0) {
            return Err(PipelineError::Config("cluster_k must be at least 1".into()));
        }
        demo_queries().get(&self.demo_query).map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptLogEntry {
    pub step: usize,
    /// Viewpoint the agent stood at.
    pub at: String,
    /// Index of `at` in the episode trajectory.
    pub trajectory_index: usize,
    pub mode: PromptMode,
    pub digest: String,
    pub chars: usize,
    pub has_demo: bool,
    pub demo_example_id: Option<String>,
    pub action_space: Vec<Action>,
    pub reprompted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: String,
    pub trajectory: Vec<String>,
    pub decisions: Vec<Decision>,
    pub selected_object: Option<ProposalRef>,
    pub stopped: bool,
    pub steps_used: usize,
    pub tl_meters: f64,
    pub degraded_flags: Vec<String>,
    pub prompt_log: Vec<PromptLogEntry>,
}

impl EpisodeResult {
    fn empty(episode: &Episode) -> Self {
        EpisodeResult {
            episode_id: episode.episode_id.clone(),
            trajectory: vec![episode.start.clone()],
            decisions: Vec::new(),
            selected_object: None,
            stopped: false,
            steps_used: 0,
            tl_meters: 0.0,
            degraded_flags: Vec::new(),
            prompt_log: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsHeader {
    pub config: RunConfig,
    pub scene_ids: Vec<String>,
    pub code_version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub header: ResultsHeader,
    pub results: Vec<EpisodeResult>,
}

impl ResultsFile {
    pub fn new(config: &RunConfig, scenes: &SceneSet, results: Vec<EpisodeResult>) -> Self {
        ResultsFile {
            header: ResultsHeader {
                config: config.clone(),
                scene_ids: scenes.scene_ids(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
            },
            results,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| PipelineError::Results(format!("{}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Results(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Results(format!("{}: {e}", path.display())))
    }
}

/// Lexicon used for room-type extraction in `scene`.
pub fn scene_lexicon(scene: &Scene) -> Vec<String> {
    if scene.room_type_lexicon().is_empty() {
        default_lexicon()
    } else {
        scene.room_type_lexicon().to_vec()
    }
}

/// Shared, read-only resources for running episodes.
pub struct Runner {
    cfg: RunConfig,
    backend: Arc<dyn LlmBackend>,
    embedder: Arc<dyn Embedder>,
    query: Box<dyn DemoQuery>,
    prompts: PromptManager,
}

impl Runner {
    pub fn new(
        cfg: RunConfig,
        backend: Arc<dyn LlmBackend>,
        embedder: Arc<dyn Embedder>,
        prompts: PromptManager,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let query = (*demo_queries().get(&cfg.demo_query).map_err(|e| PipelineError::Config(e.to_string()))?)();
        Ok(Runner { cfg, backend, embedder, query, prompts })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    fn select_demo(
        &self,
        episode: &Episode,
        set: &ExampleSet,
        lexicon: &[String],
    ) -> Result<Option<CoTExample>, CotError> {
        let picked = self.query.select(&episode.instruction, set, lexicon, self.embedder.as_ref())?;
        Ok(picked.map(|ex| match self.cfg.demo_steps {
            Some(n) => ex.truncated(n),
            None => ex.clone(),
        }))
    }

    pub fn run_episode(&self, scene: &Scene, episode: &Episode, set: &ExampleSet) -> Result<EpisodeResult, PipelineError> {
        let (result, err) = self.run_inner(scene, episode, set);
        match err {
            Some(e) => Err(e),
            None => Ok(result),
        }
    }

    /// Runs every episode; failures are recorded as flags on the partial
    /// result. Output order matches input order for any `jobs`.
    pub fn run_suite(&self, scenes: &SceneSet, episodes: &[Episode], set: &ExampleSet, jobs: usize) -> Vec<EpisodeResult> {
        let run_one = |ep: &Episode| -> EpisodeResult {
            match scenes.for_episode(ep) {
                Ok(scene) => {
                    let (mut result, err) = self.run_inner(scene, ep, set);
                    if let Some(e) = err {
                        result.degraded_flags.push(format!("error: {e}"));
                    }
                    result
                }
                Err(e) => {
                    let mut result = EpisodeResult::empty(ep);
                    result.degraded_flags.push(format!("error: {e}"));
                    result
                }
            }
        };
        if jobs <= 1 {
            return episodes.iter().map(run_one).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| episodes.par_iter().map(run_one).collect()),
            Err(_) => episodes.iter().map(run_one).collect(),
        }
    }

    fn run_inner(&self, scene: &Scene, episode: &Episode, set: &ExampleSet) -> (EpisodeResult, Option<PipelineError>) {
        let mut result = EpisodeResult::empty(episode);
        let err = self.drive(scene, episode, set, &mut result).err();
        (result, err)
    }

    fn drive(&self, scene: &Scene, episode: &Episode, set: &ExampleSet, result: &mut EpisodeResult) -> Result<(), PipelineError> {
        let data_err = |step: usize, message: String| PipelineError::Data {
            episode: episode.episode_id.clone(),
            step,
            message,
        };
        episode.validate(scene)?;
        let lexicon = scene_lexicon(scene);
        let demo = self.select_demo(episode, set, &lexicon)?;
        let mut session = self.backend.session(episode);
        let mut map = MemoryMap::new();
        let mut position = episode.start.clone();
        let mut history: Vec<Action> = Vec::new();

        for step in 0..self.cfg.max_episode_length {
            let obs = scene.get_observation(&position)?;
            map.update(&obs).map_err(|e| data_err(step, e.to_string()))?;

            if self.cfg.debug_requery {
                let again = self.select_demo(episode, set, &lexicon)?;
                if again != demo && !result.degraded_flags.iter().any(|f| f == DEMO_DRIFT_FLAG) {
                    result.degraded_flags.push(DEMO_DRIFT_FLAG.to_string());
                }
            }

            let action_space = map.global_action_space();
            let proposals = &obs.current_detections;
            let clusters = map.clusters(self.cfg.cluster_k, self.cfg.seed);
            let map_text = render_map_text(&map, &clusters);
            let prompt = self.prompts.build_inference_prompt(
                &map_text,
                &episode.instruction,
                demo.as_ref(),
                &action_space,
                proposals,
                &history,
            );

            let ctx = StepContext { step, at: position.clone() };
            let backend_err = |source: LlmError| PipelineError::Backend {
                episode: episode.episode_id.clone(),
                step,
                source,
            };
            let text = session.complete(&prompt, &ctx).map_err(backend_err)?;
            let mut reprompted = false;
            let decision = match parse_decision(&text, &action_space, proposals) {
                Ok(d) => d,
                Err(_) => {
                    reprompted = true;
                    let retry = prompt.with_format_reminder();
                    let text = session.complete(&retry, &ctx).map_err(backend_err)?;
                    match parse_decision(&text, &action_space, proposals) {
                        Ok(d) => d,
                        Err(e) => {
                            result.degraded_flags.push(PARSE_FAILURE_FLAG.to_string());
                            Decision { action: Action::Stop, object: None, raw_text: text, reasoning: e.to_string() }
                        }
                    }
                }
            };

            result.prompt_log.push(PromptLogEntry {
                step,
                at: position.clone(),
                trajectory_index: result.trajectory.len() - 1,
                mode: prompt.mode,
                digest: prompt.digest(),
                chars: prompt.len_chars(),
                has_demo: prompt.has_demo(),
                demo_example_id: demo.as_ref().map(|d| d.example_id.clone()),
                action_space: action_space.clone(),
                reprompted,
                prefix: self.cfg.keep_prompts.then(|| prompt.prefix.clone()),
                input: self.cfg.keep_prompts.then(|| prompt.input.clone()),
            });
            result.steps_used = step + 1;
            result.selected_object = decision.object.as_ref().map(|pid| ProposalRef {
                viewpoint: position.clone(),
                proposal_id: pid.clone(),
            });
            let action = decision.action.clone();
            result.decisions.push(decision);

            let Action::Viewpoint(target) = action else {
                result.stopped = true;
                break;
            };
            let path = shortest_path(&map, &position, &target).map_err(|e| data_err(step, e.to_string()))?;
            let segment = execute_path(&mut map, &path, scene).map_err(|e| data_err(step, e.to_string()))?;
            result.trajectory.extend(segment.viewpoints);
            result.tl_meters += segment.meters;
            history.push(Action::Viewpoint(target.clone()));
            position = target;
        }
        Ok(())
    }
}

/// Rebuilds the memory map an episode had when it made decision `step`
/// (or its final map when `step` is `None`) by replaying its trajectory.
pub fn replay_map(scene: &Scene, result: &EpisodeResult, step: Option<usize>) -> Result<MemoryMap, PipelineError> {
    let upto = match step {
        None => result.trajectory.len().saturating_sub(1),
        Some(s) => {
            result
                .prompt_log
                .get(s)
                .ok_or_else(|| PipelineError::Results(format!("episode {} has no step {s}", result.episode_id)))?
                .trajectory_index
        }
    };
    let mut map = MemoryMap::new();
    for (i, vp) in result.trajectory.iter().take(upto + 1).enumerate() {
        let obs = scene.get_observation(vp)?;
        map.update(&obs).map_err(|e| PipelineError::Data {
            episode: result.episode_id.clone(),
            step: i,
            message: e.to_string(),
        })?;
    }
    Ok(map)
}
