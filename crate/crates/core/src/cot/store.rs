//! Demonstration examples: the example-set file, sampled training set
//! construction, and retrieval by cosine similarity.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embed::{cosine_similarity, Embedder, EmbeddingVector};
use super::room_type::extract_room_type;
use super::CotError;
use crate::action::Action;
use crate::registry::Registry;
use crate::scene::{Episode, ProposalRef, SceneSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTStep {
    /// Where the annotator stood.
    pub viewpoint: String,
    /// What the annotator chose there.
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<ProposalRef>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTExample {
    pub example_id: String,
    pub instruction: String,
    pub room_type: String,
    pub steps: Vec<CoTStep>,
}

impl CoTExample {
    /// Copy keeping only the first `n` steps.
    pub fn truncated(&self, n: usize) -> CoTExample {
        CoTExample { steps: self.steps.iter().take(n).cloned().collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSet {
    pub embedder_id: String,
    pub examples: Vec<CoTExample>,
}

impl ExampleSet {
    pub fn new(embedder_id: impl Into<String>, examples: Vec<CoTExample>) -> Self {
        ExampleSet { embedder_id: embedder_id.into(), examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// One example per room type; every example has steps, every step an
    /// explanation.
    pub fn validate(&self) -> Result<(), CotError> {
        let mut seen = HashSet::new();
        for ex in &self.examples {
            if !seen.insert(ex.room_type.as_str()) {
                return Err(CotError::Invariant(format!(
                    "room type `{}` has more than one example",
                    ex.room_type
                )));
            }
            if ex.steps.is_empty() {
                return Err(CotError::Invariant(format!("example {} has no steps", ex.example_id)));
            }
            if let Some(i) = ex.steps.iter().position(|s| s.explanation.trim().is_empty()) {
                return Err(CotError::Invariant(format!(
                    "example {} step {i} has an empty explanation",
                    ex.example_id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("example set serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, CotError> {
        let set: ExampleSet = serde_json::from_str(text).map_err(|e| CotError::Schema(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CotError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CotError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CotError> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| CotError::Io(format!("{}: {e}", path.display())))
    }
}

/// Index of the candidate most cosine-similar to `query`; lowest index on ties.
pub fn argmax_cosine(query: &EmbeddingVector, candidates: &[EmbeddingVector]) -> Result<Option<usize>, CotError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let s = cosine_similarity(query, c)?;
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((i, s));
        }
    }
    Ok(best.map(|(i, _)| i))
}

/// Retrieves the demonstration whose room type is closest to the one named
/// in `instruction`; without a room-type noun the whole instruction is
/// compared against the examples' room types.
pub fn query_example<'a>(
    instruction: &str,
    set: &'a ExampleSet,
    lexicon: &[String],
    embedder: &dyn Embedder,
) -> Result<&'a CoTExample, CotError> {
    if set.is_empty() {
        return Err(CotError::EmptyExampleSet);
    }
    let probe = extract_room_type(instruction, lexicon).unwrap_or_else(|| instruction.to_string());
    let query = embedder.embed(&probe)?;
    let keys = set
        .examples
        .iter()
        .map(|ex| embedder.embed(&ex.room_type))
        .collect::<Result<Vec<_>, _>>()?;
    let idx = argmax_cosine(&query, &keys)?.expect("set is nonempty");
    Ok(&set.examples[idx])
}

/// Retrieves by whole-instruction similarity against example instructions.
pub fn query_by_instruction<'a>(
    instruction: &str,
    set: &'a ExampleSet,
    embedder: &dyn Embedder,
) -> Result<&'a CoTExample, CotError> {
    if set.is_empty() {
        return Err(CotError::EmptyExampleSet);
    }
    let query = embedder.embed(instruction)?;
    let keys = set
        .examples
        .iter()
        .map(|ex| embedder.embed(&ex.instruction))
        .collect::<Result<Vec<_>, _>>()?;
    let idx = argmax_cosine(&query, &keys)?.expect("set is nonempty");
    Ok(&set.examples[idx])
}

/// How a run picks its demonstration example.
pub trait DemoQuery: Send + Sync {
    fn name(&self) -> &'static str;
    fn select<'a>(
        &self,
        instruction: &str,
        set: &'a ExampleSet,
        lexicon: &[String],
        embedder: &dyn Embedder,
    ) -> Result<Option<&'a CoTExample>, CotError>;
}

pub struct NoDemo;

impl DemoQuery for NoDemo {
    fn name(&self) -> &'static str {
        "none"
    }

    fn select<'a>(&self, _: &str, _: &'a ExampleSet, _: &[String], _: &dyn Embedder) -> Result<Option<&'a CoTExample>, CotError> {
        Ok(None)
    }
}

pub struct RoomTypeQuery;

impl DemoQuery for RoomTypeQuery {
    fn name(&self) -> &'static str {
        "room-type"
    }

    fn select<'a>(
        &self,
        instruction: &str,
        set: &'a ExampleSet,
        lexicon: &[String],
        embedder: &dyn Embedder,
    ) -> Result<Option<&'a CoTExample>, CotError> {
        query_example(instruction, set, lexicon, embedder).map(Some)
    }
}

pub struct InstructionQuery;

impl DemoQuery for InstructionQuery {
    fn name(&self) -> &'static str {
        "instruction"
    }

    fn select<'a>(
        &self,
        instruction: &str,
        set: &'a ExampleSet,
        _: &[String],
        embedder: &dyn Embedder,
    ) -> Result<Option<&'a CoTExample>, CotError> {
        query_by_instruction(instruction, set, embedder).map(Some)
    }
}

pub type DemoQueryCtor = fn() -> Box<dyn DemoQuery>;

pub fn demo_queries() -> Registry<DemoQueryCtor> {
    let mut r: Registry<DemoQueryCtor> = Registry::new("demo query");
    r.register("none", || Box::new(NoDemo));
    r.register("room-type", || Box::new(RoomTypeQuery));
    r.register("instruction", || Box::new(InstructionQuery));
    r
}

/// Groups episodes by ground-truth destination room type (from the final
/// gt_path viewpoint) and keeps the smallest episode_id per type. Sorted by
/// room type.
pub fn build_sampled_training_set(
    episodes: &[Episode],
    scenes: &SceneSet,
) -> Result<Vec<(Episode, String)>, CotError> {
    if episodes.is_empty() {
        return Err(CotError::NoEpisodes);
    }
    let mut by_type: BTreeMap<String, &Episode> = BTreeMap::new();
    for ep in episodes {
        let scene = scenes.for_episode(ep)?;
        let dest = ep
            .gt_path
            .last()
            .ok_or_else(|| CotError::Invariant(format!("episode {} has an empty gt_path", ep.episode_id)))?;
        let room = scene.viewpoint(dest)?.room_type_gt.clone().ok_or_else(|| CotError::MissingRoomType {
            episode: ep.episode_id.clone(),
            viewpoint: dest.clone(),
        })?;
        by_type
            .entry(room)
            .and_modify(|cur| {
                if ep.episode_id < cur.episode_id {
                    *cur = ep;
                }
            })
            .or_insert(ep);
    }
    Ok(by_type.into_iter().map(|(room, ep)| (ep.clone(), room)).collect())
}
