//! Navigation chain-of-thought examples: mining explanations along
//! ground-truth paths and retrieving one demonstration per episode.

pub mod embed;
pub mod mining;
pub mod room_type;
pub mod store;

use thiserror::Error;

use crate::llm::LlmError;
use crate::scene::SceneError;

pub use embed::{cosine_similarity, embedders, Embedder, EmbedderConfig, EmbeddingVector, TrigramEmbedder};
pub use mining::mine_examples;
pub use room_type::{default_lexicon, extract_room_type, DEFAULT_ROOM_TYPES};
pub use store::{
    build_sampled_training_set, demo_queries, query_by_instruction, query_example, CoTExample, CoTStep, DemoQuery,
    ExampleSet,
};

#[derive(Debug, Error)]
pub enum CotError {
    #[error("example set is empty")]
    EmptyExampleSet,
    #[error("no episodes to sample from")]
    NoEpisodes,
    #[error("episode {episode}: destination `{viewpoint}` has no room_type_gt")]
    MissingRoomType { episode: String, viewpoint: String },
    #[error("example set invariant violated: {0}")]
    Invariant(String),
    #[error("example set schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("episode {episode}, step {step}: walk error: {reason}")]
    Walk { episode: String, step: usize, reason: String },
    #[error("episode {episode}, step {step}: {source}")]
    Llm {
        episode: String,
        step: usize,
        #[source]
        source: LlmError,
    },
    #[error(transparent)]
    Embed(#[from] embed::EmbedError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}
