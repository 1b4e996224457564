//! Topological-memory LLM navigation agent over file-defined viewpoint graphs.
//!
//! The agent keeps a growing map of observed viewpoints and clustered objects,
//! retrieves a chain-of-thought demonstration by room type, prompts a
//! pluggable LLM backend for the next viewpoint, and walks there along the
//! shortest known path. Runs are scored with the usual VLN metrics.

pub mod action;
pub mod cli;
pub mod geometry;
pub mod memory_map;
pub mod metrics;
pub mod pipeline;
pub mod planner;
pub mod scene;

pub use action::Action;
pub mod cot;
pub mod http;
pub mod llm;
pub mod prompt;
pub mod registry;
pub mod task;

pub use task::TaskMode;
