//! The agent's topological memory: an incrementally grown graph of observed
//! viewpoints, with objects placed at viewpoint centroids and grouped by
//! k-means. The map doubles as the global action space.

mod export;
pub mod kmeans;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;
use crate::geometry::{self, Vec3};
use crate::scene::{DetectedObject, Observation};

pub use export::{render_dot, MapExport};
pub use kmeans::{cluster_objects, Cluster, ClusterSet};
pub use render::{nearest_cluster, render_map_text};

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("inconsistent observation at `{at}`: {reason}")]
    InconsistentObservation { at: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub position: Vec3,
    pub caption: String,
    pub detections: Vec<DetectedObject>,
    pub first_seen_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedObject {
    pub label: String,
    pub position: Vec3,
    pub source_viewpoints: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryMap {
    nodes: BTreeMap<String, NodeRecord>,
    /// Unordered pairs stored as `(min, max)`.
    edges: BTreeSet<(String, String)>,
    current: Option<String>,
    visited: BTreeSet<String>,
    /// Union of every local navigable set seen so far.
    offered: BTreeSet<String>,
    step: usize,
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl MemoryMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &BTreeMap<String, NodeRecord> {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&NodeRecord> {
        self.nodes.get(id)
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&edge_key(a, b))
    }

    pub fn current(&self) -> Option<&str> {
        self.current.as_deref()
    }

    pub fn visited(&self) -> &BTreeSet<String> {
        &self.visited
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Neighbors of `id` in the map, sorted.
    pub fn neighbors(&self, id: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .edges
            .iter()
            .filter_map(|(a, b)| {
                if a == id {
                    Some(b.as_str())
                } else if b == id {
                    Some(a.as_str())
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Observed but not yet visited nodes.
    pub fn frontier(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .keys()
            .filter(|id| !self.visited.contains(*id))
            .map(String::as_str)
    }

    /// Folds one observation into the map. Nodes seen before keep their
    /// original caption and detections.
    pub fn update(&mut self, obs: &Observation) -> Result<(), MapError> {
        let at = obs.current.as_str();
        if !self.nodes.is_empty() && !self.nodes.contains_key(at) {
            return Err(MapError::InconsistentObservation {
                at: at.to_string(),
                reason: "agent position was never observed".into(),
            });
        }
        let offered: BTreeSet<&str> = obs.neighbor_ids().collect();
        if offered.contains(at) {
            return Err(MapError::InconsistentObservation {
                at: at.to_string(),
                reason: "viewpoint lists itself as a neighbor".into(),
            });
        }
        if let Some(missing) = self.neighbors(at).into_iter().find(|n| !offered.contains(n)) {
            return Err(MapError::InconsistentObservation {
                at: at.to_string(),
                reason: format!("known edge to `{missing}` absent from neighbor set"),
            });
        }

        let step = self.step;
        self.nodes.entry(at.to_string()).or_insert_with(|| NodeRecord {
            id: at.to_string(),
            position: obs.current_position,
            caption: obs.current_caption.clone(),
            detections: obs.current_detections.clone(),
            first_seen_step: step,
        });
        for n in &obs.neighbors {
            self.nodes.entry(n.id.clone()).or_insert_with(|| NodeRecord {
                id: n.id.clone(),
                position: n.position,
                caption: n.caption.clone(),
                detections: n.detections.clone(),
                first_seen_step: step,
            });
            self.edges.insert(edge_key(at, &n.id));
            self.offered.insert(n.id.clone());
        }
        self.current = Some(at.to_string());
        self.visited.insert(at.to_string());
        self.step += 1;
        Ok(())
    }

    /// Every viewpoint ever offered as navigable, minus the current one, then
    /// STOP. Unvisited frontier first, then visited, each sorted.
    pub fn global_action_space(&self) -> Vec<Action> {
        let current = self.current.as_deref();
        let candidates = self.offered.iter().filter(|id| Some(id.as_str()) != current);
        let (visited, frontier): (Vec<&String>, Vec<&String>) =
            candidates.partition(|id| self.visited.contains(*id));
        frontier
            .into_iter()
            .chain(visited)
            .map(|id| Action::Viewpoint(id.clone()))
            .chain(std::iter::once(Action::Stop))
            .collect()
    }

    /// One placed object per distinct label, at the centroid of the
    /// viewpoints where it was detected. Sorted by label.
    pub fn place_objects(&self) -> Vec<PlacedObject> {
        let mut sources: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for node in self.nodes.values() {
            for det in &node.detections {
                sources.entry(det.label.as_str()).or_default().insert(node.id.as_str());
            }
        }
        sources
            .into_iter()
            .map(|(label, vps)| {
                let position = geometry::centroid(vps.iter().map(|id| &self.nodes[*id].position))
                    .expect("label has at least one source");
                PlacedObject {
                    label: label.to_string(),
                    position,
                    source_viewpoints: vps.into_iter().map(str::to_string).collect(),
                }
            })
            .collect()
    }

    /// Places and clusters objects; empty when nothing has been detected.
    pub fn clusters(&self, k: Option<usize>, seed: u64) -> ClusterSet {
        let objects = self.place_objects();
        if objects.is_empty() {
            return ClusterSet::empty(seed);
        }
        cluster_objects(&objects, k, seed)
    }
}
