//! Shortest-path planning over viewpoint graphs and stepwise execution of a
//! planned path, folding every traversed viewpoint into the memory map.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Vec3};
use crate::memory_map::{MapError, MemoryMap};
use crate::scene::{Scene, SceneError};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no path from `{from}` to `{to}`")]
    NoPath { from: String, to: String },
    #[error("unknown viewpoint `{0}`")]
    UnknownViewpoint(String),
    #[error("walk error: {0}")]
    Walk(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Undirected graph with positioned nodes. Edge weight is the straight-line
/// distance between endpoints.
pub trait NavGraph {
    fn position_of(&self, id: &str) -> Option<Vec3>;
    /// Adjacent node ids, sorted.
    fn adjacent(&self, id: &str) -> Vec<String>;
}

impl NavGraph for MemoryMap {
    fn position_of(&self, id: &str) -> Option<Vec3> {
        self.node(id).map(|n| n.position)
    }

    fn adjacent(&self, id: &str) -> Vec<String> {
        self.neighbors(id).into_iter().map(str::to_string).collect()
    }
}

impl NavGraph for Scene {
    fn position_of(&self, id: &str) -> Option<Vec3> {
        self.position(id).ok()
    }

    fn adjacent(&self, id: &str) -> Vec<String> {
        self.get_navigational_viewpoints(id).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    /// Inclusive of start and goal.
    pub waypoints: Vec<String>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectorySegment {
    /// Viewpoints entered, in order, excluding the starting one.
    pub viewpoints: Vec<String>,
    pub meters: f64,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    id: String,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_len<G: NavGraph + ?Sized>(g: &G, a: &str, b: &str) -> f64 {
    match (g.position_of(a), g.position_of(b)) {
        (Some(pa), Some(pb)) => geometry::euclidean(&pa, &pb),
        _ => f64::INFINITY,
    }
}

/// Dijkstra distances from `source` to every reachable node.
pub fn distances_from<G: NavGraph + ?Sized>(graph: &G, source: &str) -> HashMap<String, f64> {
    let mut dist: HashMap<String, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source.to_string(), 0.0);
    heap.push(Entry { dist: 0.0, id: source.to_string() });
    while let Some(Entry { dist: d, id }) = heap.pop() {
        if d > dist[&id] {
            continue;
        }
        for next in graph.adjacent(&id) {
            let nd = d + edge_len(graph, &id, &next);
            if dist.get(&next).is_none_or(|&cur| nd < cur) {
                dist.insert(next.clone(), nd);
                heap.push(Entry { dist: nd, id: next });
            }
        }
    }
    dist
}

/// Shortest path by Euclidean edge length. Among equal-length paths the
/// lexicographically smallest waypoint sequence is returned.
pub fn shortest_path<G: NavGraph + ?Sized>(
    graph: &G,
    from: &str,
    to: &str,
) -> Result<PlannedPath, PlanError> {
    for id in [from, to] {
        if graph.position_of(id).is_none() {
            return Err(PlanError::UnknownViewpoint(id.to_string()));
        }
    }
    let to_goal = distances_from(graph, to);
    let total = *to_goal.get(from).ok_or_else(|| PlanError::NoPath {
        from: from.to_string(),
        to: to.to_string(),
    })?;
    let eps = 1e-9 * total.max(1.0);

    // Depth-first in id order, restricted to edges that stay on some
    // shortest path; the first completion is the lexicographic minimum.
    #[allow(clippy::too_many_arguments)]
    fn extend<G: NavGraph + ?Sized>(
        graph: &G,
        to: &str,
        to_goal: &HashMap<String, f64>,
        total: f64,
        eps: f64,
        prefix_len: f64,
        path: &mut Vec<String>,
        on_path: &mut HashSet<String>,
    ) -> bool {
        let u = path.last().expect("nonempty").clone();
        if u == to {
            return true;
        }
        for v in graph.adjacent(&u) {
            if on_path.contains(&v) {
                continue;
            }
            let Some(rest) = to_goal.get(&v) else { continue };
            let step = edge_len(graph, &u, &v);
            if (prefix_len + step + rest - total).abs() > eps {
                continue;
            }
            path.push(v.clone());
            on_path.insert(v.clone());
            if extend(graph, to, to_goal, total, eps, prefix_len + step, path, on_path) {
                return true;
            }
            on_path.remove(&v);
            path.pop();
        }
        false
    }

    let mut waypoints = vec![from.to_string()];
    let mut on_path: HashSet<String> = waypoints.iter().cloned().collect();
    if !extend(graph, to, &to_goal, total, eps, 0.0, &mut waypoints, &mut on_path) {
        return Err(PlanError::NoPath { from: from.to_string(), to: to.to_string() });
    }
    let length = waypoints.windows(2).map(|w| edge_len(graph, &w[0], &w[1])).sum();
    Ok(PlannedPath { waypoints, length })
}

/// Walks `path` in the scene. Each entered viewpoint is observed and folded
/// into `map`, so traversal itself extends memory.
pub fn execute_path(
    map: &mut MemoryMap,
    path: &PlannedPath,
    scene: &Scene,
) -> Result<TrajectorySegment, PlanError> {
    let Some(first) = path.waypoints.first() else {
        return Err(PlanError::Walk("empty path".into()));
    };
    if map.current() != Some(first.as_str()) {
        return Err(PlanError::Walk(format!(
            "path starts at `{first}` but agent is at `{}`",
            map.current().unwrap_or("<nowhere>")
        )));
    }
    let mut segment = TrajectorySegment::default();
    for hop in path.waypoints.windows(2) {
        let (a, b) = (&hop[0], &hop[1]);
        if !map.has_edge(a, b) || !scene.is_adjacent(a, b)? {
            return Err(PlanError::Walk(format!("edge `{a}` -- `{b}` missing")));
        }
        segment.meters += scene.distance(a, b)?;
        let obs = scene.get_observation(b)?;
        map.update(&obs)?;
        segment.viewpoints.push(b.clone());
    }
    Ok(segment)
}
