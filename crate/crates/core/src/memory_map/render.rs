//! Text form of the map handed to the LLM.
//!
//! Grammar (two lines, single spaces between items):
//!
//! ```text
//! map_line   := "Memory topological map: " cluster (" " cluster)*
//! cluster    := "|" id ": {" label (", " label)* "}|"
//! nav_line   := "Navigable viewpoints: " entry (" " entry)*
//! entry      := "<" viewpoint ", " caption ", near cluster " (id | "none") ">"
//! ```
//!
//! With no clusters or no navigable viewpoints the line ends right after its
//! `": "` prefix. Labels and ids never contain `,<>|{}`; captions never
//! contain `<>|`, which keeps the grammar unambiguous.

use std::fmt::Write;

use super::{ClusterSet, MemoryMap};
use crate::geometry::{self, Vec3};

pub const MAP_PREFIX: &str = "Memory topological map: ";
pub const NAV_PREFIX: &str = "Navigable viewpoints: ";

/// Cluster whose centroid is closest to `position`; lowest id on ties.
pub fn nearest_cluster(position: &Vec3, clusters: &ClusterSet) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for c in &clusters.clusters {
        let d = geometry::squared_distance(position, &c.centroid);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((c.cluster_id, d)),
        }
    }
    best.map(|(id, _)| id)
}

pub fn render_map_text(map: &MemoryMap, clusters: &ClusterSet) -> String {
    let mut sorted: Vec<_> = clusters.clusters.iter().collect();
    sorted.sort_by_key(|c| c.cluster_id);
    let cluster_items: Vec<String> = sorted
        .iter()
        .map(|c| {
            let mut labels: Vec<&str> = c.members.iter().map(|m| m.label.as_str()).collect();
            labels.sort_unstable();
            format!("|{}: {{{}}}|", c.cluster_id, labels.join(", "))
        })
        .collect();

    let nav_items: Vec<String> = map
        .global_action_space()
        .iter()
        .filter_map(|a| a.as_viewpoint())
        .map(|id| {
            let node = &map.nodes()[id];
            let near = nearest_cluster(&node.position, clusters)
                .map_or_else(|| "none".to_string(), |c| c.to_string());
            format!("<{}, {}, near cluster {}>", id, node.caption, near)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{MAP_PREFIX}{}\n{NAV_PREFIX}{}", cluster_items.join(" "), nav_items.join(" "));
    out
}
