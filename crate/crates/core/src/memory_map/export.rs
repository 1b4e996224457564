//! DOT and JSON exports of a map snapshot for offline inspection.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{nearest_cluster, ClusterSet, MemoryMap, PlacedObject};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Current,
    Visited,
    Frontier,
}

impl NodeStatus {
    fn color(self) -> &'static str {
        match self {
            NodeStatus::Current => "red",
            NodeStatus::Visited => "blue",
            NodeStatus::Frontier => "yellow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: String,
    pub position: Vec3,
    pub caption: String,
    pub status: NodeStatus,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapExport {
    pub current: Option<String>,
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<(String, String)>,
    pub placed_objects: Vec<PlacedObject>,
    pub clusters: ClusterSet,
}

impl MapExport {
    pub fn from_map(map: &MemoryMap, clusters: &ClusterSet) -> Self {
        let nodes = map
            .nodes()
            .values()
            .map(|n| ExportNode {
                id: n.id.clone(),
                position: n.position,
                caption: n.caption.clone(),
                status: status_of(map, &n.id),
                labels: n.detections.iter().map(|d| d.label.clone()).collect(),
            })
            .collect();
        MapExport {
            current: map.current().map(str::to_string),
            nodes,
            edges: map.edges().iter().cloned().collect(),
            placed_objects: map.place_objects(),
            clusters: clusters.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map export serializes");
        s.push('\n');
        s
    }
}

fn status_of(map: &MemoryMap, id: &str) -> NodeStatus {
    if map.current() == Some(id) {
        NodeStatus::Current
    } else if map.visited().contains(id) {
        NodeStatus::Visited
    } else {
        NodeStatus::Frontier
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Quoted label whose parts are separated by Graphviz line breaks.
fn multiline_label(parts: &[&str]) -> String {
    let escaped: Vec<String> = parts.iter().map(|p| p.replace('\\', "\\\\").replace('"', "\\\"")).collect();
    format!("\"{}\"", escaped.join("\\n"))
}

/// Graphviz rendering: viewpoints as colored ellipses, clusters as boxes
/// linked (dashed) from each viewpoint to its nearest cluster.
pub fn render_dot(map: &MemoryMap, clusters: &ClusterSet) -> String {
    let mut out = String::from("graph memory_map {\n  node [style=filled];\n");
    for node in map.nodes().values() {
        let status = status_of(map, &node.id);
        let _ = writeln!(
            out,
            "  {} [label={}, fillcolor={}];",
            quote(&node.id),
            multiline_label(&[&node.id, &node.caption]),
            status.color()
        );
    }
    for (a, b) in map.edges() {
        let _ = writeln!(out, "  {} -- {};", quote(a), quote(b));
    }
    for c in &clusters.clusters {
        let mut labels: Vec<&str> = c.members.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        let _ = writeln!(
            out,
            "  {} [shape=box, fillcolor=lightgrey, label={}];",
            quote(&format!("cluster_{}", c.cluster_id)),
            quote(&format!("{}: {}", c.cluster_id, labels.join(", ")))
        );
    }
    for node in map.nodes().values() {
        if let Some(cid) = nearest_cluster(&node.position, clusters) {
            let _ = writeln!(
                out,
                "  {} -- {} [style=dashed];",
                quote(&node.id),
                quote(&format!("cluster_{cid}"))
            );
        }
    }
    out.push_str("}\n");
    out
}
