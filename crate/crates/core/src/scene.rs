//! The static graph world: scene and episode files plus the simulator
//! interface (observation, local navigable set, object proposals).
//!
//! A scene is immutable once loaded and can be shared read-only across
//! concurrently running episodes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Vec3};

/// Name of the terminal action. Viewpoint ids may not collide with it.
pub const STOP: &str = "STOP";

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unknown viewpoint `{0}`")]
    UnknownViewpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    pub label: String,
    /// `[x, y, w, h]` in image pixels.
    pub bbox: [f64; 4],
    pub proposal_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub id: String,
    pub position: Vec3,
    pub caption: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_type_gt: Option<String>,
    #[serde(default)]
    pub detections: Vec<DetectedObject>,
}

/// On-disk layout of a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SceneData {
    scene_id: String,
    viewpoints: Vec<Viewpoint>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default)]
    room_type_lexicon: Vec<String>,
}

/// What the agent perceives from one neighbor of its current viewpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborView {
    pub id: String,
    pub position: Vec3,
    pub caption: String,
    pub detections: Vec<DetectedObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub current: String,
    pub current_position: Vec3,
    pub current_caption: String,
    pub current_detections: Vec<DetectedObject>,
    /// Edge-adjacent viewpoints, sorted by id.
    pub neighbors: Vec<NeighborView>,
}

impl Observation {
    pub fn neighbor_ids(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.id.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    data: SceneData,
    index: HashMap<String, usize>,
    /// Per viewpoint, indices of adjacent viewpoints ordered by id.
    adjacency: Vec<Vec<usize>>,
}

impl PartialEq for Scene {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

fn check_token(kind: &str, value: &str, forbidden: &[char]) -> Result<(), SceneError> {
    if value.is_empty() {
        return Err(SceneError::Invariant(format!("{kind} must be nonempty")));
    }
    if let Some(c) = value
        .chars()
        .find(|c| forbidden.contains(c) || *c == '\n' || *c == '\r')
    {
        return Err(SceneError::Invariant(format!(
            "{kind} `{value}` contains reserved character {c:?}"
        )));
    }
    Ok(())
}

const ID_RESERVED: &[char] = &['<', '>', '|', '{', '}', ',', ' ', '\t'];
const LABEL_RESERVED: &[char] = &['<', '>', '|', '{', '}', ','];
const CAPTION_RESERVED: &[char] = &['<', '>', '|'];

impl Scene {
    pub fn new(
        scene_id: impl Into<String>,
        viewpoints: Vec<Viewpoint>,
        edges: Vec<(String, String)>,
        room_type_lexicon: Vec<String>,
    ) -> Result<Self, SceneError> {
        Self::from_data(SceneData {
            scene_id: scene_id.into(),
            viewpoints,
            edges,
            room_type_lexicon,
        })
    }

    fn from_data(data: SceneData) -> Result<Self, SceneError> {
        let mut index = HashMap::with_capacity(data.viewpoints.len());
        for (i, vp) in data.viewpoints.iter().enumerate() {
            check_token("viewpoint id", &vp.id, ID_RESERVED)?;
            if vp.id.eq_ignore_ascii_case(STOP) {
                return Err(SceneError::Invariant(format!(
                    "viewpoint id `{}` collides with the STOP action",
                    vp.id
                )));
            }
            if index.insert(vp.id.clone(), i).is_some() {
                return Err(SceneError::Invariant(format!(
                    "duplicate viewpoint id `{}`",
                    vp.id
                )));
            }
            if !geometry::is_finite(&vp.position) {
                return Err(SceneError::Invariant(format!(
                    "viewpoints[{}].position is not finite",
                    vp.id
                )));
            }
            if vp.caption.is_empty() {
                return Err(SceneError::Invariant(format!(
                    "viewpoints[{}].caption must be nonempty",
                    vp.id
                )));
            }
            check_token("caption", &vp.caption, CAPTION_RESERVED)?;
            let mut proposals = HashSet::new();
            for det in &vp.detections {
                check_token("detection label", &det.label, LABEL_RESERVED)?;
                check_token("proposal_id", &det.proposal_id, ID_RESERVED)?;
                if !(det.bbox[2] > 0.0 && det.bbox[3] > 0.0) || !det.bbox.iter().all(|v| v.is_finite()) {
                    return Err(SceneError::Invariant(format!(
                        "viewpoints[{}].detections[{}].bbox needs finite values with w > 0 and h > 0",
                        vp.id, det.proposal_id
                    )));
                }
                if !proposals.insert(det.proposal_id.as_str()) {
                    return Err(SceneError::Invariant(format!(
                        "duplicate proposal_id `{}` in viewpoint `{}`",
                        det.proposal_id, vp.id
                    )));
                }
            }
        }

        let mut adjacency = vec![BTreeSet::new(); data.viewpoints.len()];
        let mut seen = HashSet::new();
        for (a, b) in &data.edges {
            let ia = *index
                .get(a)
                .ok_or_else(|| SceneError::Invariant(format!("edge ({a}, {b}) references unknown viewpoint `{a}`")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| SceneError::Invariant(format!("edge ({a}, {b}) references unknown viewpoint `{b}`")))?;
            if ia == ib {
                return Err(SceneError::Invariant(format!("self-loop edge on `{a}`")));
            }
            let key = if a < b { (a.as_str(), b.as_str()) } else { (b.as_str(), a.as_str()) };
            if !seen.insert(key) {
                return Err(SceneError::Invariant(format!("edge ({a}, {b}) listed more than once")));
            }
            adjacency[ia].insert(ib);
            adjacency[ib].insert(ia);
        }
        let adjacency = adjacency
            .into_iter()
            .map(|set| {
                let mut v: Vec<usize> = set.into_iter().collect();
                v.sort_by(|x, y| data.viewpoints[*x].id.cmp(&data.viewpoints[*y].id));
                v
            })
            .collect();

        Ok(Scene { data, index, adjacency })
    }

    pub fn from_json_str(text: &str) -> Result<Self, SceneError> {
        let data: SceneData =
            serde_json::from_str(text).map_err(|e| SceneError::Schema(e.to_string()))?;
        Self::from_data(data)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.data).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SceneError> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn scene_id(&self) -> &str {
        &self.data.scene_id
    }

    pub fn viewpoints(&self) -> &[Viewpoint] {
        &self.data.viewpoints
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.data.edges
    }

    pub fn room_type_lexicon(&self) -> &[String] {
        &self.data.room_type_lexicon
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn idx(&self, id: &str) -> Result<usize, SceneError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| SceneError::UnknownViewpoint(id.to_string()))
    }

    pub fn viewpoint(&self, id: &str) -> Result<&Viewpoint, SceneError> {
        Ok(&self.data.viewpoints[self.idx(id)?])
    }

    pub fn position(&self, id: &str) -> Result<Vec3, SceneError> {
        Ok(self.viewpoint(id)?.position)
    }

    pub fn is_adjacent(&self, a: &str, b: &str) -> Result<bool, SceneError> {
        let ia = self.idx(a)?;
        let ib = self.idx(b)?;
        Ok(self.adjacency[ia].contains(&ib))
    }

    /// Local navigable set at `at`, sorted lexicographically.
    pub fn get_navigational_viewpoints(&self, at: &str) -> Result<Vec<String>, SceneError> {
        let i = self.idx(at)?;
        Ok(self.adjacency[i]
            .iter()
            .map(|&j| self.data.viewpoints[j].id.clone())
            .collect())
    }

    pub fn get_object_proposals(&self, at: &str) -> Result<Vec<DetectedObject>, SceneError> {
        Ok(self.viewpoint(at)?.detections.clone())
    }

    pub fn get_observation(&self, at: &str) -> Result<Observation, SceneError> {
        let i = self.idx(at)?;
        let vp = &self.data.viewpoints[i];
        let neighbors = self.adjacency[i]
            .iter()
            .map(|&j| {
                let n = &self.data.viewpoints[j];
                NeighborView {
                    id: n.id.clone(),
                    position: n.position,
                    caption: n.caption.clone(),
                    detections: n.detections.clone(),
                }
            })
            .collect();
        Ok(Observation {
            current: vp.id.clone(),
            current_position: vp.position,
            current_caption: vp.caption.clone(),
            current_detections: vp.detections.clone(),
            neighbors,
        })
    }

    /// Straight-line distance in meters.
    pub fn distance(&self, a: &str, b: &str) -> Result<f64, SceneError> {
        Ok(geometry::euclidean(&self.position(a)?, &self.position(b)?))
    }

    /// Sum of edge lengths along `path`; fails on a non-adjacent hop.
    pub fn walk_length(&self, path: &[String]) -> Result<f64, SceneError> {
        let mut total = 0.0;
        for pair in path.windows(2) {
            if !self.is_adjacent(&pair[0], &pair[1])? {
                return Err(SceneError::Invariant(format!(
                    "`{}` -> `{}` is not an edge",
                    pair[0], pair[1]
                )));
            }
            total += self.distance(&pair[0], &pair[1])?;
        }
        Ok(total)
    }
}

/// Reference to one object proposal at a viewpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProposalRef {
    pub viewpoint: String,
    pub proposal_id: String,
}

fn default_success_radius() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    pub instruction: String,
    pub start: String,
    pub goal_viewpoints: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_object: Option<ProposalRef>,
    pub gt_path: Vec<String>,
    #[serde(default = "default_success_radius")]
    pub success_radius: f64,
    /// Scene the episode runs in; may be omitted when only one scene is loaded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_id: Option<String>,
}

impl Episode {
    /// Checks the episode against the scene it runs in.
    pub fn validate(&self, scene: &Scene) -> Result<(), SceneError> {
        if !scene.contains(&self.start) {
            return Err(SceneError::Invariant(format!(
                "episode {}: start `{}` not in scene {}",
                self.episode_id,
                self.start,
                scene.scene_id()
            )));
        }
        if self.goal_viewpoints.is_empty() {
            return Err(SceneError::Invariant(format!(
                "episode {}: goal_viewpoints is empty",
                self.episode_id
            )));
        }
        for g in &self.goal_viewpoints {
            if !scene.contains(g) {
                return Err(SceneError::Invariant(format!(
                    "episode {}: goal `{g}` not in scene",
                    self.episode_id
                )));
            }
        }
        if self.gt_path.first() != Some(&self.start) {
            return Err(SceneError::Invariant(format!(
                "episode {}: gt_path must begin at start `{}`",
                self.episode_id, self.start
            )));
        }
        for pair in self.gt_path.windows(2) {
            if !scene.contains(&pair[1]) {
                return Err(SceneError::Invariant(format!(
                    "episode {}: gt_path entry `{}` not in scene",
                    self.episode_id, pair[1]
                )));
            }
            if !scene.is_adjacent(&pair[0], &pair[1])? {
                return Err(SceneError::Invariant(format!(
                    "episode {}: gt_path hop `{}` -> `{}` is not an edge",
                    self.episode_id, pair[0], pair[1]
                )));
            }
        }
        if let Some(t) = &self.target_object {
            let vp = scene.viewpoint(&t.viewpoint).map_err(|_| {
                SceneError::Invariant(format!(
                    "episode {}: target viewpoint `{}` not in scene",
                    self.episode_id, t.viewpoint
                ))
            })?;
            if !vp.detections.iter().any(|d| d.proposal_id == t.proposal_id) {
                return Err(SceneError::Invariant(format!(
                    "episode {}: target proposal `{}` not detected at `{}`",
                    self.episode_id, t.proposal_id, t.viewpoint
                )));
            }
        }
        if !(self.success_radius.is_finite() && self.success_radius >= 0.0) {
            return Err(SceneError::Invariant(format!(
                "episode {}: success_radius must be finite and non-negative",
                self.episode_id
            )));
        }
        Ok(())
    }
}

pub fn parse_episodes(text: &str) -> Result<Vec<Episode>, SceneError> {
    let episodes: Vec<Episode> =
        serde_json::from_str(text).map_err(|e| SceneError::Schema(e.to_string()))?;
    let mut ids = HashSet::new();
    for ep in &episodes {
        if !ids.insert(ep.episode_id.as_str()) {
            return Err(SceneError::Invariant(format!(
                "duplicate episode_id `{}`",
                ep.episode_id
            )));
        }
    }
    Ok(episodes)
}

pub fn load_episodes(path: impl AsRef<Path>) -> Result<Vec<Episode>, SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_episodes(&text)
}

pub fn episodes_to_json_string(episodes: &[Episode]) -> String {
    let mut s = serde_json::to_string_pretty(episodes).expect("episodes serialize");
    s.push('\n');
    s
}

/// A set of loaded scenes keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SceneSet {
    scenes: Vec<Scene>,
}

impl SceneSet {
    pub fn new(scenes: Vec<Scene>) -> Result<Self, SceneError> {
        let mut ids = HashSet::new();
        for s in &scenes {
            if !ids.insert(s.scene_id().to_string()) {
                return Err(SceneError::Invariant(format!(
                    "scene `{}` loaded twice",
                    s.scene_id()
                )));
            }
        }
        Ok(SceneSet { scenes })
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn scene_ids(&self) -> Vec<String> {
        self.scenes.iter().map(|s| s.scene_id().to_string()).collect()
    }

    /// Scene an episode runs in: by `scene_id`, or the only loaded scene.
    pub fn for_episode(&self, episode: &Episode) -> Result<&Scene, SceneError> {
        match &episode.scene_id {
            Some(id) => self.scenes.iter().find(|s| s.scene_id() == id).ok_or_else(|| {
                SceneError::Invariant(format!(
                    "episode {} references scene `{id}` which is not loaded",
                    episode.episode_id
                ))
            }),
            None if self.scenes.len() == 1 => Ok(&self.scenes[0]),
            None => Err(SceneError::Invariant(format!(
                "episode {} has no scene_id and {} scenes are loaded",
                episode.episode_id,
                self.scenes.len()
            ))),
        }
    }
}
