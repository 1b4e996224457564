//! Per-episode navigation scores and their aggregate table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::EpisodeResult;
use crate::planner::distances_from;
use crate::scene::{Episode, Scene, SceneError};
use crate::task::TaskMode;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("episode {0} has no target_object")]
    MissingTarget(String),
    #[error("episode {episode}: invalid trajectory: {reason}")]
    InvalidTrajectory { episode: String, reason: String },
    #[error("result {result} does not match episode {episode}")]
    IdMismatch { episode: String, result: String },
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode_id: String,
    pub tl: f64,
    pub ne: f64,
    pub sr: f64,
    pub osr: f64,
    pub spl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgspl: Option<f64>,
}

fn reached(scene: &Scene, episode: &Episode, mode: TaskMode, at: &str) -> Result<bool, SceneError> {
    match mode {
        TaskMode::Reverie => Ok(episode.goal_viewpoints.contains(at)),
        TaskMode::R2r => {
            for g in &episode.goal_viewpoints {
                if scene.distance(at, g)? <= episode.success_radius {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Scores one trajectory. Path length is recomputed from the scene, and
/// every hop must follow a scene edge.
pub fn score_episode(
    episode: &Episode,
    result: &EpisodeResult,
    scene: &Scene,
    mode: TaskMode,
) -> Result<EpisodeMetrics, MetricsError> {
    if result.episode_id != episode.episode_id {
        return Err(MetricsError::IdMismatch { episode: episode.episode_id.clone(), result: result.episode_id.clone() });
    }
    let invalid = |reason: String| MetricsError::InvalidTrajectory { episode: episode.episode_id.clone(), reason };
    let target = match mode {
        TaskMode::Reverie => Some(
            episode
                .target_object
                .as_ref()
                .ok_or_else(|| MetricsError::MissingTarget(episode.episode_id.clone()))?,
        ),
        TaskMode::R2r => None,
    };
    let Some(last) = result.trajectory.last() else {
        return Err(invalid("empty trajectory".into()));
    };
    if result.trajectory[0] != episode.start {
        return Err(invalid(format!("starts at `{}`, expected `{}`", result.trajectory[0], episode.start)));
    }
    let tl = scene.walk_length(&result.trajectory).map_err(|e| invalid(e.to_string()))?;

    let mut ne = f64::INFINITY;
    for g in &episode.goal_viewpoints {
        ne = ne.min(scene.distance(last, g)?);
    }
    let sr = if reached(scene, episode, mode, last)? { 1.0 } else { 0.0 };
    let mut osr = 0.0;
    for vp in &result.trajectory {
        if reached(scene, episode, mode, vp)? {
            osr = 1.0;
            break;
        }
    }

    let from_start = distances_from(scene, &episode.start);
    let l_star = episode
        .goal_viewpoints
        .iter()
        .filter_map(|g| from_start.get(g).copied())
        .fold(None, |best: Option<f64>, d| Some(best.map_or(d, |b| b.min(d))));
    let spl = match l_star {
        None => 0.0,
        Some(0.0) => sr,
        Some(l) => sr * l / tl.max(l),
    };

    let (rgs, rgspl) = match target {
        Some(t) => {
            let hit = if result.selected_object.as_ref() == Some(t) { 1.0 } else { 0.0 };
            let weight = match l_star {
                None => 0.0,
                Some(0.0) => 1.0,
                Some(l) => l / tl.max(l),
            };
            (Some(hit), Some(hit * weight))
        }
        None => (None, None),
    };

    Ok(EpisodeMetrics { episode_id: episode.episode_id.clone(), tl, ne, sr, osr, spl, rgs, rgspl })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub episodes: usize,
    pub tl: f64,
    pub ne: f64,
    pub sr: f64,
    pub osr: f64,
    pub spl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgspl: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub fn aggregate(per_episode: &[EpisodeMetrics]) -> Result<AggregateMetrics, MetricsError> {
    if per_episode.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let opt_mean = |f: fn(&EpisodeMetrics) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = per_episode.iter().map(f).collect();
        vals.map(|v| mean(v.into_iter()))
    };
    Ok(AggregateMetrics {
        episodes: per_episode.len(),
        tl: mean(per_episode.iter().map(|m| m.tl)),
        ne: mean(per_episode.iter().map(|m| m.ne)),
        sr: mean(per_episode.iter().map(|m| m.sr)),
        osr: mean(per_episode.iter().map(|m| m.osr)),
        spl: mean(per_episode.iter().map(|m| m.spl)),
        rgs: opt_mean(|m| m.rgs),
        rgspl: opt_mean(|m| m.rgspl),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: TaskMode,
    pub per_episode: Vec<EpisodeMetrics>,
    pub aggregate: AggregateMetrics,
}

impl MetricsReport {
    /// Rows are sorted by episode id.
    pub fn new(mode: TaskMode, mut per_episode: Vec<EpisodeMetrics>) -> Result<Self, MetricsError> {
        per_episode.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
        let aggregate = aggregate(&per_episode)?;
        Ok(MetricsReport { mode, per_episode, aggregate })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialize");
        s.push('\n');
        s
    }

    /// Fixed-width text table; rates are shown as percentages.
    pub fn render_table(&self) -> String {
        let pct = |v: f64| format!("{:.2}", v * 100.0);
        let opt_pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), pct);
        let header: &[&str] = match self.mode {
            TaskMode::Reverie => &["SR", "OSR", "SPL", "TL", "RGS", "RGSPL"],
            TaskMode::R2r => &["SR", "OSR", "NE"],
        };
        let row = |sr: f64, osr: f64, spl: f64, tl: f64, ne: f64, rgs: Option<f64>, rgspl: Option<f64>| -> Vec<String> {
            match self.mode {
                TaskMode::Reverie => vec![pct(sr), pct(osr), pct(spl), format!("{tl:.2}"), opt_pct(rgs), opt_pct(rgspl)],
                TaskMode::R2r => vec![pct(sr), pct(osr), format!("{ne:.2}")],
            }
        };
        let mut rows: Vec<(String, Vec<String>)> = self
            .per_episode
            .iter()
            .map(|m| (m.episode_id.clone(), row(m.sr, m.osr, m.spl, m.tl, m.ne, m.rgs, m.rgspl)))
            .collect();
        let a = &self.aggregate;
        rows.push(("mean".into(), row(a.sr, a.osr, a.spl, a.tl, a.ne, a.rgs, a.rgspl)));

        let id_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("episode".len());
        let col_w = 8;
        let mut out = String::new();
        let _ = write!(out, "{:<id_w$}", "episode");
        for h in header {
            let _ = write!(out, " {h:>col_w$}");
        }
        out.push('\n');
        for (id, cells) in &rows {
            if id == "mean" {
                let _ = writeln!(out, "{}", "-".repeat(id_w + (col_w + 1) * header.len()));
            }
            let _ = write!(out, "{id:<id_w$}");
            for c in cells {
                let _ = write!(out, " {c:>col_w$}");
            }
            out.push('\n');
        }
        out
    }
}
