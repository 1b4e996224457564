use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Benchmark flavor. REVERIE adds pointing out a referred object at the goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    #[default]
    Reverie,
    R2r,
}

impl fmt::Display for TaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskMode::Reverie => "reverie",
            TaskMode::R2r => "r2r",
        })
    }
}

impl FromStr for TaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "reverie" => Ok(TaskMode::Reverie),
            "r2r" => Ok(TaskMode::R2r),
            other => Err(format!("unknown task mode `{other}` (expected reverie or r2r)")),
        }
    }
}
