use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scene::STOP;

/// A navigation decision target: a viewpoint from the global action space or STOP.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Viewpoint(String),
    Stop,
}

impl Action {
    pub fn viewpoint(id: impl Into<String>) -> Self {
        Action::Viewpoint(id.into())
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, Action::Stop)
    }

    pub fn as_viewpoint(&self) -> Option<&str> {
        match self {
            Action::Viewpoint(id) => Some(id),
            Action::Stop => None,
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Action::Viewpoint(id) => id,
            Action::Stop => STOP,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Action {
    fn from(s: &str) -> Self {
        if s.eq_ignore_ascii_case(STOP) {
            Action::Stop
        } else {
            Action::Viewpoint(s.to_string())
        }
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Action::from(s.as_str()))
    }
}
