//! Placeholder templates.
//!
//! Grammar: literal text with `{name}` placeholders, where `name` is one of
//! the names the template kind accepts. `{{` and `}}` produce literal braces.
//! Any other use of a brace, or an unknown name, is rejected when the
//! template is parsed.

use std::collections::HashMap;

use super::PromptError;

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    name: String,
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(name: &str, text: &str, allowed: &[&str]) -> Result<Self, PromptError> {
        let malformed = |offset: usize, reason: &str| PromptError::Malformed {
            template: name.to_string(),
            offset,
            reason: reason.to_string(),
        };
        let mut segments = Vec::new();
        let mut buf = String::new();
        let mut chars = text.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '{' if chars.peek().map(|p| p.1) == Some('{') => {
                    chars.next();
                    buf.push('{');
                }
                '}' if chars.peek().map(|p| p.1) == Some('}') => {
                    chars.next();
                    buf.push('}');
                }
                '{' => {
                    let mut slot = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) => break,
                            Some((_, ch)) if ch.is_ascii_lowercase() || ch == '_' => slot.push(ch),
                            _ => return Err(malformed(i, "unterminated or invalid placeholder")),
                        }
                    }
                    if slot.is_empty() {
                        return Err(malformed(i, "empty placeholder"));
                    }
                    if !allowed.contains(&slot.as_str()) {
                        return Err(PromptError::UnknownPlaceholder {
                            template: name.to_string(),
                            placeholder: slot,
                        });
                    }
                    if !buf.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut buf)));
                    }
                    segments.push(Segment::Slot(slot));
                }
                '}' => return Err(malformed(i, "unmatched `}`")),
                _ => buf.push(c),
            }
        }
        if !buf.is_empty() {
            segments.push(Segment::Text(buf));
        }
        Ok(Template { name: name.to_string(), segments })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Substitutes values; a placeholder without a value renders empty.
    pub fn render(&self, values: &HashMap<&str, &str>) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(s) => out.push_str(values.get(s.as_str()).copied().unwrap_or("")),
            }
        }
        out
    }
}
