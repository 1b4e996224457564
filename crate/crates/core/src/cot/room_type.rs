//! Destination room-type extraction from instruction text by lexicon scan.

/// Default 27-entry room-type vocabulary, used when a scene ships none.
pub const DEFAULT_ROOM_TYPES: [&str; 27] = [
    "balcony",
    "bar",
    "bathroom",
    "bedroom",
    "closet",
    "dining room",
    "entryway",
    "family room",
    "garage",
    "gym",
    "hallway",
    "kitchen",
    "laundry room",
    "library",
    "living room",
    "lounge",
    "meeting room",
    "office",
    "other room",
    "outdoor",
    "porch",
    "recreation room",
    "spa",
    "stairs",
    "toilet",
    "tv room",
    "utility room",
];

pub fn default_lexicon() -> Vec<String> {
    DEFAULT_ROOM_TYPES.iter().map(|s| s.to_string()).collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte offset of the first whole-word occurrence of `needle` in `hay`.
/// A plural `s`/`es` suffix still counts as the word.
fn first_word_match(hay: &str, needle: &str) -> Option<usize> {
    for (start, _) in hay.match_indices(needle) {
        if hay[..start].chars().next_back().is_some_and(is_word_char) {
            continue;
        }
        let rest = &hay[start + needle.len()..];
        let rest = rest
            .strip_prefix("es")
            .filter(|r| !r.starts_with(is_word_char))
            .or_else(|| rest.strip_prefix('s').filter(|r| !r.starts_with(is_word_char)))
            .unwrap_or(rest);
        if !rest.starts_with(is_word_char) {
            return Some(start);
        }
    }
    None
}

/// Room type named first in `instruction`. Case-insensitive; when two
/// entries start at the same offset the longer one wins.
pub fn extract_room_type(instruction: &str, lexicon: &[String]) -> Option<String> {
    let hay = instruction.to_lowercase();
    let mut best: Option<(usize, usize, &String)> = None;
    for entry in lexicon {
        let needle = entry.trim().to_lowercase();
        if needle.is_empty() {
            continue;
        }
        if let Some(pos) = first_word_match(&hay, &needle) {
            let better = match best {
                None => true,
                Some((bp, blen, _)) => pos < bp || (pos == bp && needle.len() > blen),
            };
            if better {
                best = Some((pos, needle.len(), entry));
            }
        }
    }
    best.map(|(_, _, e)| e.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn kitchen() {
        assert_eq!(
            extract_room_type("go to the kitchen to get some milk", &default_lexicon()).as_deref(),
            Some("kitchen")
        );
    }

    #[test]
    fn longest_match_at_same_offset() {
        let l = lex(&["room", "utility room", "kitchen"]);
        assert_eq!(
            extract_room_type("go to the utility room to get a stool", &l).as_deref(),
            Some("utility room")
        );
    }

    #[test]
    fn leftmost_wins() {
        let l = lex(&["kitchen", "bedroom"]);
        assert_eq!(
            extract_room_type("Leave the Bedroom and walk to the kitchen", &l).as_deref(),
            Some("bedroom")
        );
    }

    #[test]
    fn whole_words_only() {
        let l = lex(&["spa", "room"]);
        assert_eq!(extract_room_type("walk through the open space", &l), None);
        assert_eq!(extract_room_type("enter the bedroom", &l), None);
        assert_eq!(extract_room_type("check both rooms", &l).as_deref(), Some("room"));
    }

    #[test]
    fn no_match() {
        assert_eq!(extract_room_type("bring me the remote", &default_lexicon()), None);
    }
}
