use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::vocab::{normalize_label, LabelKind};

/// A question's answer. Serialized as a bare string: `yes`/`no`,
/// `before`/`after`, or a label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Answer {
    Bool(bool),
    Label(String),
    Temporal(TemporalToken),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemporalToken {
    Before,
    After,
}

/// The alphabet a question's answer is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnswerKind {
    Bool,
    Temporal,
    Label(LabelKind),
}

impl Answer {
    pub const YES: Answer = Answer::Bool(true);
    pub const NO: Answer = Answer::Bool(false);

    pub fn label(l: &str) -> Self {
        Answer::Label(normalize_label(l))
    }

    /// Reads an answer string; labels are canonicalized (lowercase, trimmed).
    pub fn parse(raw: &str) -> Self {
        let canon = normalize_label(raw);
        match canon.as_str() {
            "yes" => Answer::YES,
            "no" => Answer::NO,
            "before" => Answer::Temporal(TemporalToken::Before),
            "after" => Answer::Temporal(TemporalToken::After),
            _ => Answer::Label(canon),
        }
    }

    pub fn is_yes(&self) -> bool {
        *self == Answer::YES
    }

    pub fn is_no(&self) -> bool {
        *self == Answer::NO
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Answer::Label(l) => Some(l),
            _ => None,
        }
    }

    pub fn fits(&self, kind: AnswerKind) -> bool {
        matches!(
            (self, kind),
            (Answer::Bool(_), AnswerKind::Bool)
                | (Answer::Temporal(_), AnswerKind::Temporal)
                | (Answer::Label(_), AnswerKind::Label(_))
        )
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Bool(true) => f.write_str("yes"),
            Answer::Bool(false) => f.write_str("no"),
            Answer::Temporal(TemporalToken::Before) => f.write_str("before"),
            Answer::Temporal(TemporalToken::After) => f.write_str("after"),
            Answer::Label(l) => f.write_str(l),
        }
    }
}

impl From<bool> for Answer {
    fn from(b: bool) -> Self {
        Answer::Bool(b)
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw.trim().is_empty() {
            return Err(serde::de::Error::custom("empty answer"));
        }
        Ok(Answer::parse(&raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["yes", "no", "before", "after", "dish", "walking through the doorway"] {
            assert_eq!(Answer::parse(s).to_string(), s);
        }
        assert_eq!(Answer::parse("  Yes "), Answer::YES);
        assert_eq!(Answer::parse(" Dish"), Answer::label("dish"));
    }

    #[test]
    fn kinds() {
        assert!(Answer::YES.fits(AnswerKind::Bool));
        assert!(!Answer::YES.fits(AnswerKind::Temporal));
        assert!(Answer::label("dish").fits(AnswerKind::Label(LabelKind::Object)));
    }
}
