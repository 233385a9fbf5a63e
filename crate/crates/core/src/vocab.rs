use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

const DEFAULT_VOCAB: &str = include_str!("../data/vocab.json");

/// Objects that annotators always treat as present in a video and that are
/// therefore never offered as absent.
pub const ALWAYS_PRESENT: [&str; 5] = ["person", "clothes", "floor", "hands", "hair"];

/// The label vocabulary every program atom is validated against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub objects: BTreeSet<String>,
    pub relations: BTreeSet<String>,
    pub actions: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelKind {
    Object,
    Relation,
    Action,
}

impl LabelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelKind::Object => "object",
            LabelKind::Relation => "relation",
            LabelKind::Action => "action",
        }
    }
}

impl Vocabulary {
    /// The bundled Charades-like sample vocabulary.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_VOCAB).expect("bundled vocabulary is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: Vocabulary =
            serde_json::from_str(text).map_err(|e| ConfigError::Vocabulary(e.to_string()))?;
        let norm = |set: BTreeSet<String>| -> BTreeSet<String> {
            set.into_iter().map(|l| normalize_label(&l)).collect()
        };
        let vocab = Vocabulary {
            objects: norm(raw.objects),
            relations: norm(raw.relations),
            actions: norm(raw.actions),
        };
        if vocab.objects.is_empty() || vocab.relations.is_empty() || vocab.actions.is_empty() {
            return Err(ConfigError::Vocabulary(
                "objects, relations and actions must all be non-empty".into(),
            ));
        }
        if vocab.iter_all().any(|l| l.is_empty() || l.contains(['(', ')', ','])) {
            return Err(ConfigError::Vocabulary(
                "labels must be non-empty and free of '(', ')' and ','".into(),
            ));
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Vocabulary(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn labels(&self, kind: LabelKind) -> &BTreeSet<String> {
        match kind {
            LabelKind::Object => &self.objects,
            LabelKind::Relation => &self.relations,
            LabelKind::Action => &self.actions,
        }
    }

    pub fn contains(&self, kind: LabelKind, label: &str) -> bool {
        self.labels(kind).contains(label)
    }

    fn iter_all(&self) -> impl Iterator<Item = &String> {
        self.objects.iter().chain(&self.relations).chain(&self.actions)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Lowercases and collapses internal whitespace to single spaces.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}
