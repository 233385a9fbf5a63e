//! Spatio-temporal scene graphs, the program executor that answers questions
//! against them, and a seeded synthetic generator.

mod exec;
mod generate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::vocab::ALWAYS_PRESENT;

pub use exec::{execute, support, window_for};
pub use generate::{generate_scene_graph, generate_video, GeneratorParams};

/// Frame index, 1-based.
pub type Frame = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relationship {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub frames: BTreeSet<Frame>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpan {
    pub label: String,
    pub start: Frame,
    pub end: Frame,
}

impl ActionSpan {
    pub fn duration(&self) -> u32 {
        self.end - self.start + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub video_id: String,
    pub num_frames: u32,
    pub relationships: Vec<Relationship>,
    pub actions: Vec<ActionSpan>,
}

impl SceneGraph {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(format!("{}: {msg}", self.video_id)));
        if self.num_frames == 0 {
            return bad("num_frames must be positive".into());
        }
        let in_range = |f: Frame| (1..=self.num_frames).contains(&f);
        for r in &self.relationships {
            if r.frames.is_empty() {
                return bad(format!("{}-{}-{} has no frames", r.subject, r.relation, r.object));
            }
            if !r.frames.iter().all(|&f| in_range(f)) {
                return bad(format!("{}-{}-{} frame out of range", r.subject, r.relation, r.object));
            }
        }
        let mut labels = BTreeSet::new();
        for a in &self.actions {
            if a.start > a.end || !in_range(a.start) || !in_range(a.end) {
                return bad(format!("action `{}` has an invalid interval", a.label));
            }
            if !labels.insert(a.label.as_str()) {
                return bad(format!("action `{}` occurs twice", a.label));
            }
        }
        Ok(())
    }

    pub fn action(&self, label: &str) -> Option<&ActionSpan> {
        self.actions.iter().find(|a| a.label == label)
    }

    pub fn full_window(&self) -> FrameWindow {
        FrameWindow::new(1, self.num_frames)
    }

    /// Every object label occurring as subject or object of a tuple.
    pub fn objects(&self) -> BTreeSet<&str> {
        self.relationships
            .iter()
            .flat_map(|r| [r.subject.as_str(), r.object.as_str()])
            .collect()
    }

    /// Objects the person directly interacts with (tuple objects only).
    pub fn interacted_objects(&self) -> BTreeSet<&str> {
        self.relationships.iter().map(|r| r.object.as_str()).collect()
    }

    /// Frames per (relation, object), merged across duplicate tuples.
    pub fn interactions(&self) -> BTreeMap<(&str, &str), BTreeSet<Frame>> {
        let mut out: BTreeMap<(&str, &str), BTreeSet<Frame>> = BTreeMap::new();
        for r in &self.relationships {
            out.entry((r.relation.as_str(), r.object.as_str()))
                .or_default()
                .extend(r.frames.iter().copied());
        }
        out
    }
}

/// A contiguous inclusive range of frames; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameWindow {
    lo: Frame,
    hi: Frame,
}

impl FrameWindow {
    pub fn new(lo: Frame, hi: Frame) -> Self {
        FrameWindow { lo, hi }
    }

    pub fn empty() -> Self {
        FrameWindow { lo: 1, hi: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, f: Frame) -> bool {
        self.lo <= f && f <= self.hi
    }

    pub fn intersect(&self, other: &FrameWindow) -> FrameWindow {
        FrameWindow {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = Frame> {
        self.lo..=self.hi
    }

    pub fn bounds(&self) -> Option<(Frame, Frame)> {
        (!self.is_empty()).then_some((self.lo, self.hi))
    }
}

/// Vocabulary objects absent from `g` under the closed-world assumption,
/// never including the always-present objects.
pub fn absent_objects<'a>(
    g: &SceneGraph,
    vocab: impl IntoIterator<Item = &'a String>,
) -> BTreeSet<String> {
    let present = g.objects();
    vocab
        .into_iter()
        .filter(|o| !present.contains(o.as_str()) && !ALWAYS_PRESENT.contains(&o.as_str()))
        .cloned()
        .collect()
}
