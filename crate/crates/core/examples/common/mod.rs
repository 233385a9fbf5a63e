// Shared by the examples: a small hand-written scene graph.
#![allow(dead_code)]

use qdag::scene::{ActionSpan, Relationship, SceneGraph};

fn tuple(relation: &str, object: &str, frames: &[u32]) -> Relationship {
    Relationship {
        subject: "person".into(),
        relation: relation.into(),
        object: object.into(),
        frames: frames.iter().copied().collect(),
    }
}

fn span(label: &str, start: u32, end: u32) -> ActionSpan {
    ActionSpan {
        label: label.into(),
        start,
        end,
    }
}

/// Ten frames: the person walks through the doorway touching a dish, then
/// smiles while holding a bottle and touching a phone.
pub fn kitchen() -> SceneGraph {
    SceneGraph {
        video_id: "kitchen".into(),
        num_frames: 10,
        relationships: vec![
            tuple("touching", "dish", &[2, 3]),
            tuple("touching", "phone", &[7, 8]),
            tuple("holding", "bottle", &[5, 6, 7, 8]),
        ],
        actions: vec![
            span("walking through the doorway", 1, 4),
            span("smiling at something", 6, 9),
        ],
    }
}
