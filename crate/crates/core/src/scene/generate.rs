use std::collections::BTreeMap;

use rand::seq::IteratorRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ActionSpan, Frame, Relationship, SceneGraph};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub num_videos: usize,
    pub frames: u32,
    /// Probability in [0, 1] that each of the `max_tuples` candidate
    /// relationship slots is filled.
    pub density: f64,
    pub max_tuples: usize,
    pub min_actions: usize,
    pub max_actions: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            num_videos: 10,
            frames: 32,
            density: 0.6,
            max_tuples: 10,
            min_actions: 2,
            max_actions: 4,
        }
    }
}

/// `params.num_videos` scene graphs; video `i` depends only on
/// `(seed, i)`.
pub fn generate_scene_graph(seed: u64, params: &GeneratorParams, vocab: &Vocabulary) -> Vec<SceneGraph> {
    (0..params.num_videos)
        .map(|i| generate_video(seed, i, params, vocab))
        .collect()
}

pub fn generate_video(seed: u64, index: usize, params: &GeneratorParams, vocab: &Vocabulary) -> SceneGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = params.frames.max(1);

    // actions occupy disjoint segments so every pair has a well-defined order
    let k = rng
        .gen_range(params.min_actions..=params.max_actions.max(params.min_actions))
        .min(vocab.actions.len())
        .min(n as usize);
    let mut labels = vocab.actions.iter().choose_multiple(&mut rng, k);
    shuffle(&mut labels, &mut rng);
    let seg = n / k.max(1) as u32;
    let mut actions = Vec::with_capacity(k);
    for (j, label) in labels.into_iter().enumerate() {
        let lo = j as u32 * seg + 1;
        let hi = if j + 1 == k { n } else { lo + seg - 1 };
        let start = rng.gen_range(lo..=hi);
        let end = rng.gen_range(start..=hi);
        actions.push(ActionSpan {
            label: label.clone(),
            start,
            end,
        });
    }

    let objects: Vec<&String> = vocab.objects.iter().filter(|o| *o != "person").collect();
    let relations: Vec<&String> = vocab.relations.iter().collect();
    let mut tuples: BTreeMap<(String, String), Vec<Frame>> = BTreeMap::new();
    for _ in 0..params.max_tuples {
        if !rng.gen_bool(params.density.clamp(0.0, 1.0)) || objects.is_empty() {
            continue;
        }
        let relation = relations[rng.gen_range(0..relations.len())];
        let object = objects[rng.gen_range(0..objects.len())];
        let len = rng.gen_range(1..=(n / 4).max(1));
        let start = rng.gen_range(1..=n + 1 - len.min(n));
        tuples
            .entry((relation.clone(), object.clone()))
            .or_default()
            .extend(start..start + len);
    }
    let relationships = tuples
        .into_iter()
        .map(|((relation, object), frames)| Relationship {
            subject: "person".into(),
            relation,
            object,
            frames: frames.into_iter().collect(),
        })
        .collect();

    SceneGraph {
        video_id: format!("vid{index:05}"),
        num_frames: n,
        relationships,
        actions,
    }
}

fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    use rand::seq::SliceRandom;
    v.shuffle(rng);
}
