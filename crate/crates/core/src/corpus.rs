//! Synthetic question corpus: program sampling per video, decomposition,
//! gold answers and closed-world negatives.

use std::collections::{BTreeMap, HashMap};

use rand::seq::IteratorRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, QuestionDag, TemplateTable};
use crate::error::ConfigError;
use crate::program::{canonical_key, Answer, BanList, Localizer, Program, QuestionType};
use crate::propagate::{
    apply_negative_annotations, propagate_answers, AnswerMap, Labeled, NegativeAnnotation, Provenance,
};
use crate::scene::{absent_objects, execute, SceneGraph};
use crate::vocab::Vocabulary;

/// One question of the corpus, unique per (video, program).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub video_id: String,
    pub program: Program,
    pub question: String,
    pub qtype: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<Answer>,
    pub answer_provenance: Provenance,
}

/// Shapes of root programs the sampler draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Family {
    ObjectExists,
    RelationExists,
    Interaction,
    ExistsTemporal,
    InteractionTemporal,
    FirstLast,
    LongestShortest,
    And,
    Xor,
    Equals,
    Compare,
    Occurs,
    ChooseObject,
    ChooseTime,
    ChooseDuration,
    ObjectsQuery,
    ActionsLocalized,
}

impl Family {
    pub const ALL: [Family; 17] = [
        Family::ObjectExists,
        Family::RelationExists,
        Family::Interaction,
        Family::ExistsTemporal,
        Family::InteractionTemporal,
        Family::FirstLast,
        Family::LongestShortest,
        Family::And,
        Family::Xor,
        Family::Equals,
        Family::Compare,
        Family::Occurs,
        Family::ChooseObject,
        Family::ChooseTime,
        Family::ChooseDuration,
        Family::ObjectsQuery,
        Family::ActionsLocalized,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub seed: u64,
    pub questions_per_video: usize,
    /// Chance that a sampled atom is drawn from the video rather than the
    /// whole vocabulary; steers the yes/no balance.
    pub positive_rate: f64,
    pub negatives_per_video: usize,
    pub weights: BTreeMap<Family, f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let mut weights: BTreeMap<Family, f64> = Family::ALL.iter().map(|&f| (f, 1.0)).collect();
        weights.insert(Family::ObjectsQuery, 0.3);
        weights.insert(Family::ActionsLocalized, 0.3);
        SamplerConfig {
            seed: 0,
            questions_per_video: 12,
            positive_rate: 0.6,
            negatives_per_video: 2,
            weights,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.positive_rate) {
            return Err(ConfigError::Invalid("positive_rate must lie in [0, 1]".into()));
        }
        if self.weights.values().any(|w| !w.is_finite() || *w < 0.0)
            || self.weights.values().sum::<f64>() <= 0.0
        {
            return Err(ConfigError::Invalid(
                "family weights must be non-negative with a positive sum".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Sampler<'a> {
    g: &'a SceneGraph,
    vocab: &'a Vocabulary,
    rng: ChaCha8Rng,
    positive_rate: f64,
}

impl Sampler<'_> {
    fn positive(&mut self) -> bool {
        self.rng.gen_bool(self.positive_rate)
    }

    fn object(&mut self) -> String {
        let present = self.g.interacted_objects();
        if self.positive() && !present.is_empty() {
            present.into_iter().choose(&mut self.rng).unwrap().to_string()
        } else {
            self.any_object()
        }
    }

    fn any_object(&mut self) -> String {
        self.vocab
            .objects
            .iter()
            .filter(|o| *o != "person")
            .choose(&mut self.rng)
            .expect("non-empty vocabulary")
            .clone()
    }

    fn relation(&mut self) -> String {
        if self.positive() && !self.g.relationships.is_empty() {
            let r = self.g.relationships.iter().choose(&mut self.rng).unwrap();
            r.relation.clone()
        } else {
            self.vocab.relations.iter().choose(&mut self.rng).unwrap().clone()
        }
    }

    fn interaction(&mut self) -> Program {
        if self.positive() && !self.g.relationships.is_empty() {
            let r = self.g.relationships.iter().choose(&mut self.rng).unwrap();
            Program::interaction("person", &r.relation, &r.object)
        } else {
            let rel = self.vocab.relations.iter().choose(&mut self.rng).unwrap().clone();
            let obj = self.object();
            Program::interaction("person", &rel, &obj)
        }
    }

    fn action(&mut self) -> String {
        if self.positive() && !self.g.actions.is_empty() {
            self.present_action().unwrap()
        } else {
            self.vocab.actions.iter().choose(&mut self.rng).unwrap().clone()
        }
    }

    fn present_action(&mut self) -> Option<String> {
        self.g.actions.iter().choose(&mut self.rng).map(|a| a.label.clone())
    }

    fn two_present_actions(&mut self) -> Option<(String, String)> {
        let picked = self.g.actions.iter().choose_multiple(&mut self.rng, 2);
        match picked[..] {
            [a, b] => Some((a.label.clone(), b.label.clone())),
            _ => None,
        }
    }

    fn event(&mut self) -> Program {
        if self.rng.gen_bool(0.5) {
            Program::ActionExists(self.action())
        } else {
            self.interaction()
        }
    }

    fn localize(&mut self, body: Program) -> Option<Program> {
        let l = Localizer::ALL[self.rng.gen_range(0..4)];
        if l == Localizer::Between {
            let (a, b) = self.two_present_actions()?;
            Some(Program::between(body, &a, &b))
        } else {
            Some(Program::localized(body, l, &self.present_action()?))
        }
    }

    fn object_query(&mut self) -> Program {
        let rel = self.relation();
        let set = Program::objects("person", &rel);
        let set = if self.rng.gen_bool(0.3) {
            self.localize(set.clone()).unwrap_or(set)
        } else {
            set
        };
        if self.rng.gen_bool(0.5) {
            Program::First(Box::new(set))
        } else {
            Program::Last(Box::new(set))
        }
    }

    fn family(&mut self, f: Family) -> Option<Program> {
        let b = Box::new;
        Some(match f {
            Family::ObjectExists => Program::ObjExists(self.object()),
            Family::RelationExists => Program::RelationExists(self.relation()),
            Family::Interaction => {
                if self.rng.gen_bool(0.25) {
                    Program::ActionExists(self.action())
                } else {
                    self.interaction()
                }
            }
            Family::ExistsTemporal => {
                let body = if self.rng.gen_bool(0.7) {
                    Program::ObjExists(self.object())
                } else {
                    Program::RelationExists(self.relation())
                };
                self.localize(body)?
            }
            Family::InteractionTemporal => {
                let body = self.interaction();
                self.localize(body)?
            }
            Family::FirstLast => self.object_query(),
            Family::LongestShortest => {
                if self.rng.gen_bool(0.5) {
                    Program::Longest(b(Program::ActionsQuery))
                } else {
                    Program::Shortest(b(Program::ActionsQuery))
                }
            }
            Family::And => Program::And(b(self.event()), b(self.event())),
            Family::Xor => Program::Xor(b(self.event()), b(self.event())),
            Family::Equals => {
                let query = self.object_query();
                let candidate = match execute(&query, self.g) {
                    Ok(Answer::Label(l)) if self.positive() => l,
                    _ => self.any_object(),
                };
                Program::equals(&candidate, query)
            }
            Family::Compare => {
                let (a1, a2) = (self.action(), self.action());
                if self.rng.gen_bool(0.5) {
                    Program::LongerThan(a1, a2)
                } else {
                    Program::ShorterThan(a1, a2)
                }
            }
            Family::Occurs => {
                let (e1, e2) = (self.event(), self.event());
                if self.rng.gen_bool(0.5) {
                    Program::OccursBefore(b(e1), b(e2))
                } else {
                    Program::OccursAfter(b(e1), b(e2))
                }
            }
            Family::ChooseObject => {
                let query = self.object_query();
                let Ok(Answer::Label(right)) = execute(&query, self.g) else {
                    return None;
                };
                let wrong = self.any_object();
                let (x, y) = if self.rng.gen_bool(0.5) { (right, wrong) } else { (wrong, right) };
                Program::ChooseObject(
                    b(Program::equals(&x, query.clone())),
                    b(Program::equals(&y, query)),
                )
            }
            Family::ChooseTime => {
                let (e1, e2) = (self.event(), self.event());
                Program::ChooseTime {
                    before: b(Program::OccursBefore(b(e1.clone()), b(e2.clone()))),
                    after: b(Program::OccursAfter(b(e1), b(e2))),
                }
            }
            Family::ChooseDuration => {
                let (x, y) = self.two_present_actions()?;
                if self.rng.gen_bool(0.5) {
                    Program::LongerChoose(
                        b(Program::LongerThan(x.clone(), y.clone())),
                        b(Program::LongerThan(y, x)),
                    )
                } else {
                    Program::ShorterChoose(
                        b(Program::ShorterThan(x.clone(), y.clone())),
                        b(Program::ShorterThan(y, x)),
                    )
                }
            }
            Family::ObjectsQuery => Program::objects("person", &self.relation()),
            Family::ActionsLocalized => self.localize(Program::ActionsQuery)?,
        })
    }
}

/// Samples up to `cfg.questions_per_video` distinct root programs that
/// are valid and answerable on `g`.
pub fn sample_programs(g: &SceneGraph, vocab: &Vocabulary, cfg: &SamplerConfig) -> Vec<Program> {
    let mut s = Sampler {
        g,
        vocab,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(&g.video_id)),
        positive_rate: cfg.positive_rate,
    };
    let families: Vec<(Family, f64)> = cfg
        .weights
        .iter()
        .filter(|(_, w)| **w > 0.0)
        .map(|(f, w)| (*f, *w))
        .collect();
    let total: f64 = families.iter().map(|(_, w)| w).sum();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cfg.questions_per_video && attempts < cfg.questions_per_video * 20 {
        attempts += 1;
        let mut x = s.rng.gen_range(0.0..total);
        let family = families
            .iter()
            .find(|(_, w)| {
                x -= w;
                x < 0.0
            })
            .map_or(families[families.len() - 1].0, |(f, _)| *f);
        let Some(p) = s.family(family) else { continue };
        if p.validate(vocab).is_err() || execute(&p, g).is_err() || !seen.insert(canonical_key(&p)) {
            continue;
        }
        out.push(p);
    }
    out
}

/// Everything generated for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoCorpus {
    pub questions: Vec<QuestionRecord>,
    pub dags: Vec<QuestionDag>,
    pub negatives: NegativeAnnotation,
}

/// Builds the DAGs and question records of one video. Question ids are
/// `{video_id}-{n}`, shared by every DAG that contains the same program.
pub fn build_video(
    g: &SceneGraph,
    vocab: &Vocabulary,
    templates: &TemplateTable,
    bans: &BanList,
    cfg: &SamplerConfig,
) -> Result<VideoCorpus, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(&g.video_id) ^ 0x6e65_6761);
    let absent: Vec<String> = absent_objects(g, &vocab.objects)
        .into_iter()
        .choose_multiple(&mut rng, cfg.negatives_per_video);
    let negatives = NegativeAnnotation {
        video_id: g.video_id.clone(),
        absent_objects: absent,
    };

    let mut roots: Vec<(Program, Provenance)> = sample_programs(g, vocab, cfg)
        .into_iter()
        .map(|p| (p, Provenance::Executed))
        .collect();
    roots.extend(
        apply_negative_annotations(&negatives, g, vocab)
            .into_iter()
            .map(|(p, _)| (p, Provenance::Annotated)),
    );

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut questions: Vec<QuestionRecord> = Vec::new();
    let mut dags = Vec::with_capacity(roots.len());
    for (root, root_provenance) in roots {
        let mut dag = decompose(&root, &g.video_id, templates, bans)?;
        for node in &mut dag.nodes {
            let key = canonical_key(&node.program);
            let next = questions.len();
            let idx = *ids.entry(key).or_insert(next);
            if idx == next {
                questions.push(QuestionRecord {
                    id: format!("{}-{}", g.video_id, idx),
                    video_id: g.video_id.clone(),
                    program: node.program.clone(),
                    question: node.question.clone(),
                    qtype: node.qtype,
                    answer: None,
                    answer_provenance: Provenance::Unknown,
                });
            }
            node.qid = Some(questions[idx].id.clone());
        }
        let gold = gold_answers(&dag, g);
        for node in &dag.nodes {
            let rec = &mut questions[ids[&canonical_key(&node.program)]];
            if rec.answer.is_none() {
                if let Some(l) = gold.get(node.key()) {
                    rec.answer = Some(l.answer.clone());
                    rec.answer_provenance = if node.id == dag.root_id {
                        root_provenance
                    } else {
                        l.provenance
                    };
                }
            }
        }
        dags.push(dag);
    }
    Ok(VideoCorpus {
        questions,
        dags,
        negatives,
    })
}

/// Gold answers for every node: executed where the executor answers,
/// otherwise propagated from the executed ones.
pub fn gold_answers(dag: &QuestionDag, g: &SceneGraph) -> AnswerMap {
    let executed: AnswerMap = dag
        .nodes
        .iter()
        .filter_map(|n| {
            let answer = execute(&n.program, g).ok()?;
            Some((
                n.key().to_string(),
                Labeled {
                    answer,
                    provenance: Provenance::Executed,
                },
            ))
        })
        .collect();
    // executed answers are consistent, so propagation can only fill gaps
    propagate_answers(dag, &executed).unwrap_or(executed)
}

/// Builds every video in parallel; output order follows `graphs`.
pub fn build_corpus(
    graphs: &[SceneGraph],
    vocab: &Vocabulary,
    templates: &TemplateTable,
    bans: &BanList,
    cfg: &SamplerConfig,
) -> Result<Vec<VideoCorpus>, ConfigError> {
    cfg.validate()?;
    graphs
        .par_iter()
        .map(|g| build_video(g, vocab, templates, bans, cfg))
        .collect()
}
