//! Reference predictors: the scene-graph oracle, Most-Likely, a constant
//! answer and seeded random guessing.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{fnv1a, QuestionRecord};
use crate::error::ExecError;
use crate::program::{Answer, AnswerKind, Program, QuestionKind, TemporalToken};
use crate::scene::{execute, SceneGraph};
use crate::vocab::Vocabulary;

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub answer: Answer,
}

/// Modal training answer per question type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MostLikely {
    pub modal: BTreeMap<QuestionKind, Answer>,
    pub default: Answer,
    /// Types seen at prediction time but absent from training; they get
    /// `default`.
    #[serde(default)]
    pub unseen: BTreeSet<QuestionKind>,
}

impl MostLikely {
    pub fn answer_for(&self, kind: QuestionKind) -> &Answer {
        self.modal.get(&kind).unwrap_or(&self.default)
    }

    /// Types in `records` the fit never saw.
    pub fn flag_unseen<'a>(&mut self, records: impl IntoIterator<Item = &'a QuestionRecord>) {
        for r in records {
            if !self.modal.contains_key(&r.qtype.kind) {
                self.unseen.insert(r.qtype.kind);
            }
        }
    }
}

/// Argmax of the gold-answer histogram per type; ties go to the
/// lexicographically smallest answer, so a 50/50 yes/no split gives "no".
pub fn fit_most_likely<'a>(
    train: impl IntoIterator<Item = &'a QuestionRecord>,
    default: Answer,
) -> MostLikely {
    let mut counts: BTreeMap<QuestionKind, BTreeMap<String, (u64, Answer)>> = BTreeMap::new();
    for r in train {
        if let Some(a) = &r.answer {
            counts
                .entry(r.qtype.kind)
                .or_default()
                .entry(a.to_string())
                .or_insert((0, a.clone()))
                .0 += 1;
        }
    }
    let modal = counts
        .into_iter()
        .map(|(kind, hist)| {
            let best = hist
                .into_iter()
                .max_by(|(la, (ca, _)), (lb, (cb, _))| ca.cmp(cb).then_with(|| lb.cmp(la)))
                .map(|(_, (_, a))| a)
                .expect("non-empty histogram");
            (kind, best)
        })
        .collect();
    MostLikely {
        modal,
        default,
        unseen: BTreeSet::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Oracle,
    MostLikely(MostLikely),
    Constant { answer: Answer },
    Random { seed: u64 },
}

/// The labels a choice question offers, in order.
fn options(p: &Program) -> Vec<String> {
    let cand = |o: &Program| match o {
        Program::EqualsObject { candidate, .. } => match &**candidate {
            Program::ObjExists(c) => Some(c.clone()),
            _ => None,
        },
        Program::LongerThan(a1, _) | Program::ShorterThan(a1, _) => Some(a1.clone()),
        _ => None,
    };
    match p {
        Program::ChooseObject(a, b) | Program::LongerChoose(a, b) | Program::ShorterChoose(a, b) => {
            [cand(a), cand(b)].into_iter().flatten().collect()
        }
        _ => vec![],
    }
}

/// Every answer a question could take.
fn alphabet(p: &Program, vocab: &Vocabulary) -> Vec<Answer> {
    match p.answer_kind() {
        AnswerKind::Bool => vec![Answer::NO, Answer::YES],
        AnswerKind::Temporal => vec![
            Answer::Temporal(TemporalToken::Before),
            Answer::Temporal(TemporalToken::After),
        ],
        AnswerKind::Label(kind) => {
            let opts = options(p);
            if opts.is_empty() {
                vocab.labels(kind).iter().map(|l| Answer::Label(l.clone())).collect()
            } else {
                opts.into_iter().map(Answer::Label).collect()
            }
        }
    }
}

impl Predictor {
    /// `graph` is only consulted by the oracle.
    pub fn predict(
        &self,
        q: &QuestionRecord,
        graph: Option<&SceneGraph>,
        vocab: &Vocabulary,
    ) -> Result<Answer, ExecError> {
        Ok(match self {
            Predictor::Oracle => {
                let g = graph.ok_or_else(|| ExecError::MissingSceneGraph(q.video_id.clone()))?;
                execute(&q.program, g)?
            }
            Predictor::MostLikely(m) => m.answer_for(q.qtype.kind).clone(),
            Predictor::Constant { answer } => {
                let kind = q.program.answer_kind();
                let fits = match (answer, kind) {
                    (Answer::Label(l), AnswerKind::Label(k)) => {
                        let opts = options(&q.program);
                        if opts.is_empty() {
                            vocab.contains(k, l)
                        } else {
                            opts.contains(l)
                        }
                    }
                    (a, k) => a.fits(k),
                };
                if fits {
                    answer.clone()
                } else {
                    alphabet(&q.program, vocab).into_iter().next().expect("non-empty alphabet")
                }
            }
            Predictor::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&q.id));
                alphabet(&q.program, vocab)
                    .into_iter()
                    .choose(&mut rng)
                    .expect("non-empty alphabet")
            }
        })
    }

    /// Predictions for every question, in input order. Questions the oracle
    /// cannot answer are left out.
    pub fn predict_all(
        &self,
        questions: &[QuestionRecord],
        graphs: &HashMap<String, SceneGraph>,
        vocab: &Vocabulary,
    ) -> Vec<PredictionRecord> {
        questions
            .par_iter()
            .filter_map(|q| {
                let answer = self.predict(q, graphs.get(&q.video_id), vocab).ok()?;
                Some(PredictionRecord {
                    id: q.id.clone(),
                    answer,
                })
            })
            .collect()
    }
}
