//! Gold-answer propagation from a root answer down its sub-question DAG,
//! closed-world negatives, and gold-answer auditing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consistency::{check_dag, CheckInstance, PredictionSet, Verdict};
use crate::decompose::QuestionDag;
use crate::error::{ConfigError, Contradiction};
use crate::program::{Answer, Localizer, Program, TemporalToken};
use crate::scene::SceneGraph;
use crate::vocab::{Vocabulary, ALWAYS_PRESENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Executed,
    Propagated,
    Annotated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeled {
    pub answer: Answer,
    pub provenance: Provenance,
}

/// Answers keyed by question id (see [`crate::decompose::DagNode::key`]).
/// Nodes without an entry are unknown.
pub type AnswerMap = BTreeMap<String, Labeled>;

/// Applies the downward entailment rules until nothing changes. Seeds are
/// never overwritten; a rule proposing a different answer for an answered
/// node is a contradiction.
pub fn propagate_answers(dag: &QuestionDag, seeds: &AnswerMap) -> Result<AnswerMap, Contradiction> {
    let mut answers = seeds.clone();
    loop {
        let mut changed = false;
        for parent in dag.parents() {
            let Some(given) = answers.get(parent.key()) else {
                continue;
            };
            for (child, implied) in entailed(&parent.program, &given.answer) {
                let Some(node) = dag.find(child) else {
                    continue;
                };
                match answers.get(node.key()) {
                    Some(existing) if existing.answer != implied => {
                        return Err(Contradiction {
                            node: node.key().to_string(),
                            existing: existing.answer.to_string(),
                            proposed: implied.to_string(),
                        })
                    }
                    Some(_) => {}
                    None => {
                        answers.insert(
                            node.key().to_string(),
                            Labeled {
                                answer: implied,
                                provenance: Provenance::Propagated,
                            },
                        );
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(answers);
        }
    }
}

/// Child answers forced by `answer` on `p`. "No" answers only force
/// anything through the contrapositives of conjunctions, which need a
/// sibling's answer and so are left to the auditor.
fn entailed<'a>(p: &'a Program, answer: &Answer) -> Vec<(&'a Program, Answer)> {
    let yes = |c: &'a Program| (c, Answer::YES);
    let no = |c: &'a Program| (c, Answer::NO);
    match p {
        Program::InteractionExists { .. } | Program::OccursBefore(..) | Program::OccursAfter(..)
            if answer.is_yes() =>
        {
            p.subprograms().into_iter().map(yes).collect()
        }
        Program::ObjectsQuery { subject, relation } if answer.as_label().is_some() => {
            vec![yes(subject), yes(relation)]
        }
        Program::Localized {
            body, cond1, cond2, ..
        } => {
            let mut out = Vec::new();
            if answer.is_yes() {
                out.push(yes(body));
            }
            if answer.is_yes() || answer.as_label().is_some() {
                out.push(yes(cond1));
                out.extend(cond2.as_deref().map(yes));
            }
            out
        }
        Program::And(l, r) if answer.is_yes() => vec![yes(l), yes(r)],
        Program::Xor(l, r) if answer.is_yes() => vec![yes(l), no(r)],
        Program::EqualsObject { candidate, query } if answer.is_yes() => match &**candidate {
            Program::ObjExists(c) => vec![yes(candidate), (&**query, Answer::Label(c.clone()))],
            _ => vec![],
        },
        Program::ChooseObject(a, b) => {
            let cand = |o: &Program| match o {
                Program::EqualsObject { candidate, .. } => match &**candidate {
                    Program::ObjExists(c) => Some(c.clone()),
                    _ => None,
                },
                _ => None,
            };
            pick(answer, a, cand(a), b, cand(b))
        }
        Program::LongerChoose(a, b) | Program::ShorterChoose(a, b) => {
            let first_label = |o: &Program| match o {
                Program::LongerThan(a1, _) | Program::ShorterThan(a1, _) => Some(a1.clone()),
                _ => None,
            };
            pick(answer, a, first_label(a), b, first_label(b))
        }
        Program::ChooseTime { before, after } => match answer {
            Answer::Temporal(TemporalToken::Before) => vec![yes(before), no(after)],
            Answer::Temporal(TemporalToken::After) => vec![no(before), yes(after)],
            _ => vec![],
        },
        _ => vec![],
    }
}

fn pick<'a>(
    answer: &Answer,
    a: &'a Program,
    la: Option<String>,
    b: &'a Program,
    lb: Option<String>,
) -> Vec<(&'a Program, Answer)> {
    let chosen = answer.as_label();
    if chosen.is_some() && chosen == la.as_deref() {
        vec![(a, Answer::YES), (b, Answer::NO)]
    } else if chosen.is_some() && chosen == lb.as_deref() {
        vec![(a, Answer::NO), (b, Answer::YES)]
    } else {
        vec![]
    }
}

/// Objects known not to appear in a video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeAnnotation {
    pub video_id: String,
    pub absent_objects: Vec<String>,
}

impl NegativeAnnotation {
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), ConfigError> {
        for o in &self.absent_objects {
            if !vocab.objects.contains(o) {
                return Err(ConfigError::Invalid(format!("{}: unknown object `{o}`", self.video_id)));
            }
            if ALWAYS_PRESENT.contains(&o.as_str()) {
                return Err(ConfigError::Invalid(format!(
                    "{}: `{o}` is always present and cannot be annotated absent",
                    self.video_id
                )));
            }
        }
        Ok(())
    }
}

/// Questions answered "no" from negative annotations: one existence
/// question per absent object, each paired with a localized existence
/// question about a present object anchored on an action that never
/// happens in the video.
pub fn apply_negative_annotations(
    ann: &NegativeAnnotation,
    g: &SceneGraph,
    vocab: &Vocabulary,
) -> Vec<(Program, Answer)> {
    let present: Vec<&str> = g.interacted_objects().into_iter().collect();
    let missing_actions: Vec<&String> = vocab
        .actions
        .iter()
        .filter(|a| g.action(a).is_none())
        .collect();
    let localizers = [Localizer::Before, Localizer::After, Localizer::While];
    let mut out = Vec::new();
    for (i, o) in ann.absent_objects.iter().enumerate() {
        out.push((Program::obj(o), Answer::NO));
        if present.is_empty() || missing_actions.is_empty() {
            continue;
        }
        let body = Program::obj(present[i % present.len()]);
        let anchor = missing_actions[i % missing_actions.len()];
        out.push((
            Program::localized(body, localizers[i % localizers.len()], anchor),
            Answer::NO,
        ));
    }
    out
}

/// Every applicable consistency check the gold answers fail.
pub fn audit_gold(dag: &QuestionDag, answers: &AnswerMap) -> Vec<CheckInstance> {
    let pred: PredictionSet = answers
        .iter()
        .map(|(k, v)| (k.clone(), v.answer.clone()))
        .collect();
    check_dag(dag, &pred)
        .into_iter()
        .filter(|c| c.verdict == Verdict::Fail)
        .collect()
}
