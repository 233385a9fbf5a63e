//! Logical consistency rules over a parent question and its sub-questions,
//! evaluated on predicted answers alone.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::decompose::{CompositionRule, QuestionDag};
use crate::program::{Answer, Localizer, Program, TemporalToken};

/// Predicted answers keyed by question id.
pub type PredictionSet = HashMap<String, Answer>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    #[serde(rename = "interaction-yes")]
    InteractionYes,
    #[serde(rename = "interaction-no")]
    InteractionNo,
    #[serde(rename = "after-yes")]
    AfterYes,
    #[serde(rename = "after-no")]
    AfterNo,
    #[serde(rename = "before-yes")]
    BeforeYes,
    #[serde(rename = "before-no")]
    BeforeNo,
    #[serde(rename = "while-yes")]
    WhileYes,
    #[serde(rename = "while-no")]
    WhileNo,
    #[serde(rename = "between-yes")]
    BetweenYes,
    #[serde(rename = "between-no")]
    BetweenNo,
    #[serde(rename = "and-yes")]
    AndYes,
    #[serde(rename = "and-no")]
    AndNo,
    #[serde(rename = "xor-yes")]
    XorYes,
    #[serde(rename = "xor-no")]
    XorNo,
    #[serde(rename = "equals-yes")]
    EqualsYes,
    #[serde(rename = "equals-no")]
    EqualsNo,
    #[serde(rename = "choose-object")]
    ChooseObject,
    #[serde(rename = "choose-temporal")]
    ChooseTemporal,
}

impl RuleId {
    pub const ALL: [RuleId; 18] = [
        RuleId::InteractionYes,
        RuleId::InteractionNo,
        RuleId::AfterYes,
        RuleId::AfterNo,
        RuleId::BeforeYes,
        RuleId::BeforeNo,
        RuleId::WhileYes,
        RuleId::WhileNo,
        RuleId::BetweenYes,
        RuleId::BetweenNo,
        RuleId::AndYes,
        RuleId::AndNo,
        RuleId::XorYes,
        RuleId::XorNo,
        RuleId::EqualsYes,
        RuleId::EqualsNo,
        RuleId::ChooseObject,
        RuleId::ChooseTemporal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::InteractionYes => "interaction-yes",
            RuleId::InteractionNo => "interaction-no",
            RuleId::AfterYes => "after-yes",
            RuleId::AfterNo => "after-no",
            RuleId::BeforeYes => "before-yes",
            RuleId::BeforeNo => "before-no",
            RuleId::WhileYes => "while-yes",
            RuleId::WhileNo => "while-no",
            RuleId::BetweenYes => "between-yes",
            RuleId::BetweenNo => "between-no",
            RuleId::AndYes => "and-yes",
            RuleId::AndNo => "and-no",
            RuleId::XorYes => "xor-yes",
            RuleId::XorNo => "xor-no",
            RuleId::EqualsYes => "equals-yes",
            RuleId::EqualsNo => "equals-no",
            RuleId::ChooseObject => "choose-object",
            RuleId::ChooseTemporal => "choose-temporal",
        }
    }

    pub fn composition(self) -> CompositionRule {
        use RuleId::*;
        match self {
            InteractionYes | InteractionNo => CompositionRule::Interaction,
            AfterYes | AfterNo => CompositionRule::After,
            BeforeYes | BeforeNo => CompositionRule::Before,
            WhileYes | WhileNo => CompositionRule::While,
            BetweenYes | BetweenNo => CompositionRule::Between,
            AndYes | AndNo => CompositionRule::And,
            XorYes | XorNo => CompositionRule::Xor,
            EqualsYes | EqualsNo => CompositionRule::Equals,
            ChooseObject | ChooseTemporal => CompositionRule::Choose,
        }
    }

    /// The parent answer this rule is about ("Parent answer: yes/no").
    pub fn polarity(self) -> Polarity {
        use RuleId::*;
        match self {
            InteractionYes | AfterYes | BeforeYes | WhileYes | BetweenYes | AndYes | XorYes
            | EqualsYes => Polarity::Yes,
            ChooseObject => Polarity::Object,
            ChooseTemporal => Polarity::Temporal,
            _ => Polarity::No,
        }
    }

    pub fn display_name(self) -> String {
        let comp = self.composition().display_name();
        match self.polarity() {
            Polarity::Yes => format!("{comp} Yes"),
            Polarity::No => format!("{comp} No"),
            Polarity::Object => "Choose Object".into(),
            Polarity::Temporal => "Choose Temporal".into(),
        }
    }

    fn temporal(l: Localizer) -> (RuleId, RuleId) {
        match l {
            Localizer::After => (RuleId::AfterYes, RuleId::AfterNo),
            Localizer::Before => (RuleId::BeforeYes, RuleId::BeforeNo),
            Localizer::While => (RuleId::WhileYes, RuleId::WhileNo),
            Localizer::Between => (RuleId::BetweenYes, RuleId::BetweenNo),
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Yes,
    No,
    Object,
    Temporal,
}

/// One rule instantiated over a parent and its children. Ids are the keys
/// predictions are looked up by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTemplate {
    pub rule: RuleId,
    pub parent: String,
    /// Children in role order: all children for interaction rules;
    /// body then conditions for temporal rules; left, right for and/xor;
    /// exists-child, query-child for equals; the two options for choose.
    pub children: Vec<String>,
    /// Candidate labels: one for equals, one per option for choose-object.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    /// 1 for pass, 0 for fail, -1 when not applicable.
    pub fn score(self) -> i8 {
        match self {
            Verdict::Pass => 1,
            Verdict::Fail => 0,
            Verdict::NotApplicable => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckInstance {
    pub dag_root: String,
    pub rule_id: RuleId,
    pub parent: String,
    pub children: Vec<String>,
    pub verdict: Verdict,
}

/// Every rule instance of `dag`. Nodes of banned question types never take
/// part, as parent or child.
pub fn instantiate_checks(dag: &QuestionDag) -> Vec<CheckTemplate> {
    let mut out = Vec::new();
    for parent in dag.parents() {
        let children = dag.children(&parent.id);
        if parent.qtype.banned || children.iter().any(|c| c.qtype.banned) {
            continue;
        }
        let key_of = |p: &Program| dag.find(p).map(|n| n.key().to_string());
        let keys = |ps: &[&Program]| -> Option<Vec<String>> { ps.iter().map(|p| key_of(p)).collect() };
        let mut push = |rule: RuleId, children: Vec<String>, candidates: Vec<String>| {
            out.push(CheckTemplate {
                rule,
                parent: parent.key().to_string(),
                children,
                candidates,
            })
        };
        let p = &parent.program;
        match p {
            Program::InteractionExists { .. } => {
                let all: Vec<String> = children.iter().map(|c| c.key().to_string()).collect();
                push(RuleId::InteractionYes, all.clone(), vec![]);
                push(RuleId::InteractionNo, all, vec![]);
            }
            Program::Localized {
                body,
                localizer,
                cond1,
                cond2,
            } if p.is_boolean() => {
                let mut roles = vec![&**body, &**cond1];
                roles.extend(cond2.as_deref());
                if let Some(ks) = keys(&roles) {
                    let (yes, no) = RuleId::temporal(*localizer);
                    push(yes, ks.clone(), vec![]);
                    push(no, ks, vec![]);
                }
            }
            Program::OccursBefore(e1, e2) | Program::OccursAfter(e1, e2) => {
                let l = if matches!(p, Program::OccursBefore(..)) {
                    Localizer::Before
                } else {
                    Localizer::After
                };
                if let Some(ks) = keys(&[e1, e2]) {
                    let (yes, no) = RuleId::temporal(l);
                    push(yes, ks.clone(), vec![]);
                    push(no, ks, vec![]);
                }
            }
            Program::And(l, r) | Program::Xor(l, r) => {
                let (yes, no) = if matches!(p, Program::And(..)) {
                    (RuleId::AndYes, RuleId::AndNo)
                } else {
                    (RuleId::XorYes, RuleId::XorNo)
                };
                if let Some(ks) = keys(&[l, r]) {
                    push(yes, ks.clone(), vec![]);
                    push(no, ks, vec![]);
                }
            }
            Program::EqualsObject { candidate, query } => {
                if let (Some(ks), Program::ObjExists(c)) = (keys(&[candidate, query]), &**candidate) {
                    push(RuleId::EqualsYes, ks.clone(), vec![c.clone()]);
                    push(RuleId::EqualsNo, ks, vec![c.clone()]);
                }
            }
            Program::ChooseObject(a, b) => {
                let cand = |o: &Program| match o {
                    Program::EqualsObject { candidate, .. } => match &**candidate {
                        Program::ObjExists(c) => c.clone(),
                        _ => String::new(),
                    },
                    _ => String::new(),
                };
                if let Some(ks) = keys(&[a, b]) {
                    push(RuleId::ChooseObject, ks, vec![cand(a), cand(b)]);
                }
            }
            Program::ChooseTime { before, after } => {
                if let Some(ks) = keys(&[before, after]) {
                    push(RuleId::ChooseTemporal, ks, vec![]);
                }
            }
            _ => {}
        }
    }
    out
}

/// Pass when every implication whose antecedent holds has its consequent
/// hold; not applicable when no antecedent holds or a prediction is
/// missing.
pub fn evaluate_check(t: &CheckTemplate, pred: &PredictionSet) -> Verdict {
    let Some(p) = pred.get(&t.parent) else {
        return Verdict::NotApplicable;
    };
    let Some(ch) = t.children.iter().map(|c| pred.get(c)).collect::<Option<Vec<_>>>() else {
        return Verdict::NotApplicable;
    };
    let mut triggered = implications(t, p, &ch).into_iter().filter(|(ante, _)| *ante).peekable();
    if triggered.peek().is_none() {
        return Verdict::NotApplicable;
    }
    if triggered.all(|(_, cons)| cons) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// (antecedent, consequent) pairs of a rule instance.
fn implications(t: &CheckTemplate, p: &Answer, ch: &[&Answer]) -> Vec<(bool, bool)> {
    use RuleId::*;
    let all_yes = ch.iter().all(|a| a.is_yes());
    let any_no = ch.iter().any(|a| a.is_no());
    let is = |a: &Answer, label: &str| a.as_label() == Some(label);
    match t.rule {
        InteractionYes | AfterYes | BeforeYes | WhileYes | BetweenYes => vec![(p.is_yes(), all_yes)],
        InteractionNo | AfterNo | BeforeNo | WhileNo | BetweenNo => vec![(any_no, p.is_no())],
        AndYes => vec![(p.is_yes(), all_yes), (all_yes, p.is_yes())],
        AndNo => vec![(p.is_no(), any_no), (any_no, p.is_no())],
        XorYes => {
            let holds = ch[0].is_yes() && ch[1].is_no();
            vec![(p.is_yes(), holds), (holds, p.is_yes())]
        }
        XorNo => {
            let fails = ch[0].is_no() || ch[1].is_yes();
            vec![(p.is_no(), fails), (fails, p.is_no())]
        }
        EqualsYes => {
            let c = &t.candidates[0];
            let matches = is(ch[1], c);
            vec![(p.is_yes(), matches && ch[0].is_yes()), (matches, p.is_yes())]
        }
        EqualsNo => {
            let c = &t.candidates[0];
            let differs = ch[1].as_label().is_some_and(|l| l != c);
            vec![(p.is_no(), !is(ch[1], c)), (differs || ch[0].is_no(), p.is_no())]
        }
        ChooseObject => vec![
            (is(p, &t.candidates[0]), ch[0].is_yes() && ch[1].is_no()),
            (is(p, &t.candidates[1]), ch[1].is_yes() && ch[0].is_no()),
        ],
        ChooseTemporal => vec![
            (*p == Answer::Temporal(TemporalToken::Before), ch[0].is_yes() && ch[1].is_no()),
            (*p == Answer::Temporal(TemporalToken::After), ch[1].is_yes() && ch[0].is_no()),
        ],
    }
}

/// Evaluates every check of `dag`.
pub fn check_dag(dag: &QuestionDag, pred: &PredictionSet) -> Vec<CheckInstance> {
    let root = dag.root().key().to_string();
    instantiate_checks(dag)
        .into_iter()
        .map(|t| {
            let verdict = evaluate_check(&t, pred);
            CheckInstance {
                dag_root: root.clone(),
                rule_id: t.rule,
                parent: t.parent,
                children: t.children,
                verdict,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
    pub not_applicable: u64,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::NotApplicable => self.not_applicable += 1,
        }
    }

    pub fn merge(&mut self, other: &Tally) {
        self.passed += other.passed;
        self.failed += other.failed;
        self.not_applicable += other.not_applicable;
    }

    pub fn applicable(&self) -> u64 {
        self.passed + self.failed
    }
}

/// Micro counts over all checks of one DAG.
pub fn dag_consistency(dag: &QuestionDag, pred: &PredictionSet) -> Tally {
    let mut t = Tally::default();
    for c in check_dag(dag, pred) {
        t.add(c.verdict);
    }
    t
}
