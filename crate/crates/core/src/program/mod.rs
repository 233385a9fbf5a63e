//! Question programs: the AST, its canonical text form, and question-type
//! classification.

mod answer;
mod parser;
mod qtype;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ProgramError;
use crate::vocab::{LabelKind, Vocabulary};

pub use answer::{Answer, AnswerKind, TemporalToken};
pub use parser::{parse_program, parse_unchecked};
pub use qtype::{classify, BanList, QuestionKind, QuestionType};

/// Temporal localizer restricting the frame window of a body program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Localizer {
    Before,
    After,
    While,
    Between,
}

impl Localizer {
    pub const ALL: [Localizer; 4] = [
        Localizer::Before,
        Localizer::After,
        Localizer::While,
        Localizer::Between,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Localizer::Before => "before",
            Localizer::After => "after",
            Localizer::While => "while",
            Localizer::Between => "between",
        }
    }
}

/// A question's functional program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    ObjExists(String),
    RelationExists(String),
    ActionExists(String),
    InteractionExists {
        subject: Box<Program>,
        relation: Box<Program>,
        object: Box<Program>,
    },
    ObjectsQuery {
        subject: Box<Program>,
        relation: Box<Program>,
    },
    ActionsQuery,
    First(Box<Program>),
    Last(Box<Program>),
    Longest(Box<Program>),
    Shortest(Box<Program>),
    And(Box<Program>, Box<Program>),
    /// Left holds but right does not.
    Xor(Box<Program>, Box<Program>),
    EqualsObject {
        candidate: Box<Program>,
        query: Box<Program>,
    },
    LongerThan(String, String),
    ShorterThan(String, String),
    OccursBefore(Box<Program>, Box<Program>),
    OccursAfter(Box<Program>, Box<Program>),
    ChooseObject(Box<Program>, Box<Program>),
    ChooseTime {
        before: Box<Program>,
        after: Box<Program>,
    },
    LongerChoose(Box<Program>, Box<Program>),
    ShorterChoose(Box<Program>, Box<Program>),
    Localized {
        body: Box<Program>,
        localizer: Localizer,
        cond1: Box<Program>,
        cond2: Option<Box<Program>>,
    },
}

/// One positional argument of a program node.
#[derive(Debug, Clone, Copy)]
pub enum Arg<'a> {
    Label(LabelKind, &'a str),
    Program(&'a Program),
}

// Convenience constructors, mostly for tests and the sampler.
impl Program {
    pub fn obj(label: &str) -> Self {
        Program::ObjExists(label.to_string())
    }
    pub fn rel(label: &str) -> Self {
        Program::RelationExists(label.to_string())
    }
    pub fn act(label: &str) -> Self {
        Program::ActionExists(label.to_string())
    }
    pub fn interaction(subject: &str, relation: &str, object: &str) -> Self {
        Program::InteractionExists {
            subject: Box::new(Self::obj(subject)),
            relation: Box::new(Self::rel(relation)),
            object: Box::new(Self::obj(object)),
        }
    }
    pub fn objects(subject: &str, relation: &str) -> Self {
        Program::ObjectsQuery {
            subject: Box::new(Self::obj(subject)),
            relation: Box::new(Self::rel(relation)),
        }
    }
    pub fn localized(body: Program, localizer: Localizer, anchor: &str) -> Self {
        Program::Localized {
            body: Box::new(body),
            localizer,
            cond1: Box::new(Self::act(anchor)),
            cond2: None,
        }
    }
    pub fn between(body: Program, first: &str, second: &str) -> Self {
        Program::Localized {
            body: Box::new(body),
            localizer: Localizer::Between,
            cond1: Box::new(Self::act(first)),
            cond2: Some(Box::new(Self::act(second))),
        }
    }
    pub fn equals(candidate: &str, query: Program) -> Self {
        Program::EqualsObject {
            candidate: Box::new(Self::obj(candidate)),
            query: Box::new(query),
        }
    }
}

impl Program {
    /// Function name in the textual grammar.
    pub fn name(&self) -> &'static str {
        match self {
            Program::ObjExists(_) => "objExists",
            Program::RelationExists(_) => "relationExists",
            Program::ActionExists(_) => "actionExists",
            Program::InteractionExists { .. } => "interactionExists",
            Program::ObjectsQuery { .. } => "objects",
            Program::ActionsQuery => "actions",
            Program::First(_) => "first",
            Program::Last(_) => "last",
            Program::Longest(_) => "longest",
            Program::Shortest(_) => "shortest",
            Program::And(..) => "and",
            Program::Xor(..) => "xor",
            Program::EqualsObject { .. } => "equals",
            Program::LongerThan(..) => "longerThan",
            Program::ShorterThan(..) => "shorterThan",
            Program::OccursBefore(..) => "occursBefore",
            Program::OccursAfter(..) => "occursAfter",
            Program::ChooseObject(..) => "chooseObject",
            Program::ChooseTime { .. } => "chooseTime",
            Program::LongerChoose(..) => "longerChoose",
            Program::ShorterChoose(..) => "shorterChoose",
            Program::Localized { localizer, .. } => localizer.as_str(),
        }
    }

    /// Named argument slots in positional order.
    pub fn slots(&self) -> Vec<(&'static str, Arg<'_>)> {
        use Arg::{Label as L, Program as P};
        match self {
            Program::ObjExists(o) => vec![("object", L(LabelKind::Object, o))],
            Program::RelationExists(r) => vec![("relation", L(LabelKind::Relation, r))],
            Program::ActionExists(a) => vec![("action", L(LabelKind::Action, a))],
            Program::InteractionExists {
                subject,
                relation,
                object,
            } => vec![
                ("subject", P(subject)),
                ("relation", P(relation)),
                ("object", P(object)),
            ],
            Program::ObjectsQuery { subject, relation } => {
                vec![("subject", P(subject)), ("relation", P(relation))]
            }
            Program::ActionsQuery => vec![],
            Program::First(b) | Program::Last(b) | Program::Longest(b) | Program::Shortest(b) => {
                vec![("body", P(b))]
            }
            Program::And(l, r) | Program::Xor(l, r) => vec![("left", P(l)), ("right", P(r))],
            Program::EqualsObject { candidate, query } => {
                vec![("candidate", P(candidate)), ("query", P(query))]
            }
            Program::LongerThan(a1, a2) | Program::ShorterThan(a1, a2) => vec![
                ("a1", L(LabelKind::Action, a1)),
                ("a2", L(LabelKind::Action, a2)),
            ],
            Program::OccursBefore(e1, e2) | Program::OccursAfter(e1, e2) => {
                vec![("e1", P(e1)), ("e2", P(e2))]
            }
            Program::ChooseObject(a, b) => vec![("optA", P(a)), ("optB", P(b))],
            Program::ChooseTime { before, after } => {
                vec![("before", P(before)), ("after", P(after))]
            }
            Program::LongerChoose(a, b) | Program::ShorterChoose(a, b) => {
                vec![("a", P(a)), ("b", P(b))]
            }
            Program::Localized {
                body, cond1, cond2, ..
            } => {
                let mut v = vec![("body", P(body)), ("cond1", P(cond1))];
                if let Some(c2) = cond2 {
                    v.push(("cond2", P(c2)));
                }
                v
            }
        }
    }

    /// Direct sub-programs (the "inner functions"), in argument order.
    pub fn subprograms(&self) -> Vec<&Program> {
        self.slots()
            .into_iter()
            .filter_map(|(_, a)| match a {
                Arg::Program(p) => Some(p),
                Arg::Label(..) => None,
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .subprograms()
            .into_iter()
            .map(Program::depth)
            .max()
            .unwrap_or(0)
    }

    /// Every distinct sub-program (including `self`), pre-order.
    pub fn distinct_subprograms(&self) -> Vec<&Program> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            if seen.insert(p) {
                out.push(p);
                for c in p.subprograms().into_iter().rev() {
                    stack.push(c);
                }
            }
        }
        out
    }

    pub fn answer_kind(&self) -> AnswerKind {
        match self {
            Program::ObjectsQuery { .. }
            | Program::First(_)
            | Program::Last(_)
            | Program::ChooseObject(..) => AnswerKind::Label(LabelKind::Object),
            Program::ActionsQuery
            | Program::Longest(_)
            | Program::Shortest(_)
            | Program::LongerChoose(..)
            | Program::ShorterChoose(..) => AnswerKind::Label(LabelKind::Action),
            Program::ChooseTime { .. } => AnswerKind::Temporal,
            Program::Localized { body, .. } => body.answer_kind(),
            _ => AnswerKind::Bool,
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.answer_kind() == AnswerKind::Bool
    }

    /// Programs whose answer is a set of labels filtered by a window.
    pub fn is_set_query(&self) -> bool {
        match self {
            Program::ObjectsQuery { .. } | Program::ActionsQuery => true,
            Program::Localized { body, .. } => body.is_set_query(),
            _ => false,
        }
    }

    fn is_object_set(&self) -> bool {
        match self {
            Program::ObjectsQuery { .. } => true,
            Program::Localized { body, .. } => body.is_object_set(),
            _ => false,
        }
    }

    fn is_action_set(&self) -> bool {
        match self {
            Program::ActionsQuery => true,
            Program::Localized { body, .. } => body.is_action_set(),
            _ => false,
        }
    }

    /// Queries whose answer is a single object label.
    pub fn is_object_valued(&self) -> bool {
        match self {
            Program::First(b) | Program::Last(b) => b.is_object_set(),
            other => other.is_object_set(),
        }
    }

    /// Boolean programs with a frame support (usable as temporal events).
    pub fn is_event(&self) -> bool {
        match self {
            Program::ObjExists(_)
            | Program::RelationExists(_)
            | Program::ActionExists(_)
            | Program::InteractionExists { .. } => true,
            Program::Localized { body, .. } => body.is_event(),
            _ => false,
        }
    }

    /// Checks argument kinds, cross-argument constraints and vocabulary
    /// membership for every node.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), ProgramError> {
        self.validate_node(vocab)?;
        for child in self.subprograms() {
            child.validate(vocab)?;
        }
        Ok(())
    }

    fn validate_node(&self, vocab: &Vocabulary) -> Result<(), ProgramError> {
        let name = self.name();
        let bad = |slot: &'static str, msg: &str| ProgramError::InvalidArgument {
            name,
            slot,
            msg: msg.to_string(),
        };
        for (_, arg) in self.slots() {
            if let Arg::Label(kind, label) = arg {
                if !vocab.contains(kind, label) {
                    return Err(ProgramError::UnknownLabel {
                        kind: kind.as_str(),
                        label: label.to_string(),
                    });
                }
            }
        }
        match self {
            Program::InteractionExists {
                subject,
                relation,
                object,
            } => {
                expect(matches!(**subject, Program::ObjExists(_)), || bad("subject", "expected objExists"))?;
                expect(matches!(**relation, Program::RelationExists(_)), || bad("relation", "expected relationExists"))?;
                expect(matches!(**object, Program::ObjExists(_)), || bad("object", "expected objExists"))?;
            }
            Program::ObjectsQuery { subject, relation } => {
                expect(matches!(**subject, Program::ObjExists(_)), || bad("subject", "expected objExists"))?;
                expect(matches!(**relation, Program::RelationExists(_)), || bad("relation", "expected relationExists"))?;
            }
            Program::First(b) | Program::Last(b) => {
                expect(b.is_set_query(), || bad("body", "expected an open set query"))?;
            }
            Program::Longest(b) | Program::Shortest(b) => {
                expect(b.is_action_set(), || bad("body", "expected an actions query"))?;
            }
            Program::And(l, r) | Program::Xor(l, r) => {
                expect(l.is_boolean(), || bad("left", "expected a boolean program"))?;
                expect(r.is_boolean(), || bad("right", "expected a boolean program"))?;
            }
            Program::EqualsObject { candidate, query } => {
                expect(matches!(**candidate, Program::ObjExists(_)), || bad("candidate", "expected objExists"))?;
                expect(query.is_object_valued(), || bad("query", "expected an object-valued query"))?;
            }
            Program::LongerThan(a1, a2) | Program::ShorterThan(a1, a2) => {
                expect(a1 != a2, || bad("a2", "actions must differ"))?;
            }
            Program::OccursBefore(e1, e2) | Program::OccursAfter(e1, e2) => {
                expect(e1.is_event(), || bad("e1", "expected an event program"))?;
                expect(e2.is_event(), || bad("e2", "expected an event program"))?;
            }
            Program::ChooseObject(a, b) => match (&**a, &**b) {
                (
                    Program::EqualsObject { candidate: ca, query: qa },
                    Program::EqualsObject { candidate: cb, query: qb },
                ) => {
                    expect(qa == qb, || bad("optB", "options must share one query"))?;
                    expect(ca != cb, || bad("optB", "options must differ"))?;
                }
                _ => return Err(bad("optA", "expected two equals programs")),
            },
            Program::ChooseTime { before, after } => match (&**before, &**after) {
                (Program::OccursBefore(b1, b2), Program::OccursAfter(a1, a2)) => {
                    expect(b1 == a1 && b2 == a2, || bad("after", "options must compare the same events"))?;
                }
                _ => return Err(bad("before", "expected occursBefore and occursAfter")),
            },
            Program::LongerChoose(a, b) => match (&**a, &**b) {
                (Program::LongerThan(x1, y1), Program::LongerThan(x2, y2)) => {
                    expect(x1 == y2 && y1 == x2, || bad("b", "options must mirror each other"))?;
                }
                _ => return Err(bad("a", "expected two longerThan programs")),
            },
            Program::ShorterChoose(a, b) => match (&**a, &**b) {
                (Program::ShorterThan(x1, y1), Program::ShorterThan(x2, y2)) => {
                    expect(x1 == y2 && y1 == x2, || bad("b", "options must mirror each other"))?;
                }
                _ => return Err(bad("a", "expected two shorterThan programs")),
            },
            Program::Localized {
                body,
                localizer,
                cond1,
                cond2,
            } => {
                expect(body.is_boolean() || body.is_set_query(), || {
                    bad("body", "expected a boolean program or an open set query")
                })?;
                expect(matches!(**cond1, Program::ActionExists(_)), || bad("cond1", "expected actionExists"))?;
                match (localizer, cond2) {
                    (Localizer::Between, Some(c2)) => {
                        expect(matches!(**c2, Program::ActionExists(_)), || bad("cond2", "expected actionExists"))?;
                        expect(cond1 != c2, || bad("cond2", "anchors must differ"))?;
                    }
                    (Localizer::Between, None) => return Err(bad("cond2", "between needs two conditions")),
                    (_, Some(_)) => return Err(bad("cond2", "only between takes two conditions")),
                    (_, None) => {}
                }
            }
            Program::ObjExists(_)
            | Program::RelationExists(_)
            | Program::ActionExists(_)
            | Program::ActionsQuery => {}
        }
        Ok(())
    }
}

fn expect(cond: bool, err: impl FnOnce() -> ProgramError) -> Result<(), ProgramError> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}

/// Canonical text, e.g. `first(objects(objExists(person), relationExists(touching)))`.
pub fn render_program(p: &Program) -> String {
    p.to_string()
}

/// Deduplication key: structurally equal programs and only those share a key.
pub fn canonical_key(p: &Program) -> String {
    render_program(p)
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (i, (_, arg)) in self.slots().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match arg {
                Arg::Label(_, l) => f.write_str(l)?,
                Arg::Program(p) => write!(f, "{p}")?,
            }
        }
        f.write_str(")")
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_unchecked(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::builtin()
    }

    #[test]
    fn render_leaf_and_nested() {
        assert_eq!(render_program(&Program::obj("person")), "objExists(person)");
        let q = Program::First(Box::new(Program::objects("person", "touching")));
        assert_eq!(
            render_program(&q),
            "first(objects(objExists(person), relationExists(touching)))"
        );
        let and = Program::And(
            Box::new(Program::act("holding a cup")),
            Box::new(Program::act("sneezing")),
        );
        assert_eq!(
            render_program(&and),
            "and(actionExists(holding a cup), actionExists(sneezing))"
        );
    }

    #[test]
    fn canonical_key_distinguishes_operand_order() {
        let x = Program::act("sneezing");
        let y = Program::act("holding a cup");
        let xy = Program::And(Box::new(x.clone()), Box::new(y.clone()));
        let yx = Program::And(Box::new(y), Box::new(x));
        assert_ne!(canonical_key(&xy), canonical_key(&yx));
        assert_ne!(
            canonical_key(&Program::obj("person")),
            canonical_key(&Program::obj("dish"))
        );
    }

    #[test]
    fn between_requires_two_anchors() {
        let bad = Program::Localized {
            body: Box::new(Program::obj("dish")),
            localizer: Localizer::Between,
            cond1: Box::new(Program::act("sneezing")),
            cond2: None,
        };
        assert!(bad.validate(&vocab()).is_err());
        let bad = Program::Localized {
            body: Box::new(Program::obj("dish")),
            localizer: Localizer::After,
            cond1: Box::new(Program::act("sneezing")),
            cond2: Some(Box::new(Program::act("holding a cup"))),
        };
        assert!(bad.validate(&vocab()).is_err());
        let ok = Program::between(Program::obj("dish"), "sneezing", "holding a cup");
        ok.validate(&vocab()).unwrap();
    }

    #[test]
    fn choose_options_must_agree() {
        let q = Program::First(Box::new(Program::objects("person", "holding")));
        let ok = Program::ChooseObject(
            Box::new(Program::equals("dish", q.clone())),
            Box::new(Program::equals("cup", q.clone())),
        );
        ok.validate(&vocab()).unwrap();
        let other = Program::Last(Box::new(Program::objects("person", "holding")));
        let bad = Program::ChooseObject(
            Box::new(Program::equals("dish", q)),
            Box::new(Program::equals("cup", other)),
        );
        assert!(bad.validate(&vocab()).is_err());
    }

    #[test]
    fn unknown_label_is_rejected() {
        let err = Program::obj("spaceship").validate(&vocab()).unwrap_err();
        assert!(matches!(err, ProgramError::UnknownLabel { kind: "object", .. }));
    }

    #[test]
    fn distinct_subprograms_dedups() {
        let x = Program::act("sneezing");
        let p = Program::And(Box::new(x.clone()), Box::new(x));
        assert_eq!(p.distinct_subprograms().len(), 2);
        assert_eq!(p.depth(), 2);
    }
}
