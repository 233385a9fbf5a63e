use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Program;

/// Evaluation question type, a pure function of the program root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum QuestionKind {
    ObjectExists,
    RelationExists,
    Interaction,
    InteractionTemporalLoc,
    ExistsTemporalLoc,
    FirstLast,
    LongestShortestAction,
    Conjunction,
    Choose,
    Equals,
    ObjectsQuery,
    ActionTemporalLoc,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 12] = [
        QuestionKind::ObjectExists,
        QuestionKind::RelationExists,
        QuestionKind::Interaction,
        QuestionKind::InteractionTemporalLoc,
        QuestionKind::ExistsTemporalLoc,
        QuestionKind::FirstLast,
        QuestionKind::LongestShortestAction,
        QuestionKind::Conjunction,
        QuestionKind::Choose,
        QuestionKind::Equals,
        QuestionKind::ObjectsQuery,
        QuestionKind::ActionTemporalLoc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionKind::ObjectExists => "objectExists",
            QuestionKind::RelationExists => "relationExists",
            QuestionKind::Interaction => "interaction",
            QuestionKind::InteractionTemporalLoc => "interactionTemporalLoc",
            QuestionKind::ExistsTemporalLoc => "existsTemporalLoc",
            QuestionKind::FirstLast => "firstLast",
            QuestionKind::LongestShortestAction => "longestShortestAction",
            QuestionKind::Conjunction => "conjunction",
            QuestionKind::Choose => "choose",
            QuestionKind::Equals => "equals",
            QuestionKind::ObjectsQuery => "objectsQuery",
            QuestionKind::ActionTemporalLoc => "actionTemporalLoc",
        }
    }

    /// Human-readable row label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            QuestionKind::ObjectExists => "Object Exists",
            QuestionKind::RelationExists => "Relation Exists",
            QuestionKind::Interaction => "Interaction",
            QuestionKind::InteractionTemporalLoc => "Interaction Temporal Loc.",
            QuestionKind::ExistsTemporalLoc => "Exists Temporal Loc.",
            QuestionKind::FirstLast => "First/Last",
            QuestionKind::LongestShortestAction => "Longest/Shortest Action",
            QuestionKind::Conjunction => "Conjunction",
            QuestionKind::Choose => "Choose",
            QuestionKind::Equals => "Equals",
            QuestionKind::ObjectsQuery => "Objects Query",
            QuestionKind::ActionTemporalLoc => "Action Temporal Loc.",
        }
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuestionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown question type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuestionType {
    pub kind: QuestionKind,
    pub banned: bool,
}

/// Question types excluded from scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BanList(BTreeSet<QuestionKind>);

impl BanList {
    pub fn new(kinds: impl IntoIterator<Item = QuestionKind>) -> Self {
        BanList(kinds.into_iter().collect())
    }

    pub fn none() -> Self {
        BanList(BTreeSet::new())
    }

    pub fn is_banned(&self, kind: QuestionKind) -> bool {
        self.0.contains(&kind)
    }

    pub fn qtype(&self, kind: QuestionKind) -> QuestionType {
        QuestionType {
            kind,
            banned: self.is_banned(kind),
        }
    }

    pub fn kinds(&self) -> impl Iterator<Item = QuestionKind> + '_ {
        self.0.iter().copied()
    }
}

impl Default for BanList {
    fn default() -> Self {
        BanList::new([QuestionKind::ObjectsQuery, QuestionKind::ActionTemporalLoc])
    }
}

/// Classifies with the default ban list.
pub fn classify(p: &Program) -> QuestionType {
    BanList::default().qtype(kind_of(p))
}

pub(crate) fn kind_of(p: &Program) -> QuestionKind {
    match p {
        Program::ObjExists(_) => QuestionKind::ObjectExists,
        Program::RelationExists(_) => QuestionKind::RelationExists,
        Program::ActionExists(_) | Program::InteractionExists { .. } => QuestionKind::Interaction,
        Program::ObjectsQuery { .. } => QuestionKind::ObjectsQuery,
        Program::ActionsQuery => QuestionKind::ActionTemporalLoc,
        Program::First(_) | Program::Last(_) => QuestionKind::FirstLast,
        Program::Longest(_) | Program::Shortest(_) => QuestionKind::LongestShortestAction,
        Program::And(..) | Program::Xor(..) => QuestionKind::Conjunction,
        Program::EqualsObject { .. } | Program::LongerThan(..) | Program::ShorterThan(..) => {
            QuestionKind::Equals
        }
        Program::OccursBefore(..) | Program::OccursAfter(..) => QuestionKind::InteractionTemporalLoc,
        Program::ChooseObject(..)
        | Program::ChooseTime { .. }
        | Program::LongerChoose(..)
        | Program::ShorterChoose(..) => QuestionKind::Choose,
        Program::Localized { body, .. } => match kind_of(body) {
            QuestionKind::ObjectExists | QuestionKind::RelationExists => {
                QuestionKind::ExistsTemporalLoc
            }
            QuestionKind::Interaction => QuestionKind::InteractionTemporalLoc,
            other => other,
        },
    }
}

impl BanList {
    pub fn classify(&self, p: &Program) -> QuestionType {
        self.qtype(kind_of(p))
    }
}
