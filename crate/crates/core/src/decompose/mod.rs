//! Decomposition of a question program into a DAG of sub-questions.

mod template;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::program::{canonical_key, BanList, Localizer, Program, QuestionType};

pub use template::{Rendered, Template, TemplateTable};

/// How a parent question is composed from a child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CompositionRule {
    Interaction,
    First,
    Last,
    Equals,
    And,
    Xor,
    Choose,
    LongerChoose,
    ShorterChoose,
    After,
    Before,
    While,
    Between,
}

impl CompositionRule {
    pub const ALL: [CompositionRule; 13] = [
        CompositionRule::Interaction,
        CompositionRule::First,
        CompositionRule::Last,
        CompositionRule::Equals,
        CompositionRule::And,
        CompositionRule::Xor,
        CompositionRule::Choose,
        CompositionRule::LongerChoose,
        CompositionRule::ShorterChoose,
        CompositionRule::After,
        CompositionRule::Before,
        CompositionRule::While,
        CompositionRule::Between,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionRule::Interaction => "interaction",
            CompositionRule::First => "first",
            CompositionRule::Last => "last",
            CompositionRule::Equals => "equals",
            CompositionRule::And => "and",
            CompositionRule::Xor => "xor",
            CompositionRule::Choose => "choose",
            CompositionRule::LongerChoose => "longerChoose",
            CompositionRule::ShorterChoose => "shorterChoose",
            CompositionRule::After => "after",
            CompositionRule::Before => "before",
            CompositionRule::While => "while",
            CompositionRule::Between => "between",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            CompositionRule::Interaction => "Interaction",
            CompositionRule::First => "First",
            CompositionRule::Last => "Last",
            CompositionRule::Equals => "Equals",
            CompositionRule::And => "And",
            CompositionRule::Xor => "Xor",
            CompositionRule::Choose => "Choose",
            CompositionRule::LongerChoose => "Longer Choose",
            CompositionRule::ShorterChoose => "Shorter Choose",
            CompositionRule::After => "After",
            CompositionRule::Before => "Before",
            CompositionRule::While => "While",
            CompositionRule::Between => "Between",
        }
    }

    pub fn from_localizer(l: Localizer) -> Self {
        match l {
            Localizer::Before => CompositionRule::Before,
            Localizer::After => CompositionRule::After,
            Localizer::While => CompositionRule::While,
            Localizer::Between => CompositionRule::Between,
        }
    }

    /// The rule joining `parent` to its children; `None` for leaves.
    pub fn of(parent: &Program) -> Option<Self> {
        use CompositionRule as R;
        Some(match parent {
            Program::InteractionExists { .. } | Program::ObjectsQuery { .. } => R::Interaction,
            Program::First(_) => R::First,
            Program::Last(_) => R::Last,
            Program::Longest(_) | Program::LongerChoose(..) => R::LongerChoose,
            Program::Shortest(_) | Program::ShorterChoose(..) => R::ShorterChoose,
            Program::And(..) => R::And,
            Program::Xor(..) => R::Xor,
            Program::EqualsObject { .. } => R::Equals,
            Program::OccursBefore(..) => R::Before,
            Program::OccursAfter(..) => R::After,
            Program::ChooseObject(..) | Program::ChooseTime { .. } => R::Choose,
            Program::Localized { localizer, .. } => R::from_localizer(*localizer),
            Program::ObjExists(_)
            | Program::RelationExists(_)
            | Program::ActionExists(_)
            | Program::ActionsQuery
            | Program::LongerThan(..)
            | Program::ShorterThan(..) => return None,
        })
    }
}

impl std::fmt::Display for CompositionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagNode {
    /// Node id local to the DAG: `q` for the root, then `s1`, `s2`, ...
    pub id: String,
    /// Corpus-wide question id, shared by every DAG containing this
    /// question for the same video.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qid: Option<String>,
    pub program: Program,
    pub question: String,
    pub qtype: QuestionType,
}

impl DagNode {
    /// The id predictions and gold answers are keyed by.
    pub fn key(&self) -> &str {
        self.qid.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DagEdge {
    pub parent: String,
    pub child: String,
    pub rule: CompositionRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDag {
    pub root_id: String,
    pub video_id: String,
    pub nodes: Vec<DagNode>,
    pub edges: Vec<DagEdge>,
}

impl QuestionDag {
    pub fn node(&self, id: &str) -> Option<&DagNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn root(&self) -> &DagNode {
        self.node(&self.root_id).expect("root node exists")
    }

    /// Children of `id` in edge order.
    pub fn children(&self, id: &str) -> Vec<&DagNode> {
        self.edges
            .iter()
            .filter(|e| e.parent == id)
            .filter_map(|e| self.node(&e.child))
            .collect()
    }

    /// The rule on `id`'s outgoing edges, if it has any.
    pub fn rule_of(&self, id: &str) -> Option<CompositionRule> {
        self.edges.iter().find(|e| e.parent == id).map(|e| e.rule)
    }

    /// Nodes with at least one child.
    pub fn parents(&self) -> impl Iterator<Item = &DagNode> {
        let with_children: BTreeSet<&str> = self.edges.iter().map(|e| e.parent.as_str()).collect();
        self.nodes
            .iter()
            .filter(move |n| with_children.contains(n.id.as_str()))
    }

    /// Id of the node holding exactly this program.
    pub fn find(&self, p: &Program) -> Option<&DagNode> {
        self.nodes.iter().find(|n| n.program == *p)
    }

    /// Checks single root, acyclicity, unique programs and edge endpoints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(format!("dag {}: {msg}", self.root_id)));
        let ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        if ids.len() != self.nodes.len() {
            return bad("duplicate node id".into());
        }
        let keys: BTreeSet<String> = self.nodes.iter().map(|n| canonical_key(&n.program)).collect();
        if keys.len() != self.nodes.len() {
            return bad("duplicate node program".into());
        }
        for e in &self.edges {
            if !ids.contains(e.parent.as_str()) || !ids.contains(e.child.as_str()) {
                return bad(format!("edge {} -> {} references a missing node", e.parent, e.child));
            }
        }
        let has_parent: BTreeSet<&str> = self.edges.iter().map(|e| e.child.as_str()).collect();
        let roots: Vec<&str> = ids.iter().copied().filter(|i| !has_parent.contains(i)).collect();
        if roots != [self.root_id.as_str()] {
            return bad(format!("expected the single root {}, found {roots:?}", self.root_id));
        }
        // Kahn's algorithm
        let mut indeg: BTreeMap<&str, usize> = ids.iter().map(|&i| (i, 0)).collect();
        for e in &self.edges {
            *indeg.get_mut(e.child.as_str()).expect("checked") += 1;
        }
        let mut ready: Vec<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&i, _)| i).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.parent == n) {
                let d = indeg.get_mut(e.child.as_str()).expect("checked");
                *d -= 1;
                if *d == 0 {
                    ready.push(&e.child);
                }
            }
        }
        if seen != ids.len() {
            return bad("cycle".into());
        }
        Ok(())
    }
}

/// Decomposes `p` into its sub-question DAG. Node ids follow a pre-order
/// walk over distinct sub-programs; repeated sub-programs share one node.
pub fn decompose(
    p: &Program,
    video_id: &str,
    templates: &TemplateTable,
    bans: &BanList,
) -> Result<QuestionDag, ConfigError> {
    let mut b = Builder {
        templates,
        bans,
        ids: HashMap::new(),
        nodes: Vec::new(),
        edges: BTreeSet::new(),
        edge_order: Vec::new(),
    };
    let root_id = b.visit(p)?;
    let order: HashMap<&str, usize> = b.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let mut edges = b.edge_order.clone();
    edges.sort_by_key(|e| order[e.parent.as_str()]);
    Ok(QuestionDag {
        root_id,
        video_id: video_id.to_string(),
        edges,
        nodes: b.nodes,
    })
}

struct Builder<'a> {
    templates: &'a TemplateTable,
    bans: &'a BanList,
    ids: HashMap<Program, String>,
    nodes: Vec<DagNode>,
    edges: BTreeSet<(String, String)>,
    edge_order: Vec<DagEdge>,
}

impl Builder<'_> {
    fn visit(&mut self, p: &Program) -> Result<String, ConfigError> {
        if let Some(id) = self.ids.get(p) {
            return Ok(id.clone());
        }
        let id = if self.nodes.is_empty() {
            "q".to_string()
        } else {
            format!("s{}", self.nodes.len())
        };
        let rendered = self.templates.render(p)?;
        self.ids.insert(p.clone(), id.clone());
        self.nodes.push(DagNode {
            id: id.clone(),
            qid: None,
            program: p.clone(),
            question: rendered.question,
            qtype: self.bans.classify(p),
        });
        if let Some(rule) = CompositionRule::of(p) {
            for child in p.subprograms() {
                let child_id = self.visit(child)?;
                if self.edges.insert((id.clone(), child_id.clone())) {
                    self.edge_order.push(DagEdge {
                        parent: id.clone(),
                        child: child_id,
                        rule,
                    });
                }
            }
        }
        Ok(id)
    }
}
