use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::program::{Arg, Program};

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.json");

/// Slot names per function, mirroring [`Program::slots`].
const SLOTS: &[(&str, &[&str])] = &[
    ("objExists", &["object"]),
    ("relationExists", &["relation"]),
    ("actionExists", &["action"]),
    ("interactionExists", &["subject", "relation", "object"]),
    ("objects", &["subject", "relation"]),
    ("actions", &[]),
    ("first", &["body"]),
    ("last", &["body"]),
    ("longest", &["body"]),
    ("shortest", &["body"]),
    ("and", &["left", "right"]),
    ("xor", &["left", "right"]),
    ("equals", &["candidate", "query"]),
    ("longerThan", &["a1", "a2"]),
    ("shorterThan", &["a1", "a2"]),
    ("occursBefore", &["e1", "e2"]),
    ("occursAfter", &["e1", "e2"]),
    ("chooseObject", &["optA", "optB"]),
    ("chooseTime", &["before", "after"]),
    ("longerChoose", &["a", "b"]),
    ("shorterChoose", &["a", "b"]),
    ("before", &["body", "cond1"]),
    ("after", &["body", "cond1"]),
    ("while", &["body", "cond1"]),
    ("between", &["body", "cond1", "cond2"]),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub question: String,
    pub indirect: String,
}

/// A rendered question together with the noun phrase parents substitute
/// for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub question: String,
    pub indirect: String,
}

/// Question and indirect-reference templates keyed by function name.
///
/// Placeholders are `{slot}`, a dotted path into nested slots such as
/// `{optA.candidate}`, or `{slot:q}` for the child's question without its
/// question mark. Label slots render as the raw label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTable {
    entries: BTreeMap<String, Template>,
}

impl TemplateTable {
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Template(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let entries: BTreeMap<String, Template> =
            serde_json::from_str(text).map_err(|e| ConfigError::Template(e.to_string()))?;
        let table = TemplateTable { entries };
        table.validate()?;
        Ok(table)
    }

    pub fn get(&self, name: &str) -> Result<&Template, ConfigError> {
        self.entries
            .get(name)
            .ok_or_else(|| ConfigError::MissingTemplate(name.to_string()))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (name, slots) in SLOTS {
            let t = self.get(name)?;
            for text in [&t.question, &t.indirect] {
                for ph in placeholders(text)? {
                    let head = ph.split([':', '.']).next().unwrap_or_default();
                    if !slots.contains(&head) {
                        return Err(ConfigError::Template(format!(
                            "`{name}` template uses unknown slot `{{{ph}}}`"
                        )));
                    }
                }
            }
        }
        if let Some(extra) = self.entries.keys().find(|k| !SLOTS.iter().any(|(n, _)| n == k)) {
            return Err(ConfigError::Template(format!("unknown function `{extra}`")));
        }
        Ok(())
    }

    /// Renders the question and indirect reference of `p`'s root.
    pub fn render(&self, p: &Program) -> Result<Rendered, ConfigError> {
        let t = self.get(p.name())?;
        Ok(Rendered {
            question: self.fill(&t.question, p)?,
            indirect: self.fill(&t.indirect, p)?,
        })
    }

    fn fill(&self, text: &str, p: &Program) -> Result<String, ConfigError> {
        let mut out = String::with_capacity(text.len() + 16);
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| ConfigError::Template(format!("unclosed placeholder in `{text}`")))?;
            let ph = &rest[open + 1..open + close];
            out.push_str(&self.resolve(ph, p)?);
            rest = &rest[open + close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn resolve(&self, ph: &str, p: &Program) -> Result<String, ConfigError> {
        let (path, as_question) = match ph.strip_suffix(":q") {
            Some(path) => (path, true),
            None => (ph, false),
        };
        let mut node = p;
        let mut segments = path.split('.').peekable();
        while let Some(seg) = segments.next() {
            let arg = node
                .slots()
                .into_iter()
                .find(|(name, _)| *name == seg)
                .map(|(_, a)| a)
                .ok_or_else(|| {
                    ConfigError::Template(format!("`{}` has no slot `{seg}`", node.name()))
                })?;
            match arg {
                Arg::Label(_, label) if segments.peek().is_none() && !as_question => {
                    return Ok(label.to_string())
                }
                Arg::Label(..) => {
                    return Err(ConfigError::Template(format!(
                        "placeholder `{{{ph}}}` descends into a label"
                    )))
                }
                Arg::Program(child) => node = child,
            }
        }
        let r = self.render(node)?;
        Ok(if as_question {
            r.question.trim_end_matches('?').to_string()
        } else {
            r.indirect
        })
    }
}

fn placeholders(text: &str) -> Result<Vec<&str>, ConfigError> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| ConfigError::Template(format!("unclosed placeholder in `{text}`")))?;
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    Ok(out)
}
