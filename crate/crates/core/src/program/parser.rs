// Recursive-descent parser for the `name(arg, ..., arg)` program grammar.
// Atoms are bare words and may contain spaces; commas and parentheses are
// the only delimiters.

use super::{Localizer, Program};
use crate::error::ProgramError;
use crate::vocab::{normalize_label, Vocabulary};

/// Parses and fully validates a program against `vocab`.
pub fn parse_program(text: &str, vocab: &Vocabulary) -> Result<Program, ProgramError> {
    let program = parse_unchecked(text)?;
    program.validate(vocab)?;
    Ok(program)
}

/// Parses the grammar and checks function names and arities only.
pub fn parse_unchecked(text: &str) -> Result<Program, ProgramError> {
    let mut parser = Parser { src: text, pos: 0 };
    parser.skip_ws();
    if parser.pos == text.len() {
        return Err(ProgramError::Syntax {
            pos: 0,
            msg: "empty program".into(),
        });
    }
    let raw = parser.expr()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.error("trailing input after program"));
    }
    match raw {
        Raw::Call { .. } => build(raw),
        Raw::Atom { pos, .. } => Err(ProgramError::Syntax {
            pos,
            msg: "expected a function call".into(),
        }),
    }
}

#[derive(Debug)]
enum Raw {
    Call { name: String, pos: usize, args: Vec<Raw> },
    Atom { text: String, pos: usize },
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn error(&self, msg: &str) -> ProgramError {
        ProgramError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Raw, ProgramError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, '(' | ')' | ',') {
                break;
            }
            self.pos += c.len_utf8();
        }
        let word = self.src[start..self.pos].trim();
        if word.is_empty() {
            return Err(self.error("expected a function call or label"));
        }
        if self.peek() != Some('(') {
            return Ok(Raw::Atom {
                text: normalize_label(word),
                pos: start,
            });
        }
        if !word.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(ProgramError::Syntax {
                pos: start,
                msg: format!("invalid function name `{word}`"),
            });
        }
        self.pos += 1;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
        } else {
            loop {
                args.push(self.expr()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => return Err(self.error("expected ',' or ')'")),
                    None => return Err(self.error("unclosed '('")),
                }
            }
        }
        Ok(Raw::Call {
            name: word.to_string(),
            pos: start,
            args,
        })
    }
}

fn build(raw: Raw) -> Result<Program, ProgramError> {
    let (name, pos, args) = match raw {
        Raw::Call { name, pos, args } => (name, pos, args),
        Raw::Atom { pos, .. } => {
            return Err(ProgramError::Syntax {
                pos,
                msg: "expected a function call, found a label".into(),
            })
        }
    };
    let found = args.len();
    let arity = |expected: &str| ProgramError::Arity {
        name: name.clone(),
        pos,
        expected: expected.to_string(),
        found,
    };
    let want = |n: usize| -> Result<(), ProgramError> {
        if found == n {
            Ok(())
        } else {
            Err(arity(&n.to_string()))
        }
    };
    let mut it = args.into_iter();
    let mut call = || build(it.next().expect("arity checked")).map(Box::new);
    let program = match name.as_str() {
        "objExists" | "relationExists" | "actionExists" => {
            want(1)?;
            let label = atom(it.next().expect("arity checked"))?;
            match name.as_str() {
                "objExists" => Program::ObjExists(label),
                "relationExists" => Program::RelationExists(label),
                _ => Program::ActionExists(label),
            }
        }
        "longerThan" | "shorterThan" => {
            want(2)?;
            let a1 = atom(it.next().expect("arity checked"))?;
            let a2 = atom(it.next().expect("arity checked"))?;
            if name == "longerThan" {
                Program::LongerThan(a1, a2)
            } else {
                Program::ShorterThan(a1, a2)
            }
        }
        "interactionExists" => {
            want(3)?;
            Program::InteractionExists {
                subject: call()?,
                relation: call()?,
                object: call()?,
            }
        }
        "objects" => {
            want(2)?;
            Program::ObjectsQuery {
                subject: call()?,
                relation: call()?,
            }
        }
        "actions" => {
            want(0)?;
            Program::ActionsQuery
        }
        "first" => {
            want(1)?;
            Program::First(call()?)
        }
        "last" => {
            want(1)?;
            Program::Last(call()?)
        }
        "longest" => {
            want(1)?;
            Program::Longest(call()?)
        }
        "shortest" => {
            want(1)?;
            Program::Shortest(call()?)
        }
        "and" => {
            want(2)?;
            Program::And(call()?, call()?)
        }
        "xor" => {
            want(2)?;
            Program::Xor(call()?, call()?)
        }
        "equals" => {
            want(2)?;
            Program::EqualsObject {
                candidate: call()?,
                query: call()?,
            }
        }
        "occursBefore" => {
            want(2)?;
            Program::OccursBefore(call()?, call()?)
        }
        "occursAfter" => {
            want(2)?;
            Program::OccursAfter(call()?, call()?)
        }
        "chooseObject" => {
            want(2)?;
            Program::ChooseObject(call()?, call()?)
        }
        "chooseTime" => {
            want(2)?;
            Program::ChooseTime {
                before: call()?,
                after: call()?,
            }
        }
        "longerChoose" => {
            want(2)?;
            Program::LongerChoose(call()?, call()?)
        }
        "shorterChoose" => {
            want(2)?;
            Program::ShorterChoose(call()?, call()?)
        }
        "before" | "after" | "while" | "between" => {
            let localizer = match name.as_str() {
                "before" => Localizer::Before,
                "after" => Localizer::After,
                "while" => Localizer::While,
                _ => Localizer::Between,
            };
            if localizer == Localizer::Between {
                want(3)?;
            } else {
                want(2)?;
            }
            Program::Localized {
                body: call()?,
                localizer,
                cond1: call()?,
                cond2: if localizer == Localizer::Between {
                    Some(call()?)
                } else {
                    None
                },
            }
        }
        _ => return Err(ProgramError::UnknownFunction { name, pos }),
    };
    Ok(program)
}

fn atom(raw: Raw) -> Result<String, ProgramError> {
    match raw {
        Raw::Atom { text, .. } => Ok(text),
        Raw::Call { pos, .. } => Err(ProgramError::Syntax {
            pos,
            msg: "expected a label, found a function call".into(),
        }),
    }
}
