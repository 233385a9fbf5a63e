use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{macro_ic, Aggregate, CompCounts, Ratio};
use crate::consistency::RuleId;
use crate::decompose::CompositionRule;
use crate::program::{BanList, QuestionKind};

/// A metric value with the size of the population it was computed over.
/// Undefined cells render as `N/A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub n: u64,
}

impl Cell {
    fn new(value: Option<f64>, n: u64) -> Self {
        Cell { value, n }
    }

    fn ratio(r: &Ratio) -> Self {
        Cell::new(r.percent(), r.total)
    }

    pub fn defined(&self) -> bool {
        self.value.is_some()
    }

    pub fn render(&self) -> String {
        match self.value {
            Some(v) => format!("{v:.2}"),
            None => "N/A".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Cell>,
    pub ca: Cell,
    pub rwr: Cell,
    pub delta: Cell,
    pub ic: Cell,
    /// RWR-1, RWR-2, ...
    pub rwr_n: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcRow {
    pub rule: RuleId,
    pub name: String,
    pub ic: Cell,
    pub instances: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSplit {
    pub kind: QuestionKind,
    pub answer: String,
    pub accuracy: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub dag_root: String,
    pub ic: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub points: Vec<Point>,
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub notes: Vec<String>,
    pub by_type: Vec<Row>,
    pub by_rule: Vec<Row>,
    pub ic_rules: Vec<IcRow>,
    pub accuracy_splits: Vec<AnswerSplit>,
    pub overall_accuracy_pooled: Cell,
    pub overall_accuracy_macro: Cell,
    pub coverage: super::Coverage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Correlation>,
}

const NOTES: [&str; 3] = [
    "Accuracy is averaged over ground-truth answers within each question type.",
    "Overall accuracy pools every scored question per ground-truth answer; overall_accuracy_macro averages the type rows.",
    "Overall CA, RWR and IC pool all compositions and consistency rules.",
];

/// Normalized accuracy: mean over ground-truth answers.
fn normalized(answers: &BTreeMap<String, Ratio>) -> Cell {
    let values: Vec<f64> = answers.values().filter_map(Ratio::percent).collect();
    let n = answers.values().map(|r| r.total).sum();
    let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
    Cell::new(mean, n)
}

fn comp_cells(c: Option<&CompCounts>, max_n: usize) -> (Cell, Cell, Cell, Vec<Cell>) {
    let empty = CompCounts::default();
    let c = c.unwrap_or(&empty);
    let delta = Cell::new(c.delta(), c.ca.total + c.rwr.total);
    let rwr_n = (1..=max_n)
        .map(|n| c.rwr_n.get(&n).map_or(Cell::new(None, 0), Cell::ratio))
        .collect();
    (Cell::ratio(&c.ca), Cell::ratio(&c.rwr), delta, rwr_n)
}

fn ic_cell<'a>(rules: impl IntoIterator<Item = &'a super::CheckCounts> + Clone) -> Cell {
    let n = rules.clone().into_iter().map(|c| c.applicable()).sum();
    Cell::new(macro_ic(rules), n)
}

pub fn build_report(agg: &Aggregate, bans: &BanList, correlation: Option<Correlation>) -> MetricReport {
    let max_n = agg
        .comp_overall
        .rwr_n
        .keys()
        .copied()
        .max()
        .unwrap_or(0)
        .max(5);
    let kinds: Vec<QuestionKind> = QuestionKind::ALL
        .into_iter()
        .filter(|k| !bans.is_banned(*k))
        .collect();

    let mut pooled: BTreeMap<String, Ratio> = BTreeMap::new();
    for k in &kinds {
        for (a, r) in agg.accuracy.get(k).into_iter().flatten() {
            pooled.entry(a.clone()).or_default().merge(r);
        }
    }
    let overall_accuracy_pooled = normalized(&pooled);

    let mut by_type = Vec::new();
    let mut type_acc = Vec::new();
    for k in &kinds {
        let acc = agg.accuracy.get(k).map_or(Cell::new(None, 0), normalized);
        type_acc.extend(acc.value);
        let (ca, rwr, delta, rwr_n) = comp_cells(agg.comp_by_type.get(k), max_n);
        let ic = ic_cell(agg.checks_by_type.get(k).into_iter().flat_map(|m| m.values()));
        by_type.push(Row {
            group: k.display_name().into(),
            accuracy: Some(acc),
            ca,
            rwr,
            delta,
            ic,
            rwr_n,
        });
    }
    let overall_accuracy_macro = Cell::new(
        (!type_acc.is_empty()).then(|| type_acc.iter().sum::<f64>() / type_acc.len() as f64),
        overall_accuracy_pooled.n,
    );
    let overall_ic = ic_cell(agg.checks.values());
    let (ca, rwr, delta, rwr_n) = comp_cells(Some(&agg.comp_overall), max_n);
    let overall = Row {
        group: "Overall".into(),
        accuracy: None,
        ca,
        rwr,
        delta,
        ic: overall_ic,
        rwr_n,
    };
    by_type.push(Row {
        accuracy: Some(overall_accuracy_pooled),
        ..overall.clone()
    });

    let mut by_rule = Vec::new();
    for rule in CompositionRule::ALL {
        let (ca, rwr, delta, rwr_n) = comp_cells(agg.comp_by_rule.get(&rule), max_n);
        let ic = ic_cell(
            agg.checks
                .iter()
                .filter(|(r, _)| r.composition() == rule)
                .map(|(_, c)| c),
        );
        by_rule.push(Row {
            group: rule.display_name().into(),
            accuracy: None,
            ca,
            rwr,
            delta,
            ic,
            rwr_n,
        });
    }
    by_rule.push(overall);

    let ic_rules = RuleId::ALL
        .into_iter()
        .map(|rule| {
            let c = agg.checks.get(&rule).copied().unwrap_or_default();
            IcRow {
                rule,
                name: rule.display_name(),
                ic: Cell::new(c.ic(), c.applicable()),
                instances: c.instances,
            }
        })
        .collect();

    let accuracy_splits = kinds
        .iter()
        .flat_map(|k| {
            agg.accuracy.get(k).into_iter().flatten().map(|(a, r)| AnswerSplit {
                kind: *k,
                answer: a.clone(),
                accuracy: Cell::ratio(r),
            })
        })
        .collect();

    MetricReport {
        notes: NOTES.iter().map(|s| s.to_string()).collect(),
        by_type,
        by_rule,
        ic_rules,
        accuracy_splits,
        overall_accuracy_pooled,
        overall_accuracy_macro,
        coverage: agg.coverage,
        correlation,
    }
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Question-type table: Accuracy, CA, RWR, Delta, IC.
    pub fn type_csv(&self) -> String {
        let mut out = String::from("question_type,accuracy,ca,rwr,delta,ic\n");
        for r in &self.by_type {
            let acc = r.accuracy.map_or("N/A".into(), |c| c.render());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.group,
                acc,
                r.ca.render(),
                r.rwr.render(),
                r.delta.render(),
                r.ic.render()
            );
        }
        out
    }

    /// Composition-rule table: CA, RWR, Delta, IC.
    pub fn rule_csv(&self) -> String {
        let mut out = String::from("composition_rule,ca,rwr,delta,ic\n");
        for r in &self.by_rule {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.group,
                r.ca.render(),
                r.rwr.render(),
                r.delta.render(),
                r.ic.render()
            );
        }
        out
    }

    /// IC per consistency rule.
    pub fn ic_csv(&self) -> String {
        let mut out = String::from("consistency_rule,ic,applicable,instances\n");
        for r in &self.ic_rules {
            let _ = writeln!(out, "{},{},{},{}", r.name, r.ic.render(), r.ic.n, r.instances);
        }
        out
    }

    /// RWR-n by parent question type.
    pub fn rwr_n_csv(&self) -> String {
        let width = self.by_type.first().map_or(0, |r| r.rwr_n.len());
        let mut out = String::from("question_type");
        for n in 1..=width {
            let _ = write!(out, ",rwr_{n}");
        }
        out.push('\n');
        for r in &self.by_type {
            out.push_str(&r.group);
            for c in &r.rwr_n {
                out.push(',');
                out.push_str(&c.render());
            }
            out.push('\n');
        }
        out
    }

    pub fn scatter_csv(&self) -> Option<String> {
        let c = self.correlation.as_ref()?;
        let mut out = String::from("dag_root,ic,accuracy\n");
        for p in &c.points {
            let _ = writeln!(out, "{},{:.4},{:.4}", p.dag_root, p.ic, p.accuracy);
        }
        Some(out)
    }
}
