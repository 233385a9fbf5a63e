//! Accuracy, compositional accuracy (CA), right-for-the-wrong-reasons
//! (RWR, RWR-n), Delta and internal consistency (IC), aggregated as a
//! commutative monoid of counters so videos can be scored in parallel.

mod report;

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consistency::{dag_consistency, evaluate_check, instantiate_checks, PredictionSet, RuleId, Verdict};
use crate::decompose::{CompositionRule, QuestionDag};
use crate::program::{Answer, QuestionKind};

pub use report::{build_report, Cell, Correlation, IcRow, MetricReport, Point, Row};

/// Gold answers keyed by question id.
pub type GoldSet = HashMap<String, Answer>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub hits: u64,
    pub total: u64,
}

impl Ratio {
    pub fn add(&mut self, hit: bool) {
        self.hits += u64::from(hit);
        self.total += 1;
    }

    pub fn merge(&mut self, other: &Ratio) {
        self.hits += other.hits;
        self.total += other.total;
    }

    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.hits as f64 / self.total as f64)
    }
}

/// Parent correctness split by how many immediate children were wrong.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompCounts {
    /// Compositions with every child correct.
    pub ca: Ratio,
    /// Compositions with at least one wrong child.
    pub rwr: Ratio,
    /// Keyed by the exact number of wrong children.
    pub rwr_n: BTreeMap<usize, Ratio>,
}

impl CompCounts {
    pub fn add(&mut self, parent_correct: bool, wrong_children: usize) {
        if wrong_children == 0 {
            self.ca.add(parent_correct);
        } else {
            self.rwr.add(parent_correct);
            self.rwr_n.entry(wrong_children).or_default().add(parent_correct);
        }
    }

    pub fn merge(&mut self, other: &CompCounts) {
        self.ca.merge(&other.ca);
        self.rwr.merge(&other.rwr);
        for (n, r) in &other.rwr_n {
            self.rwr_n.entry(*n).or_default().merge(r);
        }
    }

    pub fn delta(&self) -> Option<f64> {
        Some(self.rwr.percent()? - self.ca.percent()?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub instances: u64,
    pub passed: u64,
    pub failed: u64,
}

impl CheckCounts {
    pub fn add(&mut self, v: Verdict) {
        self.instances += 1;
        match v {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::NotApplicable => {}
        }
    }

    pub fn merge(&mut self, other: &CheckCounts) {
        self.instances += other.instances;
        self.passed += other.passed;
        self.failed += other.failed;
    }

    pub fn applicable(&self) -> u64 {
        self.passed + self.failed
    }

    pub fn ic(&self) -> Option<f64> {
        let n = self.applicable();
        (n > 0).then(|| 100.0 * self.passed as f64 / n as f64)
    }
}

/// Macro IC over the rules that have at least one instance. Undefined when
/// there are none or when any of them was never applicable.
pub fn macro_ic<'a>(rules: impl IntoIterator<Item = &'a CheckCounts>) -> Option<f64> {
    let present: Vec<&CheckCounts> = rules.into_iter().filter(|c| c.instances > 0).collect();
    if present.is_empty() {
        return None;
    }
    let values: Option<Vec<f64>> = present.iter().map(|c| c.ic()).collect();
    let values = values?;
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Questions scored for accuracy.
    pub scored: u64,
    pub banned: u64,
    pub missing_gold: u64,
    pub missing_prediction: u64,
    /// Compositions left out because a member is banned or unscored.
    pub excluded_compositions: u64,
    /// Prediction ids matching no question; filled in by the caller.
    #[serde(default)]
    pub unknown_predictions: u64,
}

impl Coverage {
    fn merge(&mut self, o: &Coverage) {
        self.scored += o.scored;
        self.banned += o.banned;
        self.missing_gold += o.missing_gold;
        self.missing_prediction += o.missing_prediction;
        self.excluded_compositions += o.excluded_compositions;
        self.unknown_predictions += o.unknown_predictions;
    }
}

/// All metric counters. Questions, compositions and checks are counted
/// once per question id even when several DAGs share them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub accuracy: BTreeMap<QuestionKind, BTreeMap<String, Ratio>>,
    pub comp_by_type: BTreeMap<QuestionKind, CompCounts>,
    pub comp_by_rule: BTreeMap<CompositionRule, CompCounts>,
    pub comp_overall: CompCounts,
    pub checks_by_type: BTreeMap<QuestionKind, BTreeMap<RuleId, CheckCounts>>,
    pub checks: BTreeMap<RuleId, CheckCounts>,
    pub coverage: Coverage,
}

impl Aggregate {
    pub fn merge(&mut self, o: &Aggregate) {
        for (k, answers) in &o.accuracy {
            let mine = self.accuracy.entry(*k).or_default();
            for (a, r) in answers {
                mine.entry(a.clone()).or_default().merge(r);
            }
        }
        for (k, c) in &o.comp_by_type {
            self.comp_by_type.entry(*k).or_default().merge(c);
        }
        for (k, c) in &o.comp_by_rule {
            self.comp_by_rule.entry(*k).or_default().merge(c);
        }
        self.comp_overall.merge(&o.comp_overall);
        for (k, rules) in &o.checks_by_type {
            let mine = self.checks_by_type.entry(*k).or_default();
            for (r, c) in rules {
                mine.entry(*r).or_default().merge(c);
            }
        }
        for (r, c) in &o.checks {
            self.checks.entry(*r).or_default().merge(c);
        }
        self.coverage.merge(&o.coverage);
    }

    /// Counts the DAGs of one video. Ids are deduplicated within the call,
    /// so every DAG sharing question ids must be passed together.
    pub fn observe(dags: &[&QuestionDag], gold: &GoldSet, pred: &PredictionSet) -> Aggregate {
        let mut agg = Aggregate::default();
        let mut seen_q = HashSet::new();
        let mut seen_parent = HashSet::new();
        let mut seen_check = HashSet::new();
        for dag in dags {
            let correct = |key: &str| -> Option<bool> { Some(pred.get(key)? == gold.get(key)?) };
            for n in &dag.nodes {
                if !seen_q.insert(n.key()) {
                    continue;
                }
                let cov = &mut agg.coverage;
                match (n.qtype.banned, gold.get(n.key()), pred.get(n.key())) {
                    (true, ..) => cov.banned += 1,
                    (false, None, _) => cov.missing_gold += 1,
                    (false, Some(_), None) => cov.missing_prediction += 1,
                    (false, Some(g), Some(p)) => {
                        cov.scored += 1;
                        agg.accuracy
                            .entry(n.qtype.kind)
                            .or_default()
                            .entry(g.to_string())
                            .or_default()
                            .add(p == g);
                    }
                }
            }
            for parent in dag.parents() {
                if !seen_parent.insert(parent.key()) {
                    continue;
                }
                let children = dag.children(&parent.id);
                let members = std::iter::once(parent).chain(children.iter().copied());
                let bits: Option<Vec<bool>> = members
                    .map(|n| if n.qtype.banned { None } else { correct(n.key()) })
                    .collect();
                let Some(bits) = bits else {
                    agg.coverage.excluded_compositions += 1;
                    continue;
                };
                let wrong = bits[1..].iter().filter(|b| !**b).count();
                let rule = dag.rule_of(&parent.id).expect("parents have edges");
                agg.comp_by_type.entry(parent.qtype.kind).or_default().add(bits[0], wrong);
                agg.comp_by_rule.entry(rule).or_default().add(bits[0], wrong);
                agg.comp_overall.add(bits[0], wrong);
            }
            let kind_of: HashMap<&str, QuestionKind> =
                dag.nodes.iter().map(|n| (n.key(), n.qtype.kind)).collect();
            for t in instantiate_checks(dag) {
                if !seen_check.insert((t.rule, t.parent.clone())) {
                    continue;
                }
                let v = evaluate_check(&t, pred);
                agg.checks.entry(t.rule).or_default().add(v);
                agg.checks_by_type
                    .entry(kind_of[t.parent.as_str()])
                    .or_default()
                    .entry(t.rule)
                    .or_default()
                    .add(v);
            }
        }
        agg
    }
}

/// Scores a whole corpus, one video per parallel task.
pub fn aggregate(dags: &[QuestionDag], gold: &GoldSet, pred: &PredictionSet) -> Aggregate {
    let mut by_video: BTreeMap<&str, Vec<&QuestionDag>> = BTreeMap::new();
    for d in dags {
        by_video.entry(d.video_id.as_str()).or_default().push(d);
    }
    let videos: Vec<Vec<&QuestionDag>> = by_video.into_values().collect();
    videos
        .par_iter()
        .map(|v| Aggregate::observe(v, gold, pred))
        .reduce(Aggregate::default, |mut a, b| {
            a.merge(&b);
            a
        })
}

/// Per-DAG (IC %, accuracy %) over scored nodes. DAGs without applicable
/// checks or scored nodes are skipped.
pub fn dag_points(dags: &[QuestionDag], gold: &GoldSet, pred: &PredictionSet) -> Vec<Point> {
    dags.par_iter()
        .filter_map(|d| {
            let tally = dag_consistency(d, pred);
            let mut acc = Ratio::default();
            for n in d.nodes.iter().filter(|n| !n.qtype.banned) {
                if let (Some(g), Some(p)) = (gold.get(n.key()), pred.get(n.key())) {
                    acc.add(g == p);
                }
            }
            let ic = 100.0 * tally.passed as f64 / tally.applicable().max(1) as f64;
            (tally.applicable() > 0 && acc.total > 0).then(|| Point {
                dag_root: d.root().key().to_string(),
                ic,
                accuracy: acc.percent().expect("non-empty"),
            })
        })
        .collect()
}

/// Pearson correlation; `Err` carries the reason it is undefined.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, &'static str> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return Err("fewer than 2 points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err("zero variance");
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

pub fn ic_accuracy_correlation(dags: &[QuestionDag], gold: &GoldSet, pred: &PredictionSet) -> Correlation {
    let points = dag_points(dags, gold, pred);
    let xs: Vec<f64> = points.iter().map(|p| p.ic).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.accuracy).collect();
    let (r, diagnostic) = match pearson(&xs, &ys) {
        Ok(r) => (Some(r), None),
        Err(why) => (None, Some(why.to_string())),
    };
    Correlation { points, r, diagnostic }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_comp_counts() {
        let mut c = CompCounts::default();
        c.add(true, 1);
        c.add(false, 2);
        assert_eq!(c.rwr.percent(), Some(50.0));
        assert_eq!(c.rwr_n[&1].percent(), Some(100.0));
        assert_eq!(c.rwr_n[&2].percent(), Some(0.0));
        assert_eq!(c.ca.percent(), None);
        assert_eq!(c.delta(), None);
        let mut d = CompCounts::default();
        d.add(true, 0);
        d.add(false, 0);
        assert_eq!(d.ca.percent(), Some(50.0));
        c.merge(&d);
        assert_eq!(c.delta(), Some(0.0));
    }

    #[test]
    fn macro_ic_is_unweighted() {
        let a = CheckCounts { instances: 1, passed: 1, failed: 0 };
        let b = CheckCounts { instances: 99, passed: 0, failed: 99 };
        assert_eq!(macro_ic([&a, &b]), Some(50.0));
        let never = CheckCounts { instances: 4, passed: 0, failed: 0 };
        assert_eq!(macro_ic([&a, &never]), None);
        let absent = CheckCounts::default();
        assert_eq!(macro_ic([&a, &absent]), Some(100.0));
        assert_eq!(macro_ic([&absent]), None);
    }

    #[test]
    fn pearson_edge_cases() {
        assert_eq!(pearson(&[1.0], &[2.0]), Err("fewer than 2 points"));
        assert_eq!(pearson(&[1.0, 1.0], &[2.0, 3.0]), Err("zero variance"));
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }
}
