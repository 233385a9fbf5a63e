// Corpus fixtures and a from-scratch reference scorer shared by the
// integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use qdag::baselines::Predictor;
use qdag::consistency::{check_dag, PredictionSet, Verdict};
use qdag::corpus::{build_corpus, Family, QuestionRecord, SamplerConfig};
use qdag::decompose::{CompositionRule, QuestionDag, TemplateTable};
use qdag::metrics::GoldSet;
use qdag::program::{BanList, QuestionKind};
use qdag::scene::{generate_scene_graph, GeneratorParams};
use qdag::{Answer, SceneGraph, Vocabulary};

pub struct Corpus {
    pub graphs: Vec<SceneGraph>,
    pub by_video: HashMap<String, SceneGraph>,
    pub dags: Vec<QuestionDag>,
    pub questions: Vec<QuestionRecord>,
    pub gold: GoldSet,
}

pub fn corpus(seed: u64, videos: usize, cfg: SamplerConfig) -> Corpus {
    let vocab = Vocabulary::builtin();
    let params = GeneratorParams {
        num_videos: videos,
        ..Default::default()
    };
    let graphs = generate_scene_graph(seed, &params, &vocab);
    let cfg = SamplerConfig { seed, ..cfg };
    let built = build_corpus(&graphs, &vocab, &TemplateTable::builtin(), &BanList::default(), &cfg).unwrap();
    let dags: Vec<_> = built.iter().flat_map(|v| v.dags.iter().cloned()).collect();
    let questions: Vec<_> = built.iter().flat_map(|v| v.questions.iter().cloned()).collect();
    let gold = questions
        .iter()
        .filter_map(|q| Some((q.id.clone(), q.answer.clone()?)))
        .collect();
    let by_video = graphs.iter().map(|g| (g.video_id.clone(), g.clone())).collect();
    Corpus {
        graphs,
        by_video,
        dags,
        questions,
        gold,
    }
}

pub fn default_corpus(seed: u64, videos: usize) -> Corpus {
    corpus(seed, videos, SamplerConfig::default())
}

/// Only the given families, equally weighted unless repeated.
pub fn weighted(positive_rate: f64, families: &[(Family, f64)]) -> SamplerConfig {
    let mut cfg = SamplerConfig {
        positive_rate,
        ..Default::default()
    };
    for w in cfg.weights.values_mut() {
        *w = 0.0;
    }
    for (f, w) in families {
        cfg.weights.insert(*f, *w);
    }
    cfg
}

impl Corpus {
    pub fn predict(&self, p: &Predictor) -> PredictionSet {
        p.predict_all(&self.questions, &self.by_video, &Vocabulary::builtin())
            .into_iter()
            .map(|r| (r.id, r.answer))
            .collect()
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct NaiveComp {
    pub ca_hits: u64,
    pub ca_total: u64,
    pub rwr_hits: u64,
    pub rwr_total: u64,
    pub by_n: BTreeMap<usize, (u64, u64)>,
}

#[derive(Debug, Default)]
pub struct Naive {
    /// (type, gold answer) -> (hits, total)
    pub accuracy: BTreeMap<(QuestionKind, String), (u64, u64)>,
    pub by_type: BTreeMap<QuestionKind, NaiveComp>,
    pub by_rule: BTreeMap<CompositionRule, NaiveComp>,
    pub checks: BTreeMap<qdag::consistency::RuleId, (u64, u64)>,
}

// kind, banned, rule, (child key, child banned)
type ParentEntry = (QuestionKind, bool, CompositionRule, Vec<(String, bool)>);

/// Recomputes the counters directly from the definitions: every distinct
/// question id once, every distinct parent id once.
pub fn naive(dags: &[QuestionDag], gold: &GoldSet, pred: &PredictionSet) -> Naive {
    let mut out = Naive::default();
    let mut nodes = BTreeMap::new();
    let mut parents: BTreeMap<String, ParentEntry> = BTreeMap::new();
    let mut checks = BTreeMap::new();
    for d in dags {
        for n in &d.nodes {
            nodes.entry(n.key().to_string()).or_insert((n.qtype.kind, n.qtype.banned));
        }
        for e in &d.edges {
            let p = d.node(&e.parent).unwrap();
            let c = d.node(&e.child).unwrap();
            let entry = parents
                .entry(p.key().to_string())
                .or_insert_with(|| (p.qtype.kind, p.qtype.banned, e.rule, vec![]));
            if !entry.3.iter().any(|(k, _)| k == c.key()) {
                entry.3.push((c.key().to_string(), c.qtype.banned));
            }
        }
        for c in check_dag(d, pred) {
            checks.entry((c.rule_id, c.parent.clone())).or_insert(c.verdict);
        }
    }
    let correct = |k: &str| match (gold.get(k), pred.get(k)) {
        (Some(g), Some(p)) => Some(g == p),
        _ => None,
    };
    for (k, (kind, banned)) in &nodes {
        if *banned {
            continue;
        }
        if let (Some(g), Some(p)) = (gold.get(k), pred.get(k)) {
            let cell = out.accuracy.entry((*kind, g.to_string())).or_default();
            cell.0 += u64::from(g == p);
            cell.1 += 1;
        }
    }
    for (k, (kind, banned, rule, children)) in &parents {
        if *banned || children.iter().any(|(_, b)| *b) {
            continue;
        }
        let Some(pc) = correct(k) else { continue };
        let Some(cc) = children.iter().map(|(c, _)| correct(c)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let wrong = cc.iter().filter(|b| !**b).count();
        for comp in [out.by_type.entry(*kind).or_default(), out.by_rule.entry(*rule).or_default()] {
            if wrong == 0 {
                comp.ca_hits += u64::from(pc);
                comp.ca_total += 1;
            } else {
                comp.rwr_hits += u64::from(pc);
                comp.rwr_total += 1;
                let n = comp.by_n.entry(wrong).or_default();
                n.0 += u64::from(pc);
                n.1 += 1;
            }
        }
    }
    for ((rule, _), v) in checks {
        let c = out.checks.entry(rule).or_default();
        match v {
            Verdict::Pass => c.0 += 1,
            Verdict::Fail => c.1 += 1,
            Verdict::NotApplicable => {}
        }
    }
    out
}

/// Binary answer kinds: both gold answers are yes/no.
pub fn is_binary(kind: QuestionKind) -> bool {
    !matches!(
        kind,
        QuestionKind::FirstLast
            | QuestionKind::LongestShortestAction
            | QuestionKind::Choose
            | QuestionKind::ObjectsQuery
            | QuestionKind::ActionTemporalLoc
    )
}

pub fn flip(a: &Answer) -> Answer {
    match a {
        Answer::Bool(b) => Answer::Bool(!b),
        Answer::Temporal(t) => Answer::Temporal(match t {
            qdag::program::TemporalToken::Before => qdag::program::TemporalToken::After,
            qdag::program::TemporalToken::After => qdag::program::TemporalToken::Before,
        }),
        Answer::Label(l) => Answer::label(if l == "cup" { "dish" } else { "cup" }),
    }
}
