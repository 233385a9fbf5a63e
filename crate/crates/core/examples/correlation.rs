//! Per-DAG consistency against per-DAG accuracy, and their Pearson
//! correlation, for a baseline that always answers "no" on a corpus of
//! mostly positive questions.

use std::collections::HashMap;

use qdag::baselines::Predictor;
use qdag::consistency::PredictionSet;
use qdag::corpus::{build_corpus, Family, SamplerConfig};
use qdag::decompose::TemplateTable;
use qdag::metrics::{ic_accuracy_correlation, GoldSet};
use qdag::program::BanList;
use qdag::scene::{generate_scene_graph, GeneratorParams};
use qdag::{Answer, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let graphs = generate_scene_graph(
        7,
        &GeneratorParams {
            num_videos: 60,
            ..Default::default()
        },
        &vocab,
    );
    let mut cfg = SamplerConfig {
        seed: 7,
        positive_rate: 1.0,
        ..Default::default()
    };
    for w in cfg.weights.values_mut() {
        *w = 0.0;
    }
    cfg.weights.insert(Family::Interaction, 4.0);
    for f in [Family::ChooseObject, Family::ChooseTime, Family::ExistsTemporal, Family::And] {
        cfg.weights.insert(f, 1.0);
    }
    let corpus = build_corpus(&graphs, &vocab, &TemplateTable::builtin(), &BanList::default(), &cfg)
        .expect("valid config");
    let dags: Vec<_> = corpus.iter().flat_map(|v| v.dags.iter().cloned()).collect();
    let questions: Vec<_> = corpus.iter().flat_map(|v| v.questions.iter().cloned()).collect();
    let gold: GoldSet = questions
        .iter()
        .filter_map(|q| Some((q.id.clone(), q.answer.clone()?)))
        .collect();
    let pred: PredictionSet = Predictor::Constant { answer: Answer::NO }
        .predict_all(&questions, &HashMap::new(), &vocab)
        .into_iter()
        .map(|r| (r.id, r.answer))
        .collect();

    let corr = ic_accuracy_correlation(&dags, &gold, &pred);
    let mut buckets: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
    for p in &corr.points {
        let b = buckets.entry(p.ic.round() as i64).or_default();
        b.0 += p.accuracy;
        b.1 += 1;
    }
    for (ic, (sum, n)) in buckets {
        println!("IC {ic:>3}%  {n:>4} DAGs  mean accuracy {:.1}%", sum / n as f64);
    }
    match corr.r {
        Some(r) => println!("r = {r:.3} over {} DAGs", corr.points.len()),
        None => println!("r undefined: {}", corr.diagnostic.unwrap_or_default()),
    }
}
