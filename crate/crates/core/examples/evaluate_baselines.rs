//! Generate a corpus and score the blind baselines with accuracy,
//! compositional accuracy, right-for-wrong-reasons and consistency.

use std::collections::HashMap;

use qdag::baselines::{fit_most_likely, Predictor};
use qdag::consistency::PredictionSet;
use qdag::corpus::{build_corpus, SamplerConfig};
use qdag::decompose::TemplateTable;
use qdag::metrics::{aggregate, build_report, GoldSet};
use qdag::program::BanList;
use qdag::scene::{generate_scene_graph, GeneratorParams};
use qdag::{Answer, SceneGraph, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let bans = BanList::default();
    let params = GeneratorParams {
        num_videos: 40,
        ..Default::default()
    };
    let graphs = generate_scene_graph(11, &params, &vocab);
    let cfg = SamplerConfig {
        seed: 11,
        ..Default::default()
    };
    let corpus = build_corpus(&graphs, &vocab, &TemplateTable::builtin(), &bans, &cfg).expect("valid config");
    let dags: Vec<_> = corpus.iter().flat_map(|v| v.dags.iter().cloned()).collect();
    let questions: Vec<_> = corpus.iter().flat_map(|v| v.questions.iter().cloned()).collect();
    let gold: GoldSet = questions
        .iter()
        .filter_map(|q| Some((q.id.clone(), q.answer.clone()?)))
        .collect();
    let by_video: HashMap<String, SceneGraph> = graphs.into_iter().map(|g| (g.video_id.clone(), g)).collect();

    let predictors = [
        ("most likely", Predictor::MostLikely(fit_most_likely(&questions, Answer::NO))),
        ("always no", Predictor::Constant { answer: Answer::NO }),
        ("random", Predictor::Random { seed: 3 }),
    ];
    for (name, predictor) in predictors {
        let pred: PredictionSet = predictor
            .predict_all(&questions, &by_video, &vocab)
            .into_iter()
            .map(|r| (r.id, r.answer))
            .collect();
        let report = build_report(&aggregate(&dags, &gold, &pred), &bans, None);
        println!("== {name}\n{}", report.type_csv());
    }
}
