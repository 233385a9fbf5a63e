//! Generate synthetic scene graphs and a question corpus, and write them
//! as JSONL into a directory (default: ./corpus).

use qdag::corpus::{build_corpus, SamplerConfig};
use qdag::decompose::TemplateTable;
use qdag::io::write_jsonl;
use qdag::program::BanList;
use qdag::scene::{generate_scene_graph, GeneratorParams};
use qdag::Vocabulary;

fn main() -> qdag::Result<()> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&out).map_err(|e| qdag::Error::io(&out, e))?;
    let vocab = Vocabulary::builtin();
    let params = GeneratorParams {
        num_videos: 25,
        ..Default::default()
    };
    let graphs = generate_scene_graph(2024, &params, &vocab);
    let cfg = SamplerConfig {
        seed: 2024,
        ..Default::default()
    };
    let corpus = build_corpus(&graphs, &vocab, &TemplateTable::builtin(), &BanList::default(), &cfg)?;

    write_jsonl(&out.join("scene_graphs.jsonl"), &graphs)?;
    write_jsonl(&out.join("questions.jsonl"), corpus.iter().flat_map(|v| &v.questions))?;
    write_jsonl(&out.join("dags.jsonl"), corpus.iter().flat_map(|v| &v.dags))?;
    write_jsonl(&out.join("negatives.jsonl"), corpus.iter().map(|v| &v.negatives))?;

    let dags: usize = corpus.iter().map(|v| v.dags.len()).sum();
    let questions: usize = corpus.iter().map(|v| v.questions.len()).sum();
    println!("{} videos, {dags} DAGs, {questions} questions -> {}", graphs.len(), out.display());
    Ok(())
}
