//! The `qdag` command line.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::baselines::{fit_most_likely, PredictionRecord, Predictor};
use crate::consistency::{check_dag, PredictionSet, Verdict};
use crate::corpus::{build_corpus, gold_answers, QuestionRecord, SamplerConfig};
use crate::decompose::{decompose, QuestionDag, TemplateTable};
use crate::error::{ConfigError, Error, Result};
use crate::io::{read_jsonl, JsonlReader, JsonlWriter};
use crate::metrics::{aggregate, build_report, ic_accuracy_correlation, GoldSet};
use crate::program::{parse_program, Answer, BanList, QuestionKind};
use crate::propagate::Provenance;
use crate::scene::{generate_scene_graph, GeneratorParams, SceneGraph};
use crate::vocab::Vocabulary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_ID_MISMATCH: i32 = 5;
pub const EXIT_VIOLATIONS: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "qdag", version, about = "Question decomposition DAGs and compositional consistency metrics")]
pub struct Cli {
    /// Worker threads; defaults to the number of cores. Outputs do not
    /// depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Vocabulary JSON; the bundled sample vocabulary by default.
    #[arg(long, global = true, env = "QDAG_VOCAB")]
    pub vocab: Option<PathBuf>,
    /// Template table JSON; the bundled table by default.
    #[arg(long, global = true, env = "QDAG_TEMPLATES")]
    pub templates: Option<PathBuf>,
    /// Comma-separated question types excluded from scoring.
    #[arg(long, global = true, value_delimiter = ',', default_value = "objectsQuery,actionTemporalLoc")]
    pub ban_list: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scene graphs, questions, DAGs and negatives.
    Gen(GenArgs),
    /// Decompose programs into sub-question DAGs.
    Decompose(DecomposeArgs),
    /// Derive gold answers for DAG nodes from scene graphs.
    Answer(AnswerArgs),
    /// Write baseline predictions.
    Baseline(BaselineArgs),
    /// Score predictions and write the metric report.
    Evaluate(EvaluateArgs),
    /// Per-DAG consistency vs accuracy and their Pearson correlation.
    Correlate(CorrelateArgs),
    /// List consistency checks failed by gold answers.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub videos: usize,
    #[arg(long, default_value_t = 32)]
    pub frames: u32,
    #[arg(long, default_value_t = 0.6)]
    pub density: f64,
    /// JSON sampler configuration; command-line values override its seed.
    #[arg(long)]
    pub sampler: Option<PathBuf>,
    #[arg(long)]
    pub questions_per_video: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// JSONL with `program` and optional `video_id` per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnswerArgs {
    #[arg(long)]
    pub dags: PathBuf,
    #[arg(long)]
    pub scene_graphs: PathBuf,
    /// Question JSONL with gold answers.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Oracle,
    MostLikely,
    Constant,
    Random,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub kind: BaselineKind,
    #[arg(long)]
    pub questions: PathBuf,
    /// Gold questions to fit Most-Likely on; defaults to `--questions`.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Needed by the oracle.
    #[arg(long)]
    pub scene_graphs: Option<PathBuf>,
    /// Answer for the constant baseline, and Most-Likely's default for
    /// types missing from training.
    #[arg(long, default_value = "no")]
    pub answer: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinBaseline {
    MostLikely,
}

#[derive(Debug, Args)]
pub struct EvalInputs {
    #[arg(long)]
    pub dags: PathBuf,
    /// Question JSONL carrying gold answers.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, required_unless_present = "baseline")]
    pub predictions: Option<PathBuf>,
    /// Score a baseline fitted on the gold file instead of a prediction file.
    #[arg(long, value_enum, conflicts_with = "predictions")]
    pub baseline: Option<BuiltinBaseline>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    pub format: Vec<Format>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub inputs: EvalInputs,
    /// Scatter CSV of per-DAG points.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub dags: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// Violation JSONL; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_OTHER;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Schema { .. } => EXIT_SCHEMA,
        Error::IdMismatch(_) => EXIT_ID_MISMATCH,
        Error::Config(_) | Error::Program(_) | Error::Exec(_) | Error::Contradiction(_) => EXIT_OTHER,
    }
}

struct Env {
    vocab: Vocabulary,
    templates: TemplateTable,
    bans: BanList,
}

fn load_env(cli: &Cli) -> Result<Env> {
    let vocab = match &cli.vocab {
        Some(p) => Vocabulary::load(p)?,
        None => Vocabulary::builtin(),
    };
    let templates = match &cli.templates {
        Some(p) => TemplateTable::load(p)?,
        None => TemplateTable::builtin(),
    };
    let kinds = cli
        .ban_list
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<QuestionKind>().map_err(ConfigError::Invalid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Env {
        vocab,
        templates,
        bans: BanList::new(kinds),
    })
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ))
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let env = load_env(cli)?;
    match &cli.command {
        Command::Gen(a) => gen(&env, a),
        Command::Decompose(a) => cmd_decompose(&env, a),
        Command::Answer(a) => cmd_answer(a),
        Command::Baseline(a) => cmd_baseline(&env, a),
        Command::Evaluate(a) => evaluate(&env, a),
        Command::Correlate(a) => correlate(&env, a),
        Command::Audit(a) => audit(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn gen(env: &Env, a: &GenArgs) -> Result<i32> {
    if a.videos == 0 {
        return Err(ConfigError::Invalid("--videos must be positive".into()).into());
    }
    if a.frames == 0 || !(0.0..=1.0).contains(&a.density) {
        return Err(ConfigError::Invalid("--frames must be positive and --density in [0, 1]".into()).into());
    }
    let mut cfg = match &a.sampler {
        Some(p) => {
            require_file(p)?;
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Schema {
                path: p.clone(),
                line: e.line(),
                msg: e.to_string(),
            })?
        }
        None => SamplerConfig::default(),
    };
    cfg.seed = a.seed;
    if let Some(k) = a.questions_per_video {
        cfg.questions_per_video = k;
    }
    let params = GeneratorParams {
        num_videos: a.videos,
        frames: a.frames,
        density: a.density,
        ..Default::default()
    };
    create_dir(&a.out)?;
    let graphs = generate_scene_graph(a.seed, &params, &env.vocab);
    let corpus = build_corpus(&graphs, &env.vocab, &env.templates, &env.bans, &cfg)?;

    let mut sg = JsonlWriter::create(&a.out.join("scene_graphs.jsonl"))?;
    let mut qs = JsonlWriter::create(&a.out.join("questions.jsonl"))?;
    let mut ds = JsonlWriter::create(&a.out.join("dags.jsonl"))?;
    let mut neg = JsonlWriter::create(&a.out.join("negatives.jsonl"))?;
    let (mut nodes, mut dags, mut answered, mut questions) = (0usize, 0usize, 0usize, 0usize);
    for (g, v) in graphs.iter().zip(&corpus) {
        sg.write(g)?;
        for q in &v.questions {
            qs.write(q)?;
            questions += 1;
            answered += usize::from(q.answer.is_some());
        }
        for d in &v.dags {
            ds.write(d)?;
            dags += 1;
            nodes += d.nodes.len();
        }
        neg.write(&v.negatives)?;
    }
    for w in [sg, qs, ds, neg] {
        w.finish()?;
    }
    eprintln!(
        "{} videos, {dags} DAGs, {questions} questions; {:.2} sub-questions per DAG; {:.2}% answered",
        graphs.len(),
        nodes.saturating_sub(dags) as f64 / dags.max(1) as f64,
        100.0 * answered as f64 / questions.max(1) as f64
    );
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
struct ProgramLine {
    #[serde(default)]
    video_id: String,
    program: String,
}

fn cmd_decompose(env: &Env, a: &DecomposeArgs) -> Result<i32> {
    let mut out = JsonlWriter::create(&a.out)?;
    for line in JsonlReader::<ProgramLine>::open(&a.input)? {
        let line = line?;
        let p = parse_program(&line.program, &env.vocab)?;
        out.write(&decompose(&p, &line.video_id, &env.templates, &env.bans)?)?;
    }
    out.finish()?;
    Ok(EXIT_OK)
}

fn cmd_answer(a: &AnswerArgs) -> Result<i32> {
    let graphs: HashMap<String, SceneGraph> = read_jsonl::<SceneGraph>(&a.scene_graphs)?
        .into_iter()
        .map(|g| (g.video_id.clone(), g))
        .collect();
    let dags: Vec<QuestionDag> = read_jsonl(&a.dags)?;
    let mut out = JsonlWriter::create(&a.out)?;
    let mut written = HashSet::new();
    for d in &dags {
        let g = graphs
            .get(&d.video_id)
            .ok_or_else(|| Error::IdMismatch(format!("no scene graph for video `{}`", d.video_id)))?;
        let gold = gold_answers(d, g);
        for n in &d.nodes {
            if !written.insert(n.key().to_string()) {
                continue;
            }
            let l = gold.get(n.key());
            out.write(&QuestionRecord {
                id: n.key().to_string(),
                video_id: d.video_id.clone(),
                program: n.program.clone(),
                question: n.question.clone(),
                qtype: n.qtype,
                answer: l.map(|l| l.answer.clone()),
                answer_provenance: l.map_or(Provenance::Unknown, |l| l.provenance),
            })?;
        }
    }
    out.finish()?;
    Ok(EXIT_OK)
}

fn cmd_baseline(env: &Env, a: &BaselineArgs) -> Result<i32> {
    let questions: Vec<QuestionRecord> = read_jsonl(&a.questions)?;
    let answer = Answer::parse(&a.answer);
    let predictor = match a.kind {
        BaselineKind::Oracle => Predictor::Oracle,
        BaselineKind::Constant => Predictor::Constant { answer },
        BaselineKind::Random => Predictor::Random { seed: a.seed },
        BaselineKind::MostLikely => {
            let train = match &a.train {
                Some(p) => read_jsonl(p)?,
                None => questions.clone(),
            };
            let mut m = fit_most_likely(&train, answer);
            m.flag_unseen(&questions);
            for k in &m.unseen {
                eprintln!("warning: type `{k}` absent from training; predicting `{}`", m.default);
            }
            Predictor::MostLikely(m)
        }
    };
    let graphs: HashMap<String, SceneGraph> = match &a.scene_graphs {
        Some(p) => read_jsonl::<SceneGraph>(p)?
            .into_iter()
            .map(|g| (g.video_id.clone(), g))
            .collect(),
        None if predictor == Predictor::Oracle => {
            return Err(ConfigError::Invalid("the oracle needs --scene-graphs".into()).into())
        }
        None => HashMap::new(),
    };
    let preds = predictor.predict_all(&questions, &graphs, &env.vocab);
    crate::io::write_jsonl(&a.out, &preds)?;
    Ok(EXIT_OK)
}

struct Loaded {
    dags: Vec<QuestionDag>,
    gold: GoldSet,
    pred: PredictionSet,
    unknown_predictions: u64,
}

fn load_eval(env: &Env, inputs: &EvalInputs) -> Result<Loaded> {
    let mut dags: Vec<QuestionDag> = read_jsonl(&inputs.dags)?;
    for d in &mut dags {
        for n in &mut d.nodes {
            n.qtype = env.bans.qtype(n.qtype.kind);
        }
    }
    let questions: Vec<QuestionRecord> = read_jsonl(&inputs.gold)?;
    let known: BTreeSet<&str> = questions.iter().map(|q| q.id.as_str()).collect();
    for d in &dags {
        if let Some(n) = d.nodes.iter().find(|n| !known.contains(n.key())) {
            return Err(Error::IdMismatch(format!(
                "DAG {} references question `{}` missing from {}",
                d.root().key(),
                n.key(),
                inputs.gold.display()
            )));
        }
    }
    let gold: GoldSet = questions
        .iter()
        .filter_map(|q| Some((q.id.clone(), q.answer.clone()?)))
        .collect();
    let preds: Vec<PredictionRecord> = match (&inputs.predictions, inputs.baseline) {
        (Some(p), _) => read_jsonl(p)?,
        (None, Some(BuiltinBaseline::MostLikely)) => {
            let m = fit_most_likely(&questions, Answer::NO);
            Predictor::MostLikely(m).predict_all(&questions, &HashMap::new(), &env.vocab)
        }
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let mut unknown_predictions = 0;
    let mut pred = PredictionSet::new();
    for p in preds {
        if known.contains(p.id.as_str()) {
            pred.insert(p.id, p.answer);
        } else {
            unknown_predictions += 1;
        }
    }
    if unknown_predictions > 0 {
        eprintln!("warning: {unknown_predictions} prediction(s) with unknown ids were ignored");
    }
    Ok(Loaded {
        dags,
        gold,
        pred,
        unknown_predictions,
    })
}

fn evaluate(env: &Env, a: &EvaluateArgs) -> Result<i32> {
    let l = load_eval(env, &a.inputs)?;
    let mut agg = aggregate(&l.dags, &l.gold, &l.pred);
    agg.coverage.unknown_predictions = l.unknown_predictions;
    let corr = ic_accuracy_correlation(&l.dags, &l.gold, &l.pred);
    let report = build_report(&agg, &env.bans, Some(corr));
    create_dir(&a.out)?;
    if a.format.contains(&Format::Json) {
        write_text(&a.out.join("report.json"), &(report.to_json() + "\n"))?;
    }
    if a.format.contains(&Format::Csv) {
        write_text(&a.out.join("by_type.csv"), &report.type_csv())?;
        write_text(&a.out.join("by_rule.csv"), &report.rule_csv())?;
        write_text(&a.out.join("ic_rules.csv"), &report.ic_csv())?;
        write_text(&a.out.join("rwr_n.csv"), &report.rwr_n_csv())?;
        if let Some(s) = report.scatter_csv() {
            write_text(&a.out.join("scatter.csv"), &s)?;
        }
    }
    print!("{}", report.type_csv());
    Ok(EXIT_OK)
}

fn correlate(env: &Env, a: &CorrelateArgs) -> Result<i32> {
    let l = load_eval(env, &a.inputs)?;
    let corr = ic_accuracy_correlation(&l.dags, &l.gold, &l.pred);
    let report = crate::metrics::MetricReport {
        correlation: Some(corr.clone()),
        ..build_report(&Default::default(), &env.bans, None)
    };
    write_text(&a.out, &report.scatter_csv().expect("correlation present"))?;
    match (corr.r, corr.diagnostic) {
        (Some(r), _) => println!("r = {r:.4} over {} DAGs", corr.points.len()),
        (None, why) => println!(
            "r undefined ({}) over {} DAGs",
            why.unwrap_or_default(),
            corr.points.len()
        ),
    }
    Ok(EXIT_OK)
}

fn audit(a: &AuditArgs) -> Result<i32> {
    let dags: Vec<QuestionDag> = read_jsonl(&a.dags)?;
    let questions: Vec<QuestionRecord> = read_jsonl(&a.gold)?;
    let gold: PredictionSet = questions
        .into_iter()
        .filter_map(|q| Some((q.id, q.answer?)))
        .collect();
    let violations: Vec<_> = dags
        .iter()
        .flat_map(|d| check_dag(d, &gold))
        .filter(|c| c.verdict == Verdict::Fail)
        .collect();
    match &a.out {
        Some(p) => crate::io::write_jsonl(p, &violations)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for v in &violations {
                let _ = writeln!(lock, "{}", serde_json::to_string(v).expect("serializes"));
            }
        }
    }
    eprintln!("{} violation(s) over {} DAGs", violations.len(), dags.len());
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_VIOLATIONS })
}
