use std::path::Path;
use std::process::{Command, Output};

use qdag::corpus::QuestionRecord;
use qdag::io::{read_jsonl, write_jsonl};
use qdag::metrics::MetricReport;

fn qdag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdag"))
        .args(args)
        .env_remove("QDAG_VOCAB")
        .env_remove("QDAG_TEMPLATES")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path) {
    let out = qdag(&["gen", "--seed", "5", "--videos", "6", "--out", p(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qdag(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qdag(&["gen", "--videos", "3"]).status.code(), Some(2));
    assert_eq!(qdag(&["baseline", "--kind", "psychic", "--questions", "q", "--out", "o"]).status.code(), Some(2));
    assert_eq!(qdag(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_arguments_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdag(&["gen", "--seed", "1", "--videos", "0", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--videos"));
    let out = qdag(&["--ban-list", "bogusType", "gen", "--seed", "1", "--videos", "1", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_exits_3_and_bad_json_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.jsonl");
    let out = qdag(&["audit", "--dags", p(&missing), "--gold", p(&missing)]);
    assert_eq!(out.status.code(), Some(3));

    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"program\": \"objExists(dish)\"}\nnot json\n").unwrap();
    let out = qdag(&["decompose", "--input", p(&bad), "--out", p(&tmp.path().join("d.jsonl"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gold_missing_a_dag_node_exits_5() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let questions: Vec<QuestionRecord> = read_jsonl(&tmp.path().join("questions.jsonl")).unwrap();
    let partial = tmp.path().join("partial.jsonl");
    write_jsonl(&partial, &questions[1..]).unwrap();
    let out = qdag(&[
        "evaluate", "--dags", p(&tmp.path().join("dags.jsonl")), "--gold", p(&partial),
        "--baseline", "most-likely", "--out", p(&tmp.path().join("eval")),
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn audit_passes_on_gold_and_flags_a_flipped_child() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let dags = tmp.path().join("dags.jsonl");
    let gold = tmp.path().join("questions.jsonl");
    let out = qdag(&["audit", "--dags", p(&dags), "--gold", p(&gold)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    // Flip one child of an interaction question: both interaction rules fail.
    let mut questions: Vec<QuestionRecord> = read_jsonl(&gold).unwrap();
    let root = questions
        .iter()
        .find(|q| q.program.name() == "interactionExists" && q.answer == Some(qdag::Answer::YES))
        .expect("a yes interaction question")
        .program
        .clone();
    let child = root.subprograms()[2].clone();
    let video = questions.iter().find(|q| q.program == root).unwrap().video_id.clone();
    for q in questions.iter_mut().filter(|q| q.program == child && q.video_id == video) {
        q.answer = Some(qdag::Answer::NO);
    }
    let corrupted = tmp.path().join("corrupted.jsonl");
    write_jsonl(&corrupted, &questions).unwrap();
    let violations = tmp.path().join("violations.jsonl");
    let out = qdag(&["audit", "--dags", p(&dags), "--gold", p(&corrupted), "--out", p(&violations)]);
    assert_eq!(out.status.code(), Some(6));
    let v: Vec<serde_json::Value> = read_jsonl(&violations).unwrap();
    assert!(v.iter().any(|x| x["rule_id"] == "interaction-yes"), "{v:?}");
    assert!(v.iter().any(|x| x["rule_id"] == "interaction-no"), "{v:?}");
}

#[test]
fn unknown_prediction_ids_are_counted() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let q = tmp.path().join("questions.jsonl");
    let preds = tmp.path().join("preds.jsonl");
    let out = qdag(&["baseline", "--kind", "constant", "--answer", "yes", "--questions", p(&q), "--out", p(&preds)]);
    assert!(out.status.success());
    let mut text = std::fs::read_to_string(&preds).unwrap();
    text.push_str("{\"id\":\"ghost-1\",\"answer\":\"yes\"}\n");
    std::fs::write(&preds, text).unwrap();
    let eval = tmp.path().join("eval");
    let out = qdag(&[
        "evaluate", "--dags", p(&tmp.path().join("dags.jsonl")), "--gold", p(&q),
        "--predictions", p(&preds), "--out", p(&eval), "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown ids"));
    let report: MetricReport = serde_json::from_str(&std::fs::read_to_string(eval.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.coverage.unknown_predictions, 1);
    assert!(!eval.join("by_type.csv").exists());
}

#[test]
fn oracle_pipeline_through_answer_and_correlate() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let d = |f: &str| tmp.path().join(f);
    let out = qdag(&["answer", "--dags", p(&d("dags.jsonl")), "--scene-graphs", p(&d("scene_graphs.jsonl")), "--out", p(&d("answered.jsonl"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let answered: Vec<QuestionRecord> = read_jsonl(&d("answered.jsonl")).unwrap();
    let original: Vec<QuestionRecord> = read_jsonl(&d("questions.jsonl")).unwrap();
    for a in &answered {
        let o = original.iter().find(|o| o.id == a.id).unwrap();
        assert_eq!(a.program, o.program);
        if o.answer_provenance != qdag::propagate::Provenance::Annotated {
            assert_eq!(a.answer, o.answer, "{}", a.id);
        }
    }

    let out = qdag(&["baseline", "--kind", "oracle", "--questions", p(&d("questions.jsonl")), "--out", p(&d("oracle.jsonl"))]);
    assert_eq!(out.status.code(), Some(1), "oracle without scene graphs");
    let out = qdag(&[
        "baseline", "--kind", "oracle", "--questions", p(&d("questions.jsonl")),
        "--scene-graphs", p(&d("scene_graphs.jsonl")), "--out", p(&d("oracle.jsonl")),
    ]);
    assert!(out.status.success());
    let out = qdag(&[
        "correlate", "--dags", p(&d("dags.jsonl")), "--gold", p(&d("questions.jsonl")),
        "--predictions", p(&d("oracle.jsonl")), "--out", p(&d("scatter.csv")),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("undefined (zero variance)"));
    let scatter = std::fs::read_to_string(d("scatter.csv")).unwrap();
    assert!(scatter.starts_with("dag_root,ic,accuracy\n"));
    assert!(scatter.lines().skip(1).all(|l| l.ends_with(",100.0000,100.0000")));
}

#[test]
fn half_coverage_predictions_still_report() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let d = |f: &str| tmp.path().join(f);
    let out = qdag(&[
        "baseline", "--kind", "random", "--seed", "4", "--questions", p(&d("questions.jsonl")), "--out", p(&d("full.jsonl")),
    ]);
    assert!(out.status.success());
    let full = std::fs::read_to_string(d("full.jsonl")).unwrap();
    let half: String = full.lines().step_by(2).map(|l| format!("{l}\n")).collect();
    std::fs::write(d("half.jsonl"), half).unwrap();

    let mut reports = Vec::new();
    for preds in ["full.jsonl", "half.jsonl"] {
        let dir = d(&format!("eval-{preds}"));
        let out = qdag(&[
            "evaluate", "--dags", p(&d("dags.jsonl")), "--gold", p(&d("questions.jsonl")),
            "--predictions", p(&d(preds)), "--out", p(&dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r: MetricReport = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        reports.push(r);
    }
    let (full, half) = (&reports[0], &reports[1]);
    assert_eq!(full.coverage.missing_prediction, 0);
    assert!(half.coverage.missing_prediction > 0);
    assert_eq!(
        half.coverage.scored + half.coverage.missing_prediction,
        full.coverage.scored
    );
    let applicable = |r: &MetricReport| r.ic_rules.iter().map(|c| c.ic.n).sum::<u64>();
    let instances = |r: &MetricReport| r.ic_rules.iter().map(|c| c.instances).sum::<u64>();
    assert_eq!(instances(full), instances(half));
    assert!(applicable(half) < applicable(full));
}

#[test]
fn correlate_with_fewer_than_two_dags_is_undefined() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let d = |f: &str| tmp.path().join(f);
    let first = std::fs::read_to_string(d("dags.jsonl")).unwrap().lines().next().unwrap().to_string();
    std::fs::write(d("one.jsonl"), first + "\n").unwrap();
    let out = qdag(&[
        "correlate", "--dags", p(&d("one.jsonl")), "--gold", p(&d("questions.jsonl")),
        "--baseline", "most-likely", "--out", p(&d("scatter.csv")),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("r undefined"));
}
