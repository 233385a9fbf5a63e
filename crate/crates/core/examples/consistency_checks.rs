//! Run consistency checks over a DAG for a consistent and an inconsistent
//! set of predictions.

use qdag::consistency::{check_dag, dag_consistency, PredictionSet, Verdict};
use qdag::decompose::{decompose, TemplateTable};
use qdag::program::BanList;
use qdag::{parse_program, Answer, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let p = parse_program(
        "and(objExists(phone), interactionExists(objExists(person), relationExists(holding), objExists(bottle)))",
        &vocab,
    )
    .expect("valid program");
    let dag = decompose(&p, "demo", &TemplateTable::builtin(), &BanList::default()).expect("decomposes");
    let yes_everywhere: PredictionSet = dag.nodes.iter().map(|n| (n.key().to_string(), Answer::YES)).collect();
    let mut broken = yes_everywhere.clone();
    broken.insert(dag.nodes[1].key().to_string(), Answer::NO);

    for (name, pred) in [("all yes", &yes_everywhere), ("left child flipped", &broken)] {
        println!("== {name}");
        for c in check_dag(&dag, pred) {
            if c.verdict != Verdict::NotApplicable {
                println!("  {:<28} {:?}", c.rule_id.display_name(), c.verdict);
            }
        }
        let t = dag_consistency(&dag, pred);
        println!("  passed {} failed {} not applicable {}", t.passed, t.failed, t.not_applicable);
    }
}
