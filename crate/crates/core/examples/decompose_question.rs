//! Decompose a question into its DAG of sub-questions and print the
//! generated natural-language questions.

use qdag::decompose::{decompose, TemplateTable};
use qdag::program::BanList;
use qdag::{parse_program, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let templates = TemplateTable::builtin();
    let text = "chooseObject(equals(objExists(dish), first(objects(objExists(person), relationExists(touching)))), \
                equals(objExists(phone), first(objects(objExists(person), relationExists(touching)))))";
    let p = parse_program(text, &vocab).expect("valid program");
    let dag = decompose(&p, "demo", &templates, &BanList::default()).expect("templates cover the grammar");
    dag.validate().expect("well-formed");

    for n in &dag.nodes {
        let banned = if n.qtype.banned { " [not scored]" } else { "" };
        println!("{:<4} {:<22} {}{banned}", n.id, n.qtype.kind.as_str(), n.question);
    }
    println!();
    for e in &dag.edges {
        println!("{} -> {}  ({})", e.parent, e.child, e.rule.as_str());
    }
    println!();
    println!("{}", serde_json::to_string(&dag).expect("serializes"));
}
