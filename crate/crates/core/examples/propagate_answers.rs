//! Fill in sub-question answers from a parent's answer, and derive
//! negative questions from objects known to be absent.

mod common;

use qdag::decompose::{decompose, TemplateTable};
use qdag::program::BanList;
use qdag::propagate::{
    apply_negative_annotations, propagate_answers, AnswerMap, Labeled, NegativeAnnotation, Provenance,
};
use qdag::{parse_program, render_program, Answer, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let templates = TemplateTable::builtin();
    let p = parse_program(
        "and(interactionExists(objExists(person), relationExists(holding), objExists(bottle)), \
         after(objExists(phone), actionExists(walking through the doorway)))",
        &vocab,
    )
    .expect("valid program");
    let dag = decompose(&p, "kitchen", &templates, &BanList::default()).expect("decomposes");

    let seeds = AnswerMap::from([(
        dag.root().key().to_string(),
        Labeled {
            answer: Answer::YES,
            provenance: Provenance::Annotated,
        },
    )]);
    let answers = propagate_answers(&dag, &seeds).expect("no contradiction");
    for n in &dag.nodes {
        match answers.get(n.key()) {
            Some(l) => println!("{:<4} {:<4} {:?}  {}", n.id, l.answer, l.provenance, n.question),
            None => println!("{:<4} ?         {}", n.id, n.question),
        }
    }

    let g = common::kitchen();
    let ann = NegativeAnnotation {
        video_id: g.video_id.clone(),
        absent_objects: vec!["laptop".into(), "pillow".into()],
    };
    ann.validate(&vocab).expect("known objects");
    println!();
    for (q, a) in apply_negative_annotations(&ann, &g, &vocab) {
        println!("{a}  {}", render_program(&q));
    }
}
