//! Answer programs directly against a scene graph.

mod common;

use qdag::program::Localizer;
use qdag::scene::{execute, window_for};
use qdag::{parse_program, Program, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let g = common::kitchen();
    g.validate().expect("valid scene graph");

    for text in [
        "objExists(phone)",
        "first(objects(objExists(person), relationExists(touching)))",
        "last(objects(objExists(person), relationExists(touching)))",
        "after(objExists(phone), actionExists(walking through the doorway))",
        "before(objExists(phone), actionExists(walking through the doorway))",
        "longest(actions())",
        "chooseObject(equals(objExists(dish), first(objects(objExists(person), relationExists(touching)))), equals(objExists(phone), first(objects(objExists(person), relationExists(touching)))))",
        "objects(objExists(person), relationExists(touching))",
        "after(objExists(phone), actionExists(sneezing))",
    ] {
        let p = parse_program(text, &vocab).expect("valid program");
        match execute(&p, &g) {
            Ok(a) => println!("{a:>28}  {text}"),
            Err(e) => println!("{:>28}  {text}", format!("<{e}>")),
        }
    }

    let anchor = Program::act("smiling at something");
    for l in [Localizer::Before, Localizer::While, Localizer::After] {
        let w = window_for(&g, l, &anchor, None).expect("anchor occurs");
        println!("{l:?} smiling: frames {:?}", w.bounds());
    }
}
