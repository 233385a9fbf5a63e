//! Parse question programs, inspect their structure and type, and print them
//! back in canonical form.

use qdag::program::classify;
use qdag::{parse_program, render_program, Vocabulary};

fn main() {
    let vocab = Vocabulary::builtin();
    let inputs = [
        "first(objects(objExists(person), relationExists(touching)))",
        "  after( objExists(Phone),actionExists(looking in the mirror) )",
        "xor(interactionExists(objExists(person), relationExists(holding), objExists(book)), objExists(dish))",
        "objects(objExists(person))",
        "objExists(unicorn)",
    ];
    for text in inputs {
        match parse_program(text, &vocab) {
            Ok(p) => {
                let t = classify(&p);
                println!(
                    "{}\n  type {}{} depth {} sub-programs {}",
                    render_program(&p),
                    t.kind,
                    if t.banned { " (not scored)" } else { "" },
                    p.depth(),
                    p.distinct_subprograms().len() - 1
                );
            }
            Err(e) => println!("{text}\n  error: {e}"),
        }
    }
}
