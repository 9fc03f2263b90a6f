// Runtime-only syntax: annotated casts, active checks and coercion
// stacks can be written down, parsed back, and stepped one rule at a time.

use lambda_h::semantics::{Machine, StepOutcome};
use lambda_h::surface::{parse_runtime, print};
use lambda_h::syntax::{alpha_eq, Mode};
use lambda_h::typecheck::Checker;

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let src = "<{x:Int|true} =[{x:Int|x >= 0}^l1, {x:Int|x <> 0}^l3]=> {x:Int|x <> 0} @ *> 4";
    let e = parse_runtime(src)?;
    let m = Machine::new(Mode::Eidetic);
    println!("type: {}", Checker::for_machine(&m).type_of_closed(&e)?);

    let mut cur = e;
    let mut steps = 0;
    loop {
        match m.step(&cur) {
            StepOutcome::Stepped(next, rule) => {
                let printed = print(&next);
                // Every intermediate term prints to something that parses back.
                assert!(alpha_eq(&parse_runtime(&printed)?, &next));
                println!("{rule:<28} {printed}");
                cur = next;
                steps += 1;
            }
            other => {
                println!("{other:?}");
                break;
            }
        }
    }
    Ok(steps)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
