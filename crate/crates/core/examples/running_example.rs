// Three casts on `-1`, evaluated in each of the four modes.
//
// ```text
// cargo run --example running_example
// ```

use lambda_h::semantics::Machine;
use lambda_h::surface::parse;
use lambda_h::syntax::Mode;
use lambda_h::typecheck::check_source;

const PROGRAM: &str = "
<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3>
  (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2>
    (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))";

pub fn run_example() -> Result<Vec<String>, Box<dyn std::error::Error>> {
    let e = parse(PROGRAM)?;
    let ty = check_source(&e)?;
    println!("type: {ty}");

    let mut results = Vec::new();
    for mode in Mode::ALL {
        let ev = Machine::new(mode).eval(&e, 1_000);
        println!("{:<10} {:<10} after {} steps", mode.name(), ev.outcome.to_string(), ev.steps);
        results.push(ev.outcome.to_string());
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
