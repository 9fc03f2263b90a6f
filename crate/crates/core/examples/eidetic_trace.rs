// Step-by-step eidetic evaluation. Every cast is first translated into a
// coercion, then adjacent coercions are merged into one refinement list
// that is checked left to right.

use lambda_h::semantics::Machine;
use lambda_h::surface::{parse, print};
use lambda_h::syntax::Mode;

pub fn run_example() -> Result<Vec<String>, Box<dyn std::error::Error>> {
    let e = parse(
        "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> \
         (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> \
         (<{x:Int|true} => {x:Int|x >= 0} @ l1> -1))",
    )?;
    let trace = Machine::new(Mode::Eidetic).trace(&e, 1_000);
    println!("   0  {}", print(&trace.terms[0]));
    for (i, (rule, t)) in trace.rules.iter().zip(&trace.terms[1..]).enumerate() {
        println!("{:>4}  {rule}\n      {}", i + 1, print(t));
    }
    println!("=> {}", trace.outcome);
    Ok(trace.rules.iter().map(|r| r.to_string()).collect())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
