// Two knobs of the machine: which set member a heedful check looks at
// first, and which implications between refinements the eidetic merge
// may use to drop checks.

use lambda_h::semantics::{AxiomOracle, ChoosePolicy, Machine, Oracle};
use lambda_h::surface::parse;
use lambda_h::syntax::Mode;

const AXIOMS: &str = "
-- positive numbers are nonzero and natural
{x:Int|x > 0} ==> {x:Int|x >= 0}
{x:Int|x > 0} ==> {x:Int|x <> 0}
";

pub fn run_example() -> Result<(String, String, usize, usize), Box<dyn std::error::Error>> {
    let triple = parse(include_str!("triple.lh"))?;
    let lo = Machine::new(Mode::Heedful).eval(&triple, 1_000).outcome.to_string();
    let hi = Machine::new(Mode::Heedful)
        .with_choose(ChoosePolicy::LexMax)
        .eval(&triple, 1_000)
        .outcome
        .to_string();
    println!("heedful, lex-min: {lo}");
    println!("heedful, lex-max: {hi}");

    // With the axioms, the later NZ and NAT checks are implied by POS and
    // are dropped from the merged list.
    let e = parse(
        "<{x:Int|x >= 0} => {x:Int|x <> 0} @ l3> \
         (<{x:Int|x > 0} => {x:Int|x >= 0} @ l2> \
         (<{x:Int|true} => {x:Int|x > 0} @ l1> 5))",
    )?;
    let plain = Machine::new(Mode::Eidetic);
    let smart = Machine::new(Mode::Eidetic).with_oracle(Oracle::Axioms(AxiomOracle::parse(AXIOMS)?));
    let a = plain.eval(&e, 1_000);
    let b = smart.eval(&e, 1_000);
    println!("alpha-eq oracle: {} in {} steps", a.outcome, a.steps);
    println!("axiom oracle:    {} in {} steps", b.outcome, b.steps);
    Ok((lo, hi, a.steps, b.steps))
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
