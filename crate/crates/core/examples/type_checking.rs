// Type-checking source files, and what a rejected program reports.

use lambda_h::surface::{parse, parse_file};
use lambda_h::typecheck::{check_source, check_source_file, TypeErrorKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let file = parse_file(include_str!("fact.lh"))?;
    println!("fact.lh : {}", check_source_file(&file)?);

    // `div` wants a nonzero divisor, so a raw integer is rejected...
    let bad = parse("\\x:{x:Int|true}. 100 div x")?;
    let err = check_source(&bad).unwrap_err();
    println!("rejected: {err}");
    assert_eq!(err.kind, TypeErrorKind::NotSimilar);

    // ...and a cast into the nonzero type fixes it.
    let good = parse("\\x:{x:Int|true}. 100 div <{x:Int|true} => {x:Int|x <> 0} @ ldiv> x")?;
    println!("accepted: {}", check_source(&good)?);

    // Constants are not given refinement types in source programs.
    let raw = parse("(\\x:{x:Int|x >= 0}. x) 3")?;
    println!("rejected: {}", check_source(&raw).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
