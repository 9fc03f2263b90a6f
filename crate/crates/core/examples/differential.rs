// Runs programs in all four modes and checks how their outcomes relate:
// forgetful keeps classic values, heedful blames exactly when classic
// does, and eidetic agrees with classic down to the label.

use lambda_h::harness::{diff_modes, gen_source, run_fuzz, FuzzConfig};
use lambda_h::surface::{parse, print};

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let e = parse(include_str!("triple.lh"))?;
    let report = diff_modes(&e, 10_000);
    for run in &report.runs {
        println!("{:<10} {}", run.mode.name(), run.outcome);
    }
    for (mode, verdict) in report.verdicts() {
        println!("{:<10} {verdict:?}", mode.name());
    }

    println!("\na generated program:\n  {}", print(&gen_source(42, 15)));

    let fuzz = run_fuzz(&FuzzConfig { count: 200, seed: 7, ..FuzzConfig::default() });
    println!("\n{:#?}", fuzz.summary);
    Ok(fuzz.problems().count())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
