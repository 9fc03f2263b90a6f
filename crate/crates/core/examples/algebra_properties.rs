// Randomized checks of the coercion algebra: merged lists stay duplicate
// free and keep the leftmost label, dropping yields a subsequence, and
// checks a constant already passes can be removed without changing the
// outcome.

use lambda_h::harness::check_algebra;

pub fn run_example() -> Result<usize, Box<dyn std::error::Error>> {
    let report = check_algebra(2024, 2_000, 200);
    println!(
        "lists={} coercions={} heedful pairs={} eidetic pairs={}",
        report.lists, report.coercions, report.heedful_pairs, report.eidetic_pairs
    );
    println!("violations: {}", report.violations.len());
    for v in report.violations.iter().take(5) {
        println!("  {v}");
    }
    println!("associativity counterexamples: {}", report.associativity_counterexamples.len());
    Ok(report.violations.len())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
