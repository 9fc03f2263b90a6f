// Accumulator-passing factorial, metered. Classic evaluation keeps one
// pending cast per recursive call; eidetic evaluation merges them so the
// count stays flat.

use lambda_h::harness::corpus::fact;
use lambda_h::metering::eval_metered;
use lambda_h::semantics::Machine;
use lambda_h::syntax::Mode;

pub fn run_example() -> Result<Vec<(Mode, i64, usize)>, Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    println!("{:<10} {:>6} {:>8} {:>8} {:>6}", "mode", "n", "steps", "pending", "chain");
    for mode in Mode::ALL {
        for n in [10, 100, 1000] {
            let m = eval_metered(&Machine::new(mode), &fact(n), 1_000_000, false);
            println!("{:<10} {n:>6} {:>8} {:>8} {:>6}", mode.name(), m.steps, m.max.pending, m.max.chain);
            rows.push((mode, n, m.max.pending));
        }
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() {
    // Deep classic terms need more than the default main-thread stack.
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(|| run_example().unwrap())
        .unwrap()
        .join()
        .unwrap();
}
