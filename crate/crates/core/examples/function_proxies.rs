// Casts on functions become wrappers. Classic evaluation stacks one
// wrapper per cast; the other modes merge them into a single proxy.

use lambda_h::metering::eval_metered;
use lambda_h::semantics::Machine;
use lambda_h::surface::parse;
use lambda_h::syntax::Mode;

const PROGRAM: &str = "
(<{x:Int|x >= 0} -> {x:Int|true} => {x:Int|true} -> {x:Int|x >= 0} @ l3>
  (<{x:Int|true} -> {x:Int|x >= 0} => {x:Int|x >= 0} -> {x:Int|true} @ l2>
    (<{x:Int|x >= 0} -> {x:Int|true} => {x:Int|true} -> {x:Int|x >= 0} @ l1>
      (\\x:{x:Int|x >= 0}. x - 1))))
  (<{x:Int|true} => {x:Int|true} @ l0> 0)";

/// Wrappers around the function at the moment it is first applied.
pub fn run_example() -> Result<Vec<(Mode, String, usize)>, Box<dyn std::error::Error>> {
    let e = parse(PROGRAM)?;
    let mut out = Vec::new();
    for mode in Mode::ALL {
        let m = eval_metered(&Machine::new(mode), &e, 1_000, true);
        let first_call = m.series.iter().position(|r| r.rule.ends_with("E-Unwrap") || r.rule.ends_with("E-Beta"));
        let wrappers = match first_call {
            Some(0) | None => lambda_h::metering::space_stats(&e).proxy_wrap,
            Some(i) => m.series[i - 1].stats.proxy_wrap,
        };
        println!("{:<10} {:<10} wrappers at first call: {wrappers}", mode.name(), m.outcome.to_string());
        out.push((mode, m.outcome.to_string(), wrappers));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
