//! The hand-written example programs shipped in `examples/`.

use crate::surface::{parse, parse_file, SourceFile};
use crate::syntax::Term;

pub const TRIPLE_SRC: &str = include_str!("../../examples/triple.lh");
pub const FACT_SRC: &str = include_str!("../../examples/fact.lh");
pub const EVENODD_SRC: &str = include_str!("../../examples/evenodd.lh");

fn file(src: &str) -> SourceFile {
    parse_file(src).expect("bundled example parses")
}

/// Three casts in a row on `-1`.
pub fn triple() -> Term {
    file(TRIPLE_SRC).to_term()
}

/// Accumulator-passing factorial applied to `n` and `1`.
pub fn fact_file(n: i64) -> SourceFile {
    let mut f = file(FACT_SRC);
    f.main = parse(&format!(
        "fact (<{{x:Int|true}} => {{x:Int|x >= 0}} @ ln> {n}) (<{{x:Int|true}} => {{x:Int|x >= 0}} @ lacc> 1)"
    ))
    .expect("driver parses");
    f
}

pub fn fact(n: i64) -> Term {
    fact_file(n).to_term()
}

/// `even n`, where the call to the inlined `odd` is wrapped in a cast.
pub fn evenodd_file(n: i64) -> SourceFile {
    let mut f = file(EVENODD_SRC);
    f.main = parse(&format!("even {n}")).expect("driver parses");
    f
}

pub fn evenodd(n: i64) -> Term {
    evenodd_file(n).to_term()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metering::eval_metered;
    use crate::semantics::Machine;
    use crate::syntax::{Const, Mode};
    use crate::typecheck::check_source_file;

    #[test]
    fn bundled_files_typecheck() {
        for src in [TRIPLE_SRC, FACT_SRC, EVENODD_SRC] {
            check_source_file(&file(src)).unwrap();
        }
    }

    #[test]
    fn triple_outcomes() {
        let e = triple();
        let got: Vec<String> =
            Mode::ALL.iter().map(|&m| Machine::new(m).eval(&e, 1_000).outcome.to_string()).collect();
        assert_eq!(got, ["blame l1", "-1", "blame l3", "blame l1"]);
    }

    #[test]
    fn fact_agrees_across_modes() {
        for n in [0, 1, 5, 10] {
            let expected: i64 = (1..=n).product();
            for m in Mode::ALL {
                let out = Machine::new(m).eval(&fact(n), 100_000).outcome;
                assert_eq!(out.constant(), Some(Const::Int(expected)), "{m:?} n={n}: {out}");
            }
        }
    }

    #[test]
    fn evenodd_agrees_across_modes() {
        for n in [0, 1, 4, 7] {
            for m in Mode::ALL {
                let out = Machine::new(m).eval(&evenodd(n), 100_000).outcome;
                assert_eq!(out.constant(), Some(Const::Bool(n % 2 == 0)), "{m:?} n={n}: {out}");
            }
        }
    }

    #[test]
    fn fact_space_shapes() {
        let pend = |m: Mode, n: i64| eval_metered(&Machine::new(m), &fact(n), 1_000_000, false).max.pending;
        let c: Vec<usize> = [10, 100].iter().map(|&n| pend(Mode::Classic, n)).collect();
        let e: Vec<usize> = [10, 100].iter().map(|&n| pend(Mode::Eidetic, n)).collect();
        assert!(c[1] >= 5 * c[0], "classic {c:?}");
        assert_eq!(e[0], e[1], "eidetic {e:?}");
    }
}
