//! Running one program in every mode and comparing the outcomes.

use serde::Serialize;

use crate::semantics::{Machine, Outcome};
use crate::syntax::{Mode, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, Verdict::Skipped(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeRun {
    pub mode: Mode,
    pub outcome: Outcome,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffReport {
    pub runs: Vec<ModeRun>,
    pub forgetful: Verdict,
    pub heedful: Verdict,
    pub eidetic: Verdict,
}

impl DiffReport {
    pub fn outcome(&self, mode: Mode) -> &Outcome {
        &self.runs.iter().find(|r| r.mode == mode).expect("every mode is run").outcome
    }

    pub fn verdicts(&self) -> [(Mode, &Verdict); 3] {
        [(Mode::Forgetful, &self.forgetful), (Mode::Heedful, &self.heedful), (Mode::Eidetic, &self.eidetic)]
    }

    pub fn failed(&self) -> bool {
        self.verdicts().iter().any(|(_, v)| v.is_fail())
    }

    pub fn skipped(&self) -> bool {
        self.verdicts().iter().any(|(_, v)| v.is_skipped())
    }
}

fn same_constant(a: &Outcome, b: &Outcome) -> bool {
    matches!((a.constant(), b.constant()), (Some(x), Some(y)) if x == y)
}

/// Runs `e` under the default machine of each mode.
pub fn diff_modes(e: &Term, budget: usize) -> DiffReport {
    let runs: Vec<ModeRun> = Mode::ALL
        .iter()
        .map(|&mode| {
            let ev = Machine::new(mode).eval(e, budget);
            ModeRun { mode, outcome: ev.outcome, steps: ev.steps }
        })
        .collect();
    judge(runs)
}

/// Applies the three mode-relationship checks to already computed runs.
pub fn judge(runs: Vec<ModeRun>) -> DiffReport {
    let find = |m: Mode| &runs.iter().find(|r| r.mode == m).expect("every mode is run").outcome;
    let c = find(Mode::Classic);
    let budget_hit: Vec<&str> = runs
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::BudgetExceeded))
        .map(|r| r.mode.name())
        .collect();

    let verdict = |m: Mode, ok: bool, what: &str| -> Verdict {
        let o = find(m);
        if !budget_hit.is_empty() {
            return Verdict::Skipped(format!("budget exceeded in {}", budget_hit.join(", ")));
        }
        if let Outcome::Stuck(_) | Outcome::Fault(_) = c {
            return Verdict::Fail(format!("classic: {c}"));
        }
        if let Outcome::Stuck(_) | Outcome::Fault(_) = o {
            return Verdict::Fail(format!("{}: {o}", m.name()));
        }
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail(format!("{what}: classic gave {c}, {} gave {o}", m.name()))
        }
    };

    let f = find(Mode::Forgetful);
    let forgetful_ok = !c.is_value() || same_constant(c, f);
    let h = find(Mode::Heedful);
    let heedful_ok = (c.blame_label().is_some() == h.blame_label().is_some())
        && (!c.is_value() || same_constant(c, h));
    let e = find(Mode::Eidetic);
    let eidetic_ok = match (c, e) {
        (Outcome::Value(_), Outcome::Value(_)) => same_constant(c, e),
        (Outcome::Blamed(a), Outcome::Blamed(b)) => a == b,
        _ => false,
    };

    let forgetful = verdict(Mode::Forgetful, forgetful_ok, "classic value not preserved");
    let heedful = verdict(Mode::Heedful, heedful_ok, "outcomes do not coterminate");
    let eidetic = verdict(Mode::Eidetic, eidetic_ok, "outcomes differ");
    DiffReport { runs, forgetful, heedful, eidetic }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;
    use crate::syntax::{Const, Label};

    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> (<{x:Int|true} => {x:Int|x >= 0} @ l1> -1))";

    #[test]
    fn running_example_passes_every_check() {
        let r = diff_modes(&parse(E3).unwrap(), 10_000);
        assert_eq!(r.forgetful, Verdict::Pass);
        assert_eq!(r.heedful, Verdict::Pass);
        assert_eq!(r.eidetic, Verdict::Pass);
        assert_eq!(r.outcome(Mode::Classic).blame_label(), Some(&Label::named("l1")));
        assert_eq!(r.outcome(Mode::Heedful).blame_label(), Some(&Label::named("l3")));
    }

    #[test]
    fn passing_cast_is_a_value_everywhere() {
        let r = diff_modes(&parse("<{x:Int|true} => {x:Int|x >= 0} @ l1> 5").unwrap(), 10_000);
        assert!(!r.failed());
        for run in &r.runs {
            assert_eq!(run.outcome.constant(), Some(Const::Int(5)));
        }
    }

    #[test]
    fn mismatches_are_reported() {
        let v = |m, o| ModeRun { mode: m, outcome: o, steps: 0 };
        let blame = |l: &str| Outcome::Blamed(Label::named(l));
        let r = judge(vec![
            v(Mode::Classic, blame("l1")),
            v(Mode::Forgetful, blame("l2")),
            v(Mode::Heedful, Outcome::Value(crate::syntax::Term::int(1))),
            v(Mode::Eidetic, blame("l2")),
        ]);
        assert_eq!(r.forgetful, Verdict::Pass);
        assert!(r.heedful.is_fail());
        assert!(r.eidetic.is_fail());

        let r = judge(vec![
            v(Mode::Classic, blame("l1")),
            v(Mode::Forgetful, Outcome::BudgetExceeded),
            v(Mode::Heedful, blame("l1")),
            v(Mode::Eidetic, blame("l1")),
        ]);
        assert!(r.skipped() && !r.failed());
    }
}
