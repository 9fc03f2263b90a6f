//! Per-step invariants over an evaluation trace.

use serde::Serialize;

use crate::semantics::{merge, Machine, StepOutcome, Trace};
use crate::syntax::{alpha_eq, types_of, Annotation, Mode, Term, TermKind};
use crate::typecheck::{Checker, Context};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub mode: Mode,
    /// Index into `trace.terms`.
    pub step: usize,
    pub invariant: &'static str,
    pub detail: String,
}

/// Checks preservation at the initial type, that no step introduces types,
/// that steps are deterministic, and, outside classic mode, that no
/// evaluation happens underneath a mergeable pair of casts. Eidetic traces
/// additionally keep every refinement list duplicate free.
pub fn check_trace(machine: &Machine, trace: &Trace) -> Vec<Finding> {
    let mode = machine.mode;
    let mut out = Vec::new();
    let mut note = |step: usize, invariant: &'static str, detail: String| {
        out.push(Finding { mode, step, invariant, detail });
    };
    if trace.terms.len() != trace.rules.len() + 1 {
        note(0, "shape", format!("{} terms for {} rules", trace.terms.len(), trace.rules.len()));
        return out;
    }

    let checker = Checker::for_machine(machine);
    let ctx = Context::new();
    let expected = match checker.type_of(&ctx, &trace.terms[0]) {
        Ok(Some(t)) => Some(t),
        Ok(None) => None,
        Err(err) => {
            note(0, "preservation", format!("input is ill-typed: {err}"));
            return out;
        }
    };

    let mut prev_types = types_of(&trace.terms[0]);
    for (i, e) in trace.terms.iter().enumerate() {
        if let Some(t) = &expected {
            if let Err(err) = checker.check(&ctx, e, t) {
                note(i, "preservation", err.to_string());
            }
        }
        if i > 0 {
            let types = types_of(e);
            if !types.is_subset(&prev_types) {
                let fresh: Vec<String> =
                    types.difference(&prev_types).iter().map(|t| t.to_string()).collect();
                note(i, "types-monotone", format!("new types {}", fresh.join(", ")));
            }
            prev_types = types;
        }
        if mode == Mode::Eidetic {
            if let Some(detail) = duplicate_list(e) {
                note(i, "list-hygiene", detail);
            }
        }
        let Some(rule) = trace.rules.get(i) else { continue };
        match machine.step(e) {
            StepOutcome::Stepped(next, r2) => {
                if r2 != *rule || !alpha_eq(&next, &trace.terms[i + 1]) {
                    note(i, "determinism", format!("re-stepping gave {r2}"));
                }
            }
            other => note(i, "determinism", format!("re-stepping gave {other:?}")),
        }
        if mode != Mode::Classic {
            if let Some(detail) = merge_skipped(machine, e, &rule.frames) {
                note(i, "merge-priority", detail);
            }
        }
    }
    out
}

fn duplicate_list(e: &Term) -> Option<String> {
    let mut found = None;
    visit(e, &mut |t| {
        let lists = match t.kind() {
            TermKind::Cast { ann: Annotation::Coerce(c), .. } => c.lists(),
            TermKind::Stack { pending, .. } => vec![pending],
            _ => Vec::new(),
        };
        for r in lists {
            if !r.is_duplicate_free() && found.is_none() {
                found = Some(format!("duplicate entries in {}", crate::surface::print_list(r)));
            }
        }
    });
    found
}

fn visit(e: &Term, f: &mut impl FnMut(&Term)) {
    f(e);
    for c in e.children() {
        visit(c, f);
    }
}

/// Follows the congruence frames of a step and reports a cast whose subject
/// could have been merged with it but was evaluated instead.
fn merge_skipped(machine: &Machine, e: &Term, frames: &[&'static str]) -> Option<String> {
    let mut cur = e;
    for frame in frames {
        let next = match (*frame, cur.kind()) {
            ("E-CastInnerE", TermKind::Cast { ann, tgt, subject, .. }) => {
                if let TermKind::Cast { src: t0, ann: a0, tgt: t1, .. } = subject.kind() {
                    if merge(machine.mode, &machine.oracle, t0, a0, t1, ann, tgt).is_some() {
                        return Some(format!("stepped inside mergeable casts: {cur}"));
                    }
                }
                subject
            }
            ("E-AppL", TermKind::App(f, _)) => f,
            ("E-AppR", TermKind::App(_, a)) => a,
            ("E-OpInner", TermKind::Op { args, .. }) => {
                args.iter().find(|a| !machine.is_value(a))?
            }
            ("E-CondInner", TermKind::Cond { guard, .. }) => guard,
            ("E-CheckInner", TermKind::Check { current, .. }) => current,
            ("E-StackInner", TermKind::Stack { current, .. }) => current,
            _ => return Some(format!("frame {frame} does not match {cur}")),
        };
        cur = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> (<{x:Int|true} => {x:Int|x >= 0} @ l1> -1))";

    #[test]
    fn running_example_traces_are_clean() {
        let e = parse(E3).unwrap();
        for mode in Mode::ALL {
            let m = Machine::new(mode);
            let trace = m.trace(&e, 1_000);
            assert_eq!(check_trace(&m, &trace), vec![], "{mode:?}");
        }
        let m = Machine::new(Mode::Eidetic);
        let heads: Vec<String> = m.trace(&e, 1_000).rules.iter().take(3).map(|r| r.to_string()).collect();
        assert_eq!(heads, ["E-Coerce", "E-CastInnerE/E-Coerce", "E-CastMergeE"]);
    }

    #[test]
    fn corrupted_trace_is_caught() {
        let e = parse(E3).unwrap();
        let m = Machine::new(Mode::Classic);
        let mut trace = m.trace(&e, 1_000);
        trace.terms[2] = Term::bool(true);
        let findings = check_trace(&m, &trace);
        assert!(findings.iter().any(|f| f.step == 2 && f.invariant == "preservation"));
        assert!(findings.iter().any(|f| f.invariant == "determinism"));
    }

    #[test]
    fn skipped_merge_is_caught() {
        let e = parse(E3).unwrap();
        let m = Machine::new(Mode::Forgetful);
        let trace = m.trace(&e, 1_000);
        let frames = vec!["E-CastInnerE"];
        assert!(merge_skipped(&m, &trace.terms[0], &frames).is_some());
    }
}
