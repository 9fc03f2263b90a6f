//! The mode-indexed small-step machine.
//!
//! A [`Machine`] fixes a [`Mode`], an implication [`Oracle`] and a heedful
//! [`ChoosePolicy`]. [`Machine::step`] finds the unique redex (leftmost,
//! outermost, call-by-value) and reports the rule it used.

pub mod algebra;
pub mod ops;
pub mod oracle;

use std::fmt;

use crate::syntax::{
    instantiate, subst, Annotation, Coercion, Const, Label, Mode, Status, Term, TermKind, Type,
    TypeKind,
};

pub use algebra::{
    coerce, coercion_merge, list_merge, merge, ref_drop, split_annotation, status_join,
};
pub use ops::{apply_op, OpError};
pub use oracle::{AxiomError, AxiomOracle, ChoosePolicy, Oracle};

/// Name of a reduction rule, with the congruence frames that led to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub frames: Vec<&'static str>,
    pub base: &'static str,
}

impl Rule {
    fn new(frames: Vec<&'static str>, base: &'static str) -> Rule {
        Rule { frames, base }
    }

    /// Outermost congruence frame, or the base rule when there is none.
    pub fn head(&self) -> &'static str {
        self.frames.first().copied().unwrap_or(self.base)
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }
}

impl fmt::Display for Rule {
    /// Long congruence paths are elided in the middle.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.frames.len();
        if n <= 3 {
            for fr in &self.frames {
                write!(f, "{fr}/")?;
            }
        } else {
            write!(f, "{}/{}/…/{}/", self.frames[0], self.frames[1], self.frames[n - 1])?;
        }
        f.write_str(self.base)
    }
}

#[derive(Clone, Debug)]
pub enum StepOutcome {
    Stepped(Term, Rule),
    IsValue,
    IsBlame(Label),
    /// No rule applies; unreachable for well-typed closed terms.
    Stuck(String),
    /// Integer overflow in a primitive.
    Fault(String),
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Value(Term),
    Blamed(Label),
    BudgetExceeded,
    Stuck(String),
    Fault(String),
}

impl Outcome {
    pub fn is_value(&self) -> bool {
        matches!(self, Outcome::Value(_))
    }

    pub fn blame_label(&self) -> Option<&Label> {
        match self {
            Outcome::Blamed(l) => Some(l),
            _ => None,
        }
    }

    pub fn constant(&self) -> Option<Const> {
        match self {
            Outcome::Value(v) => v.as_const(),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "value",
            Outcome::Blamed(_) => "blame",
            Outcome::BudgetExceeded => "budget_exceeded",
            Outcome::Stuck(_) => "stuck",
            Outcome::Fault(_) => "fault",
        }
    }

    /// Same kind, same label, and for values alpha-equivalent terms.
    pub fn same_as(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Value(a), Outcome::Value(b)) => crate::syntax::alpha_eq(a, b),
            (Outcome::Blamed(a), Outcome::Blamed(b)) => a == b,
            (Outcome::BudgetExceeded, Outcome::BudgetExceeded) => true,
            (Outcome::Stuck(_), Outcome::Stuck(_)) => true,
            (Outcome::Fault(_), Outcome::Fault(_)) => true,
            _ => false,
        }
    }
}

/// `{"kind": ..., "value" | "label" | "message": ...}`.
impl serde::Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("kind", self.kind())?;
        match self {
            Outcome::Value(v) => match v.as_const() {
                Some(k) => m.serialize_entry("value", &k)?,
                None => m.serialize_entry("value", &v.to_string())?,
            },
            Outcome::Blamed(l) => m.serialize_entry("label", l)?,
            Outcome::Stuck(why) | Outcome::Fault(why) => m.serialize_entry("message", why)?,
            Outcome::BudgetExceeded => {}
        }
        m.end()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(v) => write!(f, "{v}"),
            Outcome::Blamed(l) => write!(f, "blame {l}"),
            Outcome::BudgetExceeded => f.write_str("budget exceeded"),
            Outcome::Stuck(why) => write!(f, "stuck: {why}"),
            Outcome::Fault(why) => write!(f, "fault: {why}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub outcome: Outcome,
    pub steps: usize,
}

/// A full run: `terms[0]` is the input and `rules[i]` takes `terms[i]` to
/// `terms[i + 1]`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub terms: Vec<Term>,
    pub rules: Vec<Rule>,
    pub outcome: Outcome,
}

enum Halt {
    Stuck(String),
    Fault(String),
}

type Reduced = Result<(Term, &'static str), Halt>;

fn stuck<T>(why: impl Into<String>) -> Result<T, Halt> {
    Err(Halt::Stuck(why.into()))
}

#[derive(Clone, Debug, Default)]
pub struct Machine {
    pub mode: Mode,
    pub oracle: Oracle,
    pub choose: ChoosePolicy,
}

impl Machine {
    pub fn new(mode: Mode) -> Machine {
        Machine { mode, ..Machine::default() }
    }

    pub fn with_oracle(mut self, oracle: Oracle) -> Machine {
        self.oracle = oracle;
        self
    }

    pub fn with_choose(mut self, choose: ChoosePolicy) -> Machine {
        self.choose = choose;
        self
    }

    pub fn implies(&self, t1: &Type, t2: &Type) -> bool {
        self.oracle.implies(t1, t2)
    }

    /// `val_m e`.
    pub fn is_value(&self, e: &Term) -> bool {
        match e.kind() {
            TermKind::Const(_) | TermKind::Abs { .. } => true,
            TermKind::Cast { src, ann, tgt, label, subject } => {
                if src.arrow().is_none() || tgt.arrow().is_none() {
                    return false;
                }
                let over_abs = matches!(subject.kind(), TermKind::Abs { .. });
                match (self.mode, ann) {
                    (Mode::Classic, Annotation::Empty) => self.is_value(subject),
                    (Mode::Forgetful, Annotation::Empty) => over_abs,
                    (Mode::Heedful, Annotation::Types(_)) => over_abs,
                    (Mode::Eidetic, Annotation::Coerce(Coercion::Fun(..))) => {
                        over_abs && *label == Label::Empty
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    /// `result_m e`: a value or blame.
    pub fn is_result(&self, e: &Term) -> bool {
        e.as_blame().is_some() || self.is_value(e)
    }

    pub fn step(&self, e: &Term) -> StepOutcome {
        if let Some(l) = e.as_blame() {
            return StepOutcome::IsBlame(l.clone());
        }
        if self.is_value(e) {
            return StepOutcome::IsValue;
        }
        let mut frames = Vec::new();
        match self.reduce(e, &mut frames) {
            Ok((next, base)) => StepOutcome::Stepped(next, Rule::new(frames, base)),
            Err(Halt::Stuck(why)) => StepOutcome::Stuck(with_path(&frames, why)),
            Err(Halt::Fault(why)) => StepOutcome::Fault(with_path(&frames, why)),
        }
    }

    pub fn eval(&self, e: &Term, budget: usize) -> Evaluation {
        self.eval_with(e, budget, |_, _, _| {})
    }

    /// Runs at most `budget` steps, calling `on_step(i, rule, term)` after
    /// the `i`-th step (1-based) with the term it produced.
    pub fn eval_with(
        &self,
        e: &Term,
        budget: usize,
        mut on_step: impl FnMut(usize, &Rule, &Term),
    ) -> Evaluation {
        let mut cur = e.clone();
        let mut steps = 0;
        loop {
            if let Some(l) = cur.as_blame() {
                return Evaluation { outcome: Outcome::Blamed(l.clone()), steps };
            }
            if self.is_value(&cur) {
                return Evaluation { outcome: Outcome::Value(cur), steps };
            }
            if steps == budget {
                let outcome = match self.step(&cur) {
                    StepOutcome::Stuck(why) => Outcome::Stuck(why),
                    StepOutcome::Fault(why) => Outcome::Fault(why),
                    _ => Outcome::BudgetExceeded,
                };
                return Evaluation { outcome, steps };
            }
            let mut frames = Vec::new();
            match self.step_in_place(&mut cur, &mut frames) {
                Ok(base) => {
                    steps += 1;
                    on_step(steps, &Rule::new(frames, base), &cur);
                }
                Err(Halt::Stuck(why)) => {
                    return Evaluation { outcome: Outcome::Stuck(with_path(&frames, why)), steps };
                }
                Err(Halt::Fault(why)) => {
                    return Evaluation { outcome: Outcome::Fault(with_path(&frames, why)), steps };
                }
            }
        }
    }

    /// Same reduction as [`Machine::step`], but walks congruence positions
    /// in place while `e` holds the only reference to each node, so long
    /// evaluation contexts are not rebuilt on every step.
    fn step_in_place(&self, e: &mut Term, frames: &mut Vec<&'static str>) -> Result<&'static str, Halt> {
        if let Some((slot, frame)) = self.congruence(e) {
            if let Some(node) = e.get_mut() {
                frames.push(frame);
                let child = match node {
                    TermKind::App(f, a) => if slot == 0 { f } else { a },
                    TermKind::Op { args, .. } => &mut args[slot],
                    TermKind::Cast { subject, .. } => subject,
                    TermKind::Cond { guard, .. } => guard,
                    TermKind::Check { current, .. } | TermKind::Stack { current, .. } => current,
                    _ => unreachable!("congruence only descends into these forms"),
                };
                return self.step_in_place(child, frames);
            }
        }
        let (next, base) = self.reduce(e, frames)?;
        *e = next;
        Ok(base)
    }

    /// The child `reduce` would step inside, with its frame name. `None`
    /// when a rule applies at `e` itself.
    fn congruence(&self, e: &Term) -> Option<(usize, &'static str)> {
        let inner = |t: &Term| t.as_blame().is_none() && !self.is_value(t);
        match e.kind() {
            TermKind::App(f, a) => {
                if f.as_blame().is_some() {
                    None
                } else if !self.is_value(f) {
                    Some((0, "E-AppL"))
                } else if inner(a) {
                    Some((1, "E-AppR"))
                } else {
                    None
                }
            }
            TermKind::Op { args, .. } => {
                let i = args.iter().position(|a| a.as_blame().is_some() || !self.is_value(a))?;
                inner(&args[i]).then_some((i, "E-OpInner"))
            }
            TermKind::Cond { guard, .. } => inner(guard).then_some((0, "E-CondInner")),
            TermKind::Check { current, .. } => inner(current).then_some((0, "E-CheckInner")),
            TermKind::Stack { current, .. } => inner(current).then_some((0, "E-StackInner")),
            TermKind::Cast { ann, tgt, subject, .. } => {
                match (self.mode, ann) {
                    (Mode::Heedful | Mode::Eidetic, Annotation::Empty) => return None,
                    (_, Annotation::Empty)
                    | (Mode::Heedful, Annotation::Types(_))
                    | (Mode::Eidetic, Annotation::Coerce(_)) => {}
                    _ => return None,
                }
                if self.mode != Mode::Classic {
                    if let TermKind::Cast { src: t0, ann: a0, tgt: t1, .. } = subject.kind() {
                        if merge(self.mode, &self.oracle, t0, a0, t1, ann, tgt).is_some() {
                            return None;
                        }
                    }
                }
                let frame = if self.mode == Mode::Classic { "E-CastInnerC" } else { "E-CastInnerE" };
                inner(subject).then_some((0, frame))
            }
            _ => None,
        }
    }

    pub fn trace(&self, e: &Term, budget: usize) -> Trace {
        let mut terms = vec![e.clone()];
        let mut rules = Vec::new();
        let ev = self.eval_with(e, budget, |_, r, t| {
            rules.push(r.clone());
            terms.push(t.clone());
        });
        Trace { terms, rules, outcome: ev.outcome }
    }

    /// Reduces a term that is neither a value nor blame.
    fn reduce(&self, e: &Term, frames: &mut Vec<&'static str>) -> Reduced {
        match e.kind() {
            TermKind::Var(x) => stuck(format!("free variable `{x}`")),
            TermKind::Const(_) | TermKind::Abs { .. } | TermKind::Blame(_) => {
                stuck("no rule applies to a result")
            }
            TermKind::Fix { binder, body, .. } => Ok((subst(body, binder, e), "E-Fix")),
            TermKind::App(f, a) => self.reduce_app(f, a, frames),
            TermKind::Op { op, args } => {
                for (i, arg) in args.iter().enumerate() {
                    if let Some(l) = arg.as_blame() {
                        return Ok((Term::blame(l.clone()), "E-OpRaise"));
                    }
                    if !self.is_value(arg) {
                        frames.push("E-OpInner");
                        let (arg2, rule) = self.reduce(arg, frames)?;
                        let mut args2 = args.clone();
                        args2[i] = arg2;
                        return Ok((Term::op(*op, args2), rule));
                    }
                }
                let ks: Option<Vec<Const>> = args.iter().map(Term::as_const).collect();
                let Some(ks) = ks else {
                    return stuck(format!("`{op}` applied to a non-constant value"));
                };
                match apply_op(*op, &ks) {
                    Ok(k) => Ok((Term::constant(k), "E-Op")),
                    Err(err @ OpError::Undefined { .. }) => stuck(err.to_string()),
                    Err(err @ OpError::Overflow { .. }) => Err(Halt::Fault(err.to_string())),
                }
            }
            TermKind::Cond { guard, then_branch, else_branch } => {
                if let Some(l) = guard.as_blame() {
                    return Ok((Term::blame(l.clone()), "E-CondRaise"));
                }
                match guard.as_const() {
                    Some(Const::Bool(true)) => Ok((then_branch.clone(), "E-CondTrue")),
                    Some(Const::Bool(false)) => Ok((else_branch.clone(), "E-CondFalse")),
                    _ if self.is_value(guard) => stuck("condition on a non-boolean value"),
                    _ => {
                        frames.push("E-CondInner");
                        let (g, rule) = self.reduce(guard, frames)?;
                        Ok((Term::cond(g, then_branch.clone(), else_branch.clone()), rule))
                    }
                }
            }
            TermKind::Check { tgt, current, scrutinee, label } => {
                if let Some(l) = current.as_blame() {
                    return Ok((Term::blame(l.clone()), "E-CheckRaise"));
                }
                match current.as_const() {
                    Some(Const::Bool(true)) => Ok((Term::constant(*scrutinee), "E-CheckOK")),
                    Some(Const::Bool(false)) => Ok((Term::blame(label.clone()), "E-CheckFail")),
                    _ if self.is_value(current) => stuck("active check on a non-boolean value"),
                    _ => {
                        frames.push("E-CheckInner");
                        let (c, rule) = self.reduce(current, frames)?;
                        Ok((Term::check(tgt.clone(), c, *scrutinee, label.clone()), rule))
                    }
                }
            }
            TermKind::Stack { tgt, status, pending, scrutinee, current } => {
                if let Some(l) = current.as_blame() {
                    return Ok((Term::blame(l.clone()), "E-StackRaise"));
                }
                if current.as_const().is_some() {
                    let Some((first, rest)) = pending.entries().split_first() else {
                        return Ok((Term::constant(*scrutinee), "E-StackDone"));
                    };
                    let Some(pred) = instantiate(&first.ty, *scrutinee) else {
                        return stuck("coercion stack entry is not a refinement");
                    };
                    let status2 = if *status == Status::Checked || self.implies(&first.ty, tgt) {
                        Status::Checked
                    } else {
                        Status::Unchecked
                    };
                    let check = Term::check(first.ty.clone(), pred, *scrutinee, first.label.clone());
                    let rest = crate::syntax::RefinementList(rest.to_vec());
                    return Ok((Term::stack(tgt.clone(), status2, rest, *scrutinee, check), "E-StackPop"));
                }
                if self.is_value(current) {
                    return stuck("coercion stack over a non-constant value");
                }
                frames.push("E-StackInner");
                let (c, rule) = self.reduce(current, frames)?;
                Ok((Term::stack(tgt.clone(), *status, pending.clone(), *scrutinee, c), rule))
            }
            TermKind::Cast { src, ann, tgt, label, subject } => {
                self.reduce_cast(e, src, ann, tgt, label, subject, frames)
            }
        }
    }

    fn reduce_app(&self, f: &Term, a: &Term, frames: &mut Vec<&'static str>) -> Reduced {
        if let Some(l) = f.as_blame() {
            return Ok((Term::blame(l.clone()), "E-AppRaiseL"));
        }
        if !self.is_value(f) {
            frames.push("E-AppL");
            let (f2, rule) = self.reduce(f, frames)?;
            return Ok((Term::app(f2, a.clone()), rule));
        }
        if let Some(l) = a.as_blame() {
            return Ok((Term::blame(l.clone()), "E-AppRaiseR"));
        }
        if !self.is_value(a) {
            frames.push("E-AppR");
            let (a2, rule) = self.reduce(a, frames)?;
            return Ok((Term::app(f.clone(), a2), rule));
        }
        match f.kind() {
            TermKind::Abs { binder, body, .. } => Ok((subst(body, binder, a), "E-Beta")),
            TermKind::Cast { src, ann, tgt, label, subject } => {
                let (Some((t11, t12)), Some((t21, t22))) = (src.arrow(), tgt.arrow()) else {
                    return stuck("applied a cast between refinement types");
                };
                let Some((dom, cod)) = split_annotation(ann) else {
                    return stuck("function proxy annotation does not split");
                };
                let arg = Term::cast(t21.clone(), dom, t11.clone(), label.clone(), a.clone());
                let call = Term::app(subject.clone(), arg);
                Ok((Term::cast(t12.clone(), cod, t22.clone(), label.clone(), call), "E-Unwrap"))
            }
            _ => stuck("applied a non-function value"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn reduce_cast(
        &self,
        e: &Term,
        src: &Type,
        ann: &Annotation,
        tgt: &Type,
        label: &Label,
        subject: &Term,
        frames: &mut Vec<&'static str>,
    ) -> Reduced {
        let annotation_fits = match (self.mode, ann) {
            (_, Annotation::Empty) => true,
            (Mode::Heedful, Annotation::Types(_)) => true,
            (Mode::Eidetic, Annotation::Coerce(_)) => true,
            _ => false,
        };
        if !annotation_fits {
            return stuck(format!("annotation not allowed in {} mode", self.mode.name()));
        }
        if matches!(ann, Annotation::Empty) {
            match self.mode {
                Mode::Heedful => {
                    let ann2 = Annotation::Types(Default::default());
                    let t = Term::cast(src.clone(), ann2, tgt.clone(), label.clone(), subject.clone());
                    return Ok((t, "E-TypeSet"));
                }
                Mode::Eidetic => {
                    let Some(c) = coerce(src, tgt, label) else {
                        return stuck("cast between dissimilar types");
                    };
                    let t = Term::cast(
                        src.clone(),
                        Annotation::Coerce(c),
                        tgt.clone(),
                        Label::Empty,
                        subject.clone(),
                    );
                    return Ok((t, "E-Coerce"));
                }
                Mode::Classic | Mode::Forgetful => {}
            }
        }
        if let Some(l) = subject.as_blame() {
            return Ok((Term::blame(l.clone()), "E-CastRaise"));
        }
        if self.mode != Mode::Classic {
            if let TermKind::Cast { src: t0, ann: a0, tgt: t1, subject: inner, .. } = subject.kind()
            {
                if let Some(m) = merge(self.mode, &self.oracle, t0, a0, t1, ann, tgt) {
                    let t = Term::cast(t0.clone(), m, tgt.clone(), label.clone(), inner.clone());
                    return Ok((t, "E-CastMergeE"));
                }
            }
        }
        if !self.is_value(subject) {
            frames.push(if self.mode == Mode::Classic { "E-CastInnerC" } else { "E-CastInnerE" });
            let (s2, rule) = self.reduce(subject, frames)?;
            return Ok((Term::cast(src.clone(), ann.clone(), tgt.clone(), label.clone(), s2), rule));
        }
        let TypeKind::Refine { base, .. } = tgt.kind() else {
            return stuck(format!("function cast is not a value: {e}"));
        };
        let Some(k) = subject.as_const() else {
            return stuck("refinement cast on a non-constant value");
        };
        if k.base() != *base || !src.is_refinement() {
            return stuck("refinement cast on a constant of the wrong base type");
        }
        let check_at = |t: &Type| -> Result<Term, Halt> {
            match instantiate(t, k) {
                Some(pred) => Ok(Term::check(t.clone(), pred, k, label.clone())),
                None => stuck("checked type is not a refinement"),
            }
        };
        match (self.mode, ann) {
            (Mode::Classic, _) => Ok((check_at(tgt)?, "E-CheckNoneC")),
            (Mode::Forgetful, _) => Ok((check_at(tgt)?, "E-CheckNone")),
            (Mode::Heedful, Annotation::Types(s)) if s.is_empty() => {
                Ok((check_at(tgt)?, "E-CheckEmpty"))
            }
            (Mode::Heedful, Annotation::Types(s)) => {
                let t = self.choose.choose(s);
                let mut rest = s.clone();
                rest.remove(&t);
                let inner = check_at(&t)?;
                let cast = Term::cast(t, Annotation::Types(rest), tgt.clone(), label.clone(), inner);
                Ok((cast, "E-CheckSet"))
            }
            (Mode::Eidetic, Annotation::Coerce(Coercion::Refs(r))) => {
                let stack =
                    Term::stack(tgt.clone(), Status::Unchecked, r.clone(), k, Term::constant(k));
                Ok((stack, "E-CoerceStack"))
            }
            _ => stuck("refinement cast with a function coercion"),
        }
    }
}

fn with_path(frames: &[&'static str], why: String) -> String {
    if frames.is_empty() {
        why
    } else {
        format!("{} under {}", why, frames.join("/"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> \
                      (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> \
                      (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))";

    fn run(mode: Mode, src: &str) -> Outcome {
        Machine::new(mode).eval(&parse(src).unwrap(), 10_000).outcome
    }

    #[test]
    fn running_example_in_every_mode() {
        assert_eq!(run(Mode::Classic, E3).blame_label(), Some(&Label::named("l1")));
        assert_eq!(run(Mode::Forgetful, E3).constant(), Some(Const::Int(-1)));
        assert_eq!(run(Mode::Heedful, E3).blame_label(), Some(&Label::named("l3")));
        assert_eq!(run(Mode::Eidetic, E3).blame_label(), Some(&Label::named("l1")));
    }

    #[test]
    fn heedful_blames_l3_under_either_choice() {
        let e = parse(E3).unwrap();
        let m = Machine::new(Mode::Heedful).with_choose(ChoosePolicy::LexMax);
        assert_eq!(m.eval(&e, 10_000).outcome.blame_label(), Some(&Label::named("l3")));
    }

    #[test]
    fn beta_step() {
        let e = parse(r"(\x:{x:Int|true}. x) 5").unwrap();
        match Machine::new(Mode::Classic).step(&e) {
            StepOutcome::Stepped(t, r) => {
                assert_eq!(t.as_const(), Some(Const::Int(5)));
                assert_eq!(r.to_string(), "E-Beta");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eidetic_trace_prefix() {
        let tr = Machine::new(Mode::Eidetic).trace(&parse(E3).unwrap(), 100);
        let names: Vec<String> = tr.rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            &names[..6],
            [
                "E-Coerce",
                "E-CastInnerE/E-Coerce",
                "E-CastMergeE",
                "E-CastInnerE/E-Coerce",
                "E-CastMergeE",
                "E-CoerceStack"
            ]
        );
        assert_eq!(
            tr.terms[5].to_string(),
            "<{x:Int|true} =[{x:Int|x >= 0}^l1, {x:Int|x mod 2 = 0}^l2, {x:Int|x <> 0}^l3]=> {x:Int|x <> 0} @ *> -1"
        );
    }

    #[test]
    fn forgetful_first_step_merges() {
        let e = parse(E3).unwrap();
        match Machine::new(Mode::Forgetful).step(&e) {
            StepOutcome::Stepped(t, r) => {
                assert_eq!(r.base, "E-CastMergeE");
                let expect = parse(
                    "<{x:Int|x >= 0} => {x:Int|x <> 0} @ l3> (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1))",
                )
                .unwrap();
                assert!(crate::syntax::alpha_eq(&t, &expect));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn function_proxies_unwrap() {
        let src = r"(<{x:Int|true} -> {x:Int|true} => {x:Int|x >= 0} -> {x:Int|x >= 0} @ l> (\y:{x:Int|true}. y - 10)) 3";
        for mode in Mode::ALL {
            assert_eq!(run(mode, src).blame_label(), Some(&Label::named("l")), "{mode}");
        }
        let ok = r"(<{x:Int|true} -> {x:Int|true} => {x:Int|x >= 0} -> {x:Int|x >= 0} @ l> (\y:{x:Int|true}. y + 10)) 3";
        for mode in Mode::ALL {
            assert_eq!(run(mode, ok).constant(), Some(Const::Int(13)), "{mode}");
        }
    }

    #[test]
    fn division_by_zero_is_stuck_and_overflow_faults() {
        assert!(matches!(run(Mode::Classic, "1 div 0"), Outcome::Stuck(_)));
        assert!(matches!(run(Mode::Classic, "9223372036854775807 + 1"), Outcome::Fault(_)));
    }

    #[test]
    fn budget_is_respected() {
        let e = parse(E3).unwrap();
        let ev = Machine::new(Mode::Classic).eval(&e, 2);
        assert!(matches!(ev.outcome, Outcome::BudgetExceeded));
        assert_eq!(ev.steps, 2);
    }

    #[test]
    fn stack_status_tracks_target() {
        let src = "<{x:Int|true} => {x:Int|x >= 0} @ l1> 4";
        let tr = Machine::new(Mode::Eidetic).trace(&parse(src).unwrap(), 100);
        let popped = tr.terms.iter().find_map(|t| match t.kind() {
            TermKind::Stack { status, pending, .. } if pending.is_empty() => Some(*status),
            _ => None,
        });
        assert_eq!(popped, Some(Status::Checked));
        assert_eq!(tr.outcome.constant(), Some(Const::Int(4)));
    }

    #[test]
    fn rule_names_elide_long_paths() {
        let r = Rule::new(vec!["E-AppL", "E-AppR", "E-OpInner", "E-CastInnerC"], "E-Beta");
        assert_eq!(r.to_string(), "E-AppL/E-AppR/…/E-CastInnerC/E-Beta");
        assert_eq!(r.head(), "E-AppL");
    }
}
