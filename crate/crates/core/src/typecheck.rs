//! Mode-indexed type system.
//!
//! Types are synthesized bottom-up. The one place a type is *checked* rather
//! than synthesized is where a constant meets a refinement it must inhabit
//! (T-Const at a refined type): there the predicate is run with the mode's
//! evaluator under a step budget.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::semantics::{ChoosePolicy, Machine, Oracle, Outcome, StepOutcome};
use crate::surface::SourceFile;
use crate::syntax::{
    alpha_eq, instantiate, Annotation, BaseType, Coercion, Const, Label, Mode, Name, Op, Status,
    Term, TermKind, Type, TypeKind,
};

pub const DEFAULT_PREDICATE_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TypeErrorKind {
    NotSimilar,
    IllFormedType,
    IllFormedAnnotation,
    UnboundVar,
    NotAFunction,
    OpArity,
    PredicateNotBool,
    SourceViolation,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `location` is a `/`-separated path from the root of the checked term,
/// e.g. `fun/body/arg1`; empty at the root.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{kind} at {}: {detail}", if location.is_empty() { "<root>" } else { location.as_str() })]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub location: String,
    pub detail: String,
}

impl TypeError {
    fn new(kind: TypeErrorKind, detail: impl Into<String>) -> TypeError {
        TypeError { kind, location: String::new(), detail: detail.into() }
    }

    fn under(mut self, segment: &str) -> TypeError {
        self.location = if self.location.is_empty() {
            segment.to_owned()
        } else {
            format!("{segment}/{}", self.location)
        };
        self
    }
}

type TResult<T> = Result<T, TypeError>;

fn at<T>(segment: &str, r: TResult<T>) -> TResult<T> {
    r.map_err(|e| e.under(segment))
}

/// Typing context, innermost binding last.
#[derive(Clone, Debug, Default)]
pub struct Context(Vec<(Name, Type)>);

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn extend(&self, x: &Name, t: &Type) -> Context {
        let mut out = self.clone();
        out.0.push((x.clone(), t.clone()));
        out
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `T1 ∥ T2`: same simple-type skeleton.
pub fn similar(t1: &Type, t2: &Type) -> bool {
    match (t1.kind(), t2.kind()) {
        (TypeKind::Refine { base: b1, .. }, TypeKind::Refine { base: b2, .. }) => b1 == b2,
        (TypeKind::Fun(d1, c1), TypeKind::Fun(d2, c2)) => similar(d1, d2) && similar(c1, c2),
        _ => false,
    }
}

/// `ty(k)`.
pub fn const_base(k: Const) -> BaseType {
    k.base()
}

fn raw(b: BaseType) -> Type {
    Type::raw(b)
}

/// `ty(op)`, curried. `div` and `mod` demand a non-zero divisor.
pub fn signature(op: Op) -> Type {
    static TABLE: OnceLock<HashMap<Op, Type>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            let int = raw(BaseType::Int);
            let bool_ = raw(BaseType::Bool);
            let nonzero = Type::refine(
                "y",
                BaseType::Int,
                Term::binop(Op::Neq, Term::var("y"), Term::int(0)),
            );
            let bin = |a: &Type, b: &Type, c: &Type| Type::fun(a.clone(), Type::fun(b.clone(), c.clone()));
            Op::ALL
                .iter()
                .map(|&op| {
                    let t = match op {
                        Op::Not => Type::fun(bool_.clone(), bool_.clone()),
                        Op::And | Op::Or => bin(&bool_, &bool_, &bool_),
                        Op::Eq | Op::Neq | Op::Lt | Op::Le | Op::Gt | Op::Ge => {
                            bin(&int, &int, &bool_)
                        }
                        Op::Add | Op::Sub | Op::Mul => bin(&int, &int, &int),
                        Op::Div | Op::Mod => bin(&int, &nonzero, &int),
                    };
                    (op, t)
                })
                .collect()
        })
        .get(&op)
        .cloned()
        .expect("every operation has a signature")
}

/// Splits a curried signature into argument types and result.
fn uncurry(t: &Type, n: usize) -> (Vec<Type>, Type) {
    let mut args = Vec::with_capacity(n);
    let mut cur = t.clone();
    for _ in 0..n {
        let Some((d, c)) = cur.arrow() else { break };
        args.push(d.clone());
        let c = c.clone();
        cur = c;
    }
    (args, cur)
}

/// A type checker for one mode.
///
/// Source mode enforces the source-program discipline: only `•`
/// annotations, named labels, no runtime-only forms, and constants typed
/// at their raw type only. Checkers keep caches and are not `Sync`; make
/// one per thread.
pub struct Checker {
    mode: Mode,
    /// Cleared while typing predicates: types are not part of the program.
    source: Cell<bool>,
    budget: usize,
    machine: Machine,
    wf_cache: RefCell<HashMap<Arc<str>, ()>>,
    const_cache: RefCell<HashMap<(Arc<str>, ConstKey), bool>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKey {
    Bool(bool),
    Int(i64),
}

impl From<Const> for ConstKey {
    fn from(k: Const) -> ConstKey {
        match k {
            Const::Bool(b) => ConstKey::Bool(b),
            Const::Int(n) => ConstKey::Int(n),
        }
    }
}

impl Checker {
    pub fn new(mode: Mode) -> Checker {
        Checker {
            mode,
            source: Cell::new(false),
            budget: DEFAULT_PREDICATE_BUDGET,
            machine: Machine::new(mode),
            wf_cache: RefCell::default(),
            const_cache: RefCell::default(),
        }
    }

    /// A checker for source programs in `mode`.
    pub fn source(mode: Mode) -> Checker {
        Checker { source: Cell::new(true), ..Checker::new(mode) }
    }

    pub fn with_budget(mut self, budget: usize) -> Checker {
        self.budget = budget;
        self
    }

    pub fn with_oracle(mut self, oracle: Oracle) -> Checker {
        self.machine.oracle = oracle;
        self
    }

    pub fn with_choose(mut self, choose: ChoosePolicy) -> Checker {
        self.machine.choose = choose;
        self
    }

    /// Adopts the oracle and choose policy of an evaluator.
    pub fn for_machine(machine: &Machine) -> Checker {
        Checker { machine: machine.clone(), ..Checker::new(machine.mode) }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `⊢m T`. Predicates are typed under `x:{x:B|true}` alone.
    pub fn wf_type(&self, t: &Type) -> TResult<()> {
        match t.kind() {
            TypeKind::Fun(d, c) => {
                at("dom", self.wf_type(d))?;
                at("cod", self.wf_type(c))
            }
            TypeKind::Refine { binder, base, pred } => {
                if self.wf_cache.borrow().contains_key(t.key()) {
                    return Ok(());
                }
                let ctx = Context::new().extend(binder, &raw(*base));
                let bool_ = raw(BaseType::Bool);
                let was_source = self.source.replace(false);
                let inferred = self.infer(&ctx, pred);
                self.source.set(was_source);
                let r = match inferred {
                    Ok(None) => Ok(()),
                    Ok(Some(ty)) if ty == bool_ => Ok(()),
                    Ok(Some(ty)) => Err(TypeError::new(
                        TypeErrorKind::PredicateNotBool,
                        format!("predicate of {t} has type {ty}"),
                    )),
                    Err(e) => Err(TypeError::new(
                        if e.kind == TypeErrorKind::UnboundVar {
                            TypeErrorKind::IllFormedType
                        } else {
                            TypeErrorKind::PredicateNotBool
                        },
                        format!("predicate of {t}: {e}"),
                    )),
                };
                if r.is_ok() {
                    self.wf_cache.borrow_mut().insert(Arc::from(t.key()), ());
                }
                r
            }
        }
    }

    /// `⊢m a ∥ T1 ⇒ T2`.
    pub fn wf_annotation(&self, a: &Annotation, t1: &Type, t2: &Type) -> TResult<()> {
        at("source", self.wf_type(t1))?;
        at("target", self.wf_type(t2))?;
        if !similar(t1, t2) {
            return Err(TypeError::new(
                TypeErrorKind::NotSimilar,
                format!("cannot cast {t1} to {t2}"),
            ));
        }
        let bad = |detail: String| Err(TypeError::new(TypeErrorKind::IllFormedAnnotation, detail));
        match a {
            Annotation::Empty => Ok(()),
            Annotation::Types(s) => {
                if self.mode != Mode::Heedful {
                    return bad(format!("type sets only occur in heedful mode, not {}", self.mode));
                }
                for member in s {
                    if let Err(e) = self.wf_type(member) {
                        return bad(format!("type set member {member}: {e}"));
                    }
                    if !similar(member, t1) {
                        return bad(format!("type set member {member} is not similar to {t1}"));
                    }
                }
                Ok(())
            }
            Annotation::Coerce(c) => {
                if self.mode != Mode::Eidetic {
                    return bad(format!("coercions only occur in eidetic mode, not {}", self.mode));
                }
                self.wf_coercion(c, t1, t2)
            }
        }
    }

    fn wf_coercion(&self, c: &Coercion, t1: &Type, t2: &Type) -> TResult<()> {
        let bad = |detail: String| Err(TypeError::new(TypeErrorKind::IllFormedAnnotation, detail));
        match (c, t1.kind(), t2.kind()) {
            (Coercion::Refs(r), TypeKind::Refine { .. }, TypeKind::Refine { base, .. }) => {
                for entry in r.entries() {
                    if entry.ty.base() != Some(*base) {
                        return bad(format!("{} does not refine {base}", entry.ty));
                    }
                    if let Err(e) = self.wf_type(&entry.ty) {
                        return bad(format!("list entry {}: {e}", entry.ty));
                    }
                }
                if !r.is_duplicate_free() {
                    return bad("refinement list repeats a type".to_owned());
                }
                if !r.entries().iter().any(|e| self.machine.implies(&e.ty, t2)) {
                    return bad(format!("no entry of the list implies the target {t2}"));
                }
                Ok(())
            }
            (Coercion::Fun(cd, cc), TypeKind::Fun(d1, c1), TypeKind::Fun(d2, c2)) => {
                at("dom", self.wf_coercion(cd, d2, d1))?;
                at("cod", self.wf_coercion(cc, c1, c2))
            }
            _ => bad(format!("coercion shape does not match {t1} => {t2}")),
        }
    }

    /// Type of `e` under `ctx`; `Ok(None)` for terms that have every type
    /// (blame, and forms built from it).
    pub fn type_of(&self, ctx: &Context, e: &Term) -> TResult<Option<Type>> {
        self.infer(ctx, e)
    }

    /// Closed-term convenience: the synthesized type, with blame rejected.
    pub fn type_of_closed(&self, e: &Term) -> TResult<Type> {
        self.infer(&Context::new(), e)?.ok_or_else(|| {
            TypeError::new(TypeErrorKind::NotSimilar, "blame has every type; none to report")
        })
    }

    /// `Γ ⊢m e : T`.
    pub fn check(&self, ctx: &Context, e: &Term, expected: &Type) -> TResult<()> {
        // The expected type is pushed inwards so that constants substituted
        // into bodies and branches can still be typed at a refinement.
        match e.kind() {
            TermKind::Abs { binder, annot, body } => {
                if let Some((dom, cod)) = expected.arrow() {
                    if annot == dom {
                        at("annot", self.wf_type(annot))?;
                        return at("body", self.check(&ctx.extend(binder, annot), body, cod));
                    }
                }
            }
            TermKind::App(f, a) => {
                let Some(ft) = at("fun", self.infer(ctx, f))? else {
                    at("arg", self.infer(ctx, a))?;
                    return Ok(());
                };
                if let Some((dom, cod)) = ft.arrow() {
                    at("arg", self.check(ctx, a, dom))?;
                    if cod == expected {
                        return Ok(());
                    }
                    return at("fun", self.check(ctx, f, &Type::fun(dom.clone(), expected.clone())));
                }
            }
            TermKind::Cond { guard, then_branch, else_branch } => {
                if let Some(g) = at("guard", self.infer(ctx, guard))? {
                    if g.base() != Some(BaseType::Bool) {
                        return Err(TypeError::new(
                            TypeErrorKind::NotSimilar,
                            format!("condition has type {g}"),
                        )
                        .under("guard"));
                    }
                }
                at("then", self.check(ctx, then_branch, expected))?;
                return at("else", self.check(ctx, else_branch, expected));
            }
            _ => {}
        }
        let found = match self.infer(ctx, e)? {
            None => return Ok(()),
            Some(t) => t,
        };
        if found == *expected {
            return Ok(());
        }
        if let (false, Some(k), TypeKind::Refine { base, .. }) =
            (self.source.get(), e.as_const(), expected.kind())
        {
            if k.base() == *base {
                self.wf_type(expected)?;
                return self.const_inhabits(k, expected);
            }
        }
        Err(TypeError::new(
            TypeErrorKind::NotSimilar,
            format!("expected {expected}, found {found}"),
        ))
    }

    /// T-Const at a refinement: `e[k/x] →*m true`.
    fn const_inhabits(&self, k: Const, t: &Type) -> TResult<()> {
        let key = (Arc::from(t.key()), ConstKey::from(k));
        if let Some(&ok) = self.const_cache.borrow().get(&key) {
            return if ok {
                Ok(())
            } else {
                Err(TypeError::new(TypeErrorKind::NotSimilar, format!("{k} does not inhabit {t}")))
            };
        }
        let pred = instantiate(t, k).expect("refinement");
        let outcome = self.machine.eval(&pred, self.budget).outcome;
        let ok = matches!(outcome.constant(), Some(Const::Bool(true)));
        if !matches!(outcome, Outcome::BudgetExceeded) {
            self.const_cache.borrow_mut().insert(key, ok);
        }
        if ok {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorKind::NotSimilar,
                format!("{k} does not inhabit {t}: predicate gives {outcome}"),
            ))
        }
    }

    fn source_violation<T>(&self, what: &str) -> TResult<T> {
        Err(TypeError::new(TypeErrorKind::SourceViolation, format!("{what} in a source program")))
    }

    fn infer(&self, ctx: &Context, e: &Term) -> TResult<Option<Type>> {
        match e.kind() {
            TermKind::Var(x) => match ctx.lookup(x) {
                Some(t) => Ok(Some(t.clone())),
                None => Err(TypeError::new(TypeErrorKind::UnboundVar, format!("`{x}` is unbound"))),
            },
            TermKind::Const(k) => Ok(Some(raw(k.base()))),
            TermKind::Abs { binder, annot, body } => {
                at("annot", self.wf_type(annot))?;
                let ctx2 = ctx.extend(binder, annot);
                match at("body", self.infer(&ctx2, body))? {
                    Some(t) => Ok(Some(Type::fun(annot.clone(), t))),
                    None => Err(TypeError::new(
                        TypeErrorKind::NotSimilar,
                        "cannot synthesize the type of a function whose body is blame",
                    )
                    .under("body")),
                }
            }
            TermKind::Fix { binder, annot, body } => {
                at("annot", self.wf_type(annot))?;
                let ctx2 = ctx.extend(binder, annot);
                at("body", self.check(&ctx2, body, annot))?;
                Ok(Some(annot.clone()))
            }
            TermKind::App(f, a) => {
                let Some(ft) = at("fun", self.infer(ctx, f))? else {
                    at("arg", self.infer(ctx, a))?;
                    return Ok(None);
                };
                let Some((dom, cod)) = ft.arrow() else {
                    return Err(TypeError::new(
                        TypeErrorKind::NotAFunction,
                        format!("applied a term of type {ft}"),
                    ));
                };
                at("arg", self.check(ctx, a, dom))?;
                Ok(Some(cod.clone()))
            }
            TermKind::Op { op, args } => {
                if args.len() != op.arity() {
                    return Err(TypeError::new(
                        TypeErrorKind::OpArity,
                        format!("`{op}` takes {} arguments, given {}", op.arity(), args.len()),
                    ));
                }
                let (doms, cod) = uncurry(&signature(*op), args.len());
                for (i, (arg, dom)) in args.iter().zip(&doms).enumerate() {
                    at(&format!("arg{}", i + 1), self.check(ctx, arg, dom))?;
                }
                Ok(Some(cod))
            }
            TermKind::Cast { src, ann, tgt, label, subject } => {
                if self.source.get() {
                    if !matches!(ann, Annotation::Empty) {
                        return self.source_violation("annotated cast");
                    }
                    if *label == Label::Empty {
                        return self.source_violation("cast with an empty label");
                    }
                }
                self.wf_annotation(ann, src, tgt)?;
                at("subject", self.check(ctx, subject, src))?;
                Ok(Some(tgt.clone()))
            }
            TermKind::Cond { guard, then_branch, else_branch } => {
                if let Some(g) = at("guard", self.infer(ctx, guard))? {
                    if g.base() != Some(BaseType::Bool) {
                        return Err(TypeError::new(
                            TypeErrorKind::NotSimilar,
                            format!("condition has type {g}"),
                        )
                        .under("guard"));
                    }
                }
                match at("then", self.infer(ctx, then_branch))? {
                    Some(t) => {
                        at("else", self.check(ctx, else_branch, &t))?;
                        Ok(Some(t))
                    }
                    None => at("else", self.infer(ctx, else_branch)),
                }
            }
            TermKind::Blame(_) => {
                if self.source.get() {
                    return self.source_violation("blame");
                }
                Ok(None)
            }
            TermKind::Check { tgt, current, scrutinee, .. } => {
                if self.source.get() {
                    return self.source_violation("active check");
                }
                self.wf_scrutinee(tgt, *scrutinee)?;
                at("current", self.check(ctx, current, &raw(BaseType::Bool)))?;
                let start = instantiate(tgt, *scrutinee).expect("refinement");
                if !self.reaches(&start, current) {
                    return Err(TypeError::new(
                        TypeErrorKind::IllFormedType,
                        format!("`{current}` is not reachable from `{start}`"),
                    )
                    .under("current"));
                }
                Ok(Some(tgt.clone()))
            }
            TermKind::Stack { tgt, status, pending, scrutinee, current } => {
                if self.source.get() {
                    return self.source_violation("coercion stack");
                }
                self.wf_scrutinee(tgt, *scrutinee)?;
                let bad = |detail: String| {
                    Err(TypeError::new(TypeErrorKind::IllFormedAnnotation, detail))
                };
                for entry in pending.entries() {
                    if entry.ty.base() != tgt.base() {
                        return bad(format!("{} does not refine the stack's base", entry.ty));
                    }
                    self.wf_type(&entry.ty)?;
                }
                if !pending.is_duplicate_free() {
                    return bad("coercion stack repeats a type".to_owned());
                }
                match current.kind() {
                    TermKind::Const(k) if *k == *scrutinee => {}
                    TermKind::Check { scrutinee: k, .. } if *k == *scrutinee => {
                        at("current", self.infer(ctx, current))?;
                    }
                    TermKind::Blame(_) => {}
                    _ => return bad(format!("stack is not checking {scrutinee}: `{current}`")),
                }
                match status {
                    Status::Unchecked => {
                        if !pending.entries().iter().any(|e| self.machine.implies(&e.ty, tgt)) {
                            return bad(format!("unchecked stack no longer implies {tgt}"));
                        }
                    }
                    Status::Checked => {
                        let checking_implier = matches!(current.kind(),
                            TermKind::Check { tgt: t2, .. } if self.machine.implies(t2, tgt));
                        let is_blame = current.as_blame().is_some();
                        if !checking_implier
                            && !is_blame
                            && self.const_inhabits(*scrutinee, tgt).is_err()
                        {
                            return bad(format!("checked stack but {scrutinee} fails {tgt}"));
                        }
                    }
                }
                Ok(Some(tgt.clone()))
            }
        }
    }

    fn wf_scrutinee(&self, tgt: &Type, k: Const) -> TResult<()> {
        match tgt.base() {
            Some(b) if tgt.is_refinement() && b == k.base() => self.wf_type(tgt),
            _ => Err(TypeError::new(
                TypeErrorKind::IllFormedType,
                format!("{k} cannot be checked against {tgt}"),
            )),
        }
    }

    /// Bounded replay: does `start` reduce to `target` in this mode?
    fn reaches(&self, start: &Term, target: &Term) -> bool {
        let mut cur = start.clone();
        for _ in 0..=self.budget {
            if alpha_eq(&cur, target) {
                return true;
            }
            match self.machine.step(&cur) {
                StepOutcome::Stepped(next, _) => cur = next,
                _ => return false,
            }
        }
        false
    }

    /// Checks each declaration of a file, then its main term. Annotated
    /// declarations must have exactly their annotation.
    pub fn check_file(&self, file: &SourceFile) -> TResult<Type> {
        let mut ctx = Context::new();
        for d in &file.decls {
            let seg = format!("decl {}", d.name);
            let t = match &d.annot {
                Some(t) => {
                    at(&seg, self.wf_type(t))?;
                    at(&seg, self.check(&ctx, &d.body, t))?;
                    t.clone()
                }
                None => at(&seg, self.infer(&ctx, &d.body))?.ok_or_else(|| {
                    TypeError::new(TypeErrorKind::NotSimilar, "declaration has no type")
                })?,
            };
            ctx = ctx.extend(&d.name, &t);
        }
        at("main", self.infer(&ctx, &file.main))?
            .ok_or_else(|| TypeError::new(TypeErrorKind::NotSimilar, "program has no type"))
    }
}

/// Types a source program in all four modes and returns the common type.
pub fn check_source(e: &Term) -> TResult<Type> {
    agree(|m| Checker::source(m).type_of_closed(e))
}

/// [`check_source`] for a whole file.
pub fn check_source_file(file: &SourceFile) -> TResult<Type> {
    agree(|m| Checker::source(m).check_file(file))
}

fn agree(mut f: impl FnMut(Mode) -> TResult<Type>) -> TResult<Type> {
    let first = f(Mode::Classic)?;
    for mode in &Mode::ALL[1..] {
        let t = f(*mode)?;
        if t != first {
            return Err(TypeError::new(
                TypeErrorKind::NotSimilar,
                format!("classic gives {first} but {mode} gives {t}"),
            ));
        }
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse, parse_runtime, parse_type};
    use crate::syntax::RefinementList;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }
    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> \
                      (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> \
                      (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))";

    #[test]
    fn similarity() {
        assert!(similar(&ty("{x:Int|x >= 0}"), &ty("{x:Int|x <> 0}")));
        assert!(!similar(&ty("{x:Int|x >= 0}"), &ty("{b:Bool|true}")));
        assert!(similar(
            &ty("{x:Int|true} -> {x:Int|x >= 0}"),
            &ty("{x:Int|x >= 0} -> {x:Int|true}")
        ));
    }

    #[test]
    fn type_well_formedness() {
        let c = Checker::new(Mode::Classic);
        assert!(c.wf_type(&ty("{x:Int|true}")).is_ok());
        assert!(c.wf_type(&ty("{x:Int|x >= 0}")).is_ok());
        let err = c.wf_type(&ty("{x:Int|x + 1}")).unwrap_err();
        assert_eq!(err.kind, TypeErrorKind::PredicateNotBool);
        assert_eq!(c.wf_type(&ty("{x:Int|y > 0}")).unwrap_err().kind, TypeErrorKind::IllFormedType);
    }

    #[test]
    fn annotation_well_formedness() {
        let (any, nat, even, nz) =
            (ty("{x:Int|true}"), ty("{x:Int|x >= 0}"), ty("{x:Int|x mod 2 = 0}"), ty("{x:Int|x <> 0}"));
        assert!(Checker::new(Mode::Classic).wf_annotation(&Annotation::Empty, &even, &nz).is_ok());
        let set = Annotation::Types([nat.clone()].into_iter().collect());
        assert!(Checker::new(Mode::Heedful).wf_annotation(&set, &any, &nz).is_ok());
        assert!(Checker::new(Mode::Classic).wf_annotation(&set, &any, &nz).is_err());
        let e = Checker::new(Mode::Eidetic);
        let good = Annotation::Coerce(Coercion::Refs(RefinementList::single(nz.clone(), Label::named("l3"))));
        assert!(e.wf_annotation(&good, &even, &nz).is_ok());
        let empty = Annotation::Coerce(Coercion::Refs(RefinementList::nil()));
        assert_eq!(e.wf_annotation(&empty, &even, &nz).unwrap_err().kind, TypeErrorKind::IllFormedAnnotation);
    }

    #[test]
    fn term_typing() {
        let c = Checker::new(Mode::Classic);
        assert_eq!(c.type_of_closed(&Term::bool(true)).unwrap(), ty("{b:Bool|true}"));
        assert_eq!(c.type_of_closed(&parse(E3).unwrap()).unwrap(), ty("{x:Int|x <> 0}"));
        assert_eq!(c.type_of_closed(&parse("f 5").unwrap()).unwrap_err().kind, TypeErrorKind::UnboundVar);
        assert_eq!(c.type_of_closed(&parse("5 3").unwrap()).unwrap_err().kind, TypeErrorKind::NotAFunction);
    }

    #[test]
    fn source_discipline() {
        assert_eq!(check_source(&parse(E3).unwrap()).unwrap(), ty("{x:Int|x <> 0}"));
        let unlabeled = parse_runtime("<{x:Int|true} => {x:Int|x >= 0} @ *> 5").unwrap();
        assert_eq!(check_source(&unlabeled).unwrap_err().kind, TypeErrorKind::SourceViolation);
        let blame = parse_runtime("blame l1").unwrap();
        assert_eq!(check_source(&blame).unwrap_err().kind, TypeErrorKind::SourceViolation);
    }

    #[test]
    fn constants_inhabit_refinements_only_at_runtime() {
        let nat = ty("{x:Int|x >= 0}");
        let ctx = Context::new();
        assert!(Checker::new(Mode::Classic).check(&ctx, &Term::int(3), &nat).is_ok());
        assert!(Checker::new(Mode::Classic).check(&ctx, &Term::int(-3), &nat).is_err());
        assert!(Checker::source(Mode::Classic).check(&ctx, &Term::int(3), &nat).is_err());
    }

    #[test]
    fn operations_demand_exact_argument_types() {
        let ok = parse("1 div <{x:Int|true} => {y:Int|y <> 0} @ l> 2").unwrap();
        assert!(check_source(&ok).is_ok());
        assert!(check_source(&parse("1 div 2").unwrap()).is_err());
        assert_eq!(signature(Op::Add), ty("{x:Int|true} -> {x:Int|true} -> {x:Int|true}"));
        assert_eq!(signature(Op::Div), ty("{x:Int|true} -> {y:Int|y <> 0} -> {x:Int|true}"));
    }

    #[test]
    fn runtime_forms_typecheck() {
        let c = Checker::new(Mode::Classic);
        let chk = parse_runtime("check<{x:Int|x >= 0}, -1 >= 0, -1 @ l1>").unwrap();
        assert_eq!(c.type_of_closed(&chk).unwrap(), ty("{x:Int|x >= 0}"));
        let wrong = parse_runtime("check<{x:Int|x >= 0}, true, -1 @ l1>").unwrap();
        assert!(c.type_of_closed(&wrong).is_err());
        let e = Checker::new(Mode::Eidetic);
        let st = parse_runtime(
            "stack<{x:Int|x <> 0}, ?, [{x:Int|x mod 2 = 0}^l2, {x:Int|x <> 0}^l3], -1, \
             check<{x:Int|x >= 0}, -1 >= 0, -1 @ l1>>",
        )
        .unwrap();
        assert_eq!(e.type_of_closed(&st).unwrap(), ty("{x:Int|x <> 0}"));
        let lost = parse_runtime("stack<{x:Int|x <> 0}, ?, [{x:Int|x mod 2 = 0}^l2], -1, -1>").unwrap();
        assert!(e.type_of_closed(&lost).is_err());
    }

    #[test]
    fn errors_report_locations() {
        let e = parse(r"\x:{x:Int|true}. x + true").unwrap();
        let err = Checker::new(Mode::Classic).type_of_closed(&e).unwrap_err();
        assert_eq!(err.location, "body/arg2");
    }

    #[test]
    fn running_example_traces_preserve_types() {
        let e = parse(E3).unwrap();
        let nz = ty("{x:Int|x <> 0}");
        for mode in Mode::ALL {
            let tr = Machine::new(mode).trace(&e, 1000);
            let c = Checker::new(mode);
            for (i, t) in tr.terms.iter().enumerate() {
                if let Err(err) = c.check(&Context::new(), t, &nz) {
                    panic!("{mode} step {i}: {t}: {err}");
                }
            }
        }
    }
}
