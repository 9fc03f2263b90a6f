//! Abstract syntax of the calculus, shared by every evaluation mode.
//!
//! Terms and types are immutable, reference-counted trees. Cloning a
//! [`Term`] or [`Type`] is a pointer copy, and the evaluator rebuilds only
//! the spine it rewrites, so unchanged subterms stay shared across steps.
//!
//! Types compare (and order, and hash) up to alpha-equivalence: each type
//! caches its printed alpha-normal form, which doubles as the canonical
//! ordering key for [`TypeSet`].

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::surface;

/// Variable and binder names.
pub type Name = Arc<str>;

/// Which semantics evaluates (and types) a term.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classic,
    Forgetful,
    Heedful,
    #[default]
    Eidetic,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Classic, Mode::Forgetful, Mode::Heedful, Mode::Eidetic];

    pub fn letter(self) -> char {
        match self {
            Mode::Classic => 'C',
            Mode::Forgetful => 'F',
            Mode::Heedful => 'H',
            Mode::Eidetic => 'E',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Classic => "classic",
            Mode::Forgetful => "forgetful",
            Mode::Heedful => "heedful",
            Mode::Eidetic => "eidetic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "classic" => Ok(Mode::Classic),
            "f" | "forgetful" => Ok(Mode::Forgetful),
            "h" | "heedful" => Ok(Mode::Heedful),
            "e" | "eidetic" => Ok(Mode::Eidetic),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Blame label. `Empty` only appears on eidetic casts after coercion
/// translation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Empty,
    Named(Name),
}

impl Label {
    pub fn named(s: &str) -> Label {
        Label::Named(Arc::from(s))
    }

    pub fn is_named(&self) -> bool {
        matches!(self, Label::Named(_))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Empty => f.write_str("*"),
            Label::Named(n) => f.write_str(n),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Bool,
    Int,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseType::Bool => "Bool",
            BaseType::Int => "Int",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Bool(bool),
    Int(i64),
}

impl Const {
    /// `ty(k)`.
    pub fn base(self) -> BaseType {
        match self {
            Const::Bool(_) => BaseType::Bool,
            Const::Int(_) => BaseType::Int,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Bool(b) => write!(f, "{b}"),
            Const::Int(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Const {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Const::Bool(b) => s.serialize_bool(*b),
            Const::Int(n) => s.serialize_i64(*n),
        }
    }
}

/// Primitive operations. Their signatures live in
/// [`crate::typecheck::signature`], their denotations in
/// [`crate::semantics::apply_op`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Not,
    And,
    Or,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Mod,
    Div,
}

impl Op {
    pub const ALL: [Op; 14] = [
        Op::Not,
        Op::And,
        Op::Or,
        Op::Eq,
        Op::Neq,
        Op::Lt,
        Op::Le,
        Op::Gt,
        Op::Ge,
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Mod,
        Op::Div,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Not => "not",
            Op::And => "&&",
            Op::Or => "||",
            Op::Eq => "=",
            Op::Neq => "<>",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Mod => "mod",
            Op::Div => "div",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Op::Not => 1,
            _ => 2,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.symbol() == s)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Checked,
    Unchecked,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Checked => "ok",
            Status::Unchecked => "?",
        })
    }
}

// ---------------------------------------------------------------------------
// Types

#[derive(Debug)]
pub enum TypeKind {
    Refine { binder: Name, base: BaseType, pred: Term },
    Fun(Type, Type),
}

#[derive(Debug)]
struct TypeNode {
    kind: TypeKind,
    key: OnceLock<Arc<str>>,
    closed: OnceLock<bool>,
}

/// `{x:B|e}` or `T1 -> T2`. Equality, ordering and hashing are modulo
/// alpha-renaming of refinement binders.
#[derive(Clone)]
pub struct Type(Arc<TypeNode>);

impl Type {
    fn from_kind(kind: TypeKind) -> Type {
        Type(Arc::new(TypeNode { kind, key: OnceLock::new(), closed: OnceLock::new() }))
    }

    pub fn refine(binder: &str, base: BaseType, pred: Term) -> Type {
        Type::from_kind(TypeKind::Refine { binder: Arc::from(binder), base, pred })
    }

    /// The raw type `{x:B|true}`.
    pub fn raw(base: BaseType) -> Type {
        Type::refine("x", base, Term::bool(true))
    }

    pub fn fun(dom: Type, cod: Type) -> Type {
        Type::from_kind(TypeKind::Fun(dom, cod))
    }

    pub fn kind(&self) -> &TypeKind {
        &self.0.kind
    }

    pub fn is_refinement(&self) -> bool {
        matches!(self.kind(), TypeKind::Refine { .. })
    }

    pub fn base(&self) -> Option<BaseType> {
        match self.kind() {
            TypeKind::Refine { base, .. } => Some(*base),
            TypeKind::Fun(..) => None,
        }
    }

    pub fn refinement(&self) -> Option<(&Name, BaseType, &Term)> {
        match self.kind() {
            TypeKind::Refine { binder, base, pred } => Some((binder, *base, pred)),
            TypeKind::Fun(..) => None,
        }
    }

    pub fn arrow(&self) -> Option<(&Type, &Type)> {
        match self.kind() {
            TypeKind::Fun(d, c) => Some((d, c)),
            TypeKind::Refine { .. } => None,
        }
    }

    /// Printed alpha-normal form; the canonical key used for equality and
    /// ordering.
    pub fn key(&self) -> &str {
        self.0.key.get_or_init(|| Arc::from(surface::canonical_type(self)))
    }

    pub fn is_closed(&self) -> bool {
        *self.0.closed.get_or_init(|| type_free_vars(self).is_empty())
    }

    /// Same allocation; used to short-circuit set membership.
    pub fn ptr_eq(&self, other: &Type) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }
}

impl PartialEq for Type {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || self.key() == other.key()
    }
}

impl Eq for Type {}

impl PartialOrd for Type {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Type {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.ptr_eq(other) {
            return std::cmp::Ordering::Equal;
        }
        self.key().cmp(other.key())
    }
}

impl std::hash::Hash for Type {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", surface::print_type(self))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&surface::print_type(self))
    }
}

/// Canonically ordered, duplicate-free set of types (order: printed
/// alpha-normal form).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TypeSet(BTreeSet<Type>);

impl TypeSet {
    pub fn new() -> TypeSet {
        TypeSet(BTreeSet::new())
    }

    pub fn singleton(t: Type) -> TypeSet {
        let mut s = TypeSet::new();
        s.insert(t);
        s
    }

    pub fn insert(&mut self, t: Type) -> bool {
        self.0.insert(t)
    }

    pub fn remove(&mut self, t: &Type) -> bool {
        self.0.remove(t)
    }

    pub fn contains(&self, t: &Type) -> bool {
        self.0.contains(t)
    }

    pub fn union(&self, other: &TypeSet) -> TypeSet {
        TypeSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn extend(&mut self, other: &TypeSet) {
        self.0.extend(other.0.iter().cloned())
    }

    pub fn is_subset(&self, other: &TypeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn difference(&self, other: &TypeSet) -> TypeSet {
        TypeSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Type> {
        self.0.iter()
    }

    pub fn first(&self) -> Option<&Type> {
        self.0.first()
    }

    pub fn last(&self) -> Option<&Type> {
        self.0.last()
    }
}

impl FromIterator<Type> for TypeSet {
    fn from_iter<I: IntoIterator<Item = Type>>(iter: I) -> Self {
        TypeSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TypeSet {
    type Item = &'a Type;
    type IntoIter = std::collections::btree_set::Iter<'a, Type>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

// ---------------------------------------------------------------------------
// Coercions

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RefEntry {
    pub ty: Type,
    pub label: Label,
}

/// Ordered list of labelled refinements to check left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RefinementList(pub Vec<RefEntry>);

impl RefinementList {
    pub fn nil() -> RefinementList {
        RefinementList(Vec::new())
    }

    pub fn single(ty: Type, label: Label) -> RefinementList {
        RefinementList(vec![RefEntry { ty, label }])
    }

    pub fn from_entries<I: IntoIterator<Item = (Type, Label)>>(entries: I) -> RefinementList {
        RefinementList(entries.into_iter().map(|(ty, label)| RefEntry { ty, label }).collect())
    }

    pub fn entries(&self) -> &[RefEntry] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No two alpha-equivalent refinements.
    pub fn is_duplicate_free(&self) -> bool {
        let mut seen = HashSet::new();
        self.0.iter().all(|e| seen.insert(e.ty.key().to_owned()))
    }

    pub fn single_base(&self) -> Option<BaseType> {
        let mut bases = self.0.iter().map(|e| e.ty.base());
        let first = bases.next()??;
        bases.all(|b| b == Some(first)).then_some(first)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coercion {
    Refs(RefinementList),
    Fun(Arc<Coercion>, Arc<Coercion>),
}

impl Coercion {
    pub fn fun(dom: Coercion, cod: Coercion) -> Coercion {
        Coercion::Fun(Arc::new(dom), Arc::new(cod))
    }

    /// Every refinement list inside the coercion.
    pub fn lists(&self) -> Vec<&RefinementList> {
        let mut out = Vec::new();
        fn go<'a>(c: &'a Coercion, out: &mut Vec<&'a RefinementList>) {
            match c {
                Coercion::Refs(r) => out.push(r),
                Coercion::Fun(d, c) => {
                    go(d, out);
                    go(c, out);
                }
            }
        }
        go(self, &mut out);
        out
    }
}

/// What a cast carries: nothing, a type set, or a coercion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Annotation {
    Empty,
    Types(TypeSet),
    Coerce(Coercion),
}

// ---------------------------------------------------------------------------
// Terms

#[derive(Debug)]
pub enum TermKind {
    Var(Name),
    Const(Const),
    Abs { binder: Name, annot: Type, body: Term },
    App(Term, Term),
    Op { op: Op, args: Vec<Term> },
    Cast { src: Type, ann: Annotation, tgt: Type, label: Label, subject: Term },
    /// Active check `<{x:B|e1}, e2, k>^l`.
    Check { tgt: Type, current: Term, scrutinee: Const, label: Label },
    Blame(Label),
    /// Coercion stack `<{x:B|e1}, s, r, k, e>`.
    Stack { tgt: Type, status: Status, pending: RefinementList, scrutinee: Const, current: Term },
    Cond { guard: Term, then_branch: Term, else_branch: Term },
    Fix { binder: Name, annot: Type, body: Term },
}

#[derive(Clone)]
pub struct Term(Arc<TermKind>);

impl Term {
    pub fn new(kind: TermKind) -> Term {
        Term(Arc::new(kind))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// The node, when this is its only reference.
    pub(crate) fn get_mut(&mut self) -> Option<&mut TermKind> {
        Arc::get_mut(&mut self.0)
    }

    pub fn var(name: &str) -> Term {
        Term::new(TermKind::Var(Arc::from(name)))
    }

    pub fn constant(k: Const) -> Term {
        Term::new(TermKind::Const(k))
    }

    pub fn int(n: i64) -> Term {
        Term::constant(Const::Int(n))
    }

    pub fn bool(b: bool) -> Term {
        Term::constant(Const::Bool(b))
    }

    pub fn abs(binder: &str, annot: Type, body: Term) -> Term {
        Term::new(TermKind::Abs { binder: Arc::from(binder), annot, body })
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::new(TermKind::App(f, a))
    }

    pub fn op(op: Op, args: Vec<Term>) -> Term {
        Term::new(TermKind::Op { op, args })
    }

    pub fn binop(op: Op, l: Term, r: Term) -> Term {
        Term::op(op, vec![l, r])
    }

    pub fn cast(src: Type, ann: Annotation, tgt: Type, label: Label, subject: Term) -> Term {
        Term::new(TermKind::Cast { src, ann, tgt, label, subject })
    }

    /// A source-form cast `<T1 => T2 @ l> e`.
    pub fn source_cast(src: Type, tgt: Type, label: &str, subject: Term) -> Term {
        Term::cast(src, Annotation::Empty, tgt, Label::named(label), subject)
    }

    pub fn check(tgt: Type, current: Term, scrutinee: Const, label: Label) -> Term {
        Term::new(TermKind::Check { tgt, current, scrutinee, label })
    }

    pub fn blame(label: Label) -> Term {
        Term::new(TermKind::Blame(label))
    }

    pub fn stack(
        tgt: Type,
        status: Status,
        pending: RefinementList,
        scrutinee: Const,
        current: Term,
    ) -> Term {
        Term::new(TermKind::Stack { tgt, status, pending, scrutinee, current })
    }

    pub fn cond(guard: Term, then_branch: Term, else_branch: Term) -> Term {
        Term::new(TermKind::Cond { guard, then_branch, else_branch })
    }

    pub fn fix(binder: &str, annot: Type, body: Term) -> Term {
        Term::new(TermKind::Fix { binder: Arc::from(binder), annot, body })
    }

    pub fn as_const(&self) -> Option<Const> {
        match self.kind() {
            TermKind::Const(k) => Some(*k),
            _ => None,
        }
    }

    pub fn as_blame(&self) -> Option<&Label> {
        match self.kind() {
            TermKind::Blame(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_cast(&self) -> bool {
        matches!(self.kind(), TermKind::Cast { .. })
    }

    /// Direct children, in evaluation order. Types are not children.
    pub fn children(&self) -> Vec<&Term> {
        match self.kind() {
            TermKind::Var(_) | TermKind::Const(_) | TermKind::Blame(_) => vec![],
            TermKind::Abs { body, .. } | TermKind::Fix { body, .. } => vec![body],
            TermKind::App(f, a) => vec![f, a],
            TermKind::Op { args, .. } => args.iter().collect(),
            TermKind::Cast { subject, .. } => vec![subject],
            TermKind::Check { current, .. } | TermKind::Stack { current, .. } => vec![current],
            TermKind::Cond { guard, then_branch, else_branch } => {
                vec![guard, then_branch, else_branch]
            }
        }
    }

    /// True for forms that only arise during evaluation.
    pub fn is_runtime_form(&self) -> bool {
        matches!(
            self.kind(),
            TermKind::Check { .. } | TermKind::Blame(_) | TermKind::Stack { .. }
        )
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&surface::print(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&surface::print(self))
    }
}

// ---------------------------------------------------------------------------
// Free variables and substitution

pub fn free_vars(e: &Term) -> HashSet<Name> {
    let mut out = HashSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

pub fn type_free_vars(t: &Type) -> HashSet<Name> {
    let mut out = HashSet::new();
    collect_free_ty(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Term, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    match e.kind() {
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        TermKind::Const(_) | TermKind::Blame(_) => {}
        TermKind::Abs { binder, annot, body } | TermKind::Fix { binder, annot, body } => {
            collect_free_ty(annot, bound, out);
            bound.push(binder.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        TermKind::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        TermKind::Op { args, .. } => args.iter().for_each(|a| collect_free(a, bound, out)),
        TermKind::Cast { src, ann, tgt, subject, .. } => {
            collect_free_ty(src, bound, out);
            collect_free_ty(tgt, bound, out);
            collect_free_ann(ann, bound, out);
            collect_free(subject, bound, out);
        }
        TermKind::Check { tgt, current, .. } => {
            collect_free_ty(tgt, bound, out);
            collect_free(current, bound, out);
        }
        TermKind::Stack { tgt, pending, current, .. } => {
            collect_free_ty(tgt, bound, out);
            for entry in pending.entries() {
                collect_free_ty(&entry.ty, bound, out);
            }
            collect_free(current, bound, out);
        }
        TermKind::Cond { guard, then_branch, else_branch } => {
            collect_free(guard, bound, out);
            collect_free(then_branch, bound, out);
            collect_free(else_branch, bound, out);
        }
    }
}

fn collect_free_ty(t: &Type, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    if t.0.closed.get() == Some(&true) {
        return;
    }
    match t.kind() {
        TypeKind::Refine { binder, pred, .. } => {
            bound.push(binder.clone());
            collect_free(pred, bound, out);
            bound.pop();
        }
        TypeKind::Fun(d, c) => {
            collect_free_ty(d, bound, out);
            collect_free_ty(c, bound, out);
        }
    }
}

fn collect_free_ann(a: &Annotation, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    match a {
        Annotation::Empty => {}
        Annotation::Types(s) => s.iter().for_each(|t| collect_free_ty(t, bound, out)),
        Annotation::Coerce(c) => {
            for r in c.lists() {
                for entry in r.entries() {
                    collect_free_ty(&entry.ty, bound, out);
                }
            }
        }
    }
}

/// A name not in `avoid`, built by priming `base`.
pub fn fresh_name(base: &str, avoid: &HashSet<Name>) -> Name {
    let mut candidate = format!("{base}'");
    while avoid.contains(candidate.as_str()) {
        candidate.push('\'');
    }
    Arc::from(candidate)
}

/// Capture-avoiding substitution `e[v/x]`.
pub fn subst(e: &Term, x: &str, v: &Term) -> Term {
    let fv = free_vars(v);
    Subst { x, v, fv: &fv }.term(e).unwrap_or_else(|| e.clone())
}

/// Substitution into a type (only refinement predicates can mention `x`).
pub fn subst_type(t: &Type, x: &str, v: &Term) -> Type {
    let fv = free_vars(v);
    Subst { x, v, fv: &fv }.ty(t).unwrap_or_else(|| t.clone())
}

/// Renames free occurrences of `from` to the variable `to`.
fn rename(e: &Term, from: &str, to: &Name) -> Term {
    subst(e, from, &Term::new(TermKind::Var(to.clone())))
}

struct Subst<'a> {
    x: &'a str,
    v: &'a Term,
    fv: &'a HashSet<Name>,
}

impl Subst<'_> {
    /// `None` when nothing changed, so untouched subtrees stay shared.
    fn term(&self, e: &Term) -> Option<Term> {
        match e.kind() {
            TermKind::Var(y) => (&**y == self.x).then(|| self.v.clone()),
            TermKind::Const(_) | TermKind::Blame(_) => None,
            TermKind::Abs { binder, annot, body } => {
                let annot2 = self.ty(annot);
                let (binder2, body2) = self.under_binder(binder, body);
                if annot2.is_none() && body2.is_none() && binder2.is_none() {
                    return None;
                }
                Some(Term::new(TermKind::Abs {
                    binder: binder2.unwrap_or_else(|| binder.clone()),
                    annot: annot2.unwrap_or_else(|| annot.clone()),
                    body: body2.unwrap_or_else(|| body.clone()),
                }))
            }
            TermKind::Fix { binder, annot, body } => {
                let annot2 = self.ty(annot);
                let (binder2, body2) = self.under_binder(binder, body);
                if annot2.is_none() && body2.is_none() && binder2.is_none() {
                    return None;
                }
                Some(Term::new(TermKind::Fix {
                    binder: binder2.unwrap_or_else(|| binder.clone()),
                    annot: annot2.unwrap_or_else(|| annot.clone()),
                    body: body2.unwrap_or_else(|| body.clone()),
                }))
            }
            TermKind::App(f, a) => {
                let (f2, a2) = (self.term(f), self.term(a));
                if f2.is_none() && a2.is_none() {
                    return None;
                }
                Some(Term::app(f2.unwrap_or_else(|| f.clone()), a2.unwrap_or_else(|| a.clone())))
            }
            TermKind::Op { op, args } => {
                let new: Vec<Option<Term>> = args.iter().map(|a| self.term(a)).collect();
                if new.iter().all(Option::is_none) {
                    return None;
                }
                let args = new
                    .into_iter()
                    .zip(args)
                    .map(|(n, old)| n.unwrap_or_else(|| old.clone()))
                    .collect();
                Some(Term::op(*op, args))
            }
            TermKind::Cast { src, ann, tgt, label, subject } => {
                let src2 = self.ty(src);
                let tgt2 = self.ty(tgt);
                let ann2 = self.ann(ann);
                let sub2 = self.term(subject);
                if src2.is_none() && tgt2.is_none() && ann2.is_none() && sub2.is_none() {
                    return None;
                }
                Some(Term::cast(
                    src2.unwrap_or_else(|| src.clone()),
                    ann2.unwrap_or_else(|| ann.clone()),
                    tgt2.unwrap_or_else(|| tgt.clone()),
                    label.clone(),
                    sub2.unwrap_or_else(|| subject.clone()),
                ))
            }
            TermKind::Check { tgt, current, scrutinee, label } => {
                let tgt2 = self.ty(tgt);
                let cur2 = self.term(current);
                if tgt2.is_none() && cur2.is_none() {
                    return None;
                }
                Some(Term::check(
                    tgt2.unwrap_or_else(|| tgt.clone()),
                    cur2.unwrap_or_else(|| current.clone()),
                    *scrutinee,
                    label.clone(),
                ))
            }
            TermKind::Stack { tgt, status, pending, scrutinee, current } => {
                let tgt2 = self.ty(tgt);
                let pend2 = self.list(pending);
                let cur2 = self.term(current);
                if tgt2.is_none() && pend2.is_none() && cur2.is_none() {
                    return None;
                }
                Some(Term::stack(
                    tgt2.unwrap_or_else(|| tgt.clone()),
                    *status,
                    pend2.unwrap_or_else(|| pending.clone()),
                    *scrutinee,
                    cur2.unwrap_or_else(|| current.clone()),
                ))
            }
            TermKind::Cond { guard, then_branch, else_branch } => {
                let g = self.term(guard);
                let t = self.term(then_branch);
                let f = self.term(else_branch);
                if g.is_none() && t.is_none() && f.is_none() {
                    return None;
                }
                Some(Term::cond(
                    g.unwrap_or_else(|| guard.clone()),
                    t.unwrap_or_else(|| then_branch.clone()),
                    f.unwrap_or_else(|| else_branch.clone()),
                ))
            }
        }
    }

    /// Handles a binder scoping over `body`: stops at shadowing, renames on
    /// capture. Returns `(renamed binder, new body)`.
    fn under_binder(&self, binder: &Name, body: &Term) -> (Option<Name>, Option<Term>) {
        if &**binder == self.x {
            return (None, None);
        }
        if self.fv.contains(binder) {
            let body_fv = free_vars(body);
            if !body_fv.contains(self.x) {
                return (None, None);
            }
            let mut avoid: HashSet<Name> = self.fv.clone();
            avoid.extend(body_fv);
            avoid.insert(Arc::from(self.x));
            let fresh = fresh_name(binder, &avoid);
            let renamed = rename(body, binder, &fresh);
            let new_body = self.term(&renamed).unwrap_or(renamed);
            return (Some(fresh), Some(new_body));
        }
        (None, self.term(body))
    }

    fn ty(&self, t: &Type) -> Option<Type> {
        if t.is_closed() {
            return None;
        }
        match t.kind() {
            TypeKind::Refine { binder, base, pred } => {
                let (b2, p2) = self.under_binder(binder, pred);
                if b2.is_none() && p2.is_none() {
                    return None;
                }
                let binder = b2.unwrap_or_else(|| binder.clone());
                Some(Type::from_kind(TypeKind::Refine {
                    binder,
                    base: *base,
                    pred: p2.unwrap_or_else(|| pred.clone()),
                }))
            }
            TypeKind::Fun(d, c) => {
                let (d2, c2) = (self.ty(d), self.ty(c));
                if d2.is_none() && c2.is_none() {
                    return None;
                }
                Some(Type::fun(d2.unwrap_or_else(|| d.clone()), c2.unwrap_or_else(|| c.clone())))
            }
        }
    }

    fn list(&self, r: &RefinementList) -> Option<RefinementList> {
        let new: Vec<Option<Type>> = r.entries().iter().map(|e| self.ty(&e.ty)).collect();
        if new.iter().all(Option::is_none) {
            return None;
        }
        Some(RefinementList(
            new.into_iter()
                .zip(r.entries())
                .map(|(n, e)| RefEntry { ty: n.unwrap_or_else(|| e.ty.clone()), label: e.label.clone() })
                .collect(),
        ))
    }

    fn coercion(&self, c: &Coercion) -> Option<Coercion> {
        match c {
            Coercion::Refs(r) => self.list(r).map(Coercion::Refs),
            Coercion::Fun(d, k) => {
                let (d2, k2) = (self.coercion(d), self.coercion(k));
                if d2.is_none() && k2.is_none() {
                    return None;
                }
                Some(Coercion::Fun(
                    d2.map(Arc::new).unwrap_or_else(|| d.clone()),
                    k2.map(Arc::new).unwrap_or_else(|| k.clone()),
                ))
            }
        }
    }

    fn ann(&self, a: &Annotation) -> Option<Annotation> {
        match a {
            Annotation::Empty => None,
            Annotation::Types(s) => {
                if s.iter().all(Type::is_closed) {
                    return None;
                }
                Some(Annotation::Types(s.iter().map(|t| self.ty(t).unwrap_or_else(|| t.clone())).collect()))
            }
            Annotation::Coerce(c) => self.coercion(c).map(Annotation::Coerce),
        }
    }
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    Alpha::default().term(a, b)
}

/// Type alpha-equivalence (same as `==` on closed types).
pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    Alpha::default().ty(a, b)
}

#[derive(Default)]
struct Alpha {
    left: Vec<Name>,
    right: Vec<Name>,
}

impl Alpha {
    fn lookup(env: &[Name], x: &Name) -> Option<usize> {
        env.iter().rev().position(|y| y == x)
    }

    fn bind<R>(&mut self, a: &Name, b: &Name, f: impl FnOnce(&mut Self) -> R) -> R {
        self.left.push(a.clone());
        self.right.push(b.clone());
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn term(&mut self, a: &Term, b: &Term) -> bool {
        if a.ptr_eq(b) && self.left == self.right {
            return true;
        }
        match (a.kind(), b.kind()) {
            (TermKind::Var(x), TermKind::Var(y)) => {
                match (Self::lookup(&self.left, x), Self::lookup(&self.right, y)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (TermKind::Const(k1), TermKind::Const(k2)) => k1 == k2,
            (TermKind::Blame(l1), TermKind::Blame(l2)) => l1 == l2,
            (
                TermKind::Abs { binder: x1, annot: t1, body: b1 },
                TermKind::Abs { binder: x2, annot: t2, body: b2 },
            )
            | (
                TermKind::Fix { binder: x1, annot: t1, body: b1 },
                TermKind::Fix { binder: x2, annot: t2, body: b2 },
            ) => self.ty(t1, t2) && self.bind(x1, x2, |s| s.term(b1, b2)),
            (TermKind::App(f1, a1), TermKind::App(f2, a2)) => self.term(f1, f2) && self.term(a1, a2),
            (TermKind::Op { op: o1, args: a1 }, TermKind::Op { op: o2, args: a2 }) => {
                o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| self.term(x, y))
            }
            (
                TermKind::Cast { src: s1, ann: n1, tgt: t1, label: l1, subject: e1 },
                TermKind::Cast { src: s2, ann: n2, tgt: t2, label: l2, subject: e2 },
            ) => {
                l1 == l2
                    && self.ty(s1, s2)
                    && self.ty(t1, t2)
                    && self.ann(n1, n2)
                    && self.term(e1, e2)
            }
            (
                TermKind::Check { tgt: t1, current: c1, scrutinee: k1, label: l1 },
                TermKind::Check { tgt: t2, current: c2, scrutinee: k2, label: l2 },
            ) => k1 == k2 && l1 == l2 && self.ty(t1, t2) && self.term(c1, c2),
            (
                TermKind::Stack { tgt: t1, status: s1, pending: r1, scrutinee: k1, current: c1 },
                TermKind::Stack { tgt: t2, status: s2, pending: r2, scrutinee: k2, current: c2 },
            ) => {
                s1 == s2
                    && k1 == k2
                    && self.ty(t1, t2)
                    && self.list(r1, r2)
                    && self.term(c1, c2)
            }
            (
                TermKind::Cond { guard: g1, then_branch: t1, else_branch: f1 },
                TermKind::Cond { guard: g2, then_branch: t2, else_branch: f2 },
            ) => self.term(g1, g2) && self.term(t1, t2) && self.term(f1, f2),
            _ => false,
        }
    }

    fn ty(&mut self, a: &Type, b: &Type) -> bool {
        if a.is_closed() && b.is_closed() {
            return a == b;
        }
        match (a.kind(), b.kind()) {
            (
                TypeKind::Refine { binder: x1, base: b1, pred: p1 },
                TypeKind::Refine { binder: x2, base: b2, pred: p2 },
            ) => b1 == b2 && self.bind(x1, x2, |s| s.term(p1, p2)),
            (TypeKind::Fun(d1, c1), TypeKind::Fun(d2, c2)) => self.ty(d1, d2) && self.ty(c1, c2),
            _ => false,
        }
    }

    fn list(&mut self, a: &RefinementList, b: &RefinementList) -> bool {
        a.len() == b.len()
            && a.entries().iter().zip(b.entries()).all(|(x, y)| x.label == y.label && self.ty(&x.ty, &y.ty))
    }

    fn coercion(&mut self, a: &Coercion, b: &Coercion) -> bool {
        match (a, b) {
            (Coercion::Refs(r1), Coercion::Refs(r2)) => self.list(r1, r2),
            (Coercion::Fun(d1, c1), Coercion::Fun(d2, c2)) => self.coercion(d1, d2) && self.coercion(c1, c2),
            _ => false,
        }
    }

    fn ann(&mut self, a: &Annotation, b: &Annotation) -> bool {
        match (a, b) {
            (Annotation::Empty, Annotation::Empty) => true,
            (Annotation::Types(s1), Annotation::Types(s2)) => s1 == s2,
            (Annotation::Coerce(c1), Annotation::Coerce(c2)) => self.coercion(c1, c2),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Structural measures

/// `types(T)`: the type, its structural parts, and types inside predicates.
pub fn types_of_type(t: &Type) -> TypeSet {
    let mut out = TypeSet::new();
    add_type(t, &mut out);
    out
}

/// `types(e)`: every type occurring in `e`.
pub fn types_of(e: &Term) -> TypeSet {
    let mut out = TypeSet::new();
    add_term(e, &mut out);
    out
}

/// `types(a)` for annotations.
pub fn types_of_annotation(a: &Annotation) -> TypeSet {
    let mut out = TypeSet::new();
    add_ann(a, &mut out);
    out
}

fn add_type(t: &Type, out: &mut TypeSet) {
    if out.contains(t) {
        return;
    }
    out.insert(t.clone());
    match t.kind() {
        TypeKind::Refine { pred, .. } => add_term(pred, out),
        TypeKind::Fun(d, c) => {
            add_type(d, out);
            add_type(c, out);
        }
    }
}

fn add_list(r: &RefinementList, out: &mut TypeSet) {
    // list entries contribute just the refinement itself
    for entry in r.entries() {
        out.insert(entry.ty.clone());
    }
}

fn add_ann(a: &Annotation, out: &mut TypeSet) {
    match a {
        Annotation::Empty => {}
        Annotation::Types(s) => s.iter().for_each(|t| add_type(t, out)),
        Annotation::Coerce(c) => c.lists().into_iter().for_each(|r| add_list(r, out)),
    }
}

fn add_term(e: &Term, out: &mut TypeSet) {
    match e.kind() {
        TermKind::Var(_) | TermKind::Const(_) | TermKind::Blame(_) => {}
        TermKind::Abs { annot, body, .. } | TermKind::Fix { annot, body, .. } => {
            add_type(annot, out);
            add_term(body, out);
        }
        TermKind::App(f, a) => {
            add_term(f, out);
            add_term(a, out);
        }
        TermKind::Op { args, .. } => args.iter().for_each(|a| add_term(a, out)),
        TermKind::Cast { src, ann, tgt, subject, .. } => {
            add_type(src, out);
            add_type(tgt, out);
            add_ann(ann, out);
            add_term(subject, out);
        }
        TermKind::Check { tgt, current, .. } => {
            add_type(tgt, out);
            add_term(current, out);
        }
        TermKind::Stack { tgt, pending, current, .. } => {
            add_type(tgt, out);
            add_list(pending, out);
            add_term(current, out);
        }
        TermKind::Cond { guard, then_branch, else_branch } => {
            add_term(guard, out);
            add_term(then_branch, out);
            add_term(else_branch, out);
        }
    }
}

/// 1 for refinements, one more than the taller side for arrows.
pub fn height(t: &Type) -> usize {
    match t.kind() {
        TypeKind::Refine { .. } => 1,
        TypeKind::Fun(d, c) => 1 + height(d).max(height(c)),
    }
}

/// Number of term nodes. Types (and the predicates inside them) are not
/// counted.
pub fn term_size(e: &Term) -> usize {
    1 + e.children().into_iter().map(term_size).sum::<usize>()
}

/// Refinement-type predicate instantiated at `k`: `e[k/x]`.
pub fn instantiate(t: &Type, k: Const) -> Option<Term> {
    let (binder, _, pred) = t.refinement()?;
    Some(subst(pred, binder, &Term::constant(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse, parse_type};

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn subst_hits_variable() {
        let e = subst(&Term::var("x"), "x", &Term::int(5));
        assert_eq!(e.as_const(), Some(Const::Int(5)));
    }

    #[test]
    fn subst_renames_to_avoid_capture() {
        let any = ty("{x:Int|true}");
        let e = Term::abs("y", any.clone(), Term::var("x"));
        let out = subst(&e, "x", &Term::var("y"));
        match out.kind() {
            TermKind::Abs { binder, body, .. } => {
                assert_eq!(&**binder, "y'");
                assert!(matches!(body.kind(), TermKind::Var(v) if &**v == "y"));
            }
            other => panic!("expected abstraction, got {other:?}"),
        }
        assert!(alpha_eq(&out, &Term::abs("z", any, Term::var("y"))));
    }

    #[test]
    fn subst_into_predicate_check_state() {
        let e = parse("x >= 0").unwrap();
        let out = subst(&e, "x", &Term::int(-1));
        assert_eq!(out.to_string(), "-1 >= 0");
    }

    #[test]
    fn subst_stops_at_shadowing_binder() {
        let e = parse(r"\x:{x:Int|true}. x").unwrap();
        let out = subst(&e, "x", &Term::int(3));
        assert!(out.ptr_eq(&e));
    }

    #[test]
    fn alpha_eq_examples() {
        assert!(alpha_eq_type(&ty("{x:Int|x>=0}"), &ty("{y:Int|y>=0}")));
        assert!(!alpha_eq_type(&ty("{x:Int|x>=0}"), &ty("{x:Int|x mod 2 = 0}")));
        let id1 = parse(r"\x:{x:Int|true}. x").unwrap();
        let id2 = parse(r"\z:{x:Int|true}. z").unwrap();
        assert!(alpha_eq(&id1, &id2));
        let k = parse(r"\z:{x:Int|true}. y").unwrap();
        assert!(!alpha_eq(&id1, &k));
    }

    #[test]
    fn types_of_examples() {
        assert!(types_of(&Term::blame(Label::named("l"))).is_empty());
        let cast = parse("<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)").unwrap();
        let ts = types_of(&cast);
        assert_eq!(ts.len(), 2);
        assert!(ts.contains(&ty("{x:Int|true}")) && ts.contains(&ty("{x:Int|x >= 0}")));
        let lam = parse(r"\x:({x:Int|true} -> {x:Int|x >= 0}). x").unwrap();
        let ts = types_of(&lam);
        assert_eq!(ts.len(), 3);
        assert!(ts.contains(&ty("{x:Int|true} -> {x:Int|x >= 0}")));
    }

    #[test]
    fn height_examples() {
        assert_eq!(height(&ty("{x:Int|x >= 0}")), 1);
        assert_eq!(height(&ty("{x:Int|true} -> {x:Int|x >= 0}")), 2);
        assert_eq!(height(&ty("({x:Int|true} -> {x:Int|x >= 0}) -> {x:Int|true}")), 3);
    }

    #[test]
    fn term_size_examples() {
        assert_eq!(term_size(&Term::int(5)), 1);
        let e = parse(r"(\x:{x:Int|true}. x) 5").unwrap();
        assert_eq!(term_size(&e), 4);
    }

    #[test]
    fn refinement_list_hygiene() {
        let nat = ty("{x:Int|x >= 0}");
        let nat2 = ty("{y:Int|y >= 0}");
        let r = RefinementList::from_entries([(nat, Label::named("a")), (nat2, Label::named("b"))]);
        assert!(!r.is_duplicate_free());
        assert_eq!(r.single_base(), Some(BaseType::Int));
    }
}
