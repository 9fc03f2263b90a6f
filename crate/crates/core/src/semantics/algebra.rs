//! Annotation algebra: cast translation to coercions, coercion merging,
//! type-set merging, and splitting annotations across function types.

use crate::syntax::{
    alpha_eq, Annotation, Coercion, Label, Mode, RefEntry, RefinementList, Status, Term, Type,
    TypeKind, TypeSet,
};

use super::oracle::Oracle;

/// The coercion that performs exactly the checks of `<T1 => T2>^l`.
/// `None` when the types are not similar.
pub fn coerce(t1: &Type, t2: &Type, l: &Label) -> Option<Coercion> {
    match (t1.kind(), t2.kind()) {
        (TypeKind::Refine { base: b1, .. }, TypeKind::Refine { base: b2, .. }) if b1 == b2 => {
            Some(Coercion::Refs(RefinementList::single(t2.clone(), l.clone())))
        }
        (TypeKind::Fun(d1, c1), TypeKind::Fun(d2, c2)) => {
            Some(Coercion::fun(coerce(d2, d1, l)?, coerce(c1, c2, l)?))
        }
        _ => None,
    }
}

/// `r \ T`: drops every entry implied by `t`, keeping survivors in order.
pub fn ref_drop(oracle: &Oracle, r: &RefinementList, t: &Type) -> RefinementList {
    RefinementList(r.entries().iter().filter(|e| !oracle.implies(t, &e.ty)).cloned().collect())
}

/// `r1 |> r2`. Each entry of `r1` is kept and knocks out what it implies
/// further right, so on collisions the leftmost label survives.
pub fn list_merge(oracle: &Oracle, r1: &RefinementList, r2: &RefinementList) -> RefinementList {
    let mut acc = r2.clone();
    for entry in r1.entries().iter().rev() {
        let rest = ref_drop(oracle, &acc, &entry.ty);
        let mut out = Vec::with_capacity(rest.len() + 1);
        out.push(entry.clone());
        out.extend(rest.0);
        acc = RefinementList(out);
    }
    acc
}

/// `c1 |> c2`, contravariant in the domain. `None` on mismatched shapes.
pub fn coercion_merge(oracle: &Oracle, c1: &Coercion, c2: &Coercion) -> Option<Coercion> {
    match (c1, c2) {
        (Coercion::Refs(r1), Coercion::Refs(r2)) => {
            Some(Coercion::Refs(list_merge(oracle, r1, r2)))
        }
        (Coercion::Fun(d1, k1), Coercion::Fun(d2, k2)) => Some(Coercion::fun(
            coercion_merge(oracle, d2, d1)?,
            coercion_merge(oracle, k1, k2)?,
        )),
        _ => None,
    }
}

/// Annotation for `<T1 =a1=> T2>` composed with `<T2 =a2=> T3>`, inner
/// cast first. `None` where the mode does not merge.
pub fn merge(
    mode: Mode,
    oracle: &Oracle,
    _t1: &Type,
    a1: &Annotation,
    t2: &Type,
    a2: &Annotation,
    _t3: &Type,
) -> Option<Annotation> {
    match (mode, a1, a2) {
        (Mode::Forgetful, Annotation::Empty, Annotation::Empty) => Some(Annotation::Empty),
        (Mode::Heedful, Annotation::Types(s1), Annotation::Types(s2)) => {
            let mut s = s1.union(s2);
            s.insert(t2.clone());
            Some(Annotation::Types(s))
        }
        (Mode::Eidetic, Annotation::Coerce(c1), Annotation::Coerce(c2)) => {
            coercion_merge(oracle, c1, c2).map(Annotation::Coerce)
        }
        _ => None,
    }
}

/// `s ∨ (e1 = e2)`.
pub fn status_join(s: Status, e_target: &Term, e_popped: &Term) -> Status {
    match s {
        Status::Checked => Status::Checked,
        Status::Unchecked if alpha_eq(e_target, e_popped) => Status::Checked,
        Status::Unchecked => Status::Unchecked,
    }
}

/// `(dom(a), cod(a))`. `None` when a set member is not an arrow or the
/// coercion is a refinement list.
pub fn split_annotation(a: &Annotation) -> Option<(Annotation, Annotation)> {
    match a {
        Annotation::Empty => Some((Annotation::Empty, Annotation::Empty)),
        Annotation::Types(s) => {
            let mut dom = TypeSet::new();
            let mut cod = TypeSet::new();
            for t in s {
                let (d, c) = t.arrow()?;
                dom.insert(d.clone());
                cod.insert(c.clone());
            }
            Some((Annotation::Types(dom), Annotation::Types(cod)))
        }
        Annotation::Coerce(Coercion::Fun(d, c)) => {
            Some((Annotation::Coerce((**d).clone()), Annotation::Coerce((**c).clone())))
        }
        Annotation::Coerce(Coercion::Refs(_)) => None,
    }
}

/// Every label mentioned by a coercion, left to right.
pub fn coercion_labels(c: &Coercion) -> Vec<Label> {
    c.lists().into_iter().flat_map(|r| r.entries().iter().map(|e| e.label.clone())).collect()
}

/// True when `sub` can be obtained from `sup` by deleting entries.
pub fn is_subsequence(sub: &RefinementList, sup: &RefinementList) -> bool {
    let mut it = sup.entries().iter();
    sub.entries().iter().all(|e: &RefEntry| it.any(|f| f == e))
}
