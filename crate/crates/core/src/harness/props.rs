//! Randomized checks of the annotation algebra: list merging, dropping,
//! and the idempotence of heedful and eidetic casts on constants.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::semantics::{coercion_merge, list_merge, ref_drop, Machine, Oracle};
use crate::semantics::algebra::is_subsequence;
use crate::surface::{parse_type, print_list};
use crate::syntax::{
    instantiate, Annotation, Coercion, Const, Label, Mode, RefEntry, RefinementList, Term, Type,
    TypeSet,
};

use super::gen::{algebra_pool, rng_for};

/// Does `k` satisfy the refinement `t`?
pub fn satisfies(t: &Type, k: Const) -> bool {
    let Some(pred) = instantiate(t, k) else { return false };
    Machine::new(Mode::Classic).eval(&pred, 10_000).outcome.constant() == Some(Const::Bool(true))
}

/// A duplicate-free list over `pool` with labels `l1`..`l5`.
pub fn gen_list(rng: &mut ChaCha8Rng, pool: &[Type], max_len: usize) -> RefinementList {
    let len = rng.gen_range(0..=max_len.min(pool.len()));
    let tys: Vec<&Type> = pool.choose_multiple(rng, len).collect();
    RefinementList(
        tys.into_iter()
            .map(|ty| RefEntry { ty: ty.clone(), label: Label::named(&format!("l{}", rng.gen_range(1..=5))) })
            .collect(),
    )
}

/// A coercion of arrow depth at most `depth` built from [`gen_list`].
pub fn gen_coercion(rng: &mut ChaCha8Rng, pool: &[Type], depth: usize) -> Coercion {
    if depth == 0 || rng.gen_bool(0.6) {
        Coercion::Refs(gen_list(rng, pool, 4))
    } else {
        Coercion::fun(gen_coercion(rng, pool, depth - 1), gen_coercion(rng, pool, depth - 1))
    }
}

/// Same arrow shape as `c`, fresh lists.
fn gen_like(rng: &mut ChaCha8Rng, pool: &[Type], c: &Coercion) -> Coercion {
    match c {
        Coercion::Refs(_) => Coercion::Refs(gen_list(rng, pool, 4)),
        Coercion::Fun(d, k) => Coercion::fun(gen_like(rng, pool, d), gen_like(rng, pool, k)),
    }
}

/// Oracle with a few true implications between pool members.
pub fn sample_axioms() -> Oracle {
    let t = |s: &str| parse_type(s).expect("axiom type parses");
    Oracle::from_axioms([
        (t("{x:Int|x > 0}"), t("{x:Int|x >= 0}")),
        (t("{x:Int|x > 0}"), t("{x:Int|x <> 0}")),
        (t("{x:Int|x < 0}"), t("{x:Int|x <> 0}")),
        (t("{x:Int|x mod 2 = 1}"), t("{x:Int|x <> 0}")),
    ])
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AlgebraReport {
    pub lists: usize,
    pub coercions: usize,
    pub heedful_pairs: usize,
    pub eidetic_pairs: usize,
    pub violations: Vec<String>,
    /// Triples where the two groupings of a list merge disagree.
    pub associativity_counterexamples: Vec<String>,
}

fn check_lists(oracle: &Oracle, alpha: bool, r1: &RefinementList, r2: &RefinementList, out: &mut AlgebraReport) {
    let m = list_merge(oracle, r1, r2);
    if !m.is_duplicate_free() {
        out.violations.push(format!("merge has duplicates: {} |> {} = {}", print_list(r1), print_list(r2), print_list(&m)));
    }
    if alpha {
        let mut expected: Vec<RefEntry> = Vec::new();
        for e in r1.entries().iter().chain(r2.entries()) {
            if !expected.iter().any(|x| x.ty == e.ty) {
                expected.push(e.clone());
            }
        }
        if m.entries() != expected.as_slice() {
            out.violations.push(format!("leftmost label not kept: {} |> {} = {}", print_list(r1), print_list(r2), print_list(&m)));
        }
    }
    for e in r2.entries() {
        let d = ref_drop(oracle, r1, &e.ty);
        if !is_subsequence(&d, r1) {
            out.violations.push(format!("drop is not a subsequence: {} \\ {}", print_list(r1), e.ty));
        }
        if d.entries().iter().any(|x| oracle.implies(&e.ty, &x.ty)) {
            out.violations.push(format!("drop kept an implied entry: {} \\ {}", print_list(r1), e.ty));
        }
    }
}

fn eval_const(m: &Machine, e: &Term) -> String {
    m.eval(e, 10_000).outcome.to_string()
}

/// Runs `lists` list/coercion samples and `pairs` heedful and eidetic
/// constant/cast samples, all drawn from `seed`.
pub fn check_algebra(seed: u64, lists: usize, pairs: usize) -> AlgebraReport {
    let mut rng = rng_for(seed, 0xA16E);
    let pool = algebra_pool();
    let alpha = Oracle::AlphaEq;
    let axioms = sample_axioms();
    let mut out = AlgebraReport::default();

    for i in 0..lists {
        let (oracle, is_alpha) = if i % 2 == 0 { (&alpha, true) } else { (&axioms, false) };
        if i % 4 < 3 {
            let r1 = gen_list(&mut rng, &pool, 5);
            let r2 = gen_list(&mut rng, &pool, 5);
            let r3 = gen_list(&mut rng, &pool, 5);
            check_lists(oracle, is_alpha, &r1, &r2, &mut out);
            let left = list_merge(oracle, &list_merge(oracle, &r1, &r2), &r3);
            let right = list_merge(oracle, &r1, &list_merge(oracle, &r2, &r3));
            if left != right {
                out.associativity_counterexamples.push(format!(
                    "[{}] [{}] [{}] under {}",
                    print_list(&r1),
                    print_list(&r2),
                    print_list(&r3),
                    oracle.name()
                ));
            }
            out.lists += 1;
        } else {
            let c1 = gen_coercion(&mut rng, &pool, 2);
            let c2 = gen_like(&mut rng, &pool, &c1);
            match coercion_merge(oracle, &c1, &c2) {
                Some(m) => {
                    if m.lists().iter().any(|r| !r.is_duplicate_free()) {
                        out.violations.push(format!("coercion merge has duplicates: {c1:?} |> {c2:?}"));
                    }
                }
                None => out.violations.push(format!("same-shape coercions failed to merge: {c1:?} |> {c2:?}")),
            }
            out.coercions += 1;
        }
    }

    let heedful = Machine::new(Mode::Heedful);
    let eidetic = Machine::new(Mode::Eidetic);
    let l = Label::named("l");
    let mut attempts = 0;
    while out.heedful_pairs + out.eidetic_pairs < 2 * pairs && attempts < 100 * pairs {
        attempts += 1;
        let k = Const::Int(rng.gen_range(-6..=12));
        let sat: Vec<&Type> = pool.iter().filter(|t| satisfies(t, k)).collect();
        let (Some(&t1), Some(&t3)) = (sat.choose(&mut rng), sat.choose(&mut rng)) else { continue };
        let t2 = pool.choose(&mut rng).unwrap().clone();
        let k_term = Term::constant(k);

        if out.heedful_pairs < pairs {
            // A set member the constant already satisfies never changes the result.
            let mut s: TypeSet = pool.choose_multiple(&mut rng, 3).cloned().collect();
            s.insert(t3.clone());
            let with = Term::cast(t1.clone(), Annotation::Types(s.clone()), t2.clone(), l.clone(), k_term.clone());
            let mut fewer = s.clone();
            fewer.remove(t3);
            let without = Term::cast(t1.clone(), Annotation::Types(fewer), t2.clone(), l.clone(), k_term.clone());
            let (a, b) = (eval_const(&heedful, &with), eval_const(&heedful, &without));
            if a != b {
                out.violations.push(format!("heedful idempotence: {with} gave {a}, {without} gave {b}"));
            }
            out.heedful_pairs += 1;
        }

        if out.eidetic_pairs < pairs {
            // Entries implied by something the constant satisfies can be dropped.
            let r1 = gen_list(&mut rng, &pool, 3);
            let r2 = list_merge(&alpha, &gen_list(&mut rng, &pool, 3), &RefinementList::single(t2.clone(), l.clone()));
            let cast = |r: RefinementList| {
                Term::cast(t1.clone(), Annotation::Coerce(Coercion::Refs(r)), t2.clone(), Label::Empty, k_term.clone())
            };
            let full = cast(list_merge(&alpha, &r1, &r2));
            let dropped = cast(list_merge(&alpha, &r1, &ref_drop(&alpha, &r2, t3)));
            let src_dropped = cast(ref_drop(&alpha, &list_merge(&alpha, &r1, &r2), t1));
            let a = eval_const(&eidetic, &full);
            for other in [&dropped, &src_dropped] {
                let b = eval_const(&eidetic, other);
                if a != b {
                    out.violations.push(format!("eidetic idempotence: {full} gave {a}, {other} gave {b}"));
                }
            }
            out.eidetic_pairs += 1;
        }
    }
    if out.heedful_pairs < pairs || out.eidetic_pairs < pairs {
        out.violations.push(format!("only generated {} + {} pairs", out.heedful_pairs, out.eidetic_pairs));
    }
    out
}
