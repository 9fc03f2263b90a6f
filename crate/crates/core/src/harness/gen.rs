//! Seeded, type-directed generation of well-typed source programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::semantics::{Machine, Outcome};
use crate::surface::parse_type;
use crate::syntax::{BaseType, Mode, Name, Op, Term, Type, TypeKind};
use crate::typecheck::check_source;

/// `ANY`, `NAT`, `EVEN`, `NZ`: the refinements source programs draw from.
pub fn source_pool() -> Vec<Type> {
    ["{x:Int|true}", "{x:Int|x >= 0}", "{x:Int|x mod 2 = 0}", "{x:Int|x <> 0}"]
        .iter()
        .map(|s| parse_type(s).expect("pool type parses"))
        .collect()
}

/// A wider pool of Int refinements for exercising the annotation algebra.
pub fn algebra_pool() -> Vec<Type> {
    let mut pool = source_pool();
    for s in ["{x:Int|x > 0}", "{x:Int|x mod 2 = 1}", "{x:Int|x < 10}", "{x:Int|x < 0}", "{x:Int|x mod 3 = 0}"]
    {
        pool.push(parse_type(s).expect("pool type parses"));
    }
    pool
}

/// The generator's random stream for `(seed, size)`.
pub fn rng_for(seed: u64, size: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ size as u64)
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    pool: Vec<Type>,
    env: Vec<(Name, Type)>,
    labels: usize,
    vars: usize,
}

impl Gen<'_> {
    fn any(&self) -> Type {
        self.pool[0].clone()
    }

    fn base(&mut self) -> Type {
        self.pool.choose(self.rng).expect("non-empty pool").clone()
    }

    fn ty(&mut self, depth: usize) -> Type {
        if depth == 0 || self.rng.gen_bool(0.7) {
            self.base()
        } else {
            Type::fun(self.ty(depth - 1), self.ty(depth - 1))
        }
    }

    /// A random type with the same skeleton as `t`.
    fn similar(&mut self, t: &Type) -> Type {
        match t.kind() {
            TypeKind::Refine { base: BaseType::Int, .. } => self.base(),
            TypeKind::Refine { .. } => t.clone(),
            TypeKind::Fun(d, c) => {
                let (d, c) = (d.clone(), c.clone());
                Type::fun(self.similar(&d), self.similar(&c))
            }
        }
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("l{}", self.labels)
    }

    fn var(&mut self) -> Name {
        self.vars += 1;
        Name::from(format!("x{}", self.vars))
    }

    fn small_int(&mut self) -> Term {
        Term::int(self.rng.gen_range(-3..=10))
    }

    fn cast(&mut self, src: Type, tgt: &Type, subject: Term) -> Term {
        let l = self.label();
        Term::source_cast(src, tgt.clone(), &l, subject)
    }

    fn leaf(&mut self, t: &Type) -> Term {
        let vars: Vec<Name> =
            self.env.iter().filter(|(_, vt)| vt == t).map(|(x, _)| x.clone()).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.6) {
            return Term::var(vars.choose(self.rng).unwrap());
        }
        match t.kind() {
            TypeKind::Refine { base: BaseType::Bool, .. } => Term::bool(self.rng.gen_bool(0.5)),
            TypeKind::Refine { .. } if *t == self.any() => self.small_int(),
            TypeKind::Refine { .. } => {
                let k = self.small_int();
                self.cast(self.any(), t, k)
            }
            TypeKind::Fun(d, c) => {
                let (d, c) = (d.clone(), c.clone());
                self.lambda(&d, &c, 1)
            }
        }
    }

    fn lambda(&mut self, d: &Type, c: &Type, size: usize) -> Term {
        let x = self.var();
        self.env.push((x.clone(), d.clone()));
        let body = self.term(c, size);
        self.env.pop();
        Term::abs(&x, d.clone(), body)
    }

    /// A cast into `t`, often of another cast.
    fn cast_into(&mut self, t: &Type, size: usize) -> Term {
        let src = self.similar(t);
        let subject = if size >= 3 && self.rng.gen_bool(0.5) {
            self.cast_into(&src, size - 1)
        } else {
            self.term(&src, size.saturating_sub(1))
        };
        self.cast(src, t, subject)
    }

    fn app_into(&mut self, t: &Type, size: usize) -> Term {
        let a = self.ty(1);
        let half = size.saturating_sub(1) / 2;
        let f = self.term(&Type::fun(a.clone(), t.clone()), size.saturating_sub(1) - half);
        let arg = self.term(&a, half);
        Term::app(f, arg)
    }

    fn term(&mut self, t: &Type, size: usize) -> Term {
        if size <= 2 {
            return self.leaf(t);
        }
        let rest = size - 1;
        match t.kind() {
            TypeKind::Fun(d, c) => {
                let (d, c) = (d.clone(), c.clone());
                match self.rng.gen_range(0..7) {
                    0..=2 => self.lambda(&d, &c, rest),
                    3..=5 => self.cast_into(t, rest),
                    _ => self.app_into(t, rest),
                }
            }
            TypeKind::Refine { base: BaseType::Bool, .. } => {
                let any = self.any();
                match self.rng.gen_range(0..6) {
                    0..=3 => {
                        let op = *[Op::Eq, Op::Neq, Op::Lt, Op::Le, Op::Gt, Op::Ge]
                            .choose(self.rng)
                            .unwrap();
                        let l = self.term(&any, rest / 2);
                        let r = self.term(&any, rest - rest / 2);
                        Term::binop(op, l, r)
                    }
                    4 => Term::op(Op::Not, vec![self.term(t, rest)]),
                    _ => {
                        let op = if self.rng.gen_bool(0.5) { Op::And } else { Op::Or };
                        let l = self.term(t, rest / 2);
                        let r = self.term(t, rest - rest / 2);
                        Term::binop(op, l, r)
                    }
                }
            }
            TypeKind::Refine { .. } if *t == self.any() => match self.rng.gen_range(0..11) {
                0..=2 => {
                    let op = *[Op::Add, Op::Sub, Op::Mul].choose(self.rng).unwrap();
                    let l = self.term(t, rest / 2);
                    let r = self.term(t, rest - rest / 2);
                    Term::binop(op, l, r)
                }
                3 => {
                    let op = if self.rng.gen_bool(0.5) { Op::Div } else { Op::Mod };
                    let nz = self.pool[3].clone();
                    let l = self.term(t, rest / 2);
                    let r = self.cast_into(&nz, rest - rest / 2);
                    Term::binop(op, l, r)
                }
                4..=7 => self.cast_into(t, rest),
                _ => self.app_into(t, rest),
            },
            TypeKind::Refine { .. } => match self.rng.gen_range(0..7) {
                0..=4 => self.cast_into(t, rest),
                _ => self.app_into(t, rest),
            },
        }
    }
}

/// A closed source program of refined base type, roughly `size` nodes,
/// determined by `(seed, size)`. Candidates that fail to type-check or
/// overflow under classic evaluation are discarded.
pub fn gen_source(seed: u64, size: usize) -> Term {
    let mut rng = rng_for(seed, size);
    let pool = source_pool();
    let classic = Machine::new(Mode::Classic);
    loop {
        let target = pool.choose(&mut rng).unwrap().clone();
        let mut g = Gen { rng: &mut rng, pool: pool.clone(), env: Vec::new(), labels: 0, vars: 0 };
        let e = g.term(&target, size.max(1));
        if check_source(&e).is_err() {
            continue;
        }
        if matches!(classic.eval(&e, 10_000).outcome, Outcome::Fault(_)) {
            continue;
        }
        return e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse, print};
    use crate::syntax::{alpha_eq, term_size};

    #[test]
    fn generation_is_deterministic_and_well_typed() {
        for seed in 0..50 {
            let a = gen_source(seed, 15);
            let b = gen_source(seed, 15);
            assert!(alpha_eq(&a, &b));
            assert!(check_source(&a).is_ok());
        }
    }

    #[test]
    fn generated_programs_round_trip() {
        for seed in 0..50 {
            let e = gen_source(seed, 20);
            let back = parse(&print(&e)).unwrap();
            assert!(alpha_eq(&e, &back), "{e}");
        }
    }

    #[test]
    fn sizes_track_the_request() {
        let avg: f64 = (0..100).map(|s| term_size(&gen_source(s, 20)) as f64).sum::<f64>() / 100.0;
        assert!((8.0..=40.0).contains(&avg), "average size {avg}");
    }
}
