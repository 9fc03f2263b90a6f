//! The refinement implication predicate and the heedful `choose` policy.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::surface::{parse_type, ParseError};
use crate::syntax::{Type, TypeSet};

/// Decides `T1 ⊃ T2` on refinements of the same base type.
#[derive(Clone, Debug, Default)]
pub enum Oracle {
    /// Syntactic equality up to alpha-renaming.
    #[default]
    AlphaEq,
    /// Reflexive-transitive closure of a finite list of axioms.
    Axioms(AxiomOracle),
}

impl Oracle {
    pub fn implies(&self, t1: &Type, t2: &Type) -> bool {
        match self {
            Oracle::AlphaEq => t1 == t2,
            Oracle::Axioms(ax) => t1 == t2 || ax.reaches(t1, t2),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Oracle::AlphaEq => "alpha-eq",
            Oracle::Axioms(_) => "axioms",
        }
    }

    pub fn from_axioms(pairs: impl IntoIterator<Item = (Type, Type)>) -> Oracle {
        Oracle::Axioms(AxiomOracle::new(pairs))
    }
}

#[derive(Clone, Debug, Default)]
pub struct AxiomOracle {
    /// Transitive successors of each type key.
    closure: HashMap<String, HashSet<String>>,
}

#[derive(Debug, Error)]
pub enum AxiomError {
    #[error("line {line}: expected `T1 ==> T2`")]
    Shape { line: usize },
    #[error("line {line}: {source}")]
    Type { line: usize, source: ParseError },
    #[error("line {line}: axioms relate refinements of one base type")]
    Base { line: usize },
}

impl AxiomOracle {
    pub fn new(pairs: impl IntoIterator<Item = (Type, Type)>) -> AxiomOracle {
        let mut edges: HashMap<String, HashSet<String>> = HashMap::new();
        for (a, b) in pairs {
            edges.entry(a.key().to_owned()).or_default().insert(b.key().to_owned());
        }
        let mut closure = HashMap::new();
        for start in edges.keys() {
            let mut seen = HashSet::new();
            let mut todo = vec![start.clone()];
            while let Some(k) = todo.pop() {
                for next in edges.get(&k).into_iter().flatten() {
                    if seen.insert(next.clone()) {
                        todo.push(next.clone());
                    }
                }
            }
            closure.insert(start.clone(), seen);
        }
        AxiomOracle { closure }
    }

    fn reaches(&self, a: &Type, b: &Type) -> bool {
        self.closure.get(a.key()).is_some_and(|s| s.contains(b.key()))
    }

    /// One axiom per line, `T1 ==> T2`; `--` starts a comment.
    pub fn parse(text: &str) -> Result<AxiomOracle, AxiomError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split("--").next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (l, r) = body.split_once("==>").ok_or(AxiomError::Shape { line })?;
            let t1 = parse_type(l.trim()).map_err(|source| AxiomError::Type { line, source })?;
            let t2 = parse_type(r.trim()).map_err(|source| AxiomError::Type { line, source })?;
            match (t1.base(), t2.base()) {
                (Some(b1), Some(b2)) if b1 == b2 => pairs.push((t1, t2)),
                _ => return Err(AxiomError::Base { line }),
            }
        }
        Ok(AxiomOracle::new(pairs))
    }
}

/// Picks the type checked next by heedful `E-CheckSet`.
#[derive(Clone, Default)]
pub enum ChoosePolicy {
    /// Least printed alpha-normal form.
    #[default]
    LexMin,
    LexMax,
    Custom(&'static str, Arc<dyn Fn(&TypeSet) -> Type + Send + Sync>),
}

impl ChoosePolicy {
    /// Panics on an empty set: callers only choose from non-empty sets.
    pub fn choose(&self, s: &TypeSet) -> Type {
        assert!(!s.is_empty(), "choose from an empty type set");
        match self {
            ChoosePolicy::LexMin => s.first().cloned().unwrap(),
            ChoosePolicy::LexMax => s.last().cloned().unwrap(),
            ChoosePolicy::Custom(_, f) => {
                let t = f(s);
                assert!(s.contains(&t), "custom choose returned a type outside the set");
                t
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChoosePolicy::LexMin => "lex-min",
            ChoosePolicy::LexMax => "lex-max",
            ChoosePolicy::Custom(name, _) => name,
        }
    }

    pub fn from_name(name: &str) -> Option<ChoosePolicy> {
        match name {
            "lex-min" => Some(ChoosePolicy::LexMin),
            "lex-max" => Some(ChoosePolicy::LexMax),
            _ => None,
        }
    }
}

impl fmt::Debug for ChoosePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn default_oracle_is_syntactic() {
        let o = Oracle::default();
        assert!(o.implies(&ty("{x:Int|x >= 0}"), &ty("{x:Int|x >= 0}")));
        assert!(o.implies(&ty("{y:Int|y >= 0}"), &ty("{x:Int|x >= 0}")));
        assert!(!o.implies(&ty("{x:Int|x >= 0}"), &ty("{x:Int|true}")));
    }

    #[test]
    fn axioms_close_transitively() {
        let text = "{x:Int|x > 0} ==> {x:Int|x >= 0}\n-- comment\n{x:Int|x >= 0} ==> {x:Int|true}\n";
        let o = Oracle::Axioms(AxiomOracle::parse(text).unwrap());
        assert!(o.implies(&ty("{x:Int|x > 0}"), &ty("{x:Int|true}")));
        assert!(o.implies(&ty("{x:Int|x > 0}"), &ty("{x:Int|x > 0}")));
        assert!(!o.implies(&ty("{x:Int|true}"), &ty("{x:Int|x > 0}")));
    }

    #[test]
    fn axiom_file_errors() {
        assert!(matches!(AxiomOracle::parse("{x:Int|true}"), Err(AxiomError::Shape { line: 1 })));
        assert!(matches!(
            AxiomOracle::parse("{x:Int|true} ==> {b:Bool|true}"),
            Err(AxiomError::Base { line: 1 })
        ));
    }

    #[test]
    fn choose_policies() {
        let nat = ty("{x:Int|x >= 0}");
        let even = ty("{x:Int|x mod 2 = 0}");
        let s: TypeSet = [nat.clone(), even.clone()].into_iter().collect();
        let min = ChoosePolicy::LexMin.choose(&s);
        let max = ChoosePolicy::LexMax.choose(&s);
        assert!(min.key() < max.key());
        assert_eq!(ChoosePolicy::LexMin.choose(&TypeSet::singleton(nat.clone())), nat);
    }

    #[test]
    #[should_panic(expected = "empty type set")]
    fn choose_from_empty_panics() {
        ChoosePolicy::LexMin.choose(&TypeSet::new());
    }
}
