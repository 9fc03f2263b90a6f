//! Structural space accounting along an evaluation.

use std::collections::HashSet;
use std::io;

use serde::Serialize;

use crate::semantics::{Machine, Outcome};
use crate::syntax::{Annotation, RefinementList, Term, TermKind, Type, TypeKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpaceStats {
    /// Casts, active checks and coercion stacks anywhere in the term.
    pub pending: usize,
    /// Longest run of casts nested directly inside one another.
    pub chain: usize,
    /// Longest refinement list in any annotation or stack.
    pub max_reflist: usize,
    /// Most casts stacked directly on one lambda.
    pub proxy_wrap: usize,
    /// `|types(e)|`.
    pub live_types: usize,
}

impl SpaceStats {
    /// Pointwise maximum.
    pub fn max(self, other: SpaceStats) -> SpaceStats {
        SpaceStats {
            pending: self.pending.max(other.pending),
            chain: self.chain.max(other.chain),
            max_reflist: self.max_reflist.max(other.max_reflist),
            proxy_wrap: self.proxy_wrap.max(other.proxy_wrap),
            live_types: self.live_types.max(other.live_types),
        }
    }
}

struct Meter<'a> {
    stats: SpaceStats,
    seen_ptrs: HashSet<usize>,
    keys: HashSet<&'a str>,
    /// Types whose parts have been collected.
    expanded: HashSet<&'a str>,
}

impl<'a> Meter<'a> {
    fn term(&mut self, e: &'a Term, casts_above: usize) {
        match e.kind() {
            TermKind::Cast { src, ann, tgt, subject, .. } => {
                self.stats.pending += 1;
                self.stats.chain = self.stats.chain.max(casts_above + 1);
                self.ty(src);
                self.ty(tgt);
                match ann {
                    Annotation::Empty => {}
                    Annotation::Types(s) => s.iter().for_each(|t| self.ty(t)),
                    Annotation::Coerce(c) => c.lists().into_iter().for_each(|r| self.list(r)),
                }
                self.term(subject, casts_above + 1);
            }
            TermKind::Check { tgt, current, .. } => {
                self.stats.pending += 1;
                self.ty(tgt);
                self.term(current, 0);
            }
            TermKind::Stack { tgt, pending, current, .. } => {
                self.stats.pending += 1;
                self.ty(tgt);
                self.list(pending);
                self.term(current, 0);
            }
            TermKind::Abs { annot, body, .. } => {
                self.stats.proxy_wrap = self.stats.proxy_wrap.max(casts_above);
                self.ty(annot);
                self.term(body, 0);
            }
            TermKind::Fix { annot, body, .. } => {
                self.ty(annot);
                self.term(body, 0);
            }
            _ => e.children().into_iter().for_each(|c| self.term(c, 0)),
        }
    }

    fn list(&mut self, r: &'a RefinementList) {
        self.stats.max_reflist = self.stats.max_reflist.max(r.len());
        // list entries count as the refinement alone
        for entry in r.entries() {
            self.keys.insert(entry.ty.key());
        }
    }

    /// Collects `types(T)`; predicates add types but no counters.
    fn ty(&mut self, t: &'a Type) {
        if !self.seen_ptrs.insert(t.ptr_id()) || !self.expanded.insert(t.key()) {
            return;
        }
        self.keys.insert(t.key());
        match t.kind() {
            TypeKind::Refine { pred, .. } => self.types_in(pred),
            TypeKind::Fun(d, c) => {
                self.ty(d);
                self.ty(c);
            }
        }
    }

    fn types_in(&mut self, e: &'a Term) {
        match e.kind() {
            TermKind::Cast { src, ann, tgt, .. } => {
                self.ty(src);
                self.ty(tgt);
                match ann {
                    Annotation::Empty => {}
                    Annotation::Types(s) => s.iter().for_each(|t| self.ty(t)),
                    Annotation::Coerce(c) => {
                        c.lists().into_iter().flat_map(|r| r.entries()).for_each(|en| {
                            self.keys.insert(en.ty.key());
                        })
                    }
                }
            }
            TermKind::Abs { annot, .. } | TermKind::Fix { annot, .. } => self.ty(annot),
            TermKind::Check { tgt, .. } => self.ty(tgt),
            TermKind::Stack { tgt, pending, .. } => {
                self.ty(tgt);
                pending.entries().iter().for_each(|en| {
                    self.keys.insert(en.ty.key());
                });
            }
            _ => {}
        }
        for c in e.children() {
            self.types_in(c);
        }
    }
}

/// All five counters in one traversal.
pub fn space_stats(e: &Term) -> SpaceStats {
    let mut m = Meter {
        stats: SpaceStats::default(),
        seen_ptrs: HashSet::new(),
        keys: HashSet::new(),
        expanded: HashSet::new(),
    };
    m.term(e, 0);
    SpaceStats { live_types: m.keys.len(), ..m.stats }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceRow {
    pub step: usize,
    pub rule: String,
    #[serde(flatten)]
    pub stats: SpaceStats,
}

#[derive(Clone, Debug)]
pub struct Metered {
    pub outcome: Outcome,
    pub steps: usize,
    /// Maximum over the input and every step.
    pub max: SpaceStats,
    /// One row per step; empty unless requested.
    pub series: Vec<SpaceRow>,
}

/// Evaluates like [`Machine::eval`], measuring every intermediate term.
pub fn eval_metered(machine: &Machine, e: &Term, budget: usize, keep_series: bool) -> Metered {
    let mut max = space_stats(e);
    let mut series = Vec::new();
    let ev = machine.eval_with(e, budget, |i, rule, t| {
        let stats = space_stats(t);
        max = max.max(stats);
        if keep_series {
            series.push(SpaceRow { step: i, rule: rule.to_string(), stats });
        }
    });
    Metered { outcome: ev.outcome, steps: ev.steps, max, series }
}

/// Writes `step,rule,pending,chain,max_reflist,proxy_wrap,live_types`.
pub fn write_series_csv<W: io::Write>(out: W, series: &[SpaceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "rule", "pending", "chain", "max_reflist", "proxy_wrap", "live_types"])?;
    for row in series {
        let s = row.stats;
        w.write_record([
            row.step.to_string(),
            row.rule.clone(),
            s.pending.to_string(),
            s.chain.to_string(),
            s.max_reflist.to_string(),
            s.proxy_wrap.to_string(),
            s.live_types.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn series_json(series: &[SpaceRow]) -> serde_json::Value {
    serde_json::to_value(series).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;
    use crate::syntax::{types_of, Mode};

    const E3: &str = "<{x:Int|x mod 2 = 0} => {x:Int|x <> 0} @ l3> \
                      (<{x:Int|x >= 0} => {x:Int|x mod 2 = 0} @ l2> \
                      (<{x:Int|true} => {x:Int|x >= 0} @ l1> (-1)))";

    #[test]
    fn constants_take_no_space() {
        assert_eq!(space_stats(&Term::int(5)), SpaceStats::default());
    }

    #[test]
    fn running_example_counts() {
        let s = space_stats(&parse(E3).unwrap());
        assert_eq!((s.pending, s.chain, s.proxy_wrap), (3, 3, 0));
        assert_eq!(s.live_types, 4);
    }

    #[test]
    fn eidetic_collapses_to_one_cast() {
        let tr = Machine::new(Mode::Eidetic).trace(&parse(E3).unwrap(), 100);
        let s = space_stats(&tr.terms[5]);
        assert_eq!((s.pending, s.chain, s.max_reflist), (1, 1, 3));
    }

    #[test]
    fn live_types_match_types_of() {
        for mode in Mode::ALL {
            let tr = Machine::new(mode).trace(&parse(E3).unwrap(), 100);
            for t in &tr.terms {
                assert_eq!(space_stats(t).live_types, types_of(t).len(), "{t}");
            }
        }
    }

    #[test]
    fn metering_only_observes() {
        let e = parse(E3).unwrap();
        for mode in Mode::ALL {
            let m = Machine::new(mode);
            let metered = eval_metered(&m, &e, 10_000, true);
            let plain = m.eval(&e, 10_000);
            assert!(metered.outcome.same_as(&plain.outcome));
            assert_eq!(metered.series.len(), plain.steps);
            assert!(metered.max.chain <= 3);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let m = eval_metered(&Machine::new(Mode::Forgetful), &parse(E3).unwrap(), 100, true);
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &m.series).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("step,rule,pending,chain,max_reflist,proxy_wrap,live_types"));
        assert_eq!(lines.count(), m.steps);
    }
}
