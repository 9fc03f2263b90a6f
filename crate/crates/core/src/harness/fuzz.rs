//! Differential runs over a generated corpus.

use rayon::prelude::*;
use serde::Serialize;

use crate::metering::space_stats;
use crate::semantics::{Machine, Outcome};
use crate::surface::print;
use crate::syntax::{alpha_eq_type, Mode};
use crate::typecheck::Checker;

use super::diff::{judge, DiffReport, ModeRun};
use super::gen::gen_source;
use super::trace::{check_trace, Finding};

#[derive(Clone, Debug, Serialize)]
pub struct FuzzConfig {
    pub count: usize,
    /// Fixed program size; when `None` sizes cycle through 5..=30.
    pub size: Option<usize>,
    pub seed: u64,
    pub budget: usize,
    /// Replay and check every trace, not just the outcomes.
    pub check_traces: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { count: 1_000, size: None, seed: 0, budget: 10_000, check_traces: true }
    }
}

impl FuzzConfig {
    pub fn item(&self, i: usize) -> (u64, usize) {
        (self.seed.wrapping_add(i as u64), self.size.unwrap_or(5 + i % 26))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzItem {
    pub index: usize,
    pub seed: u64,
    pub size: usize,
    pub program: String,
    /// Source type under each mode, in classic/forgetful/heedful/eidetic order.
    pub types: Vec<String>,
    pub typing_agrees: bool,
    pub cast_chain: usize,
    pub diff: DiffReport,
    pub findings: Vec<Finding>,
}

impl FuzzItem {
    pub fn stuck(&self) -> bool {
        self.diff.runs.iter().any(|r| matches!(r.outcome, Outcome::Stuck(_) | Outcome::Fault(_)))
    }

    pub fn budget_exceeded(&self) -> bool {
        self.diff.runs.iter().any(|r| matches!(r.outcome, Outcome::BudgetExceeded))
    }

    pub fn has_problem(&self) -> bool {
        self.diff.failed() || self.stuck() || !self.findings.is_empty() || !self.typing_agrees
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzSummary {
    pub count: usize,
    pub verdict_failures: usize,
    pub skipped: usize,
    pub stuck: usize,
    pub budget_exceeded: usize,
    pub trace_violations: usize,
    pub typing_disagreements: usize,
    /// Share of programs containing a cast directly on another cast.
    pub nested_cast_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub summary: FuzzSummary,
    pub items: Vec<FuzzItem>,
}

impl FuzzReport {
    pub fn ok(&self) -> bool {
        let s = &self.summary;
        s.verdict_failures == 0 && s.stuck == 0 && s.trace_violations == 0 && s.typing_disagreements == 0
    }

    pub fn problems(&self) -> impl Iterator<Item = &FuzzItem> {
        self.items.iter().filter(|i| i.has_problem())
    }
}

/// Generates, runs and checks one corpus item.
pub fn fuzz_item(config: &FuzzConfig, index: usize) -> FuzzItem {
    let (seed, size) = config.item(index);
    let e = gen_source(seed, size);
    let types: Vec<_> = Mode::ALL.iter().map(|&m| Checker::source(m).type_of_closed(&e)).collect();
    let typing_agrees = types.iter().all(|t| match (t, &types[0]) {
        (Ok(a), Ok(b)) => alpha_eq_type(a, b),
        _ => false,
    });
    let types = types
        .iter()
        .map(|t| match t {
            Ok(t) => t.to_string(),
            Err(err) => err.to_string(),
        })
        .collect();

    let mut runs = Vec::new();
    let mut findings = Vec::new();
    for mode in Mode::ALL {
        let m = Machine::new(mode);
        if config.check_traces {
            let trace = m.trace(&e, config.budget);
            findings.extend(check_trace(&m, &trace));
            runs.push(ModeRun { mode, steps: trace.rules.len(), outcome: trace.outcome });
        } else {
            let ev = m.eval(&e, config.budget);
            runs.push(ModeRun { mode, outcome: ev.outcome, steps: ev.steps });
        }
    }
    FuzzItem {
        index,
        seed,
        size,
        program: print(&e),
        types,
        typing_agrees,
        cast_chain: space_stats(&e).chain,
        diff: judge(runs),
        findings,
    }
}

/// Runs the whole corpus, items in parallel on large-stack threads.
pub fn run_fuzz(config: &FuzzConfig) -> FuzzReport {
    let pool = rayon::ThreadPoolBuilder::new()
        .stack_size(256 << 20)
        .build()
        .expect("thread pool starts");
    let items: Vec<FuzzItem> =
        pool.install(|| (0..config.count).into_par_iter().map(|i| fuzz_item(config, i)).collect());
    let count = items.len();
    let summary = FuzzSummary {
        count,
        verdict_failures: items.iter().filter(|i| i.diff.failed()).count(),
        skipped: items.iter().filter(|i| i.diff.skipped()).count(),
        stuck: items.iter().filter(|i| i.stuck()).count(),
        budget_exceeded: items.iter().filter(|i| i.budget_exceeded()).count(),
        trace_violations: items.iter().map(|i| i.findings.len()).sum(),
        typing_disagreements: items.iter().filter(|i| !i.typing_agrees).count(),
        nested_cast_ratio: if count == 0 {
            0.0
        } else {
            items.iter().filter(|i| i.cast_chain >= 2).count() as f64 / count as f64
        },
    };
    FuzzReport { config: config.clone(), summary, items }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_is_clean() {
        let report = run_fuzz(&FuzzConfig { count: 60, ..FuzzConfig::default() });
        let bad: Vec<_> = report.problems().map(|i| (&i.program, &i.diff, &i.findings)).collect();
        assert!(report.ok(), "{bad:#?}");
    }

    #[test]
    fn items_are_reproducible() {
        let cfg = FuzzConfig { count: 5, size: Some(12), seed: 99, ..FuzzConfig::default() };
        let a = fuzz_item(&cfg, 3);
        let b = fuzz_item(&cfg, 3);
        assert_eq!(a.program, b.program);
        assert_eq!(a.seed, 102);
    }
}
