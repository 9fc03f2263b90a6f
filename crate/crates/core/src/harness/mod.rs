//! Program generation and differential checking across modes.

pub mod corpus;
pub mod diff;
pub mod fuzz;
pub mod gen;
pub mod props;
pub mod trace;

pub use diff::{diff_modes, judge, DiffReport, ModeRun, Verdict};
pub use fuzz::{fuzz_item, run_fuzz, FuzzConfig, FuzzItem, FuzzReport, FuzzSummary};
pub use gen::gen_source;
pub use props::{check_algebra, AlgebraReport};
pub use trace::{check_trace, Finding};
