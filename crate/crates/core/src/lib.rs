pub mod cli;
pub mod harness;
pub mod metering;
pub mod semantics;
pub mod surface;
pub mod syntax;
pub mod typecheck;
