//! Benchmark-only crate; see the `benches/` targets.

pub use criterion;
