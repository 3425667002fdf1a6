//! Criterion benchmarks for the core algorithms; see `benches/core.rs`.
