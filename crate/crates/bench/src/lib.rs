//! Criterion benchmarks for the core crate; see `benches/loops.rs`.
