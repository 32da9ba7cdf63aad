//! Criterion benchmarks for `mubell-core`; see `benches/`.
