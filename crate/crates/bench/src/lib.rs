//! Criterion benchmarks for `fpforest`; see `benches/`.
