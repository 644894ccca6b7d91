//! Criterion benchmarks for the eigengap estimators; see `benches/`.
