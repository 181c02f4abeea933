//! Criterion benchmarks for the marginalis kernels; see `benches/`.
