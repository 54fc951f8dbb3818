//! Criterion benchmarks for the kernel calculus live in `benches/`.
