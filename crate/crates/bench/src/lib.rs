//! Criterion benchmarks for the allocation kernels live under `benches/`.
