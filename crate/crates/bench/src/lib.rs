//! Criterion benchmarks for the mubcorr kernels; see `benches/measures.rs`.
