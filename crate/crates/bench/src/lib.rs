//! Criterion benchmarks for `pdcgo`; see `benches/kernels.rs`.
