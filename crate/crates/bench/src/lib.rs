//! Benchmarks for `mkent-core`; see `benches/`.
