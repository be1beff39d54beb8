//! Benchmarks for the `dde-core` solvers live under `benches/`.
