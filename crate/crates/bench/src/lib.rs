//! Benchmarks for the hot paths of `gwp-core`; run with `cargo bench -p gwp-bench`.
