//! Benchmarks live in `benches/kernels.rs`; run them with `cargo bench -p permspec-bench`.
