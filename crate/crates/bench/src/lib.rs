//! Benchmarks live in `benches/`: `cargo bench -p noma-bench`.
//!
//! * `kernels`: special functions and the closed-form BER averages.
//! * `montecarlo`: single-trial cost and batched engine throughput.
