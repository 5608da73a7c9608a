//! Criterion benchmarks for transform evaluation, inversion and simulation.
//! Run with `cargo bench -p rbmq-bench`.
