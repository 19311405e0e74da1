//! Empty on purpose: this crate only exists to host the benchmark
//! targets under `benches/`.
