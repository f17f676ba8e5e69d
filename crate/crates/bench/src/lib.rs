//! Benchmarks for `modpforms`; see `benches/`.
