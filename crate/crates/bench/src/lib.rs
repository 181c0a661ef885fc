//! Criterion benchmark harness for the solver; see `benches/solver.rs`.
