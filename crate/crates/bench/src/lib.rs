//! Criterion benchmarks for the simulation and coincidence pipeline; see `benches/`.
