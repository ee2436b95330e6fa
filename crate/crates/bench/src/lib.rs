//! Benchmarks for the nladpcm codec live under `benches/`.
