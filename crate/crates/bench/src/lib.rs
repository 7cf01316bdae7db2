//! Fixed model sets shared by the benchmarks.

use nupbr_core::harness::gen::{gen_model, ModelGenParams};
use nupbr_core::Model;

/// `count` generated models with the given size limits, seeds `seed..`.
pub fn models(count: usize, seed: u64, max_outcomes: usize, max_horizon: usize) -> Vec<Model> {
    (0..count as u64)
        .map(|i| {
            let params = ModelGenParams { seed: seed + i, max_outcomes, max_horizon, ..ModelGenParams::default() };
            gen_model(&params).expect("benchmark model generates")
        })
        .collect()
}

/// Honest models, so that both deflators exist.
pub fn honest_models(count: usize, seed: u64) -> Vec<Model> {
    (0..count as u64)
        .map(|i| {
            let params = ModelGenParams { seed: seed + i, honest_only: true, ..ModelGenParams::default() };
            gen_model(&params).expect("benchmark model generates")
        })
        .collect()
}
