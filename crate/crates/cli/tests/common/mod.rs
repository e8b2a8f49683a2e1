#![allow(dead_code)]

use attrmeter::analyze::MetricConfig;
use attrmeter::select::Threshold;
use attrmeter::synth::{meaningful_pool, PoolSpec};
use attrmeter::AttributeMatrix;

/// Labelled set of 24 attributes over 200 exemplars, mixed from 8 hidden factors.
pub fn fixture() -> AttributeMatrix {
    meaningful_pool(&PoolSpec {
        n_exemplars: 200,
        n_latent: 8,
        n_attributes: 24,
        flip_rate: 0.05,
        combine_width: 3,
        seed: 1,
    })
    .expect("fixture parameters are valid")
}

/// Splits the fixture 16/8, forcing the quarter least reconstructible
/// attributes into S1.
pub fn fixture_config(splits: usize, trials: usize, seed: u64) -> MetricConfig {
    MetricConfig {
        splits,
        trials,
        seed,
        threshold: Threshold::TopPercent(25.0),
        s1_fraction: 2.0 / 3.0,
        ..MetricConfig::default()
    }
}

pub const FIXTURE_SEED: u64 = 5;
