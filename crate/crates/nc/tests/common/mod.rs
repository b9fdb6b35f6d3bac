#![allow(dead_code)]

use nc_core::{ImagingConfig, Seed};

/// 8 receivers × 8 frequencies over a coarse 9 × 9 window: n = 64, K = 81.
pub fn small_config() -> ImagingConfig {
    ImagingConfig {
        num_receivers: 8,
        num_frequencies: 8,
        pixels_cross: 9,
        pixels_range: 9,
        seed: Seed(3),
        ..ImagingConfig::default()
    }
}
