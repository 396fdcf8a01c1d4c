use std::f64::consts::PI;

use breather_core::SpacetimePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` events with radii stratified over `[r_min, r_max]` (one per
/// equal-width shell), isotropic directions and uniform times.
pub fn stratified_events(count: usize, seed: u64, r: (f64, f64), t: (f64, f64)) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (r.1 - r.0) / count.max(1) as f64;
    (0..count)
        .map(|i| {
            let radius = r.0 + width * (i as f64 + rng.gen::<f64>());
            let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let time = if t.1 > t.0 { rng.gen_range(t.0..t.1) } else { t.0 };
            let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
            SpacetimePoint::new(
                time,
                radius * sin_theta * phi.cos(),
                radius * sin_theta * phi.sin(),
                radius * cos_theta,
            )
        })
        .collect()
}
