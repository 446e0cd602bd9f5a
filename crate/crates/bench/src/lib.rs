//! Seeded inputs shared by the benchmarks.

use cortopo_core::{BinaryMask, LikelihoodMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Square ring of the given thickness centred in a `size` by `size` raster.
pub fn ring_mask(size: usize, thickness: usize) -> BinaryMask {
    let lo = size / 4;
    let hi = size - 1 - size / 4;
    BinaryMask::from_fn(size, size, |r, c| {
        let inside = (lo..=hi).contains(&r) && (lo..=hi).contains(&c);
        let core = (lo + thickness..=hi - thickness).contains(&r)
            && (lo + thickness..=hi - thickness).contains(&c);
        inside && !core
    })
    .expect("positive size")
}

/// `gt` rendered at 0.7 / 0.2 with uniform noise, the shape of a
/// half-trained network output.
pub fn noisy_prediction(gt: &BinaryMask, noise: f64, seed: u64) -> LikelihoodMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = gt
        .values()
        .iter()
        .map(|&g| {
            let base = if g { 0.7 } else { 0.2 };
            (base + rng.gen_range(-noise..=noise)).clamp(0.0, 1.0)
        })
        .collect();
    LikelihoodMap::new(gt.height(), gt.width(), values).expect("clamped into range")
}
