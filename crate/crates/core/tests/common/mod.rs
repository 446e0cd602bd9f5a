#![allow(dead_code)]

pub mod oracle;

use cortopo_core::{BinaryMask, LikelihoodMap};
use rand::seq::SliceRandom;
use rand::Rng;

/// Values drawn uniformly from `levels` evenly spaced values in `[0, 1]`.
pub fn quantized_map<R: Rng>(rng: &mut R, h: usize, w: usize, levels: usize) -> LikelihoodMap {
    LikelihoodMap::from_fn(h, w, |_, _| {
        rng.gen_range(0..levels) as f64 / (levels - 1) as f64
    })
    .unwrap()
}

/// A random permutation of `n` evenly spaced levels, so all values are
/// distinct and at least `1 / n` apart.
fn distinct_levels<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut ranks: Vec<usize> = (0..n).collect();
    ranks.shuffle(rng);
    ranks
        .into_iter()
        .map(|k| (k as f64 + 0.5) / n as f64)
        .collect()
}

/// Union of a few random rectangles, sometimes hollowed out into frames.
pub fn blob_mask<R: Rng>(rng: &mut R, h: usize, w: usize) -> BinaryMask {
    let mut mask = BinaryMask::empty(h, w).unwrap();
    for _ in 0..rng.gen_range(1..=3) {
        let r0 = rng.gen_range(0..h - 2);
        let c0 = rng.gen_range(0..w - 2);
        let r1 = rng.gen_range(r0 + 2..=h.min(r0 + h / 2 + 2));
        let c1 = rng.gen_range(c0 + 2..=w.min(c0 + w / 2 + 2));
        let hollow = rng.gen_bool(0.4) && r1 - r0 >= 3 && c1 - c0 >= 3;
        for r in r0..r1 {
            for c in c0..c1 {
                let edge = r == r0 || r + 1 == r1 || c == c0 || c + 1 == c1;
                if !hollow || edge {
                    mask.set(r, c, true);
                }
            }
        }
    }
    mask
}

pub fn iid_mask<R: Rng>(rng: &mut R, h: usize, w: usize, p: f64) -> BinaryMask {
    BinaryMask::from_fn(h, w, |_, _| rng.gen_bool(p)).unwrap()
}

/// A prediction in generic position (all values distinct, well inside
/// `(0, 1)`) that loosely follows `gt`, or pure noise when `gt` is `None`.
pub fn generic_prediction<R: Rng>(
    rng: &mut R,
    gt: Option<&BinaryMask>,
    h: usize,
    w: usize,
) -> LikelihoodMap {
    let levels = distinct_levels(rng, h * w);
    let values = match gt {
        Some(gt) => gt
            .values()
            .iter()
            .zip(&levels)
            .map(|(&g, &u)| 0.02 + 0.55 * f64::from(u8::from(g)) + 0.4 * u)
            .collect(),
        None => levels.into_iter().map(|u| 0.01 + 0.98 * u).collect(),
    };
    LikelihoodMap::new(h, w, values).unwrap()
}
