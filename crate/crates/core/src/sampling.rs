//! Seeded exact sampling on the simplex.
//!
//! Points are spacings of sorted 32-bit uniforms, so every coordinate is a
//! dyadic rational `k / 2^32` and the coordinates sum to one exactly.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::rational::Rational;

const SCALE_BITS: u32 = 32;

/// Generator for sample `index` of a run seeded with `seed`; independent of
/// how many samples other workers draw.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Approximately uniform point of Δ(k) with dyadic coordinates.
pub fn dyadic_simplex_point<R: Rng>(rng: &mut R, k: usize) -> Point {
    let scale: u64 = 1 << SCALE_BITS;
    let mut cuts: Vec<u64> = (0..k.saturating_sub(1))
        .map(|_| u64::from(rng.gen::<u32>()))
        .collect();
    cuts.push(0);
    cuts.push(scale);
    cuts.sort_unstable();
    let den = BigInt::from(scale);
    Point::new(
        cuts.windows(2)
            .map(|w| Rational::new(BigInt::from(w[1] - w[0]), den.clone()))
            .collect(),
    )
}

/// Dyadic rational drawn uniformly from `(0, 1]`.
pub fn dyadic_unit<R: Rng>(rng: &mut R) -> Rational {
    let n = u64::from(rng.gen::<u32>()) + 1;
    Rational::new(BigInt::from(n), BigInt::from(1u64 << SCALE_BITS))
}

/// Convex combination of `vertices` with random dyadic weights.
pub fn random_point_in_hull<R: Rng>(rng: &mut R, vertices: &[Point]) -> Point {
    let w = dyadic_simplex_point(rng, vertices.len());
    crate::geometry::ConvexCombinationWitness { weights: w.0 }.combine(vertices)
}
