use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How offsets of the two random boxes are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OffsetSampling {
    /// One offset vector on `(0, 1]ⁿ` shared by both boxes. Each coordinate
    /// overlaps with probability `∫₀¹ (2a − a²) da = 2/3`.
    #[default]
    Shared,
    /// Independent offsets per box. Each coordinate overlaps with
    /// probability `17/24`.
    Independent,
}

impl OffsetSampling {
    pub fn per_coordinate_probability(self) -> f64 {
        match self {
            OffsetSampling::Shared => 2.0 / 3.0,
            OffsetSampling::Independent => 17.0 / 24.0,
        }
    }
}

/// `(2/3)ⁿ`: chance that two random boxes with centers uniform on
/// `[−1, 1]ⁿ` and a common offset uniform on `(0, 1]ⁿ` meet in every
/// coordinate.
pub fn analytic_intersection_probability(dim: usize) -> f64 {
    OffsetSampling::Shared.per_coordinate_probability().powi(dim as i32)
}

/// Fraction of `samples` random box pairs whose ordinary, all-coordinates
/// intersection is non-empty. Deterministic in `seed`.
pub fn monte_carlo_intersection_probability(dim: usize, samples: u64, seed: u64) -> f64 {
    monte_carlo_intersection_probability_with(dim, samples, seed, OffsetSampling::Shared)
}

pub fn monte_carlo_intersection_probability_with(
    dim: usize,
    samples: u64,
    seed: u64,
    sampling: OffsetSampling,
) -> f64 {
    if samples == 0 {
        return f64::NAN;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut meet = true;
        // Draw every coordinate even after a miss so the random stream does
        // not depend on outcomes.
        for _ in 0..dim {
            let c1: f64 = rng.gen_range(-1.0..=1.0);
            let c2: f64 = rng.gen_range(-1.0..=1.0);
            let o1 = 1.0 - rng.gen::<f64>();
            let o2 = match sampling {
                OffsetSampling::Shared => o1,
                OffsetSampling::Independent => 1.0 - rng.gen::<f64>(),
            };
            meet &= (c1 - c2).abs() <= o1 + o2;
        }
        hits += meet as u64;
    }
    hits as f64 / samples as f64
}
