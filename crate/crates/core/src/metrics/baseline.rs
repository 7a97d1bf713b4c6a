use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec2;

use super::MetricsError;

/// Half-width of the heading spread of samples `1..K`, degrees.
pub const CV_SPREAD_DEG: f64 = 20.0;

/// Extrapolate the last history step `horizon` times. Sample 0 keeps the
/// heading; the others turn by offsets drawn from `seed`. A single-point
/// history extrapolates as stationary.
pub fn constant_velocity_baseline(
    history: &[Vec2],
    horizon: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec2>>, MetricsError> {
    let last = *history.last().ok_or(MetricsError::EmptyHistory)?;
    if k == 0 {
        return Err(MetricsError::NoSamples);
    }
    let step = match history {
        [.., a, b] => *b - *a,
        _ => Vec2::ZERO,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<f64> = std::iter::once(0.0)
        .chain((1..k).map(|_| rng.random_range(-CV_SPREAD_DEG..=CV_SPREAD_DEG)))
        .collect();
    Ok(offsets
        .into_iter()
        .map(|off| {
            let v = if off == 0.0 { step } else { step.rotated_deg(off) };
            (1..=horizon).map(|i| last + v * i as f64).collect()
        })
        .collect())
}
