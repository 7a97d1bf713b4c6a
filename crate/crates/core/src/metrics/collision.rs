use crate::geometry::Vec2;
use crate::sim::{footprints_overlap, Shape};

use super::MetricsError;

/// Heading (degrees) at each predicted point, from consecutive points.
///
/// Point `i > 0` takes the direction of the step into it; point 0 takes the
/// first non-degenerate step. A step of zero length keeps the previous
/// heading. A trajectory that never moves faces 0°.
pub fn predicted_headings(traj: &[Vec2]) -> Vec<f64> {
    let first = traj
        .windows(2)
        .map(|w| w[1] - w[0])
        .find(|d| *d != Vec2::ZERO)
        .map_or(0.0, |d| d.heading_deg());
    let mut out = Vec::with_capacity(traj.len());
    let mut current = first;
    for i in 0..traj.len() {
        if i > 0 {
            let d = traj[i] - traj[i - 1];
            if d != Vec2::ZERO {
                current = d.heading_deg();
            }
        }
        out.push(current);
    }
    out
}

/// `hits[agent][k]`: whether agent's sample `k` overlaps any other agent's
/// sample `k` at a shared time step.
pub fn collision_indicators(preds: &[Vec<Vec<Vec2>>], shapes: &[Shape]) -> Result<Vec<Vec<bool>>, MetricsError> {
    if shapes.len() != preds.len() {
        return Err(MetricsError::MissingShape);
    }
    let k = preds.first().map_or(0, |p| p.len());
    if preds.iter().any(|p| p.len() != k) {
        return Err(MetricsError::RaggedK);
    }
    let headings: Vec<Vec<Vec<f64>>> = preds
        .iter()
        .map(|samples| samples.iter().map(|s| predicted_headings(s)).collect())
        .collect();
    let mut hits = vec![vec![false; k]; preds.len()];
    for j in 0..k {
        for a in 0..preds.len() {
            for b in (a + 1)..preds.len() {
                let (ta, tb) = (&preds[a][j], &preds[b][j]);
                if ta.len() != tb.len() {
                    return Err(MetricsError::Length {
                        pred: ta.len(),
                        gt: tb.len(),
                    });
                }
                let overlap = (0..ta.len()).any(|t| {
                    footprints_overlap(ta[t], headings[a][j][t], &shapes[a], tb[t], headings[b][j][t], &shapes[b])
                });
                if overlap {
                    hits[a][j] = true;
                    hits[b][j] = true;
                }
            }
        }
    }
    Ok(hits)
}

/// Mean of the per-(agent, sample) collision indicators.
pub fn collision_rate(preds: &[Vec<Vec<Vec2>>], shapes: &[Shape]) -> Result<f64, MetricsError> {
    let hits = collision_indicators(preds, shapes)?;
    let total: usize = hits.iter().map(|h| h.len()).sum();
    if total == 0 {
        return Ok(0.0);
    }
    let count = hits.iter().flatten().filter(|h| **h).count();
    Ok(count as f64 / total as f64)
}
