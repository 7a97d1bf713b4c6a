use crate::geometry::Vec2;

use super::MetricsError;

fn check_pair(pred: &[Vec2], gt: &[Vec2]) -> Result<(), MetricsError> {
    if pred.is_empty() || pred.len() != gt.len() {
        return Err(MetricsError::Length {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    Ok(())
}

/// Mean Euclidean distance over time steps.
pub fn ade(pred: &[Vec2], gt: &[Vec2]) -> Result<f64, MetricsError> {
    check_pair(pred, gt)?;
    let total: f64 = pred.iter().zip(gt).map(|(p, g)| p.distance(*g)).sum();
    Ok(total / pred.len() as f64)
}

/// Euclidean distance at the final time step.
pub fn fde(pred: &[Vec2], gt: &[Vec2]) -> Result<f64, MetricsError> {
    check_pair(pred, gt)?;
    Ok(pred[pred.len() - 1].distance(gt[gt.len() - 1]))
}

/// Best-of-K errors for one agent. The indices are the minimizing samples,
/// lowest index on ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalResult {
    pub min_ade: f64,
    pub ade_k: usize,
    pub min_fde: f64,
    pub fde_k: usize,
}

/// Best-of-K errors for a whole scene, one sample index shared by all agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointResult {
    pub min_jade: f64,
    pub jade_k: usize,
    pub min_jfde: f64,
    pub jfde_k: usize,
}

/// First index of the minimum; strict comparison keeps the lowest index.
fn argmin(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

pub fn min_marginal(samples: &[Vec<Vec2>], gt: &[Vec2]) -> Result<MarginalResult, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::NoSamples);
    }
    let ades = samples.iter().map(|s| ade(s, gt)).collect::<Result<Vec<_>, _>>()?;
    let fdes = samples.iter().map(|s| fde(s, gt)).collect::<Result<Vec<_>, _>>()?;
    let (min_ade, ade_k) = argmin(&ades);
    let (min_fde, fde_k) = argmin(&fdes);
    Ok(MarginalResult {
        min_ade,
        ade_k,
        min_fde,
        fde_k,
    })
}

/// `preds[agent][k]` against `gts[agent]`.
pub fn min_joint(preds: &[Vec<Vec<Vec2>>], gts: &[Vec<Vec2>]) -> Result<JointResult, MetricsError> {
    if preds.is_empty() || preds.len() != gts.len() {
        return Err(MetricsError::Agents {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    let k = preds[0].len();
    if k == 0 {
        return Err(MetricsError::NoSamples);
    }
    if preds.iter().any(|p| p.len() != k) {
        return Err(MetricsError::RaggedK);
    }
    let n = preds.len() as f64;
    let mut jade = vec![0.0; k];
    let mut jfde = vec![0.0; k];
    for (samples, gt) in preds.iter().zip(gts) {
        for (j, s) in samples.iter().enumerate() {
            jade[j] += ade(s, gt)?;
            jfde[j] += fde(s, gt)?;
        }
    }
    for j in 0..k {
        jade[j] /= n;
        jfde[j] /= n;
    }
    let (min_jade, jade_k) = argmin(&jade);
    let (min_jfde, jfde_k) = argmin(&jfde);
    Ok(JointResult {
        min_jade,
        jade_k,
        min_jfde,
        jfde_k,
    })
}
