use super::RecorderError;

/// Velocity and acceleration series derived from sampled positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub velocity: Vec<[f64; 3]>,
    pub acceleration: Vec<[f64; 3]>,
}

/// Backward differences over positions sampled at `rate_hz`.
///
/// `v[0] = 0` and `a[0] = a[1]`. Timestamps must be spaced `1 / rate_hz`
/// apart (to 1e-9 s).
pub fn derive_kinematics(positions: &[[f64; 3]], timestamps: &[f64], rate_hz: u32) -> Result<Kinematics, RecorderError> {
    if positions.is_empty() || positions.len() != timestamps.len() || rate_hz == 0 {
        return Err(RecorderError::Kinematics("need equal, non-empty position and time series".into()));
    }
    let dt = 1.0 / rate_hz as f64;
    for (i, pair) in timestamps.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-9 {
            return Err(RecorderError::Kinematics(format!(
                "timestamps {} and {} are not {dt} s apart",
                i,
                i + 1
            )));
        }
    }
    let diff = |a: [f64; 3], b: [f64; 3]| [(a[0] - b[0]) / dt, (a[1] - b[1]) / dt, (a[2] - b[2]) / dt];

    let mut velocity = vec![[0.0; 3]; positions.len()];
    for i in 1..positions.len() {
        velocity[i] = diff(positions[i], positions[i - 1]);
    }
    let mut acceleration = vec![[0.0; 3]; positions.len()];
    for i in 1..positions.len() {
        acceleration[i] = diff(velocity[i], velocity[i - 1]);
    }
    if positions.len() > 1 {
        acceleration[0] = acceleration[1];
    }
    Ok(Kinematics { velocity, acceleration })
}
