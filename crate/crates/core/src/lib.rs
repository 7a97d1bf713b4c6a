//! Deterministic pedestrian–vehicle interaction simulator with scene
//! recording and trajectory-forecasting metrics.

pub mod agents;
pub mod geometry;
pub mod metrics;
pub mod recorder;
pub mod runner;
pub mod scenarios;
pub mod sim;
