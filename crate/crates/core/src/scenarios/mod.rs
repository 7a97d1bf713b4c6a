//! Scenario files, the built-in scenarios and map rasterization.

mod builtin;
mod map;
mod raster;
mod spec;

pub use builtin::{
    builtin_scenario, builtin_scenarios, ARM_LENGTH, BUILTIN_IDS, DRIVEWAY_WIDTH, JAYWALK_ROAD_LENGTH, LANE_WIDTH,
    PARKED_SPACING,
};
pub use map::{Bounds, Lane, LaneDirection, MapSpec, ParkingSpot};
pub use raster::{rasterize_semantic_map, RasterError, SemanticClass, SemanticGrid};
pub use spec::{load_scenario, AgentSpec, ScenarioError, ScenarioSpec, Termination, MAX_TIMEOUT_S, MIN_TIMEOUT_S};
