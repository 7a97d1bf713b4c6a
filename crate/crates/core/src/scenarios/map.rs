use serde::{Deserialize, Serialize};

use crate::geometry::{is_simple_polygon, rectangle_corners, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneDirection {
    Eastbound,
    Westbound,
    Northbound,
    Southbound,
    Inbound,
    Outbound,
}

impl LaneDirection {
    pub fn opposes(self, other: LaneDirection) -> bool {
        use LaneDirection::*;
        matches!(
            (self, other),
            (Eastbound, Westbound)
                | (Westbound, Eastbound)
                | (Northbound, Southbound)
                | (Southbound, Northbound)
                | (Inbound, Outbound)
                | (Outbound, Inbound)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub centerline: Vec<Vec2>,
    pub width: f64,
    pub direction: LaneDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkingSpot {
    pub center: Vec2,
    pub yaw: f64,
    pub length: f64,
    pub width: f64,
}

impl ParkingSpot {
    pub fn polygon(&self) -> Vec<Vec2> {
        rectangle_corners(self.center, self.yaw, self.length, self.width).to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn size(&self) -> Vec2 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub lanes: Vec<Lane>,
    #[serde(default)]
    pub crosswalks: Vec<Vec<Vec2>>,
    #[serde(default)]
    pub parking_spots: Vec<ParkingSpot>,
    #[serde(default)]
    pub sidewalks: Vec<Vec<Vec2>>,
    #[serde(default)]
    pub drivable_area: Vec<Vec<Vec2>>,
    pub bounds: Bounds,
}

impl MapSpec {
    /// A featureless 200 m square.
    pub fn empty() -> Self {
        Self {
            lanes: Vec::new(),
            crosswalks: Vec::new(),
            parking_spots: Vec::new(),
            sidewalks: Vec::new(),
            drivable_area: Vec::new(),
            bounds: Bounds::new(Vec2::new(-100.0, -100.0), Vec2::new(100.0, 100.0)),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let b = &self.bounds;
        if !(b.min.is_finite() && b.max.is_finite() && b.min.x < b.max.x && b.min.y < b.max.y) {
            out.push(format!("map.bounds must have min < max, got {:?}..{:?}", b.min, b.max));
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            if lane.width.is_nan() || lane.width <= 2.0 {
                out.push(format!("map.lanes[{i}].width {} must exceed 2 m", lane.width));
            }
            if lane.centerline.len() < 2 {
                out.push(format!("map.lanes[{i}].centerline needs at least 2 points"));
            }
            if lane.centerline.iter().any(|p| !b.contains(*p)) {
                out.push(format!("map.lanes[{i}].centerline leaves map.bounds"));
            }
        }
        let layers = [
            ("crosswalks", &self.crosswalks),
            ("sidewalks", &self.sidewalks),
            ("drivable_area", &self.drivable_area),
        ];
        for (name, polys) in layers {
            for (i, poly) in polys.iter().enumerate() {
                if !(poly.iter().all(|p| p.is_finite()) && is_simple_polygon(poly)) {
                    out.push(format!("map.{name}[{i}] is not a simple polygon"));
                }
            }
        }
        for (i, spot) in self.parking_spots.iter().enumerate() {
            if !(spot.length > 0.0 && spot.width > 0.0 && spot.center.is_finite() && spot.yaw.is_finite()) {
                out.push(format!("map.parking_spots[{i}] has invalid geometry"));
            }
        }
        out
    }
}
