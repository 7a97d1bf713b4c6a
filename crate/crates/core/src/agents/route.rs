use serde::{Deserialize, Serialize};

use crate::geometry::{closest_point_on_segment, Vec2};

/// A mandatory stop along the route, at arc length `at` meters from the first
/// waypoint, held for `dwell` seconds once the vehicle is at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteStop {
    pub at: f64,
    pub dwell: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub waypoints: Vec<Vec2>,
    pub cruise_speed: f64,
    #[serde(rename = "loop", default)]
    pub looped: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stops: Vec<RouteStop>,
    /// The vehicle holds still until this simulation time (seconds).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub depart_time: f64,
}

/// Where a point projects onto the route polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteProjection {
    pub segment: usize,
    /// Arc length of the projected point from the first waypoint.
    pub s: f64,
    pub point: Vec2,
    pub distance: f64,
}

impl Route {
    pub fn new(waypoints: Vec<Vec2>, cruise_speed: f64) -> Self {
        Self {
            waypoints,
            cruise_speed,
            looped: false,
            stops: Vec::new(),
            depart_time: 0.0,
        }
    }

    /// All violated route invariants, empty when valid.
    pub fn violations(&self, v_max_car: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.waypoints.len() < 2 {
            out.push(format!("route needs at least 2 waypoints, has {}", self.waypoints.len()));
        }
        if self.waypoints.iter().any(|w| !w.is_finite()) {
            out.push("route waypoint is not finite".to_string());
        }
        for (i, pair) in self.waypoints.windows(2).enumerate() {
            if pair[0] == pair[1] {
                out.push(format!("route waypoints {i} and {} coincide", i + 1));
            }
        }
        if !(self.cruise_speed > 0.0 && self.cruise_speed <= v_max_car) {
            out.push(format!(
                "cruise_speed {} outside (0, {v_max_car}]",
                self.cruise_speed
            ));
        }
        if !(self.depart_time >= 0.0 && self.depart_time.is_finite()) {
            out.push(format!("depart_time {} must be finite and >= 0", self.depart_time));
        }
        for stop in &self.stops {
            if !(stop.at >= 0.0 && stop.dwell >= 0.0 && stop.at.is_finite() && stop.dwell.is_finite()) {
                out.push(format!("invalid stop {stop:?}"));
            }
        }
        out
    }

    fn segment_count(&self) -> usize {
        if self.looped {
            self.waypoints.len()
        } else {
            self.waypoints.len().saturating_sub(1)
        }
    }

    fn segment(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.waypoints.len();
        (self.waypoints[i], self.waypoints[(i + 1) % n])
    }

    /// Arc length at the start of each segment.
    fn segment_starts(&self) -> Vec<f64> {
        let mut acc = 0.0;
        (0..self.segment_count())
            .map(|i| {
                let start = acc;
                let (a, b) = self.segment(i);
                acc += a.distance(b);
                start
            })
            .collect()
    }

    /// Total polyline length (including the closing segment for loops).
    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.distance(b)
            })
            .sum()
    }

    /// Project `p` onto the route. With a `hint` segment the search only
    /// looks a few segments forward from it so progress never jumps back.
    pub fn project(&self, p: Vec2, hint: Option<usize>) -> RouteProjection {
        let n = self.segment_count();
        let starts = self.segment_starts();
        let candidates: Vec<usize> = match hint {
            None => (0..n).collect(),
            Some(h) if self.looped => (0..4.min(n)).map(|k| (h + k) % n).collect(),
            Some(h) => (h.min(n - 1)..(h + 4).min(n)).collect(),
        };
        let mut best: Option<RouteProjection> = None;
        for i in candidates {
            let (a, b) = self.segment(i);
            let (point, t) = closest_point_on_segment(p, a, b);
            let distance = point.distance(p);
            if best.is_none_or(|b| distance < b.distance) {
                best = Some(RouteProjection {
                    segment: i,
                    s: starts[i] + t * a.distance(b),
                    point,
                    distance,
                });
            }
        }
        best.expect("validated route has at least one segment")
    }

    /// Point at arc length `s`: clamped to the ends for open routes, wrapped
    /// for loops.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let total = self.length();
        let s = if self.looped {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        };
        let mut acc = 0.0;
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let len = a.distance(b);
            if s <= acc + len {
                let t = if len > 0.0 { (s - acc) / len } else { 0.0 };
                return a + (b - a) * t;
            }
            acc += len;
        }
        self.segment(self.segment_count() - 1).1
    }
}
