use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_in_polygon, Vec2};

use super::map::MapSpec;

/// Ground classes, ordered by drawing priority (later wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticClass {
    OffMap,
    Sidewalk,
    Drivable,
    Parking,
    Crosswalk,
}

impl SemanticClass {
    pub fn gray(self) -> u8 {
        match self {
            SemanticClass::OffMap => 0,
            SemanticClass::Sidewalk => 64,
            SemanticClass::Drivable => 128,
            SemanticClass::Parking => 160,
            SemanticClass::Crosswalk => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("resolution must be in (0, 1] m/cell, got {0}")]
    Resolution(f64),
}

/// Bird's-eye-view class grid. Cell `(col, row)` is centered at
/// `origin + ((col + 0.5) * resolution, (row + 0.5) * resolution)`; row 0 is
/// the southern edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGrid {
    pub origin: Vec2,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    cells: Vec<SemanticClass>,
}

impl SemanticGrid {
    pub fn get(&self, col: usize, row: usize) -> SemanticClass {
        self.cells[row * self.width + col]
    }

    pub fn cells(&self) -> &[SemanticClass] {
        &self.cells
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Vec2 {
        self.origin + Vec2::new((col as f64 + 0.5) * self.resolution, (row as f64 + 0.5) * self.resolution)
    }

    pub fn count(&self, class: SemanticClass) -> usize {
        self.cells.iter().filter(|c| **c == class).count()
    }

    /// Plain PGM (P2), north up. The comment line carries origin and resolution.
    pub fn to_pgm(&self) -> String {
        let mut out = String::new();
        writeln!(out, "P2").unwrap();
        writeln!(
            out,
            "# origin {} {} resolution {}",
            self.origin.x, self.origin.y, self.resolution
        )
        .unwrap();
        writeln!(out, "{} {}", self.width, self.height).unwrap();
        writeln!(out, "255").unwrap();
        for row in (0..self.height).rev() {
            let line: Vec<String> = (0..self.width).map(|c| self.get(c, row).gray().to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }
}

/// Classify every cell center by the highest-priority polygon containing it.
pub fn rasterize_semantic_map(map: &MapSpec, resolution: f64) -> Result<SemanticGrid, RasterError> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(RasterError::Resolution(resolution));
    }
    let origin = map.bounds.min;
    let size = map.bounds.size();
    let width = ((size.x / resolution) - 1e-9).ceil().max(0.0) as usize;
    let height = ((size.y / resolution) - 1e-9).ceil().max(0.0) as usize;
    let mut grid = SemanticGrid {
        origin,
        resolution,
        width,
        height,
        cells: vec![SemanticClass::OffMap; width * height],
    };

    let parking: Vec<Vec<Vec2>> = map.parking_spots.iter().map(|s| s.polygon()).collect();
    let layers: [(SemanticClass, &[Vec<Vec2>]); 4] = [
        (SemanticClass::Sidewalk, &map.sidewalks),
        (SemanticClass::Drivable, &map.drivable_area),
        (SemanticClass::Parking, &parking),
        (SemanticClass::Crosswalk, &map.crosswalks),
    ];
    for (class, polygons) in layers {
        for poly in polygons {
            paint(&mut grid, poly, class);
        }
    }
    Ok(grid)
}

fn paint(grid: &mut SemanticGrid, poly: &[Vec2], class: SemanticClass) {
    if poly.len() < 3 || grid.width == 0 || grid.height == 0 {
        return;
    }
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = |lo: f64, hi: f64, n: usize| {
        let first = ((lo / grid.resolution) - 0.5).floor().max(0.0) as usize;
        let last = (((hi / grid.resolution) - 0.5).ceil().max(0.0) as usize).min(n - 1);
        (first, last)
    };
    let (c0, c1) = span(lo.x - grid.origin.x, hi.x - grid.origin.x, grid.width);
    let (r0, r1) = span(lo.y - grid.origin.y, hi.y - grid.origin.y, grid.height);
    for row in r0..=r1 {
        for col in c0..=c1 {
            let idx = row * grid.width + col;
            if grid.cells[idx] < class && point_in_polygon(grid.cell_center(col, row), poly) {
                grid.cells[idx] = class;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::aabb_polygon;
    use crate::scenarios::map::Bounds;

    fn map_with(drivable: Vec<Vec<Vec2>>, crosswalks: Vec<Vec<Vec2>>) -> MapSpec {
        MapSpec {
            drivable_area: drivable,
            crosswalks,
            bounds: Bounds::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0)),
            ..MapSpec::empty()
        }
    }

    #[test]
    fn rectangle_cell_count() {
        let map = map_with(vec![aabb_polygon(Vec2::new(0.0, 0.0), Vec2::new(10.0, 4.0))], vec![]);
        let grid = rasterize_semantic_map(&map, 1.0).unwrap();
        assert_eq!((grid.width, grid.height), (20, 20));
        assert_eq!(grid.count(SemanticClass::Drivable), 40);
    }

    #[test]
    fn crosswalk_wins_over_drivable() {
        let map = map_with(
            vec![aabb_polygon(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0))],
            vec![aabb_polygon(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0))],
        );
        let grid = rasterize_semantic_map(&map, 0.5).unwrap();
        let (col, row) = (20, 20); // center (0.25, 0.25)
        assert_eq!(grid.cell_center(col, row), Vec2::new(0.25, 0.25));
        assert_eq!(grid.get(col, row), SemanticClass::Crosswalk);
    }

    #[test]
    fn bad_resolution() {
        assert!(rasterize_semantic_map(&MapSpec::empty(), 0.0).is_err());
        assert!(rasterize_semantic_map(&MapSpec::empty(), 1.5).is_err());
    }

    #[test]
    fn pgm_header() {
        let grid = rasterize_semantic_map(&map_with(vec![], vec![]), 1.0).unwrap();
        let pgm = grid.to_pgm();
        let lines: Vec<&str> = pgm.lines().collect();
        assert_eq!(lines[0], "P2");
        assert_eq!(lines[1], "# origin -10 -10 resolution 1");
        assert_eq!(lines[2], "20 20");
        assert_eq!(lines.len(), 4 + 20);
    }
}
