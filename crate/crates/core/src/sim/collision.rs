use crate::geometry::Vec2;

use super::types::{Pose, Shape};

/// Separating-axis overlap test between two yaw-rotated footprint rectangles
/// (`length` along the heading, `width` across it). Height is ignored.
/// Touching rectangles count as overlapping.
pub fn obb_overlap(pose_a: &Pose, shape_a: &Shape, pose_b: &Pose, shape_b: &Shape) -> bool {
    footprints_overlap(
        pose_a.xy(),
        pose_a.yaw(),
        shape_a,
        pose_b.xy(),
        pose_b.yaw(),
        shape_b,
    )
}

pub(crate) fn footprints_overlap(
    center_a: Vec2,
    yaw_a: f64,
    shape_a: &Shape,
    center_b: Vec2,
    yaw_b: f64,
    shape_b: &Shape,
) -> bool {
    let ua = Vec2::from_heading(yaw_a);
    let ub = Vec2::from_heading(yaw_b);
    let (va, vb) = (ua.perp(), ub.perp());
    let d = center_b - center_a;
    let (hla, hwa) = (shape_a.length / 2.0, shape_a.width / 2.0);
    let (hlb, hwb) = (shape_b.length / 2.0, shape_b.width / 2.0);

    [ua, va, ub, vb].iter().all(|&axis| {
        let ra = hla * ua.dot(axis).abs() + hwa * va.dot(axis).abs();
        let rb = hlb * ub.dot(axis).abs() + hwb * vb.dot(axis).abs();
        d.dot(axis).abs() <= ra + rb
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_centers_overlap() {
        let p = Pose::planar(3.0, -2.0, 10.0);
        assert!(obb_overlap(&p, &Shape::CAR, &p, &Shape::CAR));
    }

    #[test]
    fn far_apart_do_not_overlap() {
        let a = Pose::planar(0.0, 0.0, 0.0);
        let b = Pose::planar(10.0, 0.0, 0.0);
        assert!(!obb_overlap(&a, &Shape::CAR, &b, &Shape::CAR));
    }

    #[test]
    fn rotated_box_clears_corner_only_when_sat_says_so() {
        // A 2x2 square rotated 45 deg has half-diagonal sqrt(2) along x.
        let unit = Shape::new(2.0, 2.0, 1.0);
        let a = Pose::planar(0.0, 0.0, 0.0);
        let near = Pose::planar(1.0 + 2f64.sqrt() - 0.01, 0.0, 45.0);
        let far = Pose::planar(1.0 + 2f64.sqrt() + 0.01, 0.0, 45.0);
        assert!(obb_overlap(&a, &unit, &near, &unit));
        assert!(!obb_overlap(&a, &unit, &far, &unit));
    }
}
