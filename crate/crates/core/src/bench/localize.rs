//! Location cube from a matched template pose.

use serde::{Deserialize, Serialize};

use super::pose::{PoseLabel, HEIGHT_LEVELS, YAWS, YAW_STEP};
use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Physical camera position, in metres, for each pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridGeometry {
    /// Capture points on the x axis, `point_spacing` apart. The camera sits on
    /// an arm of `arm_radius` that turns with yaw, at
    /// `base_height + height_level * height_step`.
    Regular {
        point_spacing: f64,
        base_height: f64,
        height_step: f64,
        arm_radius: f64,
    },
    Explicit { poses: Vec<(PoseLabel, Point3)> },
}

impl Default for GridGeometry {
    fn default() -> Self {
        GridGeometry::Regular {
            point_spacing: 1.0,
            base_height: 1.0,
            height_step: 0.25,
            arm_radius: 0.1,
        }
    }
}

impl GridGeometry {
    pub fn position(&self, pose: &PoseLabel) -> Result<Point3> {
        match self {
            GridGeometry::Regular {
                point_spacing,
                base_height,
                height_step,
                arm_radius,
            } => {
                let yaw = (pose.yaw as f64).to_radians();
                Ok([
                    pose.point_id as f64 * point_spacing + arm_radius * yaw.sin(),
                    arm_radius * yaw.cos(),
                    base_height + pose.height_level as f64 * height_step,
                ])
            }
            GridGeometry::Explicit { poses } => poses
                .iter()
                .find(|(p, _)| p == pose)
                .map(|&(_, c)| c)
                .ok_or_else(|| Error::invalid(format!("pose {pose:?} is not in the grid geometry"))),
        }
    }
}

/// Which poses remain plausible once a template has matched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// The matched yaw and its neighbour toward 0 (`+15` for a 0 match), at
    /// every height: 6 poses.
    #[default]
    YawNeighbourhood,
    /// All 15 poses of the matched point.
    FullGrid,
}

impl CandidatePolicy {
    pub fn candidates(self, matched: &PoseLabel) -> Vec<PoseLabel> {
        let yaws: Vec<i32> = match self {
            CandidatePolicy::YawNeighbourhood => {
                let other = if matched.yaw == 0 {
                    YAW_STEP
                } else {
                    matched.yaw - YAW_STEP * matched.yaw.signum()
                };
                let mut v = vec![matched.yaw, other];
                v.sort_unstable();
                v
            }
            CandidatePolicy::FullGrid => YAWS.to_vec(),
        };
        (0..HEIGHT_LEVELS)
            .flat_map(|h| {
                yaws.iter().map(move |&yaw| PoseLabel {
                    point_id: matched.point_id,
                    height_level: h,
                    yaw,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocationCube {
    pub min: Point3,
    pub max: Point3,
    /// Corners with bit 0 of the index selecting max x, bit 1 max y, bit 2 max z.
    pub corners: [Point3; 8],
    pub center: Point3,
    pub candidates: Vec<(PoseLabel, Point3)>,
}

/// Axis-aligned bounding box of `points`.
pub fn bounding_cube(points: &[Point3]) -> Result<(Point3, Point3)> {
    if points.is_empty() {
        return Err(Error::invalid("cannot bound an empty point set"));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Ok((lo, hi))
}

pub fn cube_from_candidates(candidates: Vec<(PoseLabel, Point3)>) -> Result<LocationCube> {
    let pts: Vec<Point3> = candidates.iter().map(|c| c.1).collect();
    let (min, max) = bounding_cube(&pts)?;
    let corners = std::array::from_fn(|i| {
        std::array::from_fn(|k| if i >> k & 1 == 1 { max[k] } else { min[k] })
    });
    let center = std::array::from_fn(|k| 0.5 * (min[k] + max[k]));
    Ok(LocationCube {
        min,
        max,
        corners,
        center,
        candidates,
    })
}

pub fn localize(matched: &PoseLabel, geometry: &GridGeometry, policy: CandidatePolicy) -> Result<LocationCube> {
    let candidates = policy
        .candidates(matched)
        .into_iter()
        .map(|p| geometry.position(&p).map(|c| (p, c)))
        .collect::<Result<Vec<_>>>()?;
    cube_from_candidates(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_candidates() {
        for yaw in YAWS {
            let m = PoseLabel::new(3, 1, yaw).unwrap();
            let c = CandidatePolicy::YawNeighbourhood.candidates(&m);
            assert_eq!(c.len(), 6);
            assert!(c.contains(&m));
            assert!(c.iter().all(|p| (p.yaw - yaw).abs() == 15 || p.yaw == yaw));
        }
        assert_eq!(CandidatePolicy::FullGrid.candidates(&PoseLabel::new(0, 0, 0).unwrap()).len(), 15);
    }

    #[test]
    fn regular_cube() {
        let m = PoseLabel::new(0, 1, 0).unwrap();
        let cube = localize(&m, &GridGeometry::default(), CandidatePolicy::YawNeighbourhood).unwrap();
        assert!((cube.min[2] - 1.0).abs() < 1e-12 && (cube.max[2] - 1.5).abs() < 1e-12);
        assert!((cube.max[0] - 0.1 * 15f64.to_radians().sin()).abs() < 1e-12);
        assert_eq!(cube.corners[0], cube.min);
        assert_eq!(cube.corners[7], cube.max);
    }

    #[test]
    fn explicit_geometry_missing_pose() {
        let g = GridGeometry::Explicit { poses: vec![] };
        assert!(localize(&PoseLabel::new(0, 1, 0).unwrap(), &g, CandidatePolicy::default()).is_err());
    }
}
