//! The articulated two-vehicle rig: cameras, warping contexts, and the
//! cross-view transform for each context kind.
//!
//! Ten cameras C0..C9 are mounted five per vehicle segment. Each camera's
//! extrinsic maps camera coordinates into its own vehicle's LiDAR frame; the
//! time-varying articulation enters through the rear-LiDAR -> front-LiDAR
//! transform carried by [`RigState`].

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, SE3Transform};
use crate::scalar::Real;

pub const CAMERA_COUNT: usize = 10;

/// Camera identifier C0..C9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CameraId(pub u8);

impl CameraId {
    pub fn parse(s: &str) -> Option<CameraId> {
        let rest = s.strip_prefix('C').or_else(|| s.strip_prefix('c'))?;
        let n: u8 = rest.parse().ok()?;
        (n < CAMERA_COUNT as u8).then_some(CameraId(n))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for CameraId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "C{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vehicle {
    Front,
    Rear,
}

impl Vehicle {
    pub fn parse(s: &str) -> Result<Vehicle> {
        match s {
            "front" => Ok(Vehicle::Front),
            "rear" => Ok(Vehicle::Rear),
            other => Err(Error::UnknownVehicle(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Vehicle::Front => "front",
            Vehicle::Rear => "rear",
        }
    }
}

/// One mounted camera.
#[derive(Clone, Debug)]
pub struct RigCamera<S> {
    pub id: CameraId,
    pub vehicle: Vehicle,
    pub model: CameraModel<S>,
    /// Measured mounting height above ground, meters.
    pub height_gt: S,
}

/// Camera pair list for cross-vehicle spatial contexts, indexed by the
/// number of intermediate views between the paired cameras (type 0, 1, 2).
/// First member of each pair is on the front vehicle.
pub const CV_PAIRS: [&[(u8, u8)]; 3] = [
    &[(8, 2), (7, 3)],
    &[(9, 2), (6, 3), (8, 1), (7, 4)],
    &[(5, 2), (5, 3), (9, 1), (6, 4), (8, 0), (7, 0)],
];

/// Cross-vehicle camera pairs of the given type, as built-in data.
pub fn cv_pairs(cv_type: u8) -> Vec<(CameraId, CameraId)> {
    assert!(cv_type < 3, "cross-vehicle context type must be 0, 1 or 2");
    CV_PAIRS[cv_type as usize]
        .iter()
        .map(|&(a, b)| (CameraId(a), CameraId(b)))
        .collect()
}

/// The full rig: ten cameras partitioned across the two vehicles.
#[derive(Clone, Debug)]
pub struct RigConfig<S> {
    cameras: Vec<RigCamera<S>>,
    /// Within-vehicle spatial source pairs (unordered, listed once).
    pub wv_pairs: Vec<(CameraId, CameraId)>,
    /// Optional override of the built-in cross-vehicle pair table.
    pub cv_pairs_override: Option<Vec<Vec<(CameraId, CameraId)>>>,
}

impl<S: Real> RigConfig<S> {
    pub fn new(
        cameras: Vec<RigCamera<S>>,
        wv_pairs: Vec<(CameraId, CameraId)>,
        cv_pairs_override: Option<Vec<Vec<(CameraId, CameraId)>>>,
    ) -> Result<Self> {
        if cameras.len() != CAMERA_COUNT {
            return Err(Error::InvalidCamera(format!(
                "rig must have exactly {CAMERA_COUNT} cameras, got {}",
                cameras.len()
            )));
        }
        let mut sorted = cameras;
        sorted.sort_by_key(|c| c.id);
        for (i, cam) in sorted.iter().enumerate() {
            if cam.id.index() != i {
                return Err(Error::InvalidCamera(format!(
                    "camera ids must be C0..C9 without gaps, missing C{i}"
                )));
            }
        }
        let rig = RigConfig {
            cameras: sorted,
            wv_pairs,
            cv_pairs_override,
        };
        for cv_type in 0..3 {
            for (a, b) in rig.cv_pairs_for(cv_type) {
                if rig.camera(a).vehicle == rig.camera(b).vehicle {
                    return Err(Error::InvalidCamera(format!(
                        "cross-vehicle pair ({a}, {b}) lies on one vehicle"
                    )));
                }
            }
        }
        for &(a, b) in &rig.wv_pairs {
            if rig.camera(a).vehicle != rig.camera(b).vehicle || a == b {
                return Err(Error::InvalidCamera(format!(
                    "within-vehicle pair ({a}, {b}) must be two cameras on one vehicle"
                )));
            }
        }
        Ok(rig)
    }

    #[inline]
    pub fn camera(&self, id: CameraId) -> &RigCamera<S> {
        &self.cameras[id.index()]
    }

    pub fn cameras(&self) -> &[RigCamera<S>] {
        &self.cameras
    }

    pub fn cameras_of(&self, vehicle: Vehicle) -> impl Iterator<Item = &RigCamera<S>> {
        self.cameras.iter().filter(move |c| c.vehicle == vehicle)
    }

    /// Effective cross-vehicle pairs of a type (override or built-in table).
    pub fn cv_pairs_for(&self, cv_type: u8) -> Vec<(CameraId, CameraId)> {
        match &self.cv_pairs_override {
            Some(table) => table[cv_type as usize].clone(),
            None => cv_pairs(cv_type),
        }
    }

    /// Sanity-check cross-vehicle pairs against mounted view cones. Cameras
    /// are compared by forward axis expressed in their vehicle LiDAR frames
    /// (articulation near zero). Returns human-readable warnings only.
    pub fn check_cv_overlap(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for cv_type in 0..3u8 {
            for (a, b) in self.cv_pairs_for(cv_type) {
                let ca = self.camera(a);
                let cb = self.camera(b);
                let fa = ca
                    .model
                    .extrinsic_to_lidar
                    .rotate(crate::linalg::Vec3::new(S::zero(), S::zero(), S::one()));
                let fb = cb
                    .model
                    .extrinsic_to_lidar
                    .rotate(crate::linalg::Vec3::new(S::zero(), S::zero(), S::one()));
                let angle = fa
                    .dot(fb)
                    .to_f64_value()
                    .clamp(-1.0, 1.0)
                    .acos()
                    .to_degrees();
                let fov_a = 2.0
                    * ((ca.model.width as f64 / 2.0) / ca.model.fx.to_f64_value())
                        .atan()
                        .to_degrees();
                if angle >= fov_a {
                    warnings.push(format!(
                        "cv type-{cv_type} pair ({a}, {b}): forward axes diverge {angle:.0} deg, \
                         at or beyond the {fov_a:.0} deg field of view"
                    ));
                }
            }
        }
        warnings
    }
}

/// Rig articulation data for one (t, tau) pairing.
///
/// `cross_vehicle` is the rear-LiDAR -> front-LiDAR transform at this
/// state's own timestamp. The joint motions map each vehicle's LiDAR frame
/// at the *reference* time t to its frame at this state's timestamp, so a
/// state playing the tau role carries the t -> tau motions; the state for
/// t itself leaves them `None` or identity.
#[derive(Clone, Debug)]
pub struct RigState<S> {
    pub timestamp: i64,
    pub cross_vehicle: SE3Transform<S>,
    pub joint_motion_front: Option<SE3Transform<S>>,
    pub joint_motion_rear: Option<SE3Transform<S>>,
}

impl<S: Real> RigState<S> {
    pub fn spatial_only(timestamp: i64, cross_vehicle: SE3Transform<S>) -> Self {
        RigState {
            timestamp,
            cross_vehicle,
            joint_motion_front: None,
            joint_motion_rear: None,
        }
    }

    pub fn joint_motion(&self, vehicle: Vehicle) -> Option<&SE3Transform<S>> {
        match vehicle {
            Vehicle::Front => self.joint_motion_front.as_ref(),
            Vehicle::Rear => self.joint_motion_rear.as_ref(),
        }
    }
}

/// Warping context kinds. Cross-vehicle kinds carry the pair type (0..2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContextKind {
    Temporal,
    WvSpatial,
    CvSpatial(u8),
    WvSpatioTemporal,
    CvSpatioTemporal(u8),
}

impl ContextKind {
    pub fn is_temporal_like(self) -> bool {
        !matches!(self, ContextKind::WvSpatial | ContextKind::CvSpatial(_))
    }

    pub fn is_cross_vehicle(self) -> bool {
        matches!(
            self,
            ContextKind::CvSpatial(_) | ContextKind::CvSpatioTemporal(_)
        )
    }
}

/// One warping context: reconstruct the target camera's view at time t from
/// the source camera's image at `t + source_offset`.
#[derive(Clone, Copy, Debug)]
pub struct ContextSpec {
    pub kind: ContextKind,
    pub target_cam: CameraId,
    pub source_cam: CameraId,
    /// Source time relative to t: -1, 0 or +1. 0 for spatial kinds.
    pub source_offset: i8,
}

impl ContextSpec {
    pub fn new(kind: ContextKind, target_cam: CameraId, source_cam: CameraId, source_offset: i8) -> Self {
        ContextSpec {
            kind,
            target_cam,
            source_cam,
            source_offset,
        }
    }

    /// Enforce the structural invariants of each kind.
    pub fn validate<S: Real>(&self, rig: &RigConfig<S>) -> Result<()> {
        let same_cam = self.target_cam == self.source_cam;
        let same_vehicle =
            rig.camera(self.target_cam).vehicle == rig.camera(self.source_cam).vehicle;
        let ok = match self.kind {
            ContextKind::Temporal => same_cam && self.source_offset != 0,
            ContextKind::WvSpatial => !same_cam && same_vehicle && self.source_offset == 0,
            ContextKind::CvSpatial(t) => t < 3 && !same_vehicle && self.source_offset == 0,
            ContextKind::WvSpatioTemporal => !same_cam && same_vehicle && self.source_offset != 0,
            ContextKind::CvSpatioTemporal(t) => t < 3 && !same_vehicle && self.source_offset != 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompleteState("context spec violates kind invariants"))
        }
    }
}

/// Per-camera motion from the vehicle joint motion: `E^-1 . joint . E`,
/// with E the camera -> LiDAR mount.
pub fn camera_pose_from_joint<S: Real>(
    cam: &CameraModel<S>,
    joint: &SE3Transform<S>,
) -> SE3Transform<S> {
    cam.extrinsic_to_lidar
        .inverse()
        .compose(joint)
        .compose(&cam.extrinsic_to_lidar)
}

/// LiDAR-frame hop between the vehicles of two cameras at the state's time:
/// LiDAR of `from` vehicle -> LiDAR of `to` vehicle.
fn lidar_hop<S: Real>(
    from: Vehicle,
    to: Vehicle,
    state: &RigState<S>,
) -> Result<SE3Transform<S>> {
    match (from, to) {
        (Vehicle::Rear, Vehicle::Front) => Ok(state.cross_vehicle),
        (Vehicle::Front, Vehicle::Rear) => Ok(state.cross_vehicle.inverse()),
        _ => Err(Error::IncompleteState(
            "cross-vehicle hop requested within one vehicle",
        )),
    }
}

/// The rigid transform realizing the context: maps target-camera coordinates
/// at time t into source-camera coordinates at the source time.
///
/// Composition per kind (right-to-left application):
///   temporal          T_i
///   WV spatial        E_j^-1  E_i
///   CV spatial        E_j^-1  L_ij  E_i
///   WV spatial-temp   T_j . (E_j^-1 E_i)
///   CV spatial-temp   T_j . (E_j^-1 L_ij E_i)
/// where T_k is the source camera's own t -> tau motion (conjugated joint
/// motion), E the camera -> LiDAR mounts, and L_ij the LiDAR hop at time t.
/// The spatial-temporal cases are built literally as
/// `temporal(source) . spatial`, so that identity holds float-exactly.
pub fn context_transform<S: Real>(
    ctx: &ContextSpec,
    rig: &RigConfig<S>,
    state_t: &RigState<S>,
    state_tau: &RigState<S>,
) -> Result<SE3Transform<S>> {
    ctx.validate(rig)?;
    let target = rig.camera(ctx.target_cam);
    let source = rig.camera(ctx.source_cam);

    let temporal_of_source = || -> Result<SE3Transform<S>> {
        let joint = state_tau
            .joint_motion(source.vehicle)
            .ok_or(Error::IncompleteState("joint motion for source vehicle"))?;
        Ok(camera_pose_from_joint(&source.model, joint))
    };

    let wv_spatial = || -> SE3Transform<S> {
        source
            .model
            .extrinsic_to_lidar
            .inverse()
            .compose(&target.model.extrinsic_to_lidar)
    };

    let cv_spatial = || -> Result<SE3Transform<S>> {
        let hop = lidar_hop(target.vehicle, source.vehicle, state_t)?;
        Ok(source
            .model
            .extrinsic_to_lidar
            .inverse()
            .compose(&hop)
            .compose(&target.model.extrinsic_to_lidar))
    };

    match ctx.kind {
        ContextKind::Temporal => temporal_of_source(),
        ContextKind::WvSpatial => Ok(wv_spatial()),
        ContextKind::CvSpatial(_) => cv_spatial(),
        ContextKind::WvSpatioTemporal => Ok(temporal_of_source()?.compose(&wv_spatial())),
        ContextKind::CvSpatioTemporal(_) => Ok(temporal_of_source()?.compose(&cv_spatial()?)),
    }
}
