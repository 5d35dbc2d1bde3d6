//! Analytic scenes: ground plane, axis-aligned boxes, vertical walls, each
//! carrying a smooth sinusoidal texture. Ray intersections are closed-form,
//! so rendered depth and normals are exact.
//!
//! World frame: y points down, the ground plane sits at a fixed y, vehicles
//! travel in the x-z plane. Surfaces above ground have negative y.

use articugeo_core::error::{Error, Result};
use articugeo_core::linalg::Vec3;

/// One sinusoidal component: amplitude * sin(2 pi freq . p + phase).
#[derive(Clone, Copy, Debug)]
pub struct Wave {
    pub amplitude: f64,
    /// Spatial frequency, cycles per meter along each world axis.
    pub freq: Vec3<f64>,
    pub phase: f64,
}

/// Smooth Lambertian texture evaluated at the 3D hit point; bandlimited so
/// bilinear resampling stays near-exact.
#[derive(Clone, Debug)]
pub struct Texture {
    pub base: f64,
    pub waves: Vec<Wave>,
}

impl Texture {
    pub fn value(&self, p: Vec3<f64>) -> f64 {
        let mut v = self.base;
        for w in &self.waves {
            v += w.amplitude
                * (2.0 * std::f64::consts::PI * w.freq.dot(p) + w.phase).sin();
        }
        v.clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug)]
pub enum Primitive {
    /// Infinite horizontal plane at world y = `y` (y-down: the ground).
    Ground { y: f64, texture: Texture },
    /// Axis-aligned box, min corner componentwise below max.
    Block {
        min: Vec3<f64>,
        max: Vec3<f64>,
        texture: Texture,
    },
    /// Vertical rectangle: center, horizontal normal direction given by yaw
    /// (about the world y axis), horizontal width and vertical height.
    Wall {
        center: Vec3<f64>,
        normal_yaw: f64,
        width: f64,
        height: f64,
        texture: Texture,
    },
}

/// A ray hit: parameter along the (possibly unnormalized) direction, world
/// point, viewer-facing world normal, and the primitive index.
#[derive(Clone, Copy, Debug)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3<f64>,
    pub normal: Vec3<f64>,
    pub primitive: usize,
}

const RAY_EPS: f64 = 1e-9;

impl Primitive {
    /// Closest positive intersection parameter and outward world normal.
    fn intersect(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<(f64, Vec3<f64>)> {
        match self {
            Primitive::Ground { y, .. } => {
                if dir.y.abs() < 1e-15 {
                    return None;
                }
                let t = (y - origin.y) / dir.y;
                (t > RAY_EPS).then(|| {
                    // up is -y; flip toward the viewer below ground never occurs
                    (t, Vec3::new(0.0, -1.0, 0.0))
                })
            }
            Primitive::Block { min, max, .. } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_axis = 0usize;
                let (o, d) = ([origin.x, origin.y, origin.z], [dir.x, dir.y, dir.z]);
                let (lo, hi) = ([min.x, min.y, min.z], [max.x, max.y, max.z]);
                for axis in 0..3 {
                    if d[axis].abs() < 1e-15 {
                        if o[axis] < lo[axis] || o[axis] > hi[axis] {
                            return None;
                        }
                        continue;
                    }
                    let mut t0 = (lo[axis] - o[axis]) / d[axis];
                    let mut t1 = (hi[axis] - o[axis]) / d[axis];
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                    }
                    if t0 > t_near {
                        t_near = t0;
                        near_axis = axis;
                    }
                    t_far = t_far.min(t1);
                    if t_near > t_far {
                        return None;
                    }
                }
                if t_near <= RAY_EPS {
                    return None; // inside or behind: not a valid exterior hit
                }
                let mut n = [0.0; 3];
                n[near_axis] = if d[near_axis] > 0.0 { -1.0 } else { 1.0 };
                Some((t_near, Vec3::new(n[0], n[1], n[2])))
            }
            Primitive::Wall {
                center,
                normal_yaw,
                width,
                height,
                ..
            } => {
                let n = Vec3::new(normal_yaw.sin(), 0.0, normal_yaw.cos());
                let denom = n.dot(dir);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = n.dot(*center - origin) / denom;
                if t <= RAY_EPS {
                    return None;
                }
                let p = origin + dir.scale(t);
                let along = Vec3::new(normal_yaw.cos(), 0.0, -normal_yaw.sin());
                if (p - *center).dot(along).abs() > width / 2.0
                    || (p.y - center.y).abs() > height / 2.0
                {
                    return None;
                }
                // face the viewer
                Some((t, if denom > 0.0 { -n } else { n }))
            }
        }
    }

    pub fn texture(&self) -> &Texture {
        match self {
            Primitive::Ground { texture, .. } => texture,
            Primitive::Block { texture, .. } => texture,
            Primitive::Wall { texture, .. } => texture,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Primitive::Ground { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    /// Depth rasters mark hits beyond this range invalid; images still show
    /// the texture so warped samples near the cutoff stay uncontaminated.
    pub max_depth: f64,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>, max_depth: f64) -> Result<Self> {
        let scene = Scene {
            primitives,
            max_depth,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Reject configurations that create depth-ambiguous coincident
    /// surfaces: nothing may extend below the ground plane, boxes must not
    /// be inverted, and sizes must be positive.
    pub fn validate(&self) -> Result<()> {
        if self.max_depth <= 0.0 {
            return Err(Error::DegenerateGeometry("max_depth must be positive"));
        }
        let ground_y = self.primitives.iter().find_map(|p| match p {
            Primitive::Ground { y, .. } => Some(*y),
            _ => None,
        });
        for p in &self.primitives {
            match p {
                Primitive::Ground { .. } => {}
                Primitive::Block { min, max, .. } => {
                    if !(min.x < max.x && min.y < max.y && min.z < max.z) {
                        return Err(Error::DegenerateGeometry("box min must be below max"));
                    }
                    if let Some(gy) = ground_y {
                        if max.y > gy + 1e-9 {
                            return Err(Error::DegenerateGeometry(
                                "box extends below the ground plane",
                            ));
                        }
                    }
                }
                Primitive::Wall { width, height, center, .. } => {
                    if *width <= 0.0 || *height <= 0.0 {
                        return Err(Error::DegenerateGeometry("wall size must be positive"));
                    }
                    if let Some(gy) = ground_y {
                        if center.y + height / 2.0 > gy + 1e-9 {
                            return Err(Error::DegenerateGeometry(
                                "wall extends below the ground plane",
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Closest hit along the ray; ties resolved by primitive order.
    pub fn raycast(&self, origin: Vec3<f64>, dir: Vec3<f64>) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (i, p) in self.primitives.iter().enumerate() {
            if let Some((t, normal)) = p.intersect(origin, dir) {
                let better = match &best {
                    None => true,
                    Some(b) => t < b.t,
                };
                if better {
                    best = Some(Hit {
                        t,
                        point: origin + dir.scale(t),
                        normal,
                        primitive: i,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_texture() -> Texture {
        Texture {
            base: 0.5,
            waves: vec![],
        }
    }

    #[test]
    fn ground_intersection_and_normal() {
        let scene = Scene::new(
            vec![Primitive::Ground {
                y: 0.0,
                texture: flat_texture(),
            }],
            100.0,
        )
        .unwrap();
        // camera 1.5 above ground (y = -1.5) looking down-forward
        let hit = scene
            .raycast(Vec3::new(0.0, -1.5, 0.0), Vec3::new(0.0, 1.0, 1.0))
            .unwrap();
        assert!((hit.t - 1.5).abs() < 1e-12);
        assert_eq!(hit.point.y, 0.0);
        assert_eq!(hit.normal, Vec3::new(0.0, -1.0, 0.0));
        // looking up misses
        assert!(scene
            .raycast(Vec3::new(0.0, -1.5, 0.0), Vec3::new(0.0, -0.2, 1.0))
            .is_none());
    }

    #[test]
    fn block_entry_face_normal() {
        let scene = Scene::new(
            vec![Primitive::Block {
                min: Vec3::new(-1.0, -2.0, 4.0),
                max: Vec3::new(1.0, 0.0, 6.0),
                texture: flat_texture(),
            }],
            100.0,
        )
        .unwrap();
        let hit = scene
            .raycast(Vec3::new(0.0, -1.0, 0.0), Vec3::new(0.0, 0.0, 1.0))
            .unwrap();
        assert!((hit.t - 4.0).abs() < 1e-12);
        assert_eq!(hit.normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn wall_extent_is_respected() {
        let scene = Scene::new(
            vec![Primitive::Wall {
                center: Vec3::new(0.0, -1.0, 10.0),
                normal_yaw: std::f64::consts::PI, // normal (0,0,-1): faces camera
                width: 4.0,
                height: 2.0,
                texture: flat_texture(),
            }],
            100.0,
        )
        .unwrap();
        let hit = scene
            .raycast(Vec3::new(0.0, -1.0, 0.0), Vec3::new(0.0, 0.0, 1.0))
            .unwrap();
        assert!((hit.t - 10.0).abs() < 1e-12);
        assert!(hit.normal.z < 0.0);
        // outside horizontal extent
        assert!(scene
            .raycast(Vec3::new(3.0, -1.0, 0.0), Vec3::new(0.0, 0.0, 1.0))
            .is_none());
    }

    #[test]
    fn closest_hit_wins() {
        let scene = Scene::new(
            vec![
                Primitive::Ground {
                    y: 0.0,
                    texture: flat_texture(),
                },
                Primitive::Block {
                    min: Vec3::new(-1.0, -1.0, 2.0),
                    max: Vec3::new(1.0, 0.0, 3.0),
                    texture: flat_texture(),
                },
            ],
            100.0,
        )
        .unwrap();
        let hit = scene
            .raycast(Vec3::new(0.0, -0.5, 0.0), Vec3::new(0.0, 0.0, 1.0))
            .unwrap();
        assert_eq!(hit.primitive, 1);
        assert!((hit.t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_buried_box() {
        let bad = Scene::new(
            vec![
                Primitive::Ground {
                    y: 0.0,
                    texture: flat_texture(),
                },
                Primitive::Block {
                    min: Vec3::new(0.0, -1.0, 0.0),
                    max: Vec3::new(1.0, 0.5, 1.0),
                    texture: flat_texture(),
                },
            ],
            100.0,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn texture_is_view_independent_and_clamped() {
        let tex = Texture {
            base: 0.5,
            waves: vec![Wave {
                amplitude: 0.9,
                freq: Vec3::new(0.2, 0.0, 0.0),
                phase: 0.0,
            }],
        };
        let p = Vec3::new(1.25, 0.0, 3.0);
        assert_eq!(tex.value(p), tex.value(p));
        for i in 0..100 {
            let v = tex.value(Vec3::new(i as f64 * 0.173, 0.0, 0.0));
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
