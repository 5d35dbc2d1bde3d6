//! Minimal 3-vector / 3x3-matrix algebra used by the geometry kernels.
//!
//! Self-contained so every operation is auditable and deterministic, and so
//! the whole stack stays generic over the scalar type.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// 3-vector (meters for points, dimensionless for directions/normals).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Vec3<S> {
    #[inline]
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3::new(S::zero(), S::zero(), S::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    /// Unit vector, or `None` when the squared norm is below `eps2`.
    pub fn normalized(self, eps2: S) -> Option<Self> {
        let n2 = self.norm_squared();
        if n2 <= eps2 {
            None
        } else {
            Some(self / n2.sqrt())
        }
    }

    #[inline]
    pub fn scale(self, s: S) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_f64(self) -> Vec3<f64> {
        Vec3::new(
            self.x.to_f64_value(),
            self.y.to_f64_value(),
            self.z.to_f64_value(),
        )
    }

    pub fn cast<T: Real>(self) -> Vec3<T> {
        Vec3::new(
            T::cst(self.x.to_f64_value()),
            T::cst(self.y.to_f64_value()),
            T::cst(self.z.to_f64_value()),
        )
    }
}

impl<S: Real> Add for Vec3<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Real> Sub for Vec3<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Real> Neg for Vec3<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Real> Div<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn div(self, s: S) -> Self {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Real> Mat3<S> {
    pub fn identity() -> Self {
        let (o, z) = (S::one(), S::zero());
        Mat3 {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_rows(r0: Vec3<S>, r1: Vec3<S>, r2: Vec3<S>) -> Self {
        Mat3 {
            m: [[r0.x, r0.y, r0.z], [r1.x, r1.y, r1.z], [r2.x, r2.y, r2.z]],
        }
    }

    pub fn from_cols(c0: Vec3<S>, c1: Vec3<S>, c2: Vec3<S>) -> Self {
        Mat3 {
            m: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Vec3<S> {
        Vec3::new(self.m[i][0], self.m[i][1], self.m[i][2])
    }

    #[inline]
    pub fn col(&self, j: usize) -> Vec3<S> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        Mat3 {
            m: [
                [self.m[0][0], self.m[1][0], self.m[2][0]],
                [self.m[0][1], self.m[1][1], self.m[2][1]],
                [self.m[0][2], self.m[1][2], self.m[2][2]],
            ],
        }
    }

    pub fn det(&self) -> S {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm of `self - I`.
    pub fn frobenius_distance_to_identity(&self) -> S {
        let mut acc = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let delta = self.m[i][j] - if i == j { S::one() } else { S::zero() };
                acc += delta * delta;
            }
        }
        acc.sqrt()
    }

    /// Rotation about the x axis (camera frame: x right, y down, z forward).
    pub fn rot_x(angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let (o, z) = (S::one(), S::zero());
        Mat3 {
            m: [[o, z, z], [z, c, -s], [z, s, c]],
        }
    }

    /// Rotation about the y axis.
    pub fn rot_y(angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let (o, z) = (S::one(), S::zero());
        Mat3 {
            m: [[c, z, s], [z, o, z], [-s, z, c]],
        }
    }

    /// Rotation about the z axis.
    pub fn rot_z(angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let (o, z) = (S::one(), S::zero());
        Mat3 {
            m: [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }

    /// Rodrigues rotation about a unit axis.
    pub fn from_axis_angle(axis: Vec3<S>, angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let t = S::one() - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Mat3 {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_f64(&self) -> Mat3<f64> {
        let mut out = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j].to_f64_value();
            }
        }
        out
    }

    pub fn cast<T: Real>(&self) -> Mat3<T> {
        let mut out = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = T::cst(self.m[i][j].to_f64_value());
            }
        }
        out
    }
}

impl<S: Real> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][0] * o.m[0][j]
                    + self.m[i][1] * o.m[1][j]
                    + self.m[i][2] * o.m[2][j];
            }
        }
        out
    }
}

impl<S: Real> Mul<Vec3<S>> for Mat3<S> {
    type Output = Vec3<S>;
    #[inline]
    fn mul(self, v: Vec3<S>) -> Vec3<S> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues (descending) and the matching orthonormal eigenvectors
/// as columns of the returned matrix.
pub fn jacobi_eigen_sym3(a: &Mat3<f64>) -> ([f64; 3], Mat3<f64>) {
    let mut a = *a;
    let mut v = Mat3::<f64>::identity();
    for _ in 0..64 {
        // largest off-diagonal element
        let mut p = 0;
        let mut q = 1;
        let mut biggest = 0.0f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                if a.m[i][j].abs() > biggest {
                    biggest = a.m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if biggest < 1e-15 {
            break;
        }
        let app = a.m[p][p];
        let aqq = a.m[q][q];
        let apq = a.m[p][q];
        let theta = 0.5 * (aqq - app) / apq;
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let mut rot = Mat3::<f64>::identity();
        rot.m[p][p] = c;
        rot.m[q][q] = c;
        rot.m[p][q] = s;
        rot.m[q][p] = -s;
        a = rot.transpose() * a * rot;
        // symmetrize against round-off
        a.m[q][p] = a.m[p][q];
        v = v * rot;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a.m[j][j].partial_cmp(&a.m[i][i]).unwrap());
    let vals = [a.m[order[0]][order[0]], a.m[order[1]][order[1]], a.m[order[2]][order[2]]];
    let vecs = Mat3::from_cols(v.col(order[0]), v.col(order[1]), v.col(order[2]));
    (vals, vecs)
}

/// SVD of a 3x3 matrix: `a = u * diag(sigma) * v^T`, singular values descending.
pub fn svd3(a: &Mat3<f64>) -> (Mat3<f64>, [f64; 3], Mat3<f64>) {
    let ata = a.transpose() * *a;
    let (lambda, v) = jacobi_eigen_sym3(&ata);
    let sigma = [
        lambda[0].max(0.0).sqrt(),
        lambda[1].max(0.0).sqrt(),
        lambda[2].max(0.0).sqrt(),
    ];
    // u_k = A v_k / sigma_k; rebuild degenerate columns by cross products
    let mut ucols = [Vec3::<f64>::zero(); 3];
    for k in 0..3 {
        let av = *a * v.col(k);
        ucols[k] = match av.normalized(1e-24) {
            Some(u) if sigma[k] > 1e-12 * sigma[0].max(1e-300) => u,
            _ => Vec3::zero(),
        };
    }
    if ucols[2].norm_squared() == 0.0 {
        let c = ucols[0].cross(ucols[1]);
        ucols[2] = c.normalized(1e-24).unwrap_or(Vec3::new(0.0, 0.0, 1.0));
    }
    if ucols[1].norm_squared() == 0.0 {
        let c = ucols[2].cross(ucols[0]);
        ucols[1] = c.normalized(1e-24).unwrap_or(Vec3::new(0.0, 1.0, 0.0));
    }
    let u = Mat3::from_cols(ucols[0], ucols[1], ucols[2]);
    (u, sigma, v)
}

/// Nearest rotation to `a` (polar factor), with reflection guard.
pub fn nearest_rotation(a: &Mat3<f64>) -> Mat3<f64> {
    let (u, _sigma, v) = svd3(a);
    let mut r = u * v.transpose();
    if r.det() < 0.0 {
        // flip the column of u tied to the smallest singular value
        let flipped = Mat3::from_cols(u.col(0), u.col(1), -u.col(2));
        r = flipped * v.transpose();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_and_dot() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(x.dot(y), 0.0);
    }

    #[test]
    fn jacobi_recovers_symmetric_eigenpairs() {
        let a = Mat3 {
            m: [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]],
        };
        let (vals, vecs) = jacobi_eigen_sym3(&a);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        for k in 0..3 {
            let v = vecs.col(k);
            let av = a * v;
            let residual = (av - v.scale(vals[k])).norm();
            assert!(residual < 1e-12, "eigenpair {k} residual {residual}");
        }
    }

    #[test]
    fn svd_reconstructs() {
        let a = Mat3 {
            m: [[0.3, -1.2, 0.8], [2.0, 0.1, -0.4], [-0.7, 0.9, 1.5]],
        };
        let (u, s, v) = svd3(&a);
        let mut sm = Mat3::<f64>::identity();
        for k in 0..3 {
            sm.m[k][k] = s[k];
        }
        let rec = u * sm * v.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec.m[i][j] - a.m[i][j]).abs() < 1e-10);
            }
        }
        assert!((u.det().abs() - 1.0).abs() < 1e-10);
        assert!((v.det().abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nearest_rotation_is_orthonormal() {
        let noisy = Mat3 {
            m: [
                [0.999, -0.02, 0.008],
                [0.021, 1.001, -0.015],
                [-0.007, 0.014, 0.998],
            ],
        };
        let r = nearest_rotation(&noisy);
        let dev = (r.transpose() * r).frobenius_distance_to_identity();
        assert!(dev < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }
}
