//! Quaternion algebra and the rotation action on pure quaternions.
//!
//! Components are ordered scalar-first, `(q0, q1, q2, q3)`. No operation
//! normalizes silently; use [`quat_normalize`] when projection onto the unit
//! sphere is wanted.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::tolerances::TOL_UNIT;

/// Levi-Civita symbol on indices `0..3`.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[inline]
pub fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// A 3-vector. Doubles as a pure quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Unit basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vec3(v)
    }

    #[inline]
    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn cross(&self, other: &Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Componentwise product.
    pub fn component_mul(&self, other: &Vec3) -> Vec3 {
        Vec3([
            self.0[0] * other.0[0],
            self.0[1] * other.0[1],
            self.0[2] * other.0[2],
        ])
    }

    /// The pure quaternion `(0, self)`.
    #[inline]
    pub fn to_pure(self) -> Quaternion {
        Quaternion::pure(self)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3(v)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// A real quaternion `q0 e0 + q1 e1 + q2 e2 + q3 e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub q0: f64,
    pub qv: Vec3,
}

impl Default for Quaternion {
    fn default() -> Self {
        Quaternion::IDENTITY
    }
}

impl Quaternion {
    /// The unit `e0`.
    pub const IDENTITY: Quaternion = Quaternion {
        q0: 1.0,
        qv: Vec3::ZERO,
    };

    pub const ZERO: Quaternion = Quaternion {
        q0: 0.0,
        qv: Vec3::ZERO,
    };

    #[inline]
    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quaternion {
            q0,
            qv: Vec3([q1, q2, q3]),
        }
    }

    #[inline]
    pub const fn from_parts(q0: f64, qv: Vec3) -> Self {
        Quaternion { q0, qv }
    }

    #[inline]
    pub const fn pure(v: Vec3) -> Self {
        Quaternion { q0: 0.0, qv: v }
    }

    /// Generator `e_mu`, `mu = 0..4` (`e0` is the unit).
    pub fn basis(mu: usize) -> Self {
        let mut c = [0.0; 4];
        c[mu] = 1.0;
        Quaternion::from_array(c)
    }

    #[inline]
    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.q0, self.qv.0[0], self.qv.0[1], self.qv.0[2]]
    }

    #[inline]
    pub fn scalar(&self) -> f64 {
        self.q0
    }

    /// Vector (imaginary) part.
    #[inline]
    pub fn vector(&self) -> Vec3 {
        self.qv
    }

    #[inline]
    pub fn conj(self) -> Quaternion {
        Quaternion {
            q0: self.q0,
            qv: -self.qv,
        }
    }

    /// Euclidean inner product on `R⁴`.
    #[inline]
    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.q0 * other.q0 + self.qv.dot(&other.qv)
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn inverse(self) -> Result<Quaternion> {
        quat_inverse(self)
    }

    pub fn normalize(self) -> Result<Quaternion> {
        quat_normalize(self)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.q0.is_finite() && self.qv.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.q0.abs().max(self.qv.max_abs())
    }

    /// Returns an error unless `| |q| - 1 | <= TOL_UNIT`.
    pub fn ensure_unit(&self) -> Result<()> {
        let deviation = (self.norm() - 1.0).abs();
        if deviation <= TOL_UNIT {
            Ok(())
        } else {
            Err(Error::NotUnit {
                deviation,
                tolerance: TOL_UNIT,
            })
        }
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Quaternion::from_array(c)
    }
}

impl Index<usize> for Quaternion {
    type Output = f64;
    fn index(&self, mu: usize) -> &f64 {
        match mu {
            0 => &self.q0,
            1..=3 => &self.qv.0[mu - 1],
            _ => panic!("quaternion component index {mu} out of range"),
        }
    }
}

impl IndexMut<usize> for Quaternion {
    fn index_mut(&mut self, mu: usize) -> &mut f64 {
        match mu {
            0 => &mut self.q0,
            1..=3 => &mut self.qv.0[mu - 1],
            _ => panic!("quaternion component index {mu} out of range"),
        }
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion {
            q0: self.q0 + o.q0,
            qv: self.qv + o.qv,
        }
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion {
            q0: self.q0 - o.q0,
            qv: self.qv - o.qv,
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion {
            q0: -self.q0,
            qv: -self.qv,
        }
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion {
            q0: self.q0 * s,
            qv: self.qv * s,
        }
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        quat_mul(self, o)
    }
}

/// Hamilton product `(a0 b0 - <a, b>, a0 b + b0 a + a × b)`.
#[inline]
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        q0: a.q0 * b.q0 - a.qv.dot(&b.qv),
        qv: b.qv * a.q0 + a.qv * b.q0 + a.qv.cross(&b.qv),
    }
}

#[inline]
pub fn quat_conj(q: Quaternion) -> Quaternion {
    q.conj()
}

#[inline]
pub fn quat_norm(q: Quaternion) -> f64 {
    q.norm()
}

/// `q† / |q|²`.
pub fn quat_inverse(q: Quaternion) -> Result<Quaternion> {
    let n2 = q.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(q.conj() * (1.0 / n2))
}

/// `q / |q|`.
pub fn quat_normalize(q: Quaternion) -> Result<Quaternion> {
    let n = q.norm();
    if n == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(q * (1.0 / n))
}

/// Vector part of `q x q†` for a unit `q`.
pub fn rotate_vector(q: Quaternion, x: Vec3) -> Result<Vec3> {
    q.ensure_unit()?;
    Ok(rotate_vector_unchecked(q, x))
}

#[inline]
pub(crate) fn rotate_vector_unchecked(q: Quaternion, x: Vec3) -> Vec3 {
    quat_mul(quat_mul(q, x.to_pure()), q.conj()).qv
}

/// `cos(φ/2) e0 + sin(φ/2) axis/|axis|`.
pub fn axis_angle_to_quat(axis: Vec3, phi: f64) -> Result<Quaternion> {
    let n = axis.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroAxis);
    }
    let (s, c) = (0.5 * phi).sin_cos();
    Ok(Quaternion::from_parts(c, axis * (s / n)))
}

/// A 4×4 real matrix, row-major: `self.0[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[f64; 4]; 4]);

impl Matrix4 {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Matrix4(m)
    }

    /// `self · q` with `q` as a column `(q0, q1, q2, q3)ᵀ`.
    pub fn mul_quat(&self, q: Quaternion) -> Quaternion {
        let c = q.to_array();
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(self.0.iter()) {
            *o = row.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
        }
        Quaternion::from_array(out)
    }

    pub fn column(&self, j: usize) -> [f64; 4] {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }
}

/// Matrix `R_b` with `R_b · q = q b` (right multiplication by `b`).
pub fn right_action_matrix(b: Quaternion) -> Matrix4 {
    let [b0, b1, b2, b3] = b.to_array();
    Matrix4([
        [b0, -b1, -b2, -b3],
        [b1, b0, b3, -b2],
        [b2, -b3, b0, b1],
        [b3, b2, -b1, b0],
    ])
}
