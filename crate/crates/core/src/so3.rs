//! The homomorphism `Γ: S³ → SO(3)` and its inverse, the hat/vee
//! isomorphism `R³ ≅ so(3)`, and the adjoint operators of `Lie(S³)`.

use std::ops::{Index, Mul};

use crate::error::{Error, Result};
use crate::quaternion::{kronecker, levi_civita, quat_mul, rotate_vector, Quaternion, Vec3};
use crate::tolerances::{TOL_ANTISYMMETRY, TOL_ORTH};

/// A 3×3 real matrix, row-major: `self.0[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub fn identity() -> Self {
        Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn zeros() -> Self {
        Matrix3([[0.0; 3]; 3])
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(i, k);
            }
        }
        Matrix3(m)
    }

    /// Row-major 9-element constructor.
    pub fn from_row_slice(v: &[f64; 9]) -> Self {
        Matrix3::from_fn(|i, k| v[3 * i + k])
    }

    pub fn to_row_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..3 {
            for k in 0..3 {
                out[3 * i + k] = self.0[i][k];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Matrix3::from_fn(|i, k| self.0[k][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| {
            self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2]
        }))
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix3::from_fn(|i, k| self.0[i][k] * s)
    }

    pub fn sub(&self, other: &Matrix3) -> Self {
        Matrix3::from_fn(|i, k| self.0[i][k] - other.0[i][k])
    }

    pub fn add(&self, other: &Matrix3) -> Self {
        Matrix3::from_fn(|i, k| self.0[i][k] + other.0[i][k])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn column(&self, k: usize) -> Vec3 {
        Vec3([self.0[0][k], self.0[1][k], self.0[2][k]])
    }

    /// `max |QᵀQ - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.transpose() * *self).sub(&Matrix3::identity()).max_abs()
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, o: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, k| (0..3).map(|j| self.0[i][j] * o.0[j][k]).sum())
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;
    fn index(&self, (i, k): (usize, usize)) -> &f64 {
        &self.0[i][k]
    }
}

/// A proper orthogonal matrix, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3);

impl RotationMatrix {
    /// Accepts `m` when `max |mᵀm - I| <= TOL_ORTH` and `det m > 0`.
    /// Invalid input is rejected, never projected.
    pub fn new(m: Matrix3) -> Result<Self> {
        if !m.0.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::NotOrthogonal(f64::INFINITY));
        }
        let defect = m.orthogonality_defect();
        if defect > TOL_ORTH {
            return Err(Error::NotOrthogonal(defect));
        }
        let det = m.determinant();
        if det <= 0.0 {
            return Err(Error::ImproperRotation(det));
        }
        Ok(RotationMatrix(m))
    }

    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3 {
        self.0
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0.mul_vec(v)
    }
}

impl Mul for RotationMatrix {
    type Output = Matrix3;
    fn mul(self, o: RotationMatrix) -> Matrix3 {
        self.0 * o.0
    }
}

/// An antisymmetric 3×3 matrix; only built through [`hat`] or the checked
/// constructor, so `Mᵀ = -M` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix3(Matrix3);

impl SkewMatrix3 {
    /// Accepts `m` when `max |m + mᵀ| <= TOL_ANTISYMMETRY`; the stored matrix
    /// is the exact antisymmetric part.
    pub fn try_from_matrix(m: Matrix3) -> Result<Self> {
        let asym = m.add(&m.transpose()).max_abs();
        if asym.is_nan() || asym > TOL_ANTISYMMETRY {
            return Err(Error::NotAntisymmetric(asym));
        }
        Ok(SkewMatrix3(Matrix3::from_fn(|i, k| {
            0.5 * (m.0[i][k] - m.0[k][i])
        })))
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    /// Matrix commutator `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &SkewMatrix3) -> Matrix3 {
        (self.0 * other.0).sub(&(other.0 * self.0))
    }
}

/// `ξ̂_kl = -ε_ikl ξ_i`, so that `ξ̂ η = ξ × η`.
pub fn hat(v: Vec3) -> SkewMatrix3 {
    let [x, y, z] = v.0;
    SkewMatrix3(Matrix3([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]]))
}

/// Inverse of [`hat`].
pub fn vee(m: &SkewMatrix3) -> Vec3 {
    vee_matrix(&m.0)
}

/// `ξ_i = -½ ε_ikl M_kl`; projects onto the antisymmetric part.
pub(crate) fn vee_matrix(m: &Matrix3) -> Vec3 {
    Vec3(std::array::from_fn(|i| {
        let mut s = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                s -= levi_civita(i, k, l) * m.0[k][l];
            }
        }
        0.5 * s
    }))
}

/// Checked vee on a plain matrix.
pub fn vee_checked(m: Matrix3) -> Result<Vec3> {
    SkewMatrix3::try_from_matrix(m).map(|s| vee(&s))
}

/// `Q_ik = 2[(q0² - ½) δ_ik + q_i q_k - q0 q_j ε_jik]` for a unit `q`.
pub fn quat_to_matrix(q: Quaternion) -> Result<RotationMatrix> {
    q.ensure_unit()?;
    Ok(RotationMatrix(quat_to_matrix_unchecked(q)))
}

pub(crate) fn quat_to_matrix_unchecked(q: Quaternion) -> Matrix3 {
    let q0 = q.q0;
    let v = q.qv;
    Matrix3::from_fn(|i, k| {
        let mut cross = 0.0;
        for j in 0..3 {
            cross += v[j] * levi_civita(j, i, k);
        }
        2.0 * ((q0 * q0 - 0.5) * kronecker(i, k) + v[i] * v[k] - q0 * cross)
    })
}

/// Quaternion extracted from a rotation matrix with the index of the pivot
/// component it was anchored on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixQuat {
    pub quat: Quaternion,
    /// Index in `0..4` of the largest component, which is returned positive.
    pub pivot: usize,
}

/// Inverse of [`quat_to_matrix`] up to sign.
///
/// The four squared components are read off the diagonal; the largest one
/// (first index on ties) is taken as the positive pivot and the remaining
/// components follow from the six bilinear off-diagonal relations.
pub fn matrix_to_quat(q: &RotationMatrix) -> Quaternion {
    matrix_to_quat_with_pivot(q).quat
}

pub fn matrix_to_quat_with_pivot(r: &RotationMatrix) -> MatrixQuat {
    let m = &r.0 .0;
    let (q11, q22, q33) = (m[0][0], m[1][1], m[2][2]);
    let squares = [
        0.25 * (1.0 + q11 + q22 + q33),
        0.25 * (1.0 + q11 - q22 - q33),
        0.25 * (1.0 - q11 + q22 - q33),
        0.25 * (1.0 - q11 - q22 + q33),
    ];
    let mut pivot = 0;
    for (mu, &s) in squares.iter().enumerate().skip(1) {
        if s > squares[pivot] {
            pivot = mu;
        }
    }
    // products q_a q_b, a < b
    let q0q1 = 0.25 * (m[2][1] - m[1][2]);
    let q0q2 = 0.25 * (m[0][2] - m[2][0]);
    let q0q3 = 0.25 * (m[1][0] - m[0][1]);
    let q1q2 = 0.25 * (m[0][1] + m[1][0]);
    let q1q3 = 0.25 * (m[0][2] + m[2][0]);
    let q2q3 = 0.25 * (m[1][2] + m[2][1]);

    let p = squares[pivot].sqrt();
    let inv = 1.0 / p;
    let c = match pivot {
        0 => [p, q0q1 * inv, q0q2 * inv, q0q3 * inv],
        1 => [q0q1 * inv, p, q1q2 * inv, q1q3 * inv],
        2 => [q0q2 * inv, q1q2 * inv, p, q2q3 * inv],
        _ => [q0q3 * inv, q1q3 * inv, q2q3 * inv, p],
    };
    MatrixQuat {
        quat: Quaternion::from_array(c),
        pivot,
    }
}

/// `Ad_q ξ = q ξ q† = Γ(q) ξ`.
pub fn adjoint(q: Quaternion, xi: Vec3) -> Result<Vec3> {
    rotate_vector(q, xi)
}

/// `ad_ξ η = ξη - ηξ = 2 ξ × η`.
pub fn ad(xi: Vec3, eta: Vec3) -> Vec3 {
    xi.cross(&eta) * 2.0
}

/// `ad*_ξ μ = [μ, ξ] = 2 μ × ξ`.
pub fn ad_star(xi: Vec3, mu: Vec3) -> Vec3 {
    mu.cross(&xi) * 2.0
}

/// `Ad*_q μ = q† μ q`.
pub fn coadjoint(q: Quaternion, mu: Vec3) -> Result<Vec3> {
    rotate_vector(q.conj(), mu)
}

/// Max-norm residual of `vee(dQ Q⁻¹) = 2 vec(dq q⁻¹)` along a path of unit
/// quaternions, with both derivatives taken by central differences of step
/// `h` at `t`.
pub fn maurer_cartan_residual<F>(path: F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Quaternion,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonPositiveStep(h));
    }
    let (qm, q, qp) = (path(t - h), path(t), path(t + h));
    for s in [qm, q, qp] {
        s.ensure_unit()?;
    }
    let inv2h = 0.5 / h;

    let big_q = quat_to_matrix_unchecked(q);
    let dq_mat = quat_to_matrix_unchecked(qp)
        .sub(&quat_to_matrix_unchecked(qm))
        .scale(inv2h);
    let lhs = vee_matrix(&(dq_mat * big_q.transpose()));

    let dq = (qp - qm) * inv2h;
    let rhs = quat_mul(dq, q.inverse()?).qv * 2.0;

    Ok((lhs - rhs).max_abs())
}
