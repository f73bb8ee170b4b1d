//! Seeded random phase-space points and test functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::poisson::{Chart, Coords, PhasePoint, Polynomial, FULL_DIM};
use crate::quaternion::{axis_angle_to_quat, quat_mul, Quaternion, Vec3};

/// Bound on `|q0|` for near-pure samples.
pub const NEAR_PURE_Q0: f64 = 1e-6;
/// Fraction of near-pure samples in a point set.
pub const NEAR_PURE_FRACTION: f64 = 0.1;
/// Half-width of the box for `x`, `p` and momentum samples.
pub const BOX: f64 = 2.0;

/// A smooth unit-quaternion path `q(t) = exp(n1 w1 t) exp(n2 w2 sin t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatPath {
    pub n1: Vec3,
    pub w1: f64,
    pub n2: Vec3,
    pub w2: f64,
}

impl QuatPath {
    pub fn at(&self, t: f64) -> Quaternion {
        let a = axis_angle_to_quat(self.n1, self.w1 * t).expect("unit axis");
        let b = axis_angle_to_quat(self.n2, self.w2 * t.sin()).expect("unit axis");
        quat_mul(a, b)
    }
}

pub struct PointSampler {
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub fn new(seed: u64) -> Self {
        PointSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn vec3_in_box(&mut self, half_width: f64) -> Vec3 {
        Vec3::new(
            self.uniform(-half_width, half_width),
            self.uniform(-half_width, half_width),
            self.uniform(-half_width, half_width),
        )
    }

    pub fn unit_vec3(&mut self) -> Vec3 {
        loop {
            let v = Vec3::new(self.gaussian(), self.gaussian(), self.gaussian());
            let n = v.norm();
            if n > 1e-8 {
                return v * (1.0 / n);
            }
        }
    }

    /// Uniform on `S³`.
    pub fn unit_quaternion(&mut self) -> Quaternion {
        loop {
            let q = Quaternion::new(self.gaussian(), self.gaussian(), self.gaussian(), self.gaussian());
            if q.norm() > 1e-8 {
                return q.normalize().expect("nonzero");
            }
        }
    }

    /// A unit quaternion with `|q0| <= NEAR_PURE_Q0`.
    pub fn near_pure_unit_quaternion(&mut self) -> Quaternion {
        let q0 = self.uniform(-NEAR_PURE_Q0, NEAR_PURE_Q0);
        let v = self.unit_vec3() * (1.0 - q0 * q0).sqrt();
        Quaternion::from_parts(q0, v)
    }

    pub fn phase_point(&mut self, chart: Chart, near_pure: bool) -> PhasePoint {
        let q = if near_pure {
            self.near_pure_unit_quaternion()
        } else {
            self.unit_quaternion()
        };
        let x = self.vec3_in_box(BOX);
        let p = self.vec3_in_box(BOX);
        let mom = self.vec3_in_box(BOX);
        PhasePoint::new(x, p, q, mom, chart).expect("sampled q is unit")
    }

    /// `n` points of which every tenth (starting at index 0) is near-pure.
    pub fn phase_points(&mut self, chart: Chart, n: usize) -> Vec<PhasePoint> {
        let stride = (1.0 / NEAR_PURE_FRACTION).round() as usize;
        (0..n)
            .map(|k| self.phase_point(chart, k % stride == 0))
            .collect()
    }

    /// A vector in `R¹³` with unit-box entries and, if `q` is given, the
    /// quaternion block projected onto the tangent space of `S³` at `q`.
    pub fn tangent_vector(&mut self, q: Option<Quaternion>) -> Coords {
        let mut u: Coords = std::array::from_fn(|_| self.uniform(-1.0, 1.0));
        if let Some(q) = q {
            let uq = Quaternion::new(u[6], u[7], u[8], u[9]);
            let proj = uq - q * (q.dot(&uq) / q.norm_squared());
            u[6..10].copy_from_slice(&proj.to_array());
        }
        u
    }

    /// A random polynomial of total degree at most `max_degree` with `n_terms`
    /// monomials and coefficients in `[-1, 1]`.
    pub fn polynomial(&mut self, n_terms: usize, max_degree: u8) -> Polynomial {
        let terms = (0..n_terms)
            .map(|_| {
                let mut exps = [0u8; FULL_DIM];
                let degree = self.rng.random_range(0..=max_degree);
                for _ in 0..degree {
                    exps[self.rng.random_range(0..FULL_DIM)] += 1;
                }
                (self.uniform(-1.0, 1.0), exps)
            })
            .collect();
        Polynomial::new(terms)
    }

    pub fn quat_path(&mut self) -> QuatPath {
        QuatPath {
            n1: self.unit_vec3(),
            w1: self.uniform(0.5, 2.0),
            n2: self.unit_vec3(),
            w2: self.uniform(0.5, 2.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let a = PointSampler::new(7).phase_points(Chart::MixedM, 5);
        let b = PointSampler::new(7).phase_points(Chart::MixedM, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn near_pure_fraction() {
        let pts = PointSampler::new(1).phase_points(Chart::InertialMu, 100);
        let near = pts.iter().filter(|p| p.q.q0.abs() <= NEAR_PURE_Q0).count();
        assert!(near >= 10);
        assert!(pts.iter().all(|p| (p.q.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn tangent_projection() {
        let mut s = PointSampler::new(3);
        let q = s.unit_quaternion();
        let u = s.tangent_vector(Some(q));
        let uq = Quaternion::new(u[6], u[7], u[8], u[9]);
        assert!(q.dot(&uq).abs() < 1e-15);
    }

    #[test]
    fn paths_are_unit() {
        let mut s = PointSampler::new(4);
        let path = s.quat_path();
        for k in 0..10 {
            assert!((path.at(k as f64 * 0.3).norm() - 1.0).abs() < 1e-14);
        }
    }
}
