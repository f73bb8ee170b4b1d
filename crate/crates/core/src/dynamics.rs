//! Rigid-body dynamics in the mixed frame: spatial `(x, p)`, orientation
//! `q`, and body-frame momentum `M`.
//!
//! The Hamiltonian is `H = p²/2m + ⅛ Σ M_i²/I_i + V(x, q)` and the equations
//! of motion take the algebraic form
//!
//! ```text
//! ẋ = p/m,  ṗ = -∂V/∂x,  q̇ = ½ q Ω,  Ṁ = -Ω × M - vec(q⁻¹ ∇⁽q⁾V)
//! ```
//!
//! with `Ω_i = M_i / (2 I_i)`.

use std::fmt;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::poisson::{index, Chart, Coords, DynamicVariable, PhasePoint, FULL_DIM};
use crate::quaternion::{quat_mul, Quaternion, Vec3};
use crate::tolerances::TOL_UNIT;

/// Principal moments of inertia in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor {
    moments: Vec3,
}

impl InertiaTensor {
    /// Requires strictly positive finite moments. Violations of the triangle
    /// inequalities are logged, not rejected.
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        for (name, v) in [("I1", i1), ("I2", i2), ("I3", i3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if i1 + i2 < i3 || i2 + i3 < i1 || i3 + i1 < i2 {
            warn!("inertia ({i1}, {i2}, {i3}) violates the triangle inequality");
        }
        Ok(InertiaTensor {
            moments: Vec3::new(i1, i2, i3),
        })
    }

    pub fn moments(&self) -> Vec3 {
        self.moments
    }

    pub fn satisfies_triangle_inequality(&self) -> bool {
        let [a, b, c] = self.moments.0;
        a + b >= c && b + c >= a && c + a >= b
    }
}

type ScalarFn = dyn Fn(Vec3, Quaternion) -> f64 + Send + Sync;
type VecFn = dyn Fn(Vec3, Quaternion) -> Vec3 + Send + Sync;
type QuatFn = dyn Fn(Vec3, Quaternion) -> Quaternion + Send + Sync;

/// A potential `V(x, q)` with optional analytic gradients. Missing gradients
/// fall back to central finite differences.
#[derive(Clone)]
pub struct PotentialSpec {
    name: String,
    value: Arc<ScalarFn>,
    grad_x: Option<Arc<VecFn>>,
    grad_q: Option<Arc<QuatFn>>,
    depends_on_x: bool,
    depends_on_q: bool,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name)
            .field("analytic_grad_x", &self.grad_x.is_some())
            .field("analytic_grad_q", &self.grad_q.is_some())
            .finish()
    }
}

impl PotentialSpec {
    /// A custom potential with finite-difference gradients.
    pub fn custom<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(Vec3, Quaternion) -> f64 + Send + Sync + 'static,
    {
        PotentialSpec {
            name: name.into(),
            value: Arc::new(value),
            grad_x: None,
            grad_q: None,
            depends_on_x: true,
            depends_on_q: true,
        }
    }

    pub fn with_grad_x<G>(mut self, g: G) -> Self
    where
        G: Fn(Vec3, Quaternion) -> Vec3 + Send + Sync + 'static,
    {
        self.grad_x = Some(Arc::new(g));
        self
    }

    /// Registers `∇⁽q⁾V = e0 ∂V/∂q0 + ∂V/∂q`.
    pub fn with_grad_q<G>(mut self, g: G) -> Self
    where
        G: Fn(Vec3, Quaternion) -> Quaternion + Send + Sync + 'static,
    {
        self.grad_q = Some(Arc::new(g));
        self
    }

    /// `V ≡ 0`.
    pub fn free() -> Self {
        PotentialSpec {
            name: "free".into(),
            value: Arc::new(|_, _| 0.0),
            grad_x: Some(Arc::new(|_, _| Vec3::ZERO)),
            grad_q: Some(Arc::new(|_, _| Quaternion::ZERO)),
            depends_on_x: false,
            depends_on_q: false,
        }
    }

    /// `V = m g x3`.
    pub fn linear_gravity(mass: f64, g: f64) -> Self {
        let mg = mass * g;
        PotentialSpec {
            name: "linear_gravity".into(),
            value: Arc::new(move |x, _| mg * x[2]),
            grad_x: Some(Arc::new(move |_, _| Vec3::new(0.0, 0.0, mg))),
            grad_q: Some(Arc::new(|_, _| Quaternion::ZERO)),
            depends_on_x: true,
            depends_on_q: false,
        }
    }

    /// `V = m g l Q33(q) = m g l (q0² - q1² - q2² + q3²)`: a top pivoted at
    /// the origin with its centre of mass at distance `l` along the body z
    /// axis. `q = e0` is the upright equilibrium.
    pub fn heavy_top(mass: f64, g: f64, l: f64) -> Self {
        let c = mass * g * l;
        PotentialSpec {
            name: "heavy_top".into(),
            value: Arc::new(move |_, q| {
                let [q0, q1, q2, q3] = q.to_array();
                c * (q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3)
            }),
            grad_x: Some(Arc::new(|_, _| Vec3::ZERO)),
            grad_q: Some(Arc::new(move |_, q| {
                let [q0, q1, q2, q3] = q.to_array();
                Quaternion::new(q0, -q1, -q2, q3) * (2.0 * c)
            })),
            depends_on_x: false,
            depends_on_q: true,
        }
    }

    /// `V = ½ k |x|²`.
    pub fn harmonic(k: f64) -> Self {
        PotentialSpec {
            name: "harmonic".into(),
            value: Arc::new(move |x, _| 0.5 * k * x.norm_squared()),
            grad_x: Some(Arc::new(move |x, _| x * k)),
            grad_q: Some(Arc::new(|_, _| Quaternion::ZERO)),
            depends_on_x: true,
            depends_on_q: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_grad_x(&self) -> bool {
        self.grad_x.is_some()
    }

    pub fn has_analytic_grad_q(&self) -> bool {
        self.grad_q.is_some()
    }

    /// Drops both analytic gradients.
    pub fn without_gradients(mut self) -> Self {
        self.grad_x = None;
        self.grad_q = None;
        self
    }

    pub fn value(&self, x: Vec3, q: Quaternion) -> f64 {
        (self.value)(x, q)
    }

    pub fn grad_x(&self, x: Vec3, q: Quaternion) -> Vec3 {
        match &self.grad_x {
            Some(g) => g(x, q),
            None if !self.depends_on_x => Vec3::ZERO,
            None => self.fd_grad_x(x, q),
        }
    }

    pub fn grad_q(&self, x: Vec3, q: Quaternion) -> Quaternion {
        match &self.grad_q {
            Some(g) => g(x, q),
            None if !self.depends_on_q => Quaternion::ZERO,
            None => self.fd_grad_q(x, q),
        }
    }

    pub fn fd_grad_x(&self, x: Vec3, q: Quaternion) -> Vec3 {
        let mut g = Vec3::ZERO;
        for i in 0..3 {
            let h = fd_step(x[i]);
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            g[i] = (self.value(xp, q) - self.value(xm, q)) / (2.0 * h);
        }
        g
    }

    pub fn fd_grad_q(&self, x: Vec3, q: Quaternion) -> Quaternion {
        let mut g = Quaternion::ZERO;
        for mu in 0..4 {
            let h = fd_step(q[mu]);
            let (mut qp, mut qm) = (q, q);
            qp[mu] += h;
            qm[mu] -= h;
            g[mu] = (self.value(x, qp) - self.value(x, qm)) / (2.0 * h);
        }
        g
    }
}

fn fd_step(z: f64) -> f64 {
    f64::EPSILON.cbrt() * z.abs().max(1.0)
}

/// Mass, inertia and potential of a body.
#[derive(Debug, Clone)]
pub struct BodyParams {
    pub mass: f64,
    pub inertia: InertiaTensor,
    pub potential: PotentialSpec,
}

impl BodyParams {
    pub fn new(mass: f64, inertia: InertiaTensor, potential: PotentialSpec) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("mass", format!("must be positive and finite, got {mass}")));
        }
        Ok(BodyParams {
            mass,
            inertia,
            potential,
        })
    }
}

/// `Ω_i = M_i / (2 I_i)`.
pub fn angular_velocity(m: Vec3, inertia: &InertiaTensor) -> Vec3 {
    let i = inertia.moments();
    Vec3::new(m[0] / (2.0 * i[0]), m[1] / (2.0 * i[1]), m[2] / (2.0 * i[2]))
}

/// `⅛ (M1²/I1 + M2²/I2 + M3²/I3)`.
pub fn spin_kinetic(m: Vec3, inertia: &InertiaTensor) -> f64 {
    let i = inertia.moments();
    0.125 * (m[0] * m[0] / i[0] + m[1] * m[1] / i[1] + m[2] * m[2] / i[2])
}

/// `H = p²/2m + T_spin(M) + V(x, q)`.
pub fn hamiltonian_eval(state: &PhasePoint, params: &BodyParams) -> f64 {
    state.p.norm_squared() / (2.0 * params.mass)
        + spin_kinetic(state.mom, &params.inertia)
        + params.potential.value(state.x, state.q)
}

/// The Hamiltonian as a mixed-chart dynamic variable with analytic gradient.
pub fn hamiltonian_variable(params: &BodyParams) -> DynamicVariable {
    let pv = params.clone();
    let pg = params.clone();
    DynamicVariable::with_gradient(
        "H",
        move |z: &Coords| hamiltonian_eval(&PhasePoint::from_coords_unchecked(z, Chart::MixedM), &pv),
        move |z: &Coords| {
            let s = PhasePoint::from_coords_unchecked(z, Chart::MixedM);
            let gx = pg.potential.grad_x(s.x, s.q);
            let gq = pg.potential.grad_q(s.x, s.q);
            let inertia = pg.inertia.moments();
            let mut g = [0.0; FULL_DIM];
            for i in 0..3 {
                g[index::X + i] = gx[i];
                g[index::P + i] = s.p[i] / pg.mass;
                g[index::MOM + i] = s.mom[i] / (4.0 * inertia[i]);
            }
            for mu in 0..4 {
                g[index::Q + mu] = gq[mu];
            }
            g
        },
    )
    .in_chart(Chart::MixedM)
}

fn require_mixed(state: &PhasePoint) -> Result<()> {
    if state.chart == Chart::MixedM {
        Ok(())
    } else {
        Err(Error::ChartMismatch {
            expected: Chart::MixedM.to_string(),
            found: state.chart.to_string(),
        })
    }
}

/// Right-hand side of the mixed-frame equations of motion, in full
/// coordinate order. Requires a unit `q`.
pub fn eom_rhs(state: &PhasePoint, params: &BodyParams) -> Result<Coords> {
    require_mixed(state)?;
    state.q.ensure_unit()?;
    eom_rhs_coords(&state.coords(), params)
}

/// The same vector field on raw coordinates, without the unit-norm check.
/// `q⁻¹` is the true inverse, so the field stays meaningful for slightly
/// non-unit `q` as met inside integrator stages.
pub(crate) fn eom_rhs_coords(z: &Coords, params: &BodyParams) -> Result<Coords> {
    let s = PhasePoint::from_coords_unchecked(z, Chart::MixedM);
    let omega = angular_velocity(s.mom, &params.inertia);
    let x_dot = s.p * (1.0 / params.mass);
    let p_dot = -params.potential.grad_x(s.x, s.q);
    let q_dot = quat_mul(s.q, omega.to_pure()) * 0.5;
    let torque = quat_mul(s.q.inverse()?, params.potential.grad_q(s.x, s.q)).qv;
    let m_dot = -omega.cross(&s.mom) - torque;

    let mut out = [0.0; FULL_DIM];
    out[index::X..index::X + 3].copy_from_slice(&x_dot.0);
    out[index::P..index::P + 3].copy_from_slice(&p_dot.0);
    out[index::Q..index::Q + 4].copy_from_slice(&q_dot.to_array());
    out[index::MOM..index::MOM + 3].copy_from_slice(&m_dot.0);
    Ok(out)
}

/// When to project `q` back onto the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenormPolicy {
    Never,
    EveryStep,
    /// Renormalize when `| |q| - 1 |` exceeds the threshold.
    Threshold(f64),
}

impl Default for RenormPolicy {
    fn default() -> Self {
        RenormPolicy::Threshold(TOL_UNIT)
    }
}

impl RenormPolicy {
    fn apply(&self, q: Quaternion) -> Result<Quaternion> {
        match *self {
            RenormPolicy::Never => Ok(q),
            RenormPolicy::EveryStep => q.normalize(),
            RenormPolicy::Threshold(eps) => {
                if (q.norm() - 1.0).abs() > eps {
                    q.normalize()
                } else {
                    Ok(q)
                }
            }
        }
    }
}

fn axpy(z: &Coords, k: &Coords, a: f64) -> Coords {
    std::array::from_fn(|i| z[i] + a * k[i])
}

fn rk4_coords(z: &Coords, params: &BodyParams, h: f64) -> Result<Coords> {
    let k1 = eom_rhs_coords(z, params)?;
    let k2 = eom_rhs_coords(&axpy(z, &k1, 0.5 * h), params)?;
    let k3 = eom_rhs_coords(&axpy(z, &k2, 0.5 * h), params)?;
    let k4 = eom_rhs_coords(&axpy(z, &k3, h), params)?;
    Ok(std::array::from_fn(|i| {
        z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// One classical fourth-order Runge–Kutta step. No renormalization.
pub fn rk4_step(state: &PhasePoint, params: &BodyParams, h: f64) -> Result<PhasePoint> {
    require_mixed(state)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonPositiveStep(h));
    }
    let next = rk4_coords(&state.coords(), params, h)?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 1 });
    }
    Ok(PhasePoint::from_coords_unchecked(&next, Chart::MixedM))
}

/// Conserved and monitored quantities at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    pub energy: f64,
    pub quat_norm: f64,
    pub mom_norm: f64,
    /// Spatial angular momentum `π = ½ vec(q M q⁻¹)`.
    pub pi_spatial: Vec3,
}

impl Monitor {
    pub fn is_finite(&self) -> bool {
        self.energy.is_finite()
            && self.quat_norm.is_finite()
            && self.mom_norm.is_finite()
            && self.pi_spatial.is_finite()
    }
}

pub fn conserved_quantities(state: &PhasePoint, params: &BodyParams) -> Result<Monitor> {
    require_mixed(state)?;
    let mu = quat_mul(quat_mul(state.q, state.mom.to_pure()), state.q.inverse()?).qv;
    Ok(Monitor {
        energy: hamiltonian_eval(state, params),
        quat_norm: state.q.norm(),
        mom_norm: state.mom.norm(),
        pi_spatial: mu * 0.5,
    })
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
    pub n_steps: usize,
    pub renorm: RenormPolicy,
    /// Record every `sample_stride`-th step; the final step is always kept.
    pub sample_stride: usize,
}

impl IntegratorConfig {
    pub fn new(h: f64, n_steps: usize) -> Self {
        IntegratorConfig {
            h,
            n_steps,
            renorm: RenormPolicy::default(),
            sample_stride: 1,
        }
    }

    pub fn with_renorm(mut self, renorm: RenormPolicy) -> Self {
        self.renorm = renorm;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::NonPositiveStep(self.h));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample_stride", "must be at least 1"));
        }
        if let RenormPolicy::Threshold(eps) = self.renorm {
            if eps.is_nan() || eps < 0.0 {
                return Err(Error::invalid("renorm", format!("threshold must be non-negative, got {eps}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub state: PhasePoint,
    pub monitor: Monitor,
}

/// Maximum deviations of the monitors from their initial values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Drifts {
    /// `max |H - H0| / |H0|` (absolute when `H0 = 0`).
    pub energy: f64,
    /// `max | |q| - 1 |`.
    pub quat_norm: f64,
    /// `max | |M| - |M0| | / |M0|` (absolute when `M0 = 0`).
    pub mom_norm: f64,
    /// `max_k |π_k - π_k(0)| / |π(0)|` (absolute when `π(0) = 0`).
    pub pi_spatial: f64,
    /// Per-component `max |π_k - π_k(0)|`.
    pub pi_components: [f64; 3],
}

fn relative(delta: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        delta / scale
    } else {
        delta
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn drifts(&self) -> Drifts {
        let Some(first) = self.samples.first() else {
            return Drifts::default();
        };
        let m0 = first.monitor;
        let mut d = Drifts::default();
        for s in &self.samples {
            let m = s.monitor;
            d.energy = d.energy.max(relative((m.energy - m0.energy).abs(), m0.energy.abs()));
            d.quat_norm = d.quat_norm.max((m.quat_norm - 1.0).abs());
            d.mom_norm = d
                .mom_norm
                .max(relative((m.mom_norm - m0.mom_norm).abs(), m0.mom_norm));
            for k in 0..3 {
                d.pi_components[k] =
                    d.pi_components[k].max((m.pi_spatial[k] - m0.pi_spatial[k]).abs());
            }
        }
        let pi_max = d.pi_components.iter().fold(0.0_f64, |a, b| a.max(*b));
        d.pi_spatial = relative(pi_max, m0.pi_spatial.norm());
        d
    }
}

/// Fixed-step RK4 integration from `state0`, recording monitors at the
/// initial state, every `sample_stride` steps, and the last step.
pub fn integrate(
    state0: &PhasePoint,
    params: &BodyParams,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    require_mixed(state0)?;
    config.validate()?;
    state0.q.ensure_unit()?;

    let mut samples = Vec::with_capacity(config.n_steps / config.sample_stride + 2);
    let record = |step: usize, state: PhasePoint, samples: &mut Vec<Sample>| -> Result<()> {
        let monitor = conserved_quantities(&state, params)?;
        if !monitor.is_finite() {
            return Err(Error::NonFinite { step });
        }
        samples.push(Sample {
            step,
            t: step as f64 * config.h,
            state,
            monitor,
        });
        Ok(())
    };
    record(0, *state0, &mut samples)?;

    let mut z = state0.coords();
    for step in 1..=config.n_steps {
        z = match rk4_coords(&z, params, config.h) {
            Ok(next) => next,
            Err(Error::ZeroNorm) => return Err(Error::NonFinite { step }),
            Err(e) => return Err(e),
        };
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        let q = Quaternion::new(z[index::Q], z[index::Q + 1], z[index::Q + 2], z[index::Q + 3]);
        let q = config
            .renorm
            .apply(q)
            .map_err(|_| Error::NonFinite { step })?;
        z[index::Q..index::Q + 4].copy_from_slice(&q.to_array());

        if step % config.sample_stride == 0 || step == config.n_steps {
            record(step, PhasePoint::from_coords_unchecked(&z, Chart::MixedM), &mut samples)?;
        }
    }
    Ok(Trajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inertia() -> InertiaTensor {
        InertiaTensor::new(1.0, 2.0, 3.0).unwrap()
    }

    fn free_body() -> BodyParams {
        BodyParams::new(1.0, inertia(), PotentialSpec::free()).unwrap()
    }

    fn mixed(q: Quaternion, m: Vec3) -> PhasePoint {
        PhasePoint::rotational(q, m, Chart::MixedM).unwrap()
    }

    #[test]
    fn angular_velocity_formula() {
        let i = inertia();
        assert_eq!(angular_velocity(Vec3::new(2.0, 0.0, 0.0), &i), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(angular_velocity(Vec3::ZERO, &i), Vec3::ZERO);
    }

    #[test]
    fn spin_kinetic_formula() {
        let i = InertiaTensor::new(1.0, 5.0, 7.0).unwrap();
        assert_eq!(spin_kinetic(Vec3::new(2.0, 0.0, 0.0), &i), 0.5);
    }

    #[test]
    fn rest_state_has_zero_energy() {
        let s = mixed(Quaternion::IDENTITY, Vec3::ZERO);
        assert_eq!(hamiltonian_eval(&s, &free_body()), 0.0);
    }

    #[test]
    fn inertia_rejects_non_positive() {
        assert!(matches!(
            InertiaTensor::new(0.0, 1.0, 1.0),
            Err(Error::InvalidParameter { ref name, .. }) if name == "I1"
        ));
        assert!(InertiaTensor::new(1.0, f64::NAN, 1.0).is_err());
        let lopsided = InertiaTensor::new(1.0, 1.0, 5.0).unwrap();
        assert!(!lopsided.satisfies_triangle_inequality());
    }

    #[test]
    fn body_rejects_bad_mass() {
        assert!(BodyParams::new(0.0, inertia(), PotentialSpec::free()).is_err());
        assert!(BodyParams::new(-1.0, inertia(), PotentialSpec::free()).is_err());
    }

    #[test]
    fn free_motion_is_euler_equation() {
        let s = PhasePoint::new(
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(0.5, -0.5, 1.0),
            Quaternion::new(0.5, 0.5, 0.5, 0.5),
            Vec3::new(1.0, 2.0, 3.0),
            Chart::MixedM,
        )
        .unwrap();
        let params = free_body();
        let rhs = eom_rhs(&s, &params).unwrap();
        let omega = angular_velocity(s.mom, &params.inertia);
        let expected = -omega.cross(&s.mom);
        for i in 0..3 {
            assert_eq!(rhs[index::P + i], 0.0);
            assert_eq!(rhs[index::X + i], s.p[i]);
            assert!((rhs[index::MOM + i] - expected[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn no_spin_means_no_rotation() {
        let s = mixed(Quaternion::new(0.5, -0.5, 0.5, 0.5), Vec3::ZERO);
        let rhs = eom_rhs(&s, &free_body()).unwrap();
        assert!(rhs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn eom_requires_unit_quaternion_and_mixed_chart() {
        let mut s = mixed(Quaternion::IDENTITY, Vec3::ZERO);
        s.q = Quaternion::new(1.1, 0.0, 0.0, 0.0);
        assert!(matches!(eom_rhs(&s, &free_body()), Err(Error::NotUnit { .. })));
        let s = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::ZERO, Chart::InertialMu).unwrap();
        assert!(matches!(eom_rhs(&s, &free_body()), Err(Error::ChartMismatch { .. })));
    }

    #[test]
    fn heavy_top_at_identity() {
        let v = PotentialSpec::heavy_top(1.0, 9.81, 1.0);
        assert_eq!(v.value(Vec3::ZERO, Quaternion::IDENTITY), 9.81);
        assert_eq!(
            v.grad_q(Vec3::ZERO, Quaternion::IDENTITY),
            Quaternion::new(2.0 * 9.81, 0.0, 0.0, 0.0)
        );
        // upright equilibrium: no torque
        let params = BodyParams::new(1.0, inertia(), v).unwrap();
        let rhs = eom_rhs(&mixed(Quaternion::IDENTITY, Vec3::ZERO), &params).unwrap();
        assert!(rhs.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn free_potential_exerts_no_torque() {
        let v = PotentialSpec::free();
        let q = Quaternion::new(0.1, 0.7, -0.7, 0.1).normalize().unwrap();
        assert_eq!(v.grad_q(Vec3::ZERO, q), Quaternion::ZERO);
        assert_eq!(v.grad_x(Vec3::new(1.0, 1.0, 1.0), q), Vec3::ZERO);
    }

    #[test]
    fn conserved_quantities_at_identity() {
        let s = mixed(Quaternion::IDENTITY, Vec3::new(1.0, 2.0, 3.0));
        let m = conserved_quantities(&s, &free_body()).unwrap();
        assert_eq!(m.pi_spatial, Vec3::new(0.5, 1.0, 1.5));
        assert_eq!(m.quat_norm, 1.0);
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let s = mixed(Quaternion::new(0.5, 0.5, -0.5, 0.5), Vec3::ZERO);
        let traj = integrate(&s, &free_body(), &IntegratorConfig::new(1e-2, 100)).unwrap();
        assert_eq!(traj.last().unwrap().state, s);
        assert_eq!(traj.len(), 101);
    }

    #[test]
    fn sampling_keeps_first_and_last() {
        let s = mixed(Quaternion::IDENTITY, Vec3::new(1.0, 2.0, 3.0));
        let cfg = IntegratorConfig::new(1e-3, 25).with_stride(10);
        let traj = integrate(&s, &free_body(), &cfg).unwrap();
        let steps: Vec<usize> = traj.samples.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn integrate_rejects_bad_config() {
        let s = mixed(Quaternion::IDENTITY, Vec3::ZERO);
        let p = free_body();
        assert!(integrate(&s, &p, &IntegratorConfig::new(0.0, 10)).is_err());
        assert!(integrate(&s, &p, &IntegratorConfig::new(1e-3, 0)).is_err());
        assert!(integrate(&s, &p, &IntegratorConfig::new(1e-3, 1).with_stride(0)).is_err());
    }

    #[test]
    fn blow_up_reports_step() {
        let v = PotentialSpec::custom("exploding", |x: Vec3, _| -(x[0] * 50.0).exp());
        let params = BodyParams::new(1.0, inertia(), v).unwrap();
        let s = PhasePoint::new(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::ZERO,
            Quaternion::IDENTITY,
            Vec3::ZERO,
            Chart::MixedM,
        )
        .unwrap();
        match integrate(&s, &params, &IntegratorConfig::new(0.1, 1000)) {
            Err(Error::NonFinite { step }) => assert!(step >= 1),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
