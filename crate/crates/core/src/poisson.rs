//! Poisson structures in quaternion variables.
//!
//! Phase coordinates are laid out as
//! `(x1, x2, x3, p1, p2, p3, q0, q1, q2, q3, m1, m2, m3)`, where `m` is the
//! spatial momentum `μ` in the [`Chart::InertialMu`] chart and the body-frame
//! momentum `M = q⁻¹ μ q` in the [`Chart::MixedM`] chart. The rotational
//! layout drops the six translational coordinates.
//!
//! A bracket is evaluated as `{F, G} = ∇F · J · ∇G` with `J_IJ = {z_I, z_J}`.
//! Every structure tensor here is affine in the coordinates, which the
//! Jacobi checker exploits to obtain exact coordinate derivatives.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quaternion::{kronecker, levi_civita, quat_mul, Quaternion, Vec3};
use crate::so3::quat_to_matrix_unchecked;
use crate::tolerances::TOL_TANGENT;

/// Number of full phase coordinates.
pub const FULL_DIM: usize = 13;
/// Number of rotational phase coordinates `(q, m)`.
pub const ROT_DIM: usize = 7;

/// Full phase coordinates.
pub type Coords = [f64; FULL_DIM];

/// Offsets of each block in the full layout.
pub mod index {
    pub const X: usize = 0;
    pub const P: usize = 3;
    pub const Q: usize = 6;
    pub const MOM: usize = 10;
}

const FULL_LABELS: [&str; FULL_DIM] = [
    "x1", "x2", "x3", "p1", "p2", "p3", "q0", "q1", "q2", "q3", "m1", "m2", "m3",
];

/// Which angular-momentum variable the phase point carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// Spatial momentum `μ = 2π`.
    InertialMu,
    /// Body-frame momentum `M = q⁻¹ μ q`, with `x, p` kept spatial.
    MixedM,
}

impl Chart {
    pub fn as_str(&self) -> &'static str {
        match self {
            Chart::InertialMu => "inertial_mu",
            Chart::MixedM => "mixed_m",
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Chart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inertial_mu" | "inertial" | "mu" => Ok(Chart::InertialMu),
            "mixed_m" | "mixed" | "m" => Ok(Chart::MixedM),
            _ => Err(Error::UnknownChart(s.to_string())),
        }
    }
}

/// Coordinate layout of a structure tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// `(q0..q3, m1..m3)`, N = 7.
    Rotational,
    /// `(x, p, q, m)`, N = 13.
    Full,
}

impl Layout {
    pub const fn dim(&self) -> usize {
        match self {
            Layout::Rotational => ROT_DIM,
            Layout::Full => FULL_DIM,
        }
    }

    /// Position of the first layout coordinate inside the full coordinates.
    pub const fn offset(&self) -> usize {
        match self {
            Layout::Rotational => index::Q,
            Layout::Full => 0,
        }
    }

    pub fn labels(&self) -> &'static [&'static str] {
        &FULL_LABELS[self.offset()..]
    }

    /// Restriction of full coordinates to this layout.
    pub fn project<'a>(&self, coords: &'a Coords) -> &'a [f64] {
        &coords[self.offset()..]
    }
}

/// A point of phase space in one of the two charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Vec3,
    pub p: Vec3,
    pub q: Quaternion,
    /// `μ` or `M` depending on `chart`.
    pub mom: Vec3,
    pub chart: Chart,
}

impl PhasePoint {
    /// Builds a point, requiring `q` to be unit.
    pub fn new(x: Vec3, p: Vec3, q: Quaternion, mom: Vec3, chart: Chart) -> Result<Self> {
        q.ensure_unit()?;
        Ok(PhasePoint {
            x,
            p,
            q,
            mom,
            chart,
        })
    }

    /// A point with zero translational part.
    pub fn rotational(q: Quaternion, mom: Vec3, chart: Chart) -> Result<Self> {
        PhasePoint::new(Vec3::ZERO, Vec3::ZERO, q, mom, chart)
    }

    /// Reassembles a point from full coordinates without checking `|q|`.
    pub fn from_coords_unchecked(coords: &Coords, chart: Chart) -> Self {
        let v3 = |o: usize| Vec3([coords[o], coords[o + 1], coords[o + 2]]);
        PhasePoint {
            x: v3(index::X),
            p: v3(index::P),
            q: Quaternion::new(
                coords[index::Q],
                coords[index::Q + 1],
                coords[index::Q + 2],
                coords[index::Q + 3],
            ),
            mom: v3(index::MOM),
            chart,
        }
    }

    pub fn from_coords(coords: &Coords, chart: Chart) -> Result<Self> {
        let point = PhasePoint::from_coords_unchecked(coords, chart);
        point.q.ensure_unit()?;
        Ok(point)
    }

    pub fn coords(&self) -> Coords {
        let mut c = [0.0; FULL_DIM];
        c[index::X..index::X + 3].copy_from_slice(&self.x.0);
        c[index::P..index::P + 3].copy_from_slice(&self.p.0);
        c[index::Q..index::Q + 4].copy_from_slice(&self.q.to_array());
        c[index::MOM..index::MOM + 3].copy_from_slice(&self.mom.0);
        c
    }

    /// Same physical state expressed in `target`: `M = q⁻¹ μ q`, `μ = q M q⁻¹`.
    pub fn to_chart(&self, target: Chart) -> Result<PhasePoint> {
        let qinv = self.q.inverse()?;
        let mom = match (self.chart, target) {
            (a, b) if a == b => self.mom,
            (Chart::InertialMu, Chart::MixedM) => {
                quat_mul(quat_mul(qinv, self.mom.to_pure()), self.q).qv
            }
            _ => quat_mul(quat_mul(self.q, self.mom.to_pure()), qinv).qv,
        };
        Ok(PhasePoint {
            mom,
            chart: target,
            ..*self
        })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite() && self.q.is_finite() && self.mom.is_finite()
    }
}

/// Antisymmetric matrix of basic brackets `J_IJ = {z_I, z_J}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    layout: Layout,
    data: Vec<f64>,
}

impl StructureTensor {
    pub fn zeros(layout: Layout) -> Self {
        let n = layout.dim();
        StructureTensor {
            layout,
            data: vec![0.0; n * n],
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn labels(&self) -> &'static [&'static str] {
        self.layout.labels()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    /// Sets `J_ij = v` and `J_ji = -v`.
    pub fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        let n = self.dim();
        self.data[i * n + j] = v;
        self.data[j * n + i] = -v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.data[i * n..(i + 1) * n]
    }

    /// `J · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `a · J · b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(self.mul_vec(b))
            .map(|(x, y)| x * y)
            .sum()
    }

    /// `max |J + Jᵀ|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn sub(&self, other: &StructureTensor) -> StructureTensor {
        StructureTensor {
            layout: self.layout,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Evaluates the bracket table of `chart` at coordinates given in `layout`.
pub fn chart_tensor(chart: Chart, layout: Layout, coords: &[f64]) -> StructureTensor {
    let mut j = StructureTensor::zeros(layout);
    // block offsets within this layout
    let (qo, mo) = match layout {
        Layout::Rotational => (0, 4),
        Layout::Full => {
            for i in 0..3 {
                j.set_pair(index::X + i, index::P + i, 1.0);
            }
            (index::Q, index::MOM)
        }
    };
    let q0 = coords[qo];
    let qv = [coords[qo + 1], coords[qo + 2], coords[qo + 3]];
    let m = [coords[mo], coords[mo + 1], coords[mo + 2]];

    for i in 0..3 {
        j.set_pair(mo + i, qo, qv[i]);
        for k in 0..3 {
            let mut eps_q = 0.0;
            let mut eps_m = 0.0;
            for l in 0..3 {
                eps_q += levi_civita(i, k, l) * qv[l];
                eps_m += levi_civita(i, k, l) * m[l];
            }
            let (mq, mm) = match chart {
                Chart::InertialMu => (eps_q - q0 * kronecker(i, k), 2.0 * eps_m),
                Chart::MixedM => (-q0 * kronecker(i, k) - eps_q, -2.0 * eps_m),
            };
            j.set_pair(mo + i, qo + 1 + k, mq);
            if k > i {
                j.set_pair(mo + i, mo + k, mm);
            }
        }
    }
    j
}

/// Structure tensor of the point's chart in the requested layout.
pub fn structure_tensor(point: &PhasePoint, layout: Layout) -> StructureTensor {
    let coords = point.coords();
    chart_tensor(point.chart, layout, layout.project(&coords))
}

/// An antisymmetric tensor field whose entries are affine in the coordinates.
pub trait TensorField {
    fn layout(&self) -> Layout;
    fn eval(&self, coords: &[f64]) -> StructureTensor;
}

/// The bracket table of a chart as a tensor field.
#[derive(Debug, Clone, Copy)]
pub struct ChartField {
    pub chart: Chart,
    pub layout: Layout,
}

impl TensorField for ChartField {
    fn layout(&self) -> Layout {
        self.layout
    }

    fn eval(&self, coords: &[f64]) -> StructureTensor {
        chart_tensor(self.chart, self.layout, coords)
    }
}

/// Negative control: `inner` with the sign of one bracket pair flipped.
#[derive(Debug, Clone, Copy)]
pub struct FlippedEntry<F> {
    pub inner: F,
    pub row: usize,
    pub col: usize,
}

impl<F: TensorField> TensorField for FlippedEntry<F> {
    fn layout(&self) -> Layout {
        self.inner.layout()
    }

    fn eval(&self, coords: &[f64]) -> StructureTensor {
        let mut j = self.inner.eval(coords);
        let v = j.get(self.row, self.col);
        j.set_pair(self.row, self.col, -v);
        j
    }
}

/// Cyclic Jacobi sum `J_IJ,L J_LK + J_JK,L J_LI + J_KI,L J_LJ` for an affine
/// tensor field.
pub struct JacobiChecker<F> {
    field: F,
    /// `deriv[(I * n + J) * n + L] = ∂J_IJ / ∂z_L`, constant for affine fields.
    deriv: Vec<f64>,
}

impl<F: TensorField> JacobiChecker<F> {
    pub fn new(field: F) -> Self {
        let n = field.layout().dim();
        let origin = vec![0.0; n];
        let base = field.eval(&origin);
        let mut deriv = vec![0.0; n * n * n];
        let mut unit = origin.clone();
        for l in 0..n {
            unit[l] = 1.0;
            // exact: every entry has integer coefficients
            let diff = field.eval(&unit).sub(&base);
            unit[l] = 0.0;
            for i in 0..n {
                for j in 0..n {
                    deriv[(i * n + j) * n + l] = diff.get(i, j);
                }
            }
        }
        JacobiChecker { field, deriv }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Max absolute cyclic sum over all index triples, at layout coordinates.
    pub fn residual(&self, coords: &[f64]) -> f64 {
        let n = self.field.layout().dim();
        let j = self.field.eval(coords);
        // a[I][J][K] = Σ_L ∂_L J_IJ · J_LK
        let mut a = vec![0.0; n * n * n];
        for ij in 0..n * n {
            let d = &self.deriv[ij * n..(ij + 1) * n];
            if d.iter().all(|v| *v == 0.0) {
                continue;
            }
            for (l, dl) in d.iter().enumerate() {
                if *dl == 0.0 {
                    continue;
                }
                let row = j.row(l);
                for k in 0..n {
                    a[ij * n + k] += dl * row[k];
                }
            }
        }
        let at = |i: usize, j: usize, k: usize| a[(i * n + j) * n + k];
        let mut worst = 0.0_f64;
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let s = at(i, jj, k) + at(jj, k, i) + at(k, i, jj);
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }
}

/// Jacobi residual of the point's chart in the full layout.
pub fn jacobi_residual(point: &PhasePoint) -> f64 {
    let checker = JacobiChecker::new(ChartField {
        chart: point.chart,
        layout: Layout::Full,
    });
    checker.residual(&point.coords())
}

type ValueFn = dyn Fn(&Coords) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Coords) -> Coords + Send + Sync;

/// A scalar function on phase space with its gradient over all 13
/// coordinates. Gradients are analytic when supplied and central finite
/// differences otherwise.
#[derive(Clone)]
pub struct DynamicVariable {
    name: String,
    chart: Option<Chart>,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl fmt::Debug for DynamicVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicVariable")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl DynamicVariable {
    /// A variable with a finite-difference gradient.
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(&Coords) -> f64 + Send + Sync + 'static,
    {
        DynamicVariable {
            name: name.into(),
            chart: None,
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient<F, G>(name: impl Into<String>, value: F, gradient: G) -> Self
    where
        F: Fn(&Coords) -> f64 + Send + Sync + 'static,
        G: Fn(&Coords) -> Coords + Send + Sync + 'static,
    {
        DynamicVariable {
            name: name.into(),
            chart: None,
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    /// Restricts the variable to points of one chart.
    pub fn in_chart(mut self, chart: Chart) -> Self {
        self.chart = Some(chart);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> Option<Chart> {
        self.chart
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Drops the analytic gradient, forcing the finite-difference fallback.
    pub fn without_gradient(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn eval(&self, coords: &Coords) -> f64 {
        (self.value)(coords)
    }

    pub fn gradient(&self, coords: &Coords) -> Coords {
        match &self.gradient {
            Some(g) => g(coords),
            None => self.fd_gradient(coords),
        }
    }

    /// Central differences with step `cbrt(ε) · max(1, |z_I|)`.
    pub fn fd_gradient(&self, coords: &Coords) -> Coords {
        let base = f64::EPSILON.cbrt();
        let mut z = *coords;
        let mut g = [0.0; FULL_DIM];
        for (i, gi) in g.iter_mut().enumerate() {
            let orig = z[i];
            let h = base * orig.abs().max(1.0);
            z[i] = orig + h;
            let fp = self.eval(&z);
            z[i] = orig - h;
            let fm = self.eval(&z);
            z[i] = orig;
            *gi = (fp - fm) / (2.0 * h);
        }
        g
    }

    /// The coordinate function `z_index`.
    pub fn coordinate(index: usize) -> Self {
        assert!(index < FULL_DIM, "coordinate index {index} out of range");
        DynamicVariable::with_gradient(
            FULL_LABELS[index],
            move |z: &Coords| z[index],
            move |_: &Coords| {
                let mut g = [0.0; FULL_DIM];
                g[index] = 1.0;
                g
            },
        )
    }

    pub fn constant(c: f64) -> Self {
        DynamicVariable::with_gradient("const", move |_: &Coords| c, |_: &Coords| [0.0; FULL_DIM])
    }

    pub fn x(i: usize) -> Self {
        DynamicVariable::coordinate(index::X + i)
    }

    pub fn p(i: usize) -> Self {
        DynamicVariable::coordinate(index::P + i)
    }

    /// Quaternion component `q_mu`, `mu = 0..4`.
    pub fn quat(mu: usize) -> Self {
        DynamicVariable::coordinate(index::Q + mu)
    }

    /// Momentum coordinate `μ_i` or `M_i`, depending on the chart.
    pub fn mom(i: usize) -> Self {
        DynamicVariable::coordinate(index::MOM + i)
    }

    /// `π_i = μ_i / 2` in the inertial chart.
    pub fn pi(i: usize) -> Self {
        DynamicVariable::mom(i)
            .scaled(0.5)
            .named(format!("pi{}", i + 1))
            .in_chart(Chart::InertialMu)
    }

    /// `⟨m, ξ⟩` for a fixed vector `ξ`.
    pub fn momentum_along(xi: Vec3) -> Self {
        DynamicVariable::with_gradient(
            "<m,xi>",
            move |z: &Coords| (0..3).map(|i| z[index::MOM + i] * xi[i]).sum(),
            move |_: &Coords| {
                let mut g = [0.0; FULL_DIM];
                for i in 0..3 {
                    g[index::MOM + i] = xi[i];
                }
                g
            },
        )
    }

    /// Rotation-matrix element `Q_jk(q)`, `j, k = 0..3`.
    pub fn rotation_entry(j: usize, k: usize) -> Self {
        DynamicVariable::with_gradient(
            format!("Q{}{}", j + 1, k + 1),
            move |z: &Coords| quat_to_matrix_unchecked(quat_of(z)).0[j][k],
            move |z: &Coords| {
                let q = quat_of(z);
                let (q0, v) = (q.q0, q.qv);
                let mut g = [0.0; FULL_DIM];
                let mut eps_q = 0.0;
                for r in 0..3 {
                    eps_q += v[r] * levi_civita(r, j, k);
                }
                g[index::Q] = 4.0 * q0 * kronecker(j, k) - 2.0 * eps_q;
                for m in 0..3 {
                    g[index::Q + 1 + m] = 2.0 * (kronecker(j, m) * v[k] + v[j] * kronecker(k, m))
                        - 2.0 * q0 * levi_civita(m, j, k);
                }
                g
            },
        )
    }

    /// `C(q) = |q|²`.
    pub fn quat_norm_squared() -> Self {
        DynamicVariable::with_gradient(
            "|q|^2",
            |z: &Coords| quat_of(z).norm_squared(),
            |z: &Coords| {
                let mut g = [0.0; FULL_DIM];
                for mu in 0..4 {
                    g[index::Q + mu] = 2.0 * z[index::Q + mu];
                }
                g
            },
        )
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `c · self`.
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.clone();
        let value = {
            let f = f.clone();
            move |z: &Coords| c * f.eval(z)
        };
        let out = match &self.gradient {
            Some(_) => DynamicVariable::with_gradient(
                format!("{c}*{}", self.name),
                value,
                move |z: &Coords| f.gradient(z).map(|g| c * g),
            ),
            None => DynamicVariable::new(format!("{c}*{}", self.name), value),
        };
        DynamicVariable {
            chart: self.chart,
            ..out
        }
    }

    /// `self + other`.
    pub fn sum(&self, other: &DynamicVariable) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let value = {
            let (a, b) = (a.clone(), b.clone());
            move |z: &Coords| a.eval(z) + b.eval(z)
        };
        let name = format!("({} + {})", self.name, other.name);
        let out = if self.has_analytic_gradient() && other.has_analytic_gradient() {
            DynamicVariable::with_gradient(name, value, move |z: &Coords| {
                let (ga, gb) = (a.gradient(z), b.gradient(z));
                std::array::from_fn(|i| ga[i] + gb[i])
            })
        } else {
            DynamicVariable::new(name, value)
        };
        DynamicVariable {
            chart: self.chart.or(other.chart),
            ..out
        }
    }

    /// `self · other` with the product-rule gradient.
    pub fn product(&self, other: &DynamicVariable) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let value = {
            let (a, b) = (a.clone(), b.clone());
            move |z: &Coords| a.eval(z) * b.eval(z)
        };
        let name = format!("({} * {})", self.name, other.name);
        let out = if self.has_analytic_gradient() && other.has_analytic_gradient() {
            DynamicVariable::with_gradient(name, value, move |z: &Coords| {
                let (fa, fb) = (a.eval(z), b.eval(z));
                let (ga, gb) = (a.gradient(z), b.gradient(z));
                std::array::from_fn(|i| fa * gb[i] + fb * ga[i])
            })
        } else {
            DynamicVariable::new(name, value)
        };
        DynamicVariable {
            chart: self.chart.or(other.chart),
            ..out
        }
    }
}

fn quat_of(z: &Coords) -> Quaternion {
    Quaternion::new(
        z[index::Q],
        z[index::Q + 1],
        z[index::Q + 2],
        z[index::Q + 3],
    )
}

/// A polynomial in the full phase coordinates with an analytic gradient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    /// `(coefficient, exponent of each coordinate)`.
    pub terms: Vec<(f64, [u8; FULL_DIM])>,
}

impl Polynomial {
    pub fn new(terms: Vec<(f64, [u8; FULL_DIM])>) -> Self {
        Polynomial { terms }
    }

    pub fn eval(&self, z: &Coords) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * monomial(z, e, None))
            .sum()
    }

    pub fn gradient(&self, z: &Coords) -> Coords {
        let mut g = [0.0; FULL_DIM];
        for (c, e) in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] > 0 {
                    *gi += c * f64::from(e[i]) * monomial(z, e, Some(i));
                }
            }
        }
        g
    }

    pub fn into_variable(self) -> DynamicVariable {
        let p = Arc::new(self);
        let pv = p.clone();
        DynamicVariable::with_gradient(
            "polynomial",
            move |z: &Coords| pv.eval(z),
            move |z: &Coords| p.gradient(z),
        )
    }
}

/// `Π z_i^{e_i}`, with the exponent of `lowered` reduced by one.
fn monomial(z: &Coords, e: &[u8; FULL_DIM], lowered: Option<usize>) -> f64 {
    let mut v = 1.0;
    for (i, (&zi, &ei)) in z.iter().zip(e).enumerate() {
        let k = if Some(i) == lowered { ei - 1 } else { ei };
        v *= zi.powi(i32::from(k));
    }
    v
}

fn check_chart(var: &DynamicVariable, point: &PhasePoint) -> Result<()> {
    match var.chart() {
        Some(c) if c != point.chart => Err(Error::ChartMismatch {
            expected: c.to_string(),
            found: point.chart.to_string(),
        }),
        _ => Ok(()),
    }
}

fn require_chart(point: &PhasePoint, chart: Chart) -> Result<()> {
    if point.chart == chart {
        Ok(())
    } else {
        Err(Error::ChartMismatch {
            expected: chart.to_string(),
            found: point.chart.to_string(),
        })
    }
}

/// `{F, G}(z) = ∇F · J(z) · ∇G`.
pub fn poisson_bracket(f: &DynamicVariable, g: &DynamicVariable, point: &PhasePoint) -> Result<f64> {
    check_chart(f, point)?;
    check_chart(g, point)?;
    let z = point.coords();
    let j = structure_tensor(point, Layout::Full);
    Ok(j.bilinear(&f.gradient(&z), &g.gradient(&z)))
}

/// `X_H = J ∇H`, so that `{F, H} = dF(X_H)`.
pub fn hamiltonian_vector_field(h: &DynamicVariable, point: &PhasePoint) -> Result<Coords> {
    check_chart(h, point)?;
    let z = point.coords();
    let j = structure_tensor(point, Layout::Full);
    let v = j.mul_vec(&h.gradient(&z));
    let mut out = [0.0; FULL_DIM];
    out.copy_from_slice(&v);
    Ok(out)
}

fn tangent_parts(point: &PhasePoint, u: &Coords) -> Result<(Vec3, Vec3, Vec3, Vec3)> {
    let uq = quat_of(u);
    let defect = point.q.dot(&uq).abs();
    if defect > TOL_TANGENT * uq.norm().max(1.0) {
        return Err(Error::NotTangent(defect));
    }
    let dq = quat_mul(uq, point.q.inverse()?).qv;
    let v3 = |o: usize| Vec3([u[o], u[o + 1], u[o + 2]]);
    Ok((v3(index::X), v3(index::P), dq, v3(index::MOM)))
}

/// Liouville form `Θ(u) = p · u_x + μ · vec(u_q q⁻¹)` on `T*R³ × T*S³`.
pub fn liouville_form_eval(point: &PhasePoint, u: &Coords) -> Result<f64> {
    require_chart(point, Chart::InertialMu)?;
    let (ux, _, dq, _) = tangent_parts(point, u)?;
    Ok(point.p.dot(&ux) + point.mom.dot(&dq))
}

/// Canonical symplectic form
/// `Ω = dx∧dp + δq^i ∧ dμ_i - μ_i ε_ikl δq^k ∧ δq^l`, `δq = dq q⁻¹`,
/// with `(a∧b)(u, v) = a(u) b(v) - a(v) b(u)`.
pub fn symplectic_form_eval(point: &PhasePoint, u: &Coords, v: &Coords) -> Result<f64> {
    require_chart(point, Chart::InertialMu)?;
    let (ux, up, du, um) = tangent_parts(point, u)?;
    let (vx, vp, dv, vm) = tangent_parts(point, v)?;
    let translational = ux.dot(&vp) - vx.dot(&up);
    let coupling = du.dot(&vm) - dv.dot(&um);
    let curvature = -2.0 * point.mom.dot(&du.cross(&dv));
    Ok(translational + coupling + curvature)
}

/// Maxima of the three residual families of the map `Γ × ½ id`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoissonMapResiduals {
    /// `{π_i, Q_jk} - ε_ijl Q_lk`.
    pub pi_q: f64,
    /// `{Q_ij, Q_kl}`.
    pub q_q: f64,
    /// `{π_i, π_j} - ε_ijl π_l`.
    pub pi_pi: f64,
}

impl PoissonMapResiduals {
    pub fn max(&self) -> f64 {
        self.pi_q.max(self.q_q).max(self.pi_pi)
    }
}

/// Brackets of `π = μ/2` and `Q(q)` computed through the quaternion
/// structure tensor, against the canonical `T*SO(3)` table.
pub fn poisson_map_residuals(point: &PhasePoint) -> Result<PoissonMapResiduals> {
    require_chart(point, Chart::InertialMu)?;
    let z = point.coords();
    let j = structure_tensor(point, Layout::Full);
    let q_mat = quat_to_matrix_unchecked(point.q);

    let pis: Vec<Coords> = (0..3).map(|i| DynamicVariable::pi(i).gradient(&z)).collect();
    let qs: Vec<Coords> = (0..9)
        .map(|jk| DynamicVariable::rotation_entry(jk / 3, jk % 3).gradient(&z))
        .collect();
    let pi_val = point.mom * 0.5;

    let mut out = PoissonMapResiduals::default();
    for i in 0..3 {
        for jj in 0..3 {
            for k in 0..3 {
                let lhs = j.bilinear(&pis[i], &qs[3 * jj + k]);
                let rhs: f64 = (0..3)
                    .map(|l| levi_civita(i, jj, l) * q_mat.0[l][k])
                    .sum();
                out.pi_q = out.pi_q.max((lhs - rhs).abs());
            }
            let lhs = j.bilinear(&pis[i], &pis[jj]);
            let rhs: f64 = (0..3).map(|l| levi_civita(i, jj, l) * pi_val[l]).sum();
            out.pi_pi = out.pi_pi.max((lhs - rhs).abs());
        }
    }
    for a in &qs {
        for b in &qs {
            out.q_q = out.q_q.max(j.bilinear(a, b).abs());
        }
    }
    Ok(out)
}

pub fn poisson_map_residual(point: &PhasePoint) -> Result<f64> {
    poisson_map_residuals(point).map(|r| r.max())
}

/// Max residual of `{π_i, p} = -½ e_i p` for `p = q b`, with the bracket
/// taken through the chain rule `∂p/∂q = R_b`.
pub fn right_translation_covariance_check(point: &PhasePoint, b: Quaternion) -> Result<f64> {
    require_chart(point, Chart::InertialMu)?;
    b.ensure_unit()?;
    let z = point.coords();
    let j = structure_tensor(point, Layout::Full);
    let rb = crate::quaternion::right_action_matrix(b);
    let p = quat_mul(point.q, b);

    let mut worst = 0.0_f64;
    for i in 0..3 {
        let grad_pi = DynamicVariable::pi(i).gradient(&z);
        let expected = quat_mul(Quaternion::basis(i + 1), p) * -0.5;
        for mu in 0..4 {
            let mut grad_p = [0.0; FULL_DIM];
            grad_p[index::Q..index::Q + 4].copy_from_slice(&rb.0[mu]);
            let lhs = j.bilinear(&grad_pi, &grad_p);
            worst = worst.max((lhs - expected[mu]).abs());
        }
    }
    Ok(worst)
}

/// Max over all 13 coordinate functions of `|{|q|², z_I}|`.
pub fn normalization_bracket_residual(point: &PhasePoint) -> Result<f64> {
    let c = DynamicVariable::quat_norm_squared();
    let mut worst = 0.0_f64;
    for i in 0..FULL_DIM {
        worst = worst.max(poisson_bracket(&c, &DynamicVariable::coordinate(i), point)?.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_point(chart: Chart) -> PhasePoint {
        let q = Quaternion::new(0.4, -0.5, 0.3, 0.2).normalize().unwrap();
        PhasePoint::new(
            Vec3::new(0.1, -1.2, 0.8),
            Vec3::new(1.5, 0.2, -0.7),
            q,
            Vec3::new(-1.1, 0.6, 1.9),
            chart,
        )
        .unwrap()
    }

    #[test]
    fn chart_names_parse() {
        assert_eq!("inertial_mu".parse::<Chart>().unwrap(), Chart::InertialMu);
        assert_eq!("MIXED_M".parse::<Chart>().unwrap(), Chart::MixedM);
        assert!(matches!("body".parse::<Chart>(), Err(Error::UnknownChart(_))));
    }

    #[test]
    fn mixed_momentum_block() {
        let pt = sample_point(Chart::MixedM);
        let j = structure_tensor(&pt, Layout::Full);
        assert_eq!(j.get(index::MOM, index::MOM + 1), -2.0 * pt.mom[2]);
        assert_eq!(j.get(index::MOM + 1, index::MOM + 2), -2.0 * pt.mom[0]);
    }

    #[test]
    fn inertial_block_at_identity() {
        let pt = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::new(1.0, 2.0, 3.0), Chart::InertialMu)
            .unwrap();
        let j = structure_tensor(&pt, Layout::Rotational);
        for i in 0..3 {
            assert_eq!(j.get(4 + i, 0), 0.0);
            for k in 0..3 {
                assert_eq!(j.get(4 + i, 1 + k), -kronecker(i, k));
            }
        }
    }

    #[test]
    fn tensors_are_exactly_antisymmetric() {
        for chart in [Chart::InertialMu, Chart::MixedM] {
            for layout in [Layout::Rotational, Layout::Full] {
                let j = structure_tensor(&sample_point(chart), layout);
                assert_eq!(j.antisymmetry_defect(), 0.0);
                assert_eq!(j.dim(), layout.dim());
            }
        }
    }

    #[test]
    fn quaternion_block_vanishes_and_translations_decouple() {
        let pt = sample_point(Chart::InertialMu);
        let j = structure_tensor(&pt, Layout::Full);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(j.get(index::Q + a, index::Q + b), 0.0);
            }
        }
        for t in 0..6 {
            for r in index::Q..FULL_DIM {
                assert_eq!(j.get(t, r), 0.0);
            }
        }
        assert_eq!(j.get(index::X + 1, index::P + 1), 1.0);
        assert_eq!(j.get(index::X, index::P + 1), 0.0);
    }

    #[test]
    fn rotational_layout_is_a_block_of_full() {
        let pt = sample_point(Chart::MixedM);
        let full = structure_tensor(&pt, Layout::Full);
        let rot = structure_tensor(&pt, Layout::Rotational);
        for i in 0..ROT_DIM {
            for k in 0..ROT_DIM {
                assert_eq!(rot.get(i, k), full.get(i + index::Q, k + index::Q));
            }
        }
    }

    #[test]
    fn basic_brackets() {
        let pt = sample_point(Chart::InertialMu);
        for i in 0..3 {
            let b = poisson_bracket(&DynamicVariable::mom(i), &DynamicVariable::quat(0), &pt).unwrap();
            assert!((b - pt.q.qv[i]).abs() < 1e-15);
        }
        let x1p1 = poisson_bracket(&DynamicVariable::x(0), &DynamicVariable::p(0), &pt).unwrap();
        assert_eq!(x1p1, 1.0);
        let f = DynamicVariable::quat(2).product(&DynamicVariable::mom(1));
        assert_eq!(poisson_bracket(&f, &f, &pt).unwrap(), 0.0);
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let pt = sample_point(Chart::MixedM);
        let err = poisson_bracket(&DynamicVariable::pi(0), &DynamicVariable::quat(0), &pt);
        assert!(matches!(err, Err(Error::ChartMismatch { .. })));
        assert!(poisson_map_residual(&pt).is_err());
        assert!(symplectic_form_eval(&pt, &[0.0; FULL_DIM], &[0.0; FULL_DIM]).is_err());
    }

    #[test]
    fn jacobi_holds_in_both_charts() {
        for chart in [Chart::InertialMu, Chart::MixedM] {
            let r = jacobi_residual(&sample_point(chart));
            assert!(r <= 1e-12, "{chart}: {r}");
        }
    }

    #[test]
    fn flipped_sign_breaks_jacobi() {
        let field = FlippedEntry {
            inner: ChartField {
                chart: Chart::InertialMu,
                layout: Layout::Rotational,
            },
            row: 4,
            col: 0,
        };
        let checker = JacobiChecker::new(field);
        let pt = sample_point(Chart::InertialMu);
        let coords = pt.coords();
        assert!(checker.residual(Layout::Rotational.project(&coords)) > 0.1);
    }

    #[test]
    fn hamiltonian_field_of_momentum_pairing_is_left_translation() {
        let pt = sample_point(Chart::InertialMu);
        let xi = Vec3::new(0.3, -0.8, 0.5);
        let field = hamiltonian_vector_field(&DynamicVariable::momentum_along(xi), &pt).unwrap();
        let expected = quat_mul(xi.to_pure(), pt.q);
        for mu in 0..4 {
            assert!((field[index::Q + mu] - expected[mu]).abs() < 1e-15);
        }
        let mom_part = Vec3([field[index::MOM], field[index::MOM + 1], field[index::MOM + 2]]);
        assert!((mom_part - xi.cross(&pt.mom) * 2.0).max_abs() < 1e-14);
        let zero = hamiltonian_vector_field(&DynamicVariable::constant(4.0), &pt).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn symplectic_form_on_coupling_pair() {
        let pt = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::ZERO, Chart::InertialMu).unwrap();
        let mut u = [0.0; FULL_DIM];
        let e1q = quat_mul(Quaternion::basis(1), pt.q);
        for mu in 0..4 {
            u[index::Q + mu] = e1q[mu];
        }
        let mut v = [0.0; FULL_DIM];
        v[index::MOM] = 1.0;
        assert_eq!(symplectic_form_eval(&pt, &u, &v).unwrap(), 1.0);
        assert_eq!(symplectic_form_eval(&pt, &u, &u).unwrap(), 0.0);
    }

    #[test]
    fn symplectic_form_rejects_non_tangent() {
        let pt = sample_point(Chart::InertialMu);
        let mut u = [0.0; FULL_DIM];
        for mu in 0..4 {
            u[index::Q + mu] = pt.q[mu];
        }
        assert!(matches!(
            symplectic_form_eval(&pt, &u, &[0.0; FULL_DIM]),
            Err(Error::NotTangent(_))
        ));
        assert!(liouville_form_eval(&pt, &u).is_err());
    }

    #[test]
    fn liouville_form_pairs_momentum_with_rotation() {
        let pt = sample_point(Chart::InertialMu);
        let xi = Vec3::new(0.2, 0.1, -0.4);
        let mut u = [0.0; FULL_DIM];
        let xq = quat_mul(xi.to_pure(), pt.q);
        for mu in 0..4 {
            u[index::Q + mu] = xq[mu];
        }
        let theta = liouville_form_eval(&pt, &u).unwrap();
        assert!((theta - pt.mom.dot(&xi)).abs() < 1e-15);
    }

    #[test]
    fn identity_right_translation() {
        let pt = sample_point(Chart::InertialMu);
        let r = right_translation_covariance_check(&pt, Quaternion::IDENTITY).unwrap();
        assert!(r <= 1e-11);
    }

    #[test]
    fn chart_conversion_round_trips() {
        let pt = sample_point(Chart::InertialMu);
        let back = pt.to_chart(Chart::MixedM).unwrap().to_chart(Chart::InertialMu).unwrap();
        assert!((back.mom - pt.mom).max_abs() < 1e-14);
        assert_eq!(back.chart, Chart::InertialMu);
    }

    #[test]
    fn polynomial_gradient_matches_finite_differences() {
        let mut e1 = [0u8; FULL_DIM];
        e1[index::Q] = 2;
        e1[index::MOM + 1] = 1;
        let mut e2 = [0u8; FULL_DIM];
        e2[index::X + 2] = 3;
        let poly = Polynomial::new(vec![(1.5, e1), (-0.25, e2)]).into_variable();
        let z = sample_point(Chart::InertialMu).coords();
        let (ga, gf) = (poly.gradient(&z), poly.fd_gradient(&z));
        for i in 0..FULL_DIM {
            assert!((ga[i] - gf[i]).abs() <= 1e-6 * ga[i].abs().max(1.0));
        }
    }
}
