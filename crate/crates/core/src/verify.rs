//! Randomized verification suites. Each suite samples points from a seeded
//! generator, evaluates one or more residuals and compares the worst case
//! against a fixed bound.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{eom_rhs, hamiltonian_variable, BodyParams, InertiaTensor, PotentialSpec};
use crate::error::{Error, Result};
use crate::poisson::{
    hamiltonian_vector_field, index, normalization_bracket_residual, poisson_bracket,
    poisson_map_residuals, right_translation_covariance_check, symplectic_form_eval,
    structure_tensor, Chart, ChartField, Coords, DynamicVariable, FlippedEntry, JacobiChecker,
    Layout, Polynomial, FULL_DIM,
};
use crate::quaternion::{levi_civita, quat_mul, rotate_vector, Quaternion};
use crate::sampling::PointSampler;
use crate::so3::{matrix_to_quat, maurer_cartan_residual, quat_to_matrix, Matrix3};
use crate::tolerances as tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Algebra,
    Rotation,
    Brackets,
    Jacobi,
    PoissonMap,
    MaurerCartan,
    Symplectic,
    DynamicsOracle,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Algebra,
        Suite::Rotation,
        Suite::Brackets,
        Suite::Jacobi,
        Suite::PoissonMap,
        Suite::MaurerCartan,
        Suite::Symplectic,
        Suite::DynamicsOracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Rotation => "rotation",
            Suite::Brackets => "brackets",
            Suite::Jacobi => "jacobi",
            Suite::PoissonMap => "poisson_map",
            Suite::MaurerCartan => "maurer_cartan",
            Suite::Symplectic => "symplectic",
            Suite::DynamicsOracle => "dynamics_oracle",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(Suite::All)
            .chain(Suite::EACH)
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// How a check's observed value is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    /// Used by negative controls, which must fail loudly.
    AtLeast(f64),
}

impl Bound {
    fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub samples: usize,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound, samples: usize) -> Self {
        CheckResult {
            name: name.into(),
            value,
            bound,
            samples,
            // NaN fails either bound
            passed: bound.admits(value),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, t) = match self.bound {
            Bound::AtMost(t) => ("<=", t),
            Bound::AtLeast(t) => (">=", t),
        };
        write!(
            f,
            "{} {:<40} {:.3e} {} {:.1e}  (n={})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            op,
            t,
            self.samples
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub points: usize,
    /// Replace the Jacobi suite's tensors with a sign-flipped copy.
    pub corrupt_tensor: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            points: 1000,
            corrupt_tensor: false,
        }
    }
}

/// Runs one suite, or every suite for [`Suite::All`] with check names
/// prefixed by the suite.
pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    if opts.points == 0 {
        return Err(Error::invalid("points", "must be at least 1"));
    }
    let checks = match suite {
        Suite::Algebra => algebra(opts),
        Suite::Rotation => rotation(opts)?,
        Suite::Brackets => brackets(opts)?,
        Suite::Jacobi => jacobi(opts),
        Suite::PoissonMap => poisson_map(opts)?,
        Suite::MaurerCartan => maurer_cartan(opts)?,
        Suite::Symplectic => symplectic(opts)?,
        Suite::DynamicsOracle => dynamics_oracle(opts)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                for mut c in run(s, opts)?.checks {
                    c.name = format!("{s}.{}", c.name);
                    all.push(c);
                }
            }
            all
        }
    };
    Ok(SuiteReport { suite, checks })
}

fn max_abs4(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).max_abs()
}

/// Product of basis elements `e_mu e_nu = sign * e_index`, written out
/// independently of the product formula.
fn basis_product(mu: usize, nu: usize) -> (f64, usize) {
    const TABLE: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
        [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
        [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
    ];
    TABLE[mu][nu]
}

fn table_product(a: Quaternion, b: Quaternion) -> Quaternion {
    let mut out = Quaternion::ZERO;
    for mu in 0..4 {
        for nu in 0..4 {
            let (s, k) = basis_product(mu, nu);
            out[k] += s * a[mu] * b[nu];
        }
    }
    out
}

fn scaled_quaternion(s: &mut PointSampler) -> Quaternion {
    let r = s.uniform(0.5, 2.0);
    s.unit_quaternion() * r
}

fn algebra(opts: &VerifyOptions) -> Vec<CheckResult> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);

    // e_i e_j = -δ_ij + ε_ijk e_k and e0 acts as the unit
    let mut relations = 0.0_f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let got = quat_mul(Quaternion::basis(mu), Quaternion::basis(nu));
            let mut want = Quaternion::ZERO;
            if mu == 0 {
                want = Quaternion::basis(nu);
            } else if nu == 0 {
                want = Quaternion::basis(mu);
            } else {
                let (i, j) = (mu - 1, nu - 1);
                want.q0 = if i == j { -1.0 } else { 0.0 };
                for k in 0..3 {
                    want.qv[k] = levi_civita(i, j, k);
                }
            }
            relations = relations.max(max_abs4(got, want));
        }
    }

    let (mut product, mut assoc, mut conj, mut norm, mut inverse) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..n {
        let a = scaled_quaternion(&mut s);
        let b = scaled_quaternion(&mut s);
        let c = scaled_quaternion(&mut s);
        let ab = quat_mul(a, b);
        product = product.max(max_abs4(ab, table_product(a, b)));
        assoc = assoc.max(max_abs4(quat_mul(ab, c), quat_mul(a, quat_mul(b, c))));
        conj = conj.max(max_abs4(ab.conj(), quat_mul(b.conj(), a.conj())));
        norm = norm.max((ab.norm() - a.norm() * b.norm()).abs());
        let inv = a.inverse().expect("nonzero sample");
        inverse = inverse
            .max(max_abs4(quat_mul(a, inv), Quaternion::IDENTITY))
            .max(max_abs4(quat_mul(inv, a), Quaternion::IDENTITY));
    }
    let b = Bound::AtMost(tol::ALGEBRA);
    vec![
        CheckResult::new("defining_relations", relations, b, 16),
        CheckResult::new("product_law", product, b, n),
        CheckResult::new("associativity", assoc, b, n),
        CheckResult::new("conjugation_antihomomorphism", conj, b, n),
        CheckResult::new("norm_multiplicativity", norm, b, n),
        CheckResult::new("inverse", inverse, b, n),
    ]
}

fn rot_defect(a: &Matrix3, b: &Matrix3) -> f64 {
    a.sub(b).max_abs()
}

fn rotation(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let (mut hom, mut cover, mut action, mut orth) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..n {
        let q1 = s.unit_quaternion();
        let q2 = s.unit_quaternion();
        let g1 = quat_to_matrix(q1)?.into_matrix();
        let g2 = quat_to_matrix(q2)?.into_matrix();
        let g12 = quat_to_matrix(quat_mul(q1, q2).normalize()?)?.into_matrix();
        hom = hom.max(rot_defect(&g12, &(g1 * g2)));
        cover = cover.max(rot_defect(&quat_to_matrix(-q1)?.into_matrix(), &g1));
        let x = s.vec3_in_box(1.0);
        action = action.max((rotate_vector(q1, x)? - g1.mul_vec(x)).max_abs());
        orth = orth.max(g1.orthogonality_defect());
    }

    // every tenth sample is close to a pure quaternion
    let mut round_trip = 0.0_f64;
    for k in 0..n {
        let q = if k % 10 == 0 {
            let q0 = s.uniform(-1e-3, 1e-3);
            Quaternion::from_parts(q0, s.unit_vec3() * (1.0 - q0 * q0).sqrt())
        } else {
            s.unit_quaternion()
        };
        let back = matrix_to_quat(&quat_to_matrix(q)?);
        round_trip = round_trip.max(max_abs4(back, q).min(max_abs4(back, -q)));
    }

    let b = Bound::AtMost(tol::ROTATION);
    Ok(vec![
        CheckResult::new("homomorphism", hom, b, n),
        CheckResult::new("double_cover", cover, b, n),
        CheckResult::new("rotation_action", action, b, n),
        CheckResult::new("orthogonality", orth, b, n),
        CheckResult::new("matrix_round_trip", round_trip, Bound::AtMost(tol::ROUNDTRIP), n),
    ])
}

fn q_only_polynomial(s: &mut PointSampler) -> Polynomial {
    let mut p = s.polynomial(6, 3);
    for (_, e) in p.terms.iter_mut() {
        for (i, ei) in e.iter_mut().enumerate() {
            if !(index::Q..index::Q + 4).contains(&i) {
                *ei = 0;
            }
        }
    }
    p
}

fn brackets(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let (mut antisym, mut leibniz, mut field, mut kernel, mut casimir, mut table) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for chart in [Chart::InertialMu, Chart::MixedM] {
        for point in s.phase_points(chart, n) {
            let z = point.coords();
            let j = structure_tensor(&point, Layout::Full);
            antisym = antisym.max(j.antisymmetry_defect());

            // {x_i, p_k} = δ_ik, {q_μ, q_ν} = 0, {mom_i, q0} = q_i
            for i in 0..3 {
                for k in 0..3 {
                    let want = if i == k { 1.0 } else { 0.0 };
                    table = table.max((j.get(index::X + i, index::P + k) - want).abs());
                }
                table = table.max((j.get(index::MOM + i, index::Q) - point.q.qv[i]).abs());
            }
            for mu in 0..4 {
                for nu in 0..4 {
                    table = table.max(j.get(index::Q + mu, index::Q + nu).abs());
                }
            }

            let f = s.polynomial(4, 2).into_variable().in_chart(chart);
            let g = s.polynomial(4, 2).into_variable().in_chart(chart);
            let h = s.polynomial(4, 2).into_variable().in_chart(chart);
            let fg = f.product(&g);
            let lhs = poisson_bracket(&fg, &h, &point)?;
            let rhs = f.eval(&z) * poisson_bracket(&g, &h, &point)?
                + g.eval(&z) * poisson_bracket(&f, &h, &point)?;
            leibniz = leibniz.max((lhs - rhs).abs());

            // {F, H} against the central difference of F along X_H; exact for quadratics
            let x_h = hamiltonian_vector_field(&h, &point)?;
            let eps = 1e-3;
            let zp: Coords = std::array::from_fn(|i| z[i] + eps * x_h[i]);
            let zm: Coords = std::array::from_fn(|i| z[i] - eps * x_h[i]);
            let directional = (f.eval(&zp) - f.eval(&zm)) / (2.0 * eps);
            field = field.max((poisson_bracket(&f, &h, &point)? - directional).abs());

            let fq = q_only_polynomial(&mut s).into_variable().in_chart(chart);
            let gq = q_only_polynomial(&mut s).into_variable().in_chart(chart);
            let x_f = hamiltonian_vector_field(&fq, &point)?;
            let q_part = x_f[index::Q..index::Q + 4]
                .iter()
                .fold(0.0_f64, |a, v| a.max(v.abs()));
            kernel = kernel
                .max(q_part)
                .max(poisson_bracket(&fq, &gq, &point)?.abs());

            if chart == Chart::InertialMu {
                casimir = casimir.max(normalization_bracket_residual(&point)?);
            }
        }
    }

    let mut covariance = 0.0_f64;
    for point in s.phase_points(Chart::InertialMu, n) {
        let b = s.unit_quaternion();
        covariance = covariance.max(right_translation_covariance_check(&point, b)?);
    }

    let m = 2 * n;
    Ok(vec![
        CheckResult::new("antisymmetry", antisym, Bound::AtMost(0.0), m),
        CheckResult::new("bracket_table", table, Bound::AtMost(0.0), m),
        CheckResult::new("leibniz", leibniz, Bound::AtMost(tol::LEIBNIZ), m),
        CheckResult::new("field_directional_derivative", field, Bound::AtMost(tol::DUALITY), m),
        CheckResult::new("q_only_kernel", kernel, Bound::AtMost(tol::BRACKET), m),
        CheckResult::new("normalization_preserved", casimir, Bound::AtMost(tol::BRACKET), n),
        CheckResult::new("right_translation_covariance", covariance, Bound::AtMost(tol::BRACKET), n),
    ])
}

/// Bracket pair flipped by the negative control: `{μ_1, μ_2}` (or
/// `{M_1, M_2}`). The broken cyclic sums include `4 {mom_3, q_ν}` for every
/// `ν`, so the residual stays of order one at every unit `q`.
pub const NEGATIVE_CONTROL_ENTRY: (usize, usize) = (index::MOM, index::MOM + 1);

fn jacobi(opts: &VerifyOptions) -> Vec<CheckResult> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let (row, col) = NEGATIVE_CONTROL_ENTRY;
    let mut out = Vec::new();
    for chart in [Chart::InertialMu, Chart::MixedM] {
        let field = ChartField {
            chart,
            layout: Layout::Full,
        };
        let honest = JacobiChecker::new(field);
        let flipped = JacobiChecker::new(FlippedEntry {
            inner: field,
            row,
            col,
        });
        let (mut worst, mut control) = (0.0_f64, f64::INFINITY);
        for point in s.phase_points(chart, n) {
            let z = point.coords();
            let r = if opts.corrupt_tensor {
                flipped.residual(&z)
            } else {
                honest.residual(&z)
            };
            worst = worst.max(r);
            control = control.min(flipped.residual(&z));
        }
        out.push(CheckResult::new(
            format!("jacobi_{chart}"),
            worst,
            Bound::AtMost(tol::JACOBI),
            n,
        ));
        out.push(CheckResult::new(
            format!("negative_control_{chart}"),
            control,
            Bound::AtLeast(tol::JACOBI_NEGATIVE_CONTROL),
            n,
        ));
    }
    out
}

fn poisson_map(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let (mut pi_q, mut q_q, mut pi_pi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for point in s.phase_points(Chart::InertialMu, n) {
        let r = poisson_map_residuals(&point)?;
        pi_q = pi_q.max(r.pi_q);
        q_q = q_q.max(r.q_q);
        pi_pi = pi_pi.max(r.pi_pi);
    }
    let b = Bound::AtMost(tol::BRACKET);
    Ok(vec![
        CheckResult::new("pi_rotation", pi_q, b, n),
        CheckResult::new("rotation_rotation", q_q, b, n),
        CheckResult::new("pi_pi", pi_pi, b, n),
    ])
}

fn maurer_cartan(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let h = 1e-4;
    let (mut worst, mut ratio_dev) = (0.0_f64, 0.0_f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for _ in 0..n {
        let path = s.quat_path();
        let t = s.uniform(-1.0, 1.0);
        let f = |t: f64| path.at(t);
        let r1 = maurer_cartan_residual(f, t, h)?;
        let r2 = maurer_cartan_residual(f, t, 2.0 * h)?;
        worst = worst.max(r1);
        let ratio = r2 / r1;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        ratio_dev = ratio_dev.max((ratio - tol::MAURER_CARTAN_RATIO).abs());
        if ratio.is_nan() {
            ratio_dev = f64::NAN;
        }
    }
    log::debug!("maurer-cartan step-halving ratios in [{lo:.4}, {hi:.4}]");
    Ok(vec![
        CheckResult::new("residual_h1e-4", worst, Bound::AtMost(tol::MAURER_CARTAN), n),
        CheckResult::new(
            "convergence_ratio_deviation",
            ratio_dev,
            Bound::AtMost(tol::MAURER_CARTAN_RATIO_SLACK),
            n,
        ),
    ])
}

fn symplectic(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let (mut duality, mut interior, mut generators, mut antisym) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for point in s.phase_points(Chart::InertialMu, n) {
        let z = point.coords();
        let f = s.polynomial(6, 3).into_variable();
        let g = s.polynomial(6, 3).into_variable();
        let x_f = hamiltonian_vector_field(&f, &point)?;
        let x_g = hamiltonian_vector_field(&g, &point)?;
        let omega = symplectic_form_eval(&point, &x_f, &x_g)?;
        let bracket = poisson_bracket(&f, &g, &point)?;
        duality = duality.max((omega - bracket).abs() / bracket.abs().max(1.0));
        antisym = antisym.max(symplectic_form_eval(&point, &x_f, &x_f)?.abs());

        // i_{X_F} Ω = dF on a random tangent vector
        let v = s.tangent_vector(Some(point.q));
        let df: f64 = f.gradient(&z).iter().zip(&v).map(|(a, b)| a * b).sum();
        let lhs = symplectic_form_eval(&point, &x_f, &v)?;
        interior = interior.max((lhs - df).abs() / df.abs().max(1.0));

        // Ω(X_{q0}, X_{⟨μ,ξ⟩}) = {q0, ⟨μ,ξ⟩}
        let xi = s.vec3_in_box(1.0);
        let a = DynamicVariable::quat(0);
        let b = DynamicVariable::momentum_along(xi);
        let lhs = symplectic_form_eval(
            &point,
            &hamiltonian_vector_field(&a, &point)?,
            &hamiltonian_vector_field(&b, &point)?,
        )?;
        generators = generators.max((lhs - poisson_bracket(&a, &b, &point)?).abs());
    }
    let b = Bound::AtMost(tol::DUALITY);
    Ok(vec![
        CheckResult::new("polynomial_duality", duality, b, n),
        CheckResult::new("interior_product", interior, b, n),
        CheckResult::new("generator_duality", generators, b, n),
        CheckResult::new("form_antisymmetry", antisym, Bound::AtMost(0.0), n),
    ])
}

/// The built-in potentials with the standard test parameters.
pub fn builtin_potentials() -> Vec<PotentialSpec> {
    vec![
        PotentialSpec::free(),
        PotentialSpec::linear_gravity(1.0, 9.81),
        PotentialSpec::heavy_top(1.0, 9.81, 1.0),
        PotentialSpec::harmonic(2.0),
    ]
}

fn dynamics_oracle(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = opts.points;
    let mut s = PointSampler::new(opts.seed);
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0)?;
    let points = s.phase_points(Chart::MixedM, n);
    let mut out = Vec::new();
    for potential in builtin_potentials() {
        let name = potential.name().to_string();
        let params = BodyParams::new(1.0, inertia, potential)?;
        let h = hamiltonian_variable(&params);
        let (mut oracle, mut grad) = (0.0_f64, 0.0_f64);
        for point in &points {
            let rhs = eom_rhs(point, &params)?;
            let field = hamiltonian_vector_field(&h, point)?;
            for i in 0..FULL_DIM {
                oracle = oracle.max((rhs[i] - field[i]).abs());
            }
            let v = &params.potential;
            let gx = v.grad_x(point.x, point.q) - v.fd_grad_x(point.x, point.q);
            let gq = v.grad_q(point.x, point.q) - v.fd_grad_q(point.x, point.q);
            let scale = v
                .grad_x(point.x, point.q)
                .max_abs()
                .max(v.grad_q(point.x, point.q).max_abs())
                .max(1.0);
            grad = grad.max(gx.max_abs().max(gq.max_abs()) / scale);
        }
        out.push(CheckResult::new(
            format!("eom_vs_hamiltonian_field_{name}"),
            oracle,
            Bound::AtMost(tol::DYNAMICS_ORACLE),
            n,
        ));
        out.push(CheckResult::new(
            format!("gradient_vs_fd_{name}"),
            grad,
            Bound::AtMost(tol::GRADIENT_FD),
            n,
        ));
    }
    Ok(out)
}
