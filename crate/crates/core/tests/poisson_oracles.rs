use proptest::prelude::*;

use quatham::poisson::{
    hamiltonian_vector_field, index, jacobi_residual, liouville_form_eval,
    normalization_bracket_residual, poisson_bracket, poisson_map_residual,
    right_translation_covariance_check, structure_tensor, symplectic_form_eval, Coords,
    FULL_DIM,
};
use quatham::quaternion::{kronecker, levi_civita, quat_mul};
use quatham::sampling::PointSampler;
use quatham::{Chart, DynamicVariable, Error, Layout, PhasePoint, Quaternion, Vec3};

fn point(seed: u64, chart: Chart, near_pure: bool) -> PhasePoint {
    PointSampler::new(seed).phase_point(chart, near_pure)
}

fn seeds() -> impl Strategy<Value = (u64, bool)> {
    (any::<u64>(), prop::bool::weighted(0.1))
}

/// Bracket table of the inertial chart written out entry by entry.
fn inertial_oracle(z: &Coords) -> [[f64; FULL_DIM]; FULL_DIM] {
    let mut j = [[0.0; FULL_DIM]; FULL_DIM];
    let q = |mu: usize| z[index::Q + mu];
    let mu = |i: usize| z[index::MOM + i];
    let mut set = |a: usize, b: usize, v: f64| {
        j[a][b] = v;
        j[b][a] = -v;
    };
    for i in 0..3 {
        set(index::X + i, index::P + i, 1.0);
        set(index::MOM + i, index::Q, q(i + 1));
        for k in 0..3 {
            let mut v = -q(0) * kronecker(i, k);
            for l in 0..3 {
                v += levi_civita(i, k, l) * q(l + 1);
            }
            set(index::MOM + i, index::Q + 1 + k, v);
        }
        for k in (i + 1)..3 {
            let v: f64 = (0..3).map(|l| 2.0 * levi_civita(i, k, l) * mu(l)).sum();
            set(index::MOM + i, index::MOM + k, v);
        }
    }
    j
}

/// `M_i = vec(q⁻¹ μ q)_i` as a function on the inertial chart.
fn body_momentum(i: usize) -> DynamicVariable {
    DynamicVariable::new(format!("M{}", i + 1), move |z: &Coords| {
        let q = Quaternion::new(z[6], z[7], z[8], z[9]);
        let mu = Vec3::new(z[10], z[11], z[12]);
        quat_mul(quat_mul(q.inverse().unwrap(), mu.to_pure()), q).qv[i]
    })
    .in_chart(Chart::InertialMu)
}

#[test]
fn inertial_tensor_matches_written_table() {
    let mut s = PointSampler::new(21);
    for p in s.phase_points(Chart::InertialMu, 200) {
        let z = p.coords();
        let j = structure_tensor(&p, Layout::Full);
        let oracle = inertial_oracle(&z);
        for (a, row) in oracle.iter().enumerate() {
            for (b, &want) in row.iter().enumerate() {
                assert_eq!(j.get(a, b), want, "entry ({a}, {b})");
            }
        }
    }
}

#[test]
fn mixed_tensor_is_pushforward_of_inertial() {
    // brackets of (q, M(q, μ)) computed in the inertial chart must reproduce
    // the mixed-chart table at the converted point
    let mut s = PointSampler::new(22);
    for p in s.phase_points(Chart::InertialMu, 50) {
        let mixed = p.to_chart(Chart::MixedM).unwrap();
        let jm = structure_tensor(&mixed, Layout::Full);
        let vars: Vec<DynamicVariable> = (0..4)
            .map(|mu| DynamicVariable::quat(mu).in_chart(Chart::InertialMu))
            .chain((0..3).map(body_momentum))
            .collect();
        for (a, fa) in vars.iter().enumerate() {
            for (b, fb) in vars.iter().enumerate() {
                let got = poisson_bracket(fa, fb, &p).unwrap();
                let want = jm.get(index::Q + a, index::Q + b);
                assert!((got - want).abs() < 1e-7, "({a}, {b}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn mixed_momentum_bracket_example() {
    let p = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::new(0.3, -0.4, 1.25), Chart::MixedM).unwrap();
    let j = structure_tensor(&p, Layout::Full);
    assert_eq!(j.get(index::MOM, index::MOM + 1), -2.5);
    let b = poisson_bracket(&DynamicVariable::mom(0), &DynamicVariable::mom(1), &p).unwrap();
    assert_eq!(b, -2.5);
}

#[test]
fn inertial_block_at_identity() {
    let p = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::new(1.0, 2.0, 3.0), Chart::InertialMu).unwrap();
    let j = structure_tensor(&p, Layout::Full);
    for i in 0..3 {
        for k in 0..3 {
            assert_eq!(j.get(index::MOM + i, index::Q + 1 + k), -kronecker(i, k));
        }
    }
}

#[test]
fn basic_bracket_examples() {
    let p = point(5, Chart::InertialMu, false);
    for i in 0..3 {
        let b = poisson_bracket(&DynamicVariable::mom(i), &DynamicVariable::quat(0), &p).unwrap();
        assert_eq!(b, p.q.qv[i]);
    }
    assert_eq!(poisson_bracket(&DynamicVariable::x(0), &DynamicVariable::p(0), &p).unwrap(), 1.0);
    let f = DynamicVariable::rotation_entry(0, 2);
    assert_eq!(poisson_bracket(&f, &f, &p).unwrap(), 0.0);
}

#[test]
fn coordinate_free_brackets() {
    let mut s = PointSampler::new(23);
    for p in s.phase_points(Chart::InertialMu, 100) {
        let xi = s.vec3_in_box(1.0);
        let eta = s.vec3_in_box(1.0);
        let lxi = DynamicVariable::momentum_along(xi);
        let leta = DynamicVariable::momentum_along(eta);
        // {q, ⟨μ,ξ⟩} = ξq
        let xq = quat_mul(xi.to_pure(), p.q);
        for mu in 0..4 {
            let b = poisson_bracket(&DynamicVariable::quat(mu), &lxi, &p).unwrap();
            assert!((b - xq[mu]).abs() < 1e-13);
        }
        // {⟨μ,ξ⟩, ⟨μ,η⟩} = 2⟨μ, ξ × η⟩
        let b = poisson_bracket(&lxi, &leta, &p).unwrap();
        assert!((b - 2.0 * p.mom.dot(&xi.cross(&eta))).abs() < 1e-13);
    }
}

#[test]
fn quaternion_coordinate_fields_against_eta_table() {
    // μ-components of X_{q_ν} equal -η^(ν) with
    // η^(0) = (-q1, -q2, -q3), η^(1) = (q0, q3, -q2),
    // η^(2) = (-q3, q0, q1),   η^(3) = (q2, -q1, q0)
    let mut s = PointSampler::new(24);
    for p in s.phase_points(Chart::InertialMu, 100) {
        let [q0, q1, q2, q3] = p.q.to_array();
        let eta = [
            [-q1, -q2, -q3],
            [q0, q3, -q2],
            [-q3, q0, q1],
            [q2, -q1, q0],
        ];
        for (nu, e) in eta.iter().enumerate() {
            let x = hamiltonian_vector_field(&DynamicVariable::quat(nu), &p).unwrap();
            for k in 0..3 {
                assert_eq!(x[index::MOM + k], -e[k], "X_q{nu}, component {k}");
            }
            for (i, v) in x.iter().enumerate() {
                if !(index::MOM..index::MOM + 3).contains(&i) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }
}

#[test]
fn quaternion_fields_are_tangent_through_the_form() {
    // i_{X_{q_ν}} Ω = d q_ν on tangent vectors
    let mut s = PointSampler::new(25);
    for p in s.phase_points(Chart::InertialMu, 50) {
        let v = s.tangent_vector(Some(p.q));
        for nu in 0..4 {
            let x = hamiltonian_vector_field(&DynamicVariable::quat(nu), &p).unwrap();
            let lhs = symplectic_form_eval(&p, &x, &v).unwrap();
            assert!((lhs - v[index::Q + nu]).abs() < 1e-12);
        }
    }
}

#[test]
fn symplectic_form_examples() {
    let p = PhasePoint::rotational(Quaternion::IDENTITY, Vec3::ZERO, Chart::InertialMu).unwrap();
    let mut u = [0.0; FULL_DIM];
    u[index::Q + 1] = 1.0; // e1 q at q = e0
    let mut v = [0.0; FULL_DIM];
    v[index::MOM] = 1.0;
    assert_eq!(symplectic_form_eval(&p, &u, &v).unwrap(), 1.0);
    assert_eq!(symplectic_form_eval(&p, &u, &u).unwrap(), 0.0);

    let mut bad = [0.0; FULL_DIM];
    bad[index::Q] = 1.0;
    assert!(matches!(symplectic_form_eval(&p, &bad, &v), Err(Error::NotTangent(_))));
    assert!(matches!(liouville_form_eval(&p, &bad), Err(Error::NotTangent(_))));
}

#[test]
fn liouville_form_pairs_momentum_with_right_trivialized_velocity() {
    let q = Quaternion::new(0.5, 0.5, 0.5, 0.5);
    let p = PhasePoint::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), q, Vec3::new(0.0, 2.0, 0.0), Chart::InertialMu).unwrap();
    // u_q = e2 q, so δq(u) = e2; u_x = e1
    let uq = quat_mul(Quaternion::basis(2), q);
    let mut u = [0.0; FULL_DIM];
    u[index::X] = 3.0;
    u[index::Q..index::Q + 4].copy_from_slice(&uq.to_array());
    assert!((liouville_form_eval(&p, &u).unwrap() - 5.0).abs() < 1e-15);
}

#[test]
fn forms_require_inertial_chart() {
    let p = point(6, Chart::MixedM, false);
    let u = [0.0; FULL_DIM];
    assert!(matches!(symplectic_form_eval(&p, &u, &u), Err(Error::ChartMismatch { .. })));
    assert!(matches!(poisson_map_residual(&p), Err(Error::ChartMismatch { .. })));
}

#[test]
fn q_only_functions_commute() {
    let mut s = PointSampler::new(26);
    for p in s.phase_points(Chart::InertialMu, 50) {
        let f = DynamicVariable::rotation_entry(1, 2);
        let g = DynamicVariable::quat(0).product(&DynamicVariable::quat(3));
        assert_eq!(poisson_bracket(&f, &g, &p).unwrap(), 0.0);
        let x = hamiltonian_vector_field(&f, &p).unwrap();
        assert!(x[index::Q..index::Q + 4].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut s = PointSampler::new(27);
    let xi = s.vec3_in_box(2.0);
    let vars = vec![
        DynamicVariable::rotation_entry(0, 0),
        DynamicVariable::rotation_entry(2, 1),
        DynamicVariable::momentum_along(xi),
        DynamicVariable::pi(1),
        DynamicVariable::quat_norm_squared(),
        DynamicVariable::rotation_entry(0, 1).product(&DynamicVariable::mom(2)),
        DynamicVariable::pi(0).sum(&DynamicVariable::x(2).scaled(-3.0)),
        s.polynomial(5, 3).into_variable(),
    ];
    for p in s.phase_points(Chart::InertialMu, 50) {
        let z = p.coords();
        for v in &vars {
            assert!(v.has_analytic_gradient());
            let (a, f) = (v.gradient(&z), v.fd_gradient(&z));
            let scale = a.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            for i in 0..FULL_DIM {
                assert!((a[i] - f[i]).abs() <= 1e-6 * scale, "{} d/dz{i}", v.name());
            }
        }
    }
}

#[test]
fn right_translation_by_identity_and_at_pure_quaternions() {
    let p = point(7, Chart::InertialMu, false);
    assert!(right_translation_covariance_check(&p, Quaternion::IDENTITY).unwrap() <= 1e-11);
    let mut s = PointSampler::new(8);
    let pure = PhasePoint::rotational(Quaternion::basis(2), Vec3::new(0.5, 1.0, -1.5), Chart::InertialMu).unwrap();
    for _ in 0..50 {
        let b = s.unit_quaternion();
        assert!(right_translation_covariance_check(&pure, b).unwrap() <= 1e-11);
    }
    assert!(matches!(
        right_translation_covariance_check(&p, Quaternion::new(2.0, 0.0, 0.0, 0.0)),
        Err(Error::NotUnit { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tensors_are_exactly_antisymmetric((seed, near) in seeds(), mixed in any::<bool>()) {
        let chart = if mixed { Chart::MixedM } else { Chart::InertialMu };
        let p = point(seed, chart, near);
        for layout in [Layout::Rotational, Layout::Full] {
            prop_assert_eq!(structure_tensor(&p, layout).antisymmetry_defect(), 0.0);
        }
    }

    #[test]
    fn rotational_tensor_is_a_block_of_the_full_one((seed, near) in seeds()) {
        let p = point(seed, Chart::MixedM, near);
        let full = structure_tensor(&p, Layout::Full);
        let rot = structure_tensor(&p, Layout::Rotational);
        for a in 0..7 {
            for b in 0..7 {
                prop_assert_eq!(rot.get(a, b), full.get(a + 6, b + 6));
            }
        }
    }

    #[test]
    fn jacobi_holds_in_both_charts((seed, near) in seeds()) {
        prop_assert!(jacobi_residual(&point(seed, Chart::InertialMu, near)) <= 1e-12);
        prop_assert!(jacobi_residual(&point(seed, Chart::MixedM, near)) <= 1e-12);
    }

    #[test]
    fn quaternion_map_is_poisson((seed, near) in seeds()) {
        prop_assert!(poisson_map_residual(&point(seed, Chart::InertialMu, near)).unwrap() <= 1e-11);
    }

    #[test]
    fn normalization_is_preserved((seed, near) in seeds()) {
        prop_assert!(normalization_bracket_residual(&point(seed, Chart::InertialMu, near)).unwrap() <= 1e-11);
    }

    #[test]
    fn brackets_are_antisymmetric_in_arguments(seed in any::<u64>()) {
        let mut s = PointSampler::new(seed);
        let p = s.phase_point(Chart::MixedM, false);
        let f = s.polynomial(4, 3).into_variable();
        let g = s.polynomial(4, 3).into_variable();
        let fg = poisson_bracket(&f, &g, &p).unwrap();
        let gf = poisson_bracket(&g, &f, &p).unwrap();
        prop_assert!((fg + gf).abs() <= 1e-12 * fg.abs().max(1.0));
    }

    #[test]
    fn right_translation_covariance((seed, near) in seeds()) {
        let mut s = PointSampler::new(seed ^ 0x5a5a);
        let b = s.unit_quaternion();
        prop_assert!(right_translation_covariance_check(&point(seed, Chart::InertialMu, near), b).unwrap() <= 1e-11);
    }

    #[test]
    fn chart_round_trip((seed, near) in seeds()) {
        let p = point(seed, Chart::InertialMu, near);
        let back = p.to_chart(Chart::MixedM).unwrap().to_chart(Chart::InertialMu).unwrap();
        prop_assert!((back.mom - p.mom).max_abs() <= 1e-13);
    }
}
