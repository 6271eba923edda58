use proptest::prelude::*;
use rotmhd::linear::*;
use rotmhd::C64;

fn xi_from(rho: f64, angle: f64, xi3: f64) -> [f64; 3] {
    [rho * angle.cos(), rho * angle.sin(), xi3]
}

fn div_free(xi: [f64; 3], raw: [(f64, f64); 6]) -> Vec6 {
    let k2: f64 = xi.iter().map(|x| x * x).sum();
    let mut v: [C64; 6] = std::array::from_fn(|i| C64::new(raw[i].0, raw[i].1));
    for half in [0, 3] {
        let d: C64 = (0..3).map(|i| v[half + i] * xi[i]).sum();
        for i in 0..3 {
            v[half + i] -= d * xi[i] / k2;
        }
    }
    Vec6::from_column_slice(&v)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

prop_compose! {
    fn frequency()(rho in 0.3f64..3.0, angle in 0.0f64..6.283, v in 0.3f64..3.0, up in any::<bool>()) -> [f64; 3] {
        xi_from(rho, angle, if up { v } else { -v })
    }
}

prop_compose! {
    fn params()(eps in 1e-3f64..0.5, alpha in 0.0f64..1.0) -> ModelParams {
        ModelParams::scaled(eps, alpha).unwrap()
    }
}

fn coeffs() -> impl Strategy<Value = [(f64, f64); 6]> {
    prop::array::uniform6((-1.0f64..1.0, -1.0f64..1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenpairs_of_the_assembled_symbol(xi in frequency(), p in params()) {
        let m = assemble_symbol(xi, &p).unwrap();
        let lam = eigenvalues(xi, &p).unwrap();
        let w = eigenvectors(xi, &p).unwrap();
        let scale = m.norm();
        for k in 0..6 {
            let r = (m * w[k] - w[k] * lam[k]).norm() / (scale * w[k].norm());
            prop_assert!(r < 1e-12, "k = {k}: residual {r}");
        }
    }

    #[test]
    fn det_d_matches_closed_form(xi in frequency()) {
        let d = cramer_matrix(xi).determinant();
        prop_assert!(rel(d.norm(), det_d_closed_form(xi)) < 1e-10);
    }

    #[test]
    fn divergence_free_modes_damp_at_the_horizontal_rate(xi in frequency(), p in params()) {
        let lam = eigenvalues(xi, &p).unwrap();
        let rate = -p.nu * (xi[0] * xi[0] + xi[1] * xi[1]);
        for l in &lam[2..] {
            prop_assert!((l.re - rate).abs() < 1e-10 * (1.0 + l.norm()), "{l} vs {rate}");
        }
    }

    #[test]
    fn cramer_coefficients_rebuild_the_data(xi in frequency(), p in params(), raw in coeffs()) {
        let v = div_free(xi, raw);
        let u0: [C64; 6] = std::array::from_fn(|i| v[i]);
        let c = cramer_coefficients(&u0, xi, &p).unwrap();
        let w = eigenvectors(xi, &p).unwrap();
        let back: Vec6 = (0..4).fold(Vec6::zeros(), |acc, j| acc + w[j + 2] * c[j]);
        prop_assert!((back - v).norm() < 1e-10 * v.norm());
    }

    #[test]
    fn eigen_route_agrees_with_expm(xi in frequency(), p in params(), t in 0.0f64..50.0, raw in coeffs()) {
        let v = div_free(xi, raw);
        let a = eigen_propagator(xi, &p, t).unwrap() * v;
        let b = expm_propagator(xi, &p, t).unwrap() * v;
        prop_assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-300), "{} vs {}", a.norm(), b.norm());
    }

    #[test]
    fn propagator_is_a_semigroup(xi in frequency(), p in params(), t in 0.0f64..20.0, s in 0.0f64..20.0, raw in coeffs()) {
        let v = div_free(xi, raw);
        let direct = eigen_propagator(xi, &p, t + s).unwrap() * v;
        let twice = eigen_propagator(xi, &p, t).unwrap() * (eigen_propagator(xi, &p, s).unwrap() * v);
        prop_assert!((direct - twice).norm() <= 1e-10 * v.norm());
    }

    #[test]
    fn modulus_decays_exactly(xi in frequency(), p in params(), t in 0.0f64..20.0, raw in coeffs()) {
        let v = div_free(xi, raw);
        let out = eigen_propagator(xi, &p, t).unwrap() * v;
        let decay = (-p.nu * (xi[0] * xi[0] + xi[1] * xi[1]) * t).exp();
        prop_assert!(rel(out.norm(), decay * v.norm()) < 1e-10);
    }

    #[test]
    fn mirrored_frequency_gives_the_conjugate_flow(xi in frequency(), p in params(), t in 0.0f64..10.0) {
        let a = expm_propagator(xi, &p, t).unwrap();
        let b = expm_propagator([-xi[0], -xi[1], -xi[2]], &p, t).unwrap();
        prop_assert!((a.map(|x| x.conj()) - b).norm() < 1e-12 * a.norm());
    }
}

#[test]
fn degenerate_planes_are_detected() {
    assert!(is_degenerate([0.0, 2.0, 0.0]));
    assert!(is_degenerate([1.0, 0.5, 0.0]));
    assert!(!is_degenerate([1.0, 0.0, 0.5]));
    assert_eq!(det_d_closed_form([1.0, 0.5, 0.0]), 0.0);
    let p = ModelParams::scaled(0.1, 0.5).unwrap();
    // the closed form is off, the numerical route still works
    assert_eq!(mode_propagator([1.0, 0.5, 0.0], &p, 1.0, true).unwrap().1, Route::Expm);
    assert_eq!(mode_propagator([1.0, 0.5, 0.3], &p, 1.0, true).unwrap().1, Route::Eigen);
}

#[test]
fn expm_matches_a_diagonal_exponential() {
    let mut m = Mat6::zeros();
    for k in 0..6 {
        m[(k, k)] = C64::new(-(k as f64), 3.0 * k as f64);
    }
    let e = expm_oracle(&m, 2.5).unwrap();
    for k in 0..6 {
        let want = (m[(k, k)] * 2.5).exp();
        assert!((e[(k, k)] - want).norm() < 1e-13 * want.norm().max(1e-300));
    }
}

#[test]
fn parameter_validation() {
    assert!(ModelParams::scaled(0.0, 0.5).is_err());
    assert!(ModelParams::scaled(0.1, -0.5).is_err());
    assert!(ModelParams::generic(0.1, -1.0, 1.0, 1.0).is_err());
    assert!(ModelParams::generic(0.1, 0.0, 1.0, 1.0).is_ok());
    assert!(ModelParams::scaled(0.1, 0.5).unwrap().with_regularity(0.5, 1.0, 1.0).is_err());
    assert!(ModelParams::scaled(0.1, 0.5).unwrap().with_regularity(1.0, 1.0, 0.9).is_err());
}
