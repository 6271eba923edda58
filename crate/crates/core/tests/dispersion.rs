use proptest::prelude::*;
use rotmhd::dispersion::phase::phase_radial;
use rotmhd::dispersion::*;

/// Point of `𝒞_{r/2,2R}` from unit-interval coordinates.
fn annulus_point(u: [f64; 4], r: f64, big_r: f64) -> [f64; 3] {
    let v = 0.5 * r + u[0] * (1.9 * big_r - 0.5 * r);
    let v = v.min(1.9 * big_r);
    let h_max = (4.0 * big_r * big_r - v * v).sqrt();
    let h = 0.5 * r + u[1] * (h_max - 0.5 * r).max(0.0);
    let a = 2.0 * std::f64::consts::PI * u[2];
    let s = if u[3] < 0.5 { -1.0 } else { 1.0 };
    [h * a.cos(), h * a.sin(), s * v]
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn gamma_closed_forms_converge_at_second_order() {
    let pts = [[0.3, 0.7, 0.5], [-1.2, 0.4, 2.1], [0.05, -0.9, 0.2], [2.5, 1.5, -0.8]];
    for br in [Branch::A, Branch::B] {
        for xi in pts {
            let fd_gamma = |h: f64| -central(|y| phase(br, [xi[0], y, xi[2]]), xi[1], h);
            let fd_deriv = |h: f64| central(|y| gamma(br, [xi[0], y, xi[2]]), xi[1], h);
            for (fd, exact) in [(&fd_gamma as &dyn Fn(f64) -> f64, gamma(br, xi)), (&fd_deriv, gamma_derivative(br, xi))] {
                let (e1, e2) = ((fd(1e-2) - exact).abs(), (fd(5e-3) - exact).abs());
                let order = (e1 / e2).log2();
                assert!(e2 < 1e-4 * exact.abs().max(1.0), "{br:?} {xi:?}: {e2}");
                assert!((order - 2.0).abs() < 0.1, "{br:?} {xi:?}: order {order}");
            }
        }
    }
}

#[test]
fn gamma_constants_are_finite_on_the_annulus() {
    for big_r in [4.0, 8.0] {
        let r = 1.0 / big_r;
        let pts: Vec<[f64; 3]> = (0..4000)
            .map(|k| {
                let f = |m: u64| ((k as u64 * m) % 4001) as f64 / 4001.0;
                annulus_point([f(1237), f(2749), f(3371), f(1999)], r, big_r)
            })
            .collect();
        for br in [Branch::A, Branch::B] {
            let b = empirical_gamma_bounds(br, big_r, 1.0, &pts);
            assert!(b.c_beta().is_finite() && b.c_beta() > 0.0, "{br:?} R={big_r}: {b:?}");
        }
    }
}

#[test]
fn radial_kernel_matches_tensor_gauss_legendre() {
    let spec = KernelSpec::new(0.5, 2.0, Branch::A, Sign::Plus).unwrap();
    for (theta, z, xi3) in [(3.0, [0.4, -0.3], 0.9), (0.0, [1.5, 0.0], 1.6)] {
        let a = kernel(&spec, theta, 0.2, z, xi3).unwrap();
        let b = kernel_tensor_adaptive(&spec, theta, 0.2, z, xi3, 256).unwrap();
        assert!(!a.degraded && !b.degraded);
        let rel = (a.value - b.value).norm() / a.value.norm();
        assert!(rel < 1e-5, "θ={theta}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn kernel_is_continuous_at_rest() {
    let spec = KernelSpec::new(0.25, 4.0, Branch::B, Sign::Minus).unwrap();
    let k0 = kernel(&spec, 0.0, 0.0, [0.0, 0.0], 1.0).unwrap().value;
    let k1 = kernel(&spec, 1e-9, 0.0, [0.0, 0.0], 1.0).unwrap().value;
    assert!(k0.im == 0.0 && k0.re > 0.0);
    assert!((k0 - k1).norm() < 1e-7 * k0.re);
}

#[test]
fn gaussian_damping_envelope() {
    // on supp Ψ, |ξ_h| ≥ r/2, so |K| ≤ e^{−r²τ/4} ∫Ψ
    let spec = KernelSpec::new(0.25, 4.0, Branch::A, Sign::Plus).unwrap();
    let area = kernel(&spec, 0.0, 0.0, [0.0, 0.0], 1.0).unwrap().value.re;
    for tau in [10.0, 100.0, 400.0] {
        let k = kernel(&spec, 5.0, tau, [0.3, 0.0], 1.0).unwrap().value.norm();
        assert!(k <= (-spec.r * spec.r * tau / 4.0).exp() * area * (1.0 + 1e-9), "τ={tau}");
    }
}

#[test]
fn sup_is_sign_symmetric_and_refinement_stable() {
    let plus = KernelSpec::new(0.25, 4.0, Branch::A, Sign::Plus).unwrap();
    let minus = KernelSpec { sign: Sign::Minus, ..plus };
    let cfg = SupSearch::default();
    let a = kernel_sup(&plus, 300.0, 0.0, &cfg).unwrap();
    let b = kernel_sup(&minus, 300.0, 0.0, &cfg).unwrap();
    assert!((a.sup - b.sup).abs() < 1e-9 * a.sup);
    let fine = SupSearch {
        n_xi3: 2 * cfg.n_xi3,
        n_z: 2 * cfg.n_z,
        ..cfg
    };
    let c = kernel_sup(&plus, 300.0, 0.0, &fine).unwrap();
    assert!((a.sup - c.sup).abs() < 0.02 * c.sup, "{} vs {}", a.sup, c.sup);
    assert!(a.sup >= a.grid_sup);
}

#[test]
fn decay_fit_needs_three_decades() {
    let spec = KernelSpec::new(0.25, 4.0, Branch::A, Sign::Plus).unwrap();
    assert!(kernel_decay_fit(&spec, &[1.0, 10.0, 100.0], 0.0, &SupSearch::default()).is_err());
    assert!(kernel_decay_fit(&spec, &[10.0, 1.0, 1e4], 0.0, &SupSearch::default()).is_err());
}

#[test]
fn small_theta_plateau_matches_rest_value() {
    let spec = KernelSpec::new(0.25, 4.0, Branch::A, Sign::Plus).unwrap();
    let cfg = SupSearch::default();
    let s0 = kernel_sup(&spec, 0.0, 0.0, &cfg).unwrap();
    let s1 = kernel_sup(&spec, 1e-6, 0.0, &cfg).unwrap();
    assert!((s0.sup - s1.sup).abs() < 1e-6 * s0.sup);
    // at rest the integrand is positive, so the sup sits at z = 0
    assert_eq!(s0.z, 0.0);
}

fn strichartz_spec() -> KernelSpec {
    KernelSpec::new(0.25, 4.0, Branch::A, Sign::Plus).unwrap()
}

#[test]
fn strichartz_initial_slice_is_bounded_by_bernstein() {
    let f = Profile::default();
    let spec = strichartz_spec();
    let prof = strichartz_profile(&f, &spec, 0.1, 0.0, &[f64::INFINITY], &StrichartzConfig::default()).unwrap();
    let n0 = prof.samples[0].value;
    assert!(n0 > 0.0);
    // ‖Ψ(D)f‖_{L^∞_h L²_v} ≤ (|supp|_h)^{1/2}‖f‖ / (2π) ≤ C R ‖f‖
    let ratio = n0 / (spec.big_r * f.l2_norm());
    assert!(ratio.is_finite() && ratio < 1.0, "{ratio}");
}

#[test]
fn strichartz_sup_norm_is_max_over_samples() {
    let f = Profile::default();
    let (n, prof) = semigroup_strichartz_norm(&f, &strichartz_spec(), 0.05, 0.0, f64::INFINITY, &StrichartzConfig::default()).unwrap();
    let max = prof.samples.iter().map(|s| s.value).fold(0.0, f64::max);
    assert_eq!(n.value, max);
    assert!(prof.samples.iter().all(|s| s.value <= s.bound * (1.0 + 1e-9)));
}

#[test]
fn strichartz_norm_converges_under_refinement() {
    let f = Profile::default();
    let spec = strichartz_spec();
    let base = StrichartzConfig::default();
    for p in [1.0, 2.0] {
        let (a, prof) = semigroup_strichartz_norm(&f, &spec, 0.01, 0.1, p, &base).unwrap();
        let dense = StrichartzConfig {
            per_decade: 2 * base.per_decade,
            ..base
        };
        let (b, _) = semigroup_strichartz_norm(&f, &spec, 0.01, 0.1, p, &dense).unwrap();
        assert!((a.value - b.value).abs() < 0.02 * b.value, "p={p}: {} vs {}", a.value, b.value);
        assert!(prof.refinement_change < 0.02 && !prof.degraded);
    }
}

#[test]
fn scaling_sweep_preconditions() {
    let f = Profile::default();
    let spec = strichartz_spec();
    let cfg = StrichartzConfig::default();
    assert!(strichartz_scaling_sweep(&f, &spec, 0.4, &[1.0], &[0.1, 0.001], &cfg).is_err());
    assert!(strichartz_scaling_sweep(&f, &spec, 0.0, &[1.0], &[1.0, 0.01], &cfg).is_ok());
    assert!(strichartz_scaling_sweep(&f, &spec, 0.0, &[1.0], &[0.1, 0.05], &cfg).is_err());
    assert!((predicted_eps_exponent(0.1, 2.0) - 0.0875).abs() < 1e-15);
    assert_eq!(predicted_eps_exponent(0.0, f64::INFINITY), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phases_multiply_to_xi3_squared(u in prop::array::uniform4(0.0f64..1.0)) {
        let xi = annulus_point(u, 0.25, 4.0);
        let p = phase(Branch::A, xi) * phase(Branch::B, xi);
        prop_assert!((p - xi[2] * xi[2]).abs() <= 1e-12 * xi[2] * xi[2]);
        let rho = xi[0].hypot(xi[1]);
        prop_assert!((phase_radial(Branch::A, rho, xi[2]) - phase(Branch::A, xi)).abs() <= 1e-12 * phase(Branch::A, xi).abs());
    }

    #[test]
    fn gamma_matches_difference_quotient(u in prop::array::uniform4(0.0f64..1.0)) {
        let xi = annulus_point(u, 0.25, 4.0);
        for br in [Branch::A, Branch::B] {
            let h = 1e-5 * (1.0 + xi[1].abs());
            let fd = -central(|y| phase(br, [xi[0], y, xi[2]]), xi[1], h);
            let g = gamma(br, xi);
            prop_assert!((fd - g).abs() <= 1e-6 * (1.0 + g.abs()), "{:?}: {} vs {}", br, fd, g);
            let fd2 = central(|y| gamma(br, [xi[0], y, xi[2]]), xi[1], h);
            let d = gamma_derivative(br, xi);
            prop_assert!((fd2 - d).abs() <= 1e-5 * (1.0 + d.abs()), "{:?}: {} vs {}", br, fd2, d);
        }
    }

    #[test]
    fn minus_kernel_is_conjugate(theta in 0.0f64..50.0, z in 0.0f64..4.0, xi3 in 0.2f64..3.0) {
        let p = KernelSpec::new(0.5, 2.0, Branch::B, Sign::Plus).unwrap();
        let m = KernelSpec { sign: Sign::Minus, ..p };
        let a = kernel(&p, theta, 0.1, [z, 0.0], xi3).unwrap().value;
        let b = kernel(&m, theta, 0.1, [0.0, z], xi3).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}
