use proptest::prelude::*;
use rotmhd::cutoff::*;
use rotmhd::init::random_state;
use rotmhd::lp::*;
use rotmhd::norms::{h0s, h0s_state};
use rotmhd::ops::{divergence, product, project_leray};
use rotmhd::{Fft3, Grid, PhysicalField};

fn grid() -> Grid {
    Grid::new(12, 10, 7.0, 5.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_round_trip_and_parseval(seed in any::<u64>()) {
        let g = grid();
        let fft = Fft3::new(&g);
        let s = random_state(&g, seed, 1.0, false, 100).unwrap();
        let phys = fft.inverse(&s.u).unwrap();
        let back = fft.forward(&phys).unwrap();
        prop_assert!(back.sub(&s.u).norm_l2() < 1e-13 * s.u.norm_l2());
        // both sides are the L² norm over the box
        prop_assert!(rel((phys.norm_l2_sq()).sqrt(), s.u.norm_l2()) < 1e-12);
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(seed in any::<u64>()) {
        let g = grid();
        let fft = Fft3::new(&g);
        let raw = PhysicalField::from_fn(&g, |x| {
            let a = (seed % 97) as f64 / 97.0;
            [(x[0] + a).sin() * x[2].cos(), (2.0 * x[1]).cos() + x[0].sin(), (x[0] - x[1] + a).sin()]
        });
        let u = fft.forward(&raw).unwrap();
        let p = project_leray(&u);
        prop_assert!(divergence(&p).norm_l2() < 1e-12 * u.norm_l2());
        prop_assert!(project_leray(&p).sub(&p).norm_l2() < 1e-14 * u.norm_l2());
        prop_assert!(p.norm_l2() <= u.norm_l2() * (1.0 + 1e-14));
    }

    #[test]
    fn ladder_reconstructs_and_two_apart_blocks_are_orthogonal(seed in any::<u64>()) {
        let g = grid();
        let s = random_state(&g, seed, 1.0, false, 100).unwrap();
        let ladder = DyadicLadder::new(&s.u);
        prop_assert!(ladder.reconstruct().sub(&s.u).norm_l2() < 1e-12 * s.u.norm_l2());
        let total: f64 = ladder.block_norms.values().map(|x| x * x).sum();
        prop_assert!(total > 0.0 && total <= s.u.norm_l2_sq() * (1.0 + 1e-12));
        for dir in [Direction::H, Direction::V] {
            for q in -1..q_max(&g, dir) - 1 {
                let a = dyadic_block(&s.u, q, dir);
                let b = dyadic_block(&s.u, q + 2, dir);
                prop_assert!(a.inner(&b).abs() <= 1e-14 * s.u.norm_l2_sq());
            }
        }
    }

    #[test]
    fn block_multipliers_partition_unity(z in 0.0f64..200.0) {
        let top = 10;
        let sum: f64 = (-1..=top).map(|q| block_multiplier(q, z)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-14, "{sum}");
        for q in 0..=top {
            let low: f64 = (-1..q).map(|k| block_multiplier(k, z)).sum();
            prop_assert!((low - low_pass_multiplier(q, z)).abs() < 1e-14);
        }
    }

    #[test]
    fn bony_pieces_sum_to_the_product(seed in any::<u64>()) {
        let g = Grid::new(16, 16, 6.0, 9.0).unwrap();
        let fft = Fft3::new(&g);
        let u = random_scalar(&g, seed, [3, 3, 3]);
        let v = random_scalar(&g, seed ^ 0x5555, [3, 3, 3]);
        let uv = product(&fft, &u, &v).unwrap();
        let sum = bony_decompose(&fft, &u, &v).unwrap().sum();
        let err: f64 = sum.iter().zip(&uv).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = uv.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * scale);
    }

    #[test]
    fn h0s_is_monotone_in_s(seed in any::<u64>(), s in 0.0f64..2.0) {
        let g = grid();
        let st = random_state(&g, seed, 1.0, false, 100).unwrap();
        prop_assert!(rel(h0s(&st.u, 0.0), st.u.norm_l2()) < 1e-12);
        prop_assert!(h0s(&st.u, s) <= h0s(&st.u, s + 0.5));
        let scaled = st.scaled(3.0);
        prop_assert!(rel(h0s_state(&scaled, s), 3.0 * h0s_state(&st, s)) < 1e-12);
    }

    #[test]
    fn cutoff_is_a_plateau_on_the_annulus(h in 0.0f64..10.0, v in -10.0f64..10.0, r in 0.1f64..1.0, big_r in 2.0f64..5.0) {
        let xi = [h, 0.0, v];
        let p = psi_cutoff(xi, r, big_r);
        prop_assert!((0.0..=1.0).contains(&p));
        if in_truncation_set(xi, r, big_r) {
            prop_assert_eq!(p, 1.0);
        }
        let n = (h * h + v * v).sqrt();
        if h < r / 2.0 || v.abs() < r / 2.0 || n > 2.0 * big_r {
            prop_assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn split_adds_back_exactly(seed in any::<u64>()) {
        let g = Grid::new(12, 12, 30.0, 30.0).unwrap();
        let s = random_state(&g, seed, 0.7, false, 100).unwrap();
        let c = CutoffParams::fixed(1.0, 1.8).unwrap();
        let (bar, tilde) = split_initial_data(&s, &c);
        prop_assert!(bar.add(&tilde).sub(&s).norm_l2() <= 1e-15 * s.norm_l2());
        prop_assert!(bar.norm_l2() <= s.norm_l2() * (1.0 + 1e-14));
    }

    #[test]
    fn schedule_follows_its_power_laws(eps in 1e-4f64..0.5, c in 1.2f64..10.0) {
        let a = alpha0(1.0, 1.0, 1.0);
        let p = schedule_parameters(eps, a, 1.0, 1.0, 1.0, c).unwrap();
        prop_assert!(rel(p.big_r, c * eps.powf(-a)) < 1e-12);
        prop_assert!(rel(p.r * p.big_r, 1.0) < 1e-12);
        prop_assert!(p.alpha_admissible && p.condition_low && p.condition_high);
        let smaller = schedule_parameters(eps / 10.0, a, 1.0, 1.0, 1.0, c).unwrap();
        prop_assert!(smaller.big_r > p.big_r);
    }
}

#[test]
fn alpha0_at_unit_exponents() {
    assert!((alpha0(1.0, 1.0, 1.0) - 1.0 / 115.0).abs() < 1e-16);
    assert!(alpha0(2.0, 1.0, 1.0) > alpha0(1.0, 1.0, 1.0));
}

#[test]
fn schedule_rejects_bad_inputs() {
    assert!(schedule_parameters(1.5, 0.01, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(schedule_parameters(0.1, 0.01, 0.5, 1.0, 1.0, 1.0).is_err());
    assert!(schedule_parameters(0.1, 0.01, 1.0, 1.0, 0.4, 1.0).is_err());
    // R ≤ 1 would put r above R
    assert!(schedule_parameters(0.9, 0.001, 1.0, 1.0, 1.0, 0.5).is_err());
}

#[test]
fn unresolved_cutoff_is_rejected() {
    let c = CutoffParams::fixed(0.5, 2.0).unwrap();
    assert!(c.check_resolution(&Grid::new(16, 16, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI).unwrap()).is_err());
    assert!(c.check_resolution(&Grid::new(16, 16, 60.0, 60.0).unwrap()).is_ok());
}
