use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toda_kdv::fourier::Fourier;
use toda_kdv::golden::round_csv;
use toda_kdv::jacobi::{self, casimirs, check_floquet, derivative_zeros};
use toda_kdv::linalg::SymMatrix;
use toda_kdv::profiles::{sample_flaschka, ProfilePair, TrigPoly};
use toda_kdv::quantization::{
    apply_shift, lagrangian_state, quasimode_certificate, random_fourier, FockState, SelfAdjoint, Sign, TodaOperator,
};
use toda_kdv::Complex64;

fn trig(max_deg: usize, amp: f64) -> impl Strategy<Value = TrigPoly> {
    (1..=max_deg).prop_flat_map(move |d| {
        (prop::collection::vec(-amp..amp, d), prop::collection::vec(-amp..amp, d))
            .prop_map(|(c, s)| TrigPoly::new(0.0, c, s))
    })
}

fn profile() -> impl Strategy<Value = ProfilePair> {
    (trig(3, 1.5), trig(3, 1.5)).prop_map(|(a, b)| ProfilePair::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_structure(pp in profile(), n in 8usize..40) {
        let s = jacobi::spectrum(&pp, n).unwrap();
        prop_assert_eq!(s.values.len(), 2 * n);
        prop_assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.interlacing_violations().is_empty());
        // trace of the doubled matrix is twice the sum of the b's
        let m = sample_flaschka(&pp, n).unwrap();
        let tr: f64 = s.values.iter().sum();
        prop_assert!((tr - 2.0 * casimirs(&m).p).abs() < 1e-11);
        prop_assert!(check_floquet(&s, &m).is_ok());
    }

    #[test]
    fn critical_points_are_bracketed(pp in profile(), n in 8usize..32) {
        let m = sample_flaschka(&pp, n).unwrap();
        let s = jacobi::spectrum(&pp, n).unwrap();
        let z = derivative_zeros(&m, &s).unwrap();
        prop_assert_eq!(z.len(), n - 1);
        for (i, &x) in z.iter().enumerate() {
            let k = i + 1;
            prop_assert!(s.values[2 * k - 1] <= x && x <= s.values[2 * k]);
        }
    }

    #[test]
    fn casimir_p_vanishes_for_low_harmonics(pp in profile(), n in 8usize..64) {
        let c = casimirs(&sample_flaschka(&pp, n).unwrap());
        prop_assert!(c.p.abs() < 1e-15);
        prop_assert!((c.q - 1.0 - c.q_minus_one).abs() < 1e-15);
    }

    #[test]
    fn toda_operator_is_symmetric(pp in profile(), n in 4usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = TodaOperator::new(&pp, n).unwrap();
        let (u, v) = (FockState::random_unit(n, &mut rng), FockState::random_unit(n, &mut rng));
        let lhs = op.apply_state(&u).inner(&v);
        let rhs = u.inner(&op.apply_state(&v));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn shifts_are_isometries(n in 2usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = FockState::random_unit(n, &mut rng);
        for sign in [Sign::Plus, Sign::Minus] {
            prop_assert!((apply_shift(sign, &v).norm() - 1.0).abs() < 1e-13);
        }
        let back = apply_shift(Sign::Plus, &apply_shift(Sign::Minus, &v));
        prop_assert!(back.distance(&v) < 1e-15);
    }

    #[test]
    fn lagrangian_norm_below_sup(deg in 0usize..6, k in 0i64..64, n in 8usize..64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Fourier = random_fourier(&mut rng, deg);
        prop_assert!(lagrangian_state(&f, k, n).norm() <= f.sup_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn rayleigh_certificates_capture(dim in 1usize..40, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                a.set(i, j, rng.gen_range(-2.0..2.0));
            }
        }
        let psi: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let av = a.apply(&psi);
        let mu = psi.iter().zip(&av).map(|(x, y)| (x * y).re).sum::<f64>() / psi.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let vals = toda_kdv::linalg::eigvalsh(&a).unwrap();
        let c = quasimode_certificate(&a, &psi, mu, Some(&vals)).unwrap();
        prop_assert_eq!(c.captured, Some(true));
    }

    #[test]
    fn golden_rounding_is_idempotent(xs in prop::collection::vec(-1e6f64..1e6, 1..8)) {
        let line: Vec<String> = xs.iter().map(|x| format!("{x:e}")).collect();
        let csv = format!("h\n{}\n", line.join(","));
        let once = round_csv(&csv);
        prop_assert_eq!(round_csv(&once), once);
    }
}
