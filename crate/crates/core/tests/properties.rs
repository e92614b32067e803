use hecke_core::arith::{d, factor, gcd, mu, phi, psi, sigma};
use hecke_core::characters::character_group;
use hecke_core::census::{count_points, group_structure};
use hecke_core::expsums::{kloosterman, twisted_kloosterman, weil_bound};
use proptest::prelude::*;

fn coprime_pair() -> impl Strategy<Value = (u64, u64)> {
    (1u64..5_000, 1u64..5_000).prop_filter("coprime", |&(a, b)| gcd(a, b) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn multiplicative_functions((a, b) in coprime_pair()) {
        prop_assert_eq!(d(a * b), d(a) * d(b));
        prop_assert_eq!(sigma(a * b), sigma(a) * sigma(b));
        prop_assert_eq!(phi(a * b), phi(a) * phi(b));
        prop_assert_eq!(psi(a * b), psi(a) * psi(b));
        prop_assert_eq!(mu(a * b), mu(a) * mu(b));
    }

    #[test]
    fn factorization_round_trips(n in 1u64..1_000_000_000) {
        prop_assert_eq!(factor(n).unwrap().product(), n);
    }

    #[test]
    fn characters_are_multiplicative(n in 1u64..200, i in any::<u64>(), a in -500i64..500, b in -500i64..500) {
        let g = character_group(n).unwrap();
        let chi = g.character(i % g.size()).unwrap();
        let lhs = chi.eval(a * b);
        let rhs = chi.eval(a) * chi.eval(b);
        prop_assert!((lhs - rhs).norm() < 1e-9);
        prop_assert!((chi.eval(a + n as i64) - chi.eval(a)).norm() < 1e-12);
    }

    #[test]
    fn character_orthogonality(n in 1u64..120, i in any::<u64>()) {
        let g = character_group(n).unwrap();
        let chi = g.character(i % g.size()).unwrap();
        let s: num_complex::Complex64 = (0..n as i64).map(|a| chi.eval(a)).sum();
        let want = if chi.is_trivial() { phi(n) as f64 } else { 0.0 };
        prop_assert!((s.re - want).abs() < 1e-9 * n as f64 && s.im.abs() < 1e-9 * n as f64);
    }

    #[test]
    fn kloosterman_symmetries(a in -300i64..300, b in -300i64..300, c in 1u64..400) {
        let s = kloosterman(a, b, c).unwrap();
        let t = kloosterman(b, a, c).unwrap();
        prop_assert!(s.im.abs() < 1e-9);
        prop_assert!((s - t).norm() < 1e-9);
        if gcd(a.unsigned_abs(), c) == 1 {
            let u = kloosterman(1, a * b, c).unwrap();
            prop_assert!((s - u).norm() < 1e-8);
        }
        prop_assert!(s.norm() <= weil_bound(None, a, b, c) + 1e-9);
    }

    #[test]
    fn twisted_weil_bound(n in 1u64..60, k in 1u64..6, i in any::<u64>(), a in -100i64..100, b in -100i64..100) {
        let g = character_group(n).unwrap();
        let chi = g.character(i % g.size()).unwrap();
        let c = n * k;
        let s = twisted_kloosterman(&chi, a, b, c).unwrap();
        prop_assert!(s.norm() <= weil_bound(Some(&chi), a, b, c) * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn curve_groups_respect_hasse(pi in 0usize..8, a in 0u64..1_000, b in 0u64..1_000) {
        let q = [5u64, 7, 11, 13, 101, 211, 401, 997][pi];
        let (a, b) = (a % q, b % q);
        prop_assume!((4 * a * a % q * a + 27 * b * b) % q != 0);
        let n = count_points(q, a, b).unwrap();
        let (n1, n2) = group_structure(q, a, b).unwrap();
        prop_assert_eq!(n1 * n2, n);
        prop_assert_eq!(n1 % n2, 0);
        prop_assert_eq!((q - 1) % n2, 0);
        let t = q as i64 + 1 - n as i64;
        prop_assert!((t * t) as u64 <= 4 * q);
    }
}
