use num::{BigInt, BigRational};
use proptest::prelude::*;

use bsf_core::{BetaSystem, QuadraticNumber, ShiftSpec};

#[test]
fn golden_reciprocals() {
    let sys = BetaSystem::golden();
    let inv = QuadraticNumber::golden().recip().unwrap();
    let d = sys.greedy_expansion(&inv, 12).unwrap();
    assert_eq!(d.to_string(), "100000000000");
    let d2 = sys.greedy_expansion(&inv.mul(&inv).unwrap(), 12).unwrap();
    assert_eq!(d2.to_string(), "010000000000");
}

#[test]
fn integer_base_is_positional() {
    let two = BetaSystem::integer(2).unwrap();
    assert_eq!(two.greedy_expansion_f64(0.75, 4).unwrap().to_string(), "1100");
    let ten = BetaSystem::integer(10).unwrap();
    let x = QuadraticNumber::rational(BigRational::new(BigInt::from(1234), BigInt::from(10000)));
    assert_eq!(ten.greedy_expansion(&x, 6).unwrap().to_string(), "123400");
}

#[test]
fn points_outside_unit_interval_are_rejected() {
    let sys = BetaSystem::golden();
    assert!(sys.greedy_expansion_f64(1.0, 4).is_err());
    assert!(sys.greedy_expansion_f64(-0.1, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn expansion_round_trip(num in 0i64..997, n in 1usize..40) {
        let sys = BetaSystem::golden();
        let x = BigRational::new(BigInt::from(num), BigInt::from(997));
        let digits = sys.greedy_expansion(&QuadraticNumber::rational(x.clone()), n).unwrap();
        prop_assert!(sys.parry_admissible(digits.as_slice()));
        prop_assert!(ShiftSpec::golden_mean().is_allowed(digits.as_slice()).unwrap());
        let (value, tail) = sys.symbolic_to_point(digits.as_slice()).unwrap();
        let xf = num as f64 / 997.0;
        prop_assert!(value <= xf + 1e-12 && xf - value < tail + 1e-12);
    }

    #[test]
    fn cylinders_nest_and_contain_their_points(num in 0i64..997, n in 1usize..24) {
        let sys = BetaSystem::golden();
        let x = QuadraticNumber::rational(BigRational::new(BigInt::from(num), BigInt::from(997)));
        let digits = sys.greedy_expansion(&x, n).unwrap();
        let outer = sys.cylinder_interval(&digits.as_slice()[..n - 1]).unwrap();
        let inner = sys.cylinder_interval(digits.as_slice()).unwrap();
        prop_assert!(outer.contains(&inner));
        let xf = num as f64 / 997.0;
        prop_assert!(inner.lower <= xf + 1e-12 && xf <= inner.upper + 1e-12);
        prop_assert!(inner.width() <= sys.beta_f64().powi(-(n as i32)) + 1e-12);
    }

    #[test]
    fn rational_beta_digits_are_admissible(num in 0i64..500, n in 1usize..30) {
        let sys = BetaSystem::parse("5/2").unwrap();
        let x = QuadraticNumber::rational(BigRational::new(BigInt::from(num), BigInt::from(500)));
        let digits = sys.greedy_expansion(&x, n).unwrap();
        prop_assert!(digits.iter().all(|&d| (d as usize) < sys.alphabet_size()));
        prop_assert!(sys.parry_admissible(digits.as_slice()));
    }
}
