use proptest::prelude::*;

use sardlab::measure::{pushforward_certified, pushforward_partial, AddressSandwich};
use sardlab::rational::{inv_pow, rat};
use sardlab::{AlphaSchedule, Construction, Dimension, Rational};

fn cases() -> Vec<(Dimension, usize)> {
    let mut v: Vec<_> = (1..=8).map(|n| (Dimension::One, n)).collect();
    v.extend((1..=4).map(|n| (Dimension::Two, n)));
    v
}

#[test]
fn pushforward_atoms_are_equal_and_dyadic() {
    for schedule in [AlphaSchedule::InverseSquare, AlphaSchedule::Harmonic] {
        for (dim, n) in cases() {
            let c = Construction::new(dim, schedule.clone());
            let p = pushforward_partial(&c, n).unwrap();
            let beta = u32::from(dim.base());
            let atoms = p.measure.atoms();
            assert_eq!(atoms.len(), (beta as usize).pow(n as u32));
            let each = inv_pow(beta, n) * c.sequences().core_measure(dim, n + 1).unwrap();
            for (k, a) in atoms.iter().enumerate() {
                assert_eq!(a.location, rat(k as i64, 1) * inv_pow(beta, n));
                assert_eq!(a.mass, each);
            }
            assert_eq!(p.measure.ks_to_uniform().unwrap(), inv_pow(beta, n));
        }
    }
}

#[test]
fn harmonic_core_mass() {
    let c = Construction::new(Dimension::One, AlphaSchedule::Harmonic);
    let p = pushforward_partial(&c, 4).unwrap();
    assert_eq!(p.measure.total(), &rat(1, 5));
}

#[test]
fn stratified_enclosure_matches_closed_form() {
    for (dim, m) in [(Dimension::One, 6), (Dimension::Two, 3)] {
        let c = Construction::new(dim, AlphaSchedule::InverseSquare);
        let e = pushforward_certified(&c, m).unwrap();
        let s = AddressSandwich::new(dim, m);
        assert_eq!(e.total_weight(), Rational::from_integer(1.into()));
        assert_eq!(e.max_gap(), s.max_gap());
        assert_eq!(s.max_gap(), inv_pow(u32::from(dim.base()), m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sandwich_brackets_the_identity(num in 0i64..=1_000_000, m in 1usize..=30, two in any::<bool>()) {
        let dim = if two { Dimension::Two } else { Dimension::One };
        let s = AddressSandwich::new(dim, m);
        let t = rat(num, 1_000_000);
        let (lo, hi) = (s.lower_at(&t), s.upper_at(&t));
        prop_assert!(lo <= t && t <= hi);
        prop_assert!(&hi - &lo <= s.weight());
    }

    #[test]
    fn sandwich_brackets_partial_cdf(num in 0i64..=4096, n in 1usize..=6) {
        let c = Construction::new(Dimension::One, AlphaSchedule::InverseSquare);
        let p = pushforward_partial(&c, n).unwrap();
        let cdf = p.measure.normalized().unwrap().cdf();
        let s = AddressSandwich::new(Dimension::One, n);
        let t = rat(num, 4096);
        let v = cdf.at(&t);
        prop_assert!(s.lower_at(&t) <= v && v <= s.upper_at(&t));
    }
}
