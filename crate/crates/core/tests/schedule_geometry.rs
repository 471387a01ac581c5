use proptest::prelude::*;

use sardlab::rational::{int, rat, to_f64};
use sardlab::schedule::r_enclosure;
use sardlab::{AlphaSchedule, CellAddress, Construction, Dimension, GeometrySequences, Location, Rational};

fn seqs() -> GeometrySequences {
    GeometrySequences::new(AlphaSchedule::InverseSquare)
}

#[test]
fn recurrences_hold_exactly_through_64() {
    for schedule in [AlphaSchedule::InverseSquare, AlphaSchedule::Harmonic] {
        let g = GeometrySequences::new(schedule);
        for n in 1..=64 {
            let l = g.level(n).unwrap();
            let next = g.level(n + 1).unwrap();
            assert_eq!(l.shrink, &l.alpha * &l.side / int(4));
            assert_eq!(next.side, (Rational::from_integer(1.into()) - &l.alpha) * &l.side / int(2));
            let prev = if n == 1 { int(1) } else { g.partial(n - 1).unwrap() };
            assert_eq!(l.partial, prev * (int(1) - &l.alpha));
        }
    }
}

#[test]
fn closed_forms() {
    let g = seqs();
    assert_eq!(g.level(1).unwrap().side, int(1));
    assert_eq!(g.alpha(3).unwrap(), rat(1, 18));
    assert_eq!(g.side(3).unwrap(), rat(7, 64));
    assert_eq!(g.shrink(3).unwrap(), rat(7, 4608));
    assert_eq!(g.partial(3).unwrap(), rat(119, 288));
    let h = GeometrySequences::new(AlphaSchedule::Harmonic);
    for n in 1..=64 {
        assert_eq!(h.partial(n).unwrap(), rat(1, n as i64 + 1));
    }
}

#[test]
fn limit_product_enclosure() {
    let r = r_enclosure(&AlphaSchedule::InverseSquare, 1e-9).unwrap();
    assert!(r.width() <= 1e-9);
    // sin(pi/sqrt 2) / (pi/sqrt 2), computed independently
    let z = std::f64::consts::PI / 2f64.sqrt();
    let oracle = z.sin() / z;
    assert!(r.lo - 1e-12 <= oracle && oracle <= r.hi + 1e-12, "{r:?} vs {oracle}");
}

#[test]
fn families_nested_and_disjoint() {
    for dim in [Dimension::One, Dimension::Two] {
        let c = Construction::new(dim, AlphaSchedule::InverseSquare);
        let depth = if dim == Dimension::One { 7 } else { 4 };
        for n in 1..depth {
            let coarse = c.family_with_addresses(n).unwrap();
            let fine = c.family_with_addresses(n + 1).unwrap();
            assert_eq!(fine.len(), coarse.len() * dim.base() as usize);
            for (i, (_, a)) in fine.iter().enumerate() {
                for (_, b) in &fine[i + 1..] {
                    assert!(a.is_disjoint(b));
                }
            }
            for (addr, cell) in &fine {
                let parent = c.cell_of(&addr.prefix(addr.len() - 1)).unwrap();
                let margin = c.sequences().shrink(n).unwrap();
                // children sit inside the parent shrunk by s_n
                assert!(parent.shrunk(&margin).contains(cell.corner()));
                assert!(parent.shrunk(&margin).contains(&cell.upper()));
            }
        }
    }
}

#[test]
fn core_measure_matches_partial_product() {
    let g = seqs();
    let c2 = Construction::new(Dimension::Two, AlphaSchedule::InverseSquare);
    for n in 1..=5 {
        let total: Rational = c2.family(n + 1).unwrap().iter().map(|c| c.measure()).sum();
        let r = g.partial(n).unwrap();
        assert_eq!(total, &r * &r);
        assert_eq!(g.core_measure(Dimension::Two, n + 1).unwrap(), total);
    }
}

fn address_strategy(dim: Dimension, max_len: usize) -> impl Strategy<Value = CellAddress> {
    prop::collection::vec(0..dim.base(), 0..=max_len).prop_map(move |d| CellAddress::new(dim, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn midpoint_locates_to_its_address(addr in address_strategy(Dimension::Two, 10)) {
        let c = Construction::new(Dimension::Two, AlphaSchedule::InverseSquare);
        let cell = c.cell_of(&addr).unwrap();
        match c.locate(&cell.midpoint(), addr.len()).unwrap() {
            Location::Inside(found) => prop_assert_eq!(found, addr),
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn midpoint_locates_1d(addr in address_strategy(Dimension::One, 20)) {
        let c = Construction::new(Dimension::One, AlphaSchedule::Harmonic);
        let cell = c.cell_of(&addr).unwrap();
        let found = c.locate(&cell.midpoint(), addr.len()).unwrap();
        prop_assert_eq!(found, Location::Inside(addr));
    }

    #[test]
    fn cell_side_is_the_level_side(addr in address_strategy(Dimension::Two, 12)) {
        let c = Construction::new(Dimension::Two, AlphaSchedule::InverseSquare);
        let cell = c.cell_of(&addr).unwrap();
        prop_assert_eq!(cell.side(), &c.sequences().side(addr.len() + 1).unwrap());
        prop_assert!(to_f64(cell.side()) > 0.0);
    }
}
