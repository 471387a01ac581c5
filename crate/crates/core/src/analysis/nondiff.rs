//! Difference quotients of opposite sign at every level with digit `1`.

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{FunctionHandle, QuotientProbe};
use crate::geometry::{CellAddress, Dimension};
use crate::interval::RatInterval;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondiffOutcome {
    pub probe: QuotientProbe,
    pub opposite_signs: bool,
    /// Both quotient enclosures avoid `(-1, 1)`.
    pub outside_unit: bool,
    pub h_within_bound: bool,
    pub delta_at_least_digit_weight: bool,
    pub pass: bool,
}

impl NondiffOutcome {
    pub fn from_probe(probe: QuotientProbe) -> Self {
        let one = Rational::one();
        let (l, r) = (&probe.left_quotient, &probe.right_quotient);
        let opposite_signs =
            (l.lo.is_positive() && r.hi.is_negative()) || (l.hi.is_negative() && r.lo.is_positive());
        let outside = |q: &RatInterval| q.lo >= one || q.hi <= -one.clone();
        let outside_unit = outside(l) && outside(r);
        let h_within_bound = probe.h_within_bound();
        let delta_at_least_digit_weight = probe.delta_at_least_digit_weight();
        Self {
            pass: probe.conclusive() && opposite_signs && outside_unit && h_within_bound && delta_at_least_digit_weight,
            probe,
            opposite_signs,
            outside_unit,
            h_within_bound,
            delta_at_least_digit_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondiffSuite {
    pub outcomes: Vec<NondiffOutcome>,
    pub all_pass: bool,
}

/// Levels `n <= max_n` at which the address has digit `1`.
pub fn digit_one_levels(address: &CellAddress, max_n: usize) -> Vec<usize> {
    address
        .digits()
        .iter()
        .take(max_n)
        .enumerate()
        .filter(|(_, &d)| d == 1)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Runs `quotient_probe` on every `(address, n)`; the first failure is returned.
pub fn nondiff_suite(h: &FunctionHandle, probes: &[(CellAddress, usize)]) -> Result<NondiffSuite> {
    if h.dim() != Dimension::One {
        return Err(Error::WrongDimension(1));
    }
    let outcomes = probes
        .iter()
        .map(|(a, n)| h.quotient_probe(a, *n).map(NondiffOutcome::from_probe))
        .collect::<Result<Vec<_>>>()?;
    let all_pass = outcomes.iter().all(|o| o.pass);
    Ok(NondiffSuite { outcomes, all_pass })
}

/// Fixed test addresses: all ones, alternating, then seeded random strings.
pub fn designated_addresses(count: usize, len: usize) -> Vec<CellAddress> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = vec![vec![1u8; len], (0..len).map(|i| u8::from(i % 2 == 0)).collect::<Vec<u8>>()];
    while out.len() < count {
        out.push((0..len).map(|_| rng.random_range(0..2)).collect());
    }
    out.truncate(count);
    out.into_iter()
        .map(|d| CellAddress::new(Dimension::One, d).expect("binary digits"))
        .collect()
}

/// Every `(address, n)` with digit `1` at level `n <= max_n`.
pub fn designated_probes(count: usize, len: usize, max_n: usize) -> Vec<(CellAddress, usize)> {
    designated_addresses(count, len)
        .into_iter()
        .flat_map(|a| digit_one_levels(&a, max_n).into_iter().map(move |n| (a.clone(), n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::AlphaSchedule;

    fn f1(s: AlphaSchedule) -> FunctionHandle {
        FunctionHandle::new(Dimension::One, s).unwrap()
    }

    #[test]
    fn all_ones_pass_at_every_level() {
        let h = f1(AlphaSchedule::InverseSquare);
        let a = CellAddress::new(Dimension::One, vec![1; 20]).unwrap();
        let probes: Vec<_> = (1..=15).map(|n| (a.clone(), n)).collect();
        let suite = nondiff_suite(&h, &probes).unwrap();
        assert!(suite.all_pass);
        for o in &suite.outcomes {
            assert!(o.probe.left_quotient.lo >= o.probe.quotient_floor);
        }
    }

    #[test]
    fn alternating_digits_at_odd_levels() {
        let h = f1(AlphaSchedule::InverseSquare);
        let a = CellAddress::new(Dimension::One, (0..16).map(|i| u8::from(i % 2 == 0)).collect()).unwrap();
        assert_eq!(digit_one_levels(&a, 15), vec![1, 3, 5, 7, 9, 11, 13, 15]);
        let probes: Vec<_> = digit_one_levels(&a, 15).into_iter().map(|n| (a.clone(), n)).collect();
        assert!(nondiff_suite(&h, &probes).unwrap().all_pass);
    }

    #[test]
    fn harmonic_schedule_passes() {
        let h = f1(AlphaSchedule::Harmonic);
        assert!(nondiff_suite(&h, &designated_probes(6, 20, 12)).unwrap().all_pass);
    }

    #[test]
    fn errors_propagate() {
        let h = f1(AlphaSchedule::InverseSquare);
        let a = CellAddress::new(Dimension::One, vec![1, 0, 1]).unwrap();
        assert!(matches!(
            nondiff_suite(&h, &[(a.clone(), 1), (a, 2)]),
            Err(Error::DigitPrecondition { position: 2, .. })
        ));
    }

    #[test]
    fn designated_addresses_are_fixed() {
        let a = designated_addresses(20, 20);
        assert_eq!(a.len(), 20);
        assert_eq!(a, designated_addresses(20, 20));
        assert_eq!(a[0].digits(), &[1; 20]);
    }
}
