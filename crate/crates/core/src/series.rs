//! Certified sums of level series `sum_n C q^n s_n^{-p}`.
//!
//! Every regularity bound of the construction has this shape. Terms are summed
//! in log space; once the term ratio is provably below one, the remainder is
//! bounded by a geometric tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::round_up;
use crate::schedule::AlphaSchedule;

/// Relative slack covering the log-space recurrence rounding (about `n eps`
/// after `n` levels, far below this for any level count reached here).
const ROUNDING_SLACK: f64 = 1e-9;

const MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    /// Sum of the explicitly evaluated terms.
    pub partial: f64,
    /// Bound on the remainder after the last evaluated term.
    pub tail: f64,
    /// Number of evaluated terms.
    pub terms: usize,
}

impl SeriesBound {
    /// Certified upper bound on the full series.
    pub fn upper(&self) -> f64 {
        round_up((self.partial + self.tail) * (1.0 + ROUNDING_SLACK))
    }

    pub fn relative_tail(&self) -> f64 {
        if self.partial > 0.0 {
            self.tail / self.partial
        } else {
            f64::INFINITY
        }
    }
}

/// `ln s_n` for `n = 1, 2, ...` via `ln a_{n+1} = ln a_n + ln(1 - alpha_n) - ln 2`.
struct LogShrink<'a> {
    schedule: &'a AlphaSchedule,
    n: u64,
    log_side: f64,
}

impl<'a> LogShrink<'a> {
    fn new(schedule: &'a AlphaSchedule) -> Self {
        Self {
            schedule,
            n: 1,
            log_side: 0.0,
        }
    }

    /// Returns `(n, ln s_n)` and advances.
    fn next(&mut self) -> Result<(u64, f64)> {
        let alpha = self.schedule.alpha_f64(self.n)?;
        let log_s = alpha.ln() + self.log_side - 4f64.ln();
        let out = (self.n, log_s);
        self.log_side += (-alpha).ln_1p() - 2f64.ln();
        self.n += 1;
        Ok(out)
    }
}

/// Certified `sum_{n >= start} exp(log_c) q^n s_n^{-p}` to relative tail `rel_tol`.
pub fn level_series(
    schedule: &AlphaSchedule,
    log_c: f64,
    q: f64,
    p: f64,
    start: u64,
    rel_tol: f64,
) -> Result<SeriesBound> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidTolerance(rel_tol));
    }
    // reject before summing: without a ratio bound no tail can be certified
    schedule.shrink_ratio_bound(start.max(1))?;
    let mut logs = LogShrink::new(schedule);
    let mut partial = 0.0f64;
    let mut terms = 0usize;
    loop {
        let (n, log_s) = logs.next()?;
        if n < start {
            continue;
        }
        let term = (log_c + n as f64 * q.ln() - p * log_s).exp();
        partial += term;
        terms += 1;
        // term_{m+1}/term_m = q (s_m/s_{m+1})^p = q (2 ratio_m)^p
        let rho = round_up(q * (2.0 * schedule.shrink_ratio_bound(n)?).powf(p));
        if rho < 1.0 {
            let tail = round_up(term * rho / (1.0 - rho));
            if tail <= rel_tol * partial || (partial == 0.0 && tail == 0.0) {
                return Ok(SeriesBound {
                    partial,
                    tail,
                    terms,
                });
            }
        }
        if terms >= MAX_TERMS {
            return Err(Error::Degenerate(format!(
                "series did not reach relative tail {rel_tol} within {MAX_TERMS} terms"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;
    use crate::schedule::GeometrySequences;

    #[test]
    fn matches_exact_partial_sums() {
        // sum_{n>=1} 4^-n / s_n, first 30 terms from the exact tables
        let sched = AlphaSchedule::InverseSquare;
        let g = GeometrySequences::new(sched.clone());
        let bound = level_series(&sched, 0.0, 0.25, 1.0, 1, 1e-13).unwrap();
        let exact: f64 = (1..=200usize)
            .map(|n| 0.25f64.powi(n as i32) / to_f64(&g.shrink(n).unwrap()))
            .sum();
        assert!(bound.upper() >= exact);
        assert!((bound.upper() - exact) / exact < 1e-8);
    }

    #[test]
    fn slow_series_still_converge() {
        let sched = AlphaSchedule::InverseSquare;
        let b = level_series(&sched, 0.0, 0.5, 0.99, 1, 1e-8).unwrap();
        assert!(b.upper().is_finite());
        assert!(b.relative_tail() <= 1e-8);
        assert!(b.terms > 300);
    }

    #[test]
    fn custom_schedule_rejected() {
        let c = AlphaSchedule::custom("c", |n| crate::rational::rat(1, 3 + n as i64));
        assert_eq!(level_series(&c, 0.0, 0.5, 0.5, 1, 1e-8), Err(Error::NoTailBound));
    }
}
