//! Vanishing gradient on the 2D core.
//!
//! `f_n` is constant on each level-`(n+1)` cell, so a central difference of `f`
//! inside such a cell only sees `f - f_n`. By the mean value theorem it equals
//! a partial derivative of `f - f_n` somewhere on the segment and is therefore
//! bounded by `gradient_tail_bound(n)`, up to evaluation and rounding error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::FunctionHandle;
use crate::geometry::{CellAddress, Dimension};
use crate::rational::to_f64;

/// Default step `4^-(n + STEP_OFFSET)`.
pub const STEP_OFFSET: i32 = 4;
/// Evaluation tolerance `4^-(n + TOL_OFFSET)`, clipped to the depth cap.
const TOL_OFFSET: i32 = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub address: CellAddress,
    pub n: usize,
    pub point: [f64; 2],
    /// `grad f_n` at the point; expected to be exactly zero.
    pub analytic_gradient: [f64; 2],
    pub analytic_zero: bool,
    pub step: f64,
    /// Central differences of `f`.
    pub fd_gradient: [f64; 2],
    /// Evaluation radius and rounding, divided by the step.
    pub fd_error: [f64; 2],
    pub tail_bound: f64,
    /// `tail_bound + fd_error`, per component.
    pub bound: [f64; 2],
    /// Step-halving extrapolation; informational only.
    pub richardson: [f64; 2],
    pub pass: bool,
}

fn central_difference(h: &FunctionHandle, x: [f64; 2], axis: usize, step: f64, tol: f64) -> Result<(f64, f64)> {
    let mut plus = x;
    let mut minus = x;
    plus[axis] += step;
    minus[axis] -= step;
    let vp = h.f_eval(&plus, tol)?;
    let vm = h.f_eval(&minus, tol)?;
    // the float spacing is exact for nearby points
    let width = plus[axis] - minus[axis];
    let rounding = 4.0 * f64::EPSILON * vp.value.abs().max(vm.value.abs()) / width;
    Ok(((vp.value - vm.value) / width, (vp.radius + vm.radius) / width + rounding))
}

/// Probe at the midpoint of the addressed cell, with `f_n` truncated at level `n`.
pub fn criticality_probe(h: &FunctionHandle, address: &CellAddress, n: usize, step: Option<f64>) -> Result<CriticalityReport> {
    if h.dim() != Dimension::Two || address.dim() != Dimension::Two {
        return Err(Error::WrongDimension(2));
    }
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if address.len() < n {
        return Err(Error::AddressTooShort {
            len: address.len(),
            needed: n,
        });
    }
    let c = h.construction();
    let mid = c.cell_of(address)?.midpoint();
    let point = [to_f64(&mid[0]), to_f64(&mid[1])];
    let g = h.f_partial_gradient(n, &point)?;
    // normalise -0.0
    let analytic_gradient = [g[0] + 0.0, g[1] + 0.0];
    let analytic_zero = analytic_gradient == [0.0, 0.0];

    let step = step.unwrap_or_else(|| 4f64.powi(-(n as i32 + STEP_OFFSET)));
    let plateau = c.cell_of(&address.prefix(n))?;
    let lo: Vec<f64> = plateau.corner().iter().map(to_f64).collect();
    let side = to_f64(plateau.side());
    let max_step = (0..2)
        .map(|i| (point[i] - lo[i]).min(lo[i] + side - point[i]))
        .fold(f64::INFINITY, f64::min);
    if !(step > 0.0) || step >= max_step {
        return Err(Error::StepTooLarge {
            h: step,
            depth: n,
            max_step,
        });
    }
    let tol = 4f64.powi(-(n as i32 + TOL_OFFSET)).max(h.tail(h.depth_cap()));
    let tail_bound = h.gradient_tail_bound(n)?;
    let mut fd_gradient = [0.0; 2];
    let mut fd_error = [0.0; 2];
    let mut bound = [0.0; 2];
    let mut richardson = [0.0; 2];
    for axis in 0..2 {
        let (d, err) = central_difference(h, point, axis, step, tol)?;
        let (d_half, _) = central_difference(h, point, axis, step / 2.0, tol)?;
        fd_gradient[axis] = d;
        fd_error[axis] = err;
        bound[axis] = tail_bound + err;
        richardson[axis] = (4.0 * d_half - d) / 3.0;
    }
    let pass = analytic_zero && (0..2).all(|i| fd_gradient[i].abs() <= bound[i]);
    Ok(CriticalityReport {
        address: address.clone(),
        n,
        point,
        analytic_gradient,
        analytic_zero,
        step,
        fd_gradient,
        fd_error,
        tail_bound,
        bound,
        richardson,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::AlphaSchedule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> FunctionHandle {
        FunctionHandle::new(Dimension::Two, AlphaSchedule::InverseSquare).unwrap()
    }

    #[test]
    fn zero_address_depth_six() {
        let h = f2();
        let addr = CellAddress::new(Dimension::Two, vec![0; 6]).unwrap();
        let r = criticality_probe(&h, &addr, 6, None).unwrap();
        assert!(r.analytic_zero && r.pass, "{r:?}");
    }

    #[test]
    fn fd_within_bound_at_depth_ten() {
        let h = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let digits = (0..10).map(|_| rng.random_range(0..4)).collect();
            let addr = CellAddress::new(Dimension::Two, digits).unwrap();
            let r = criticality_probe(&h, &addr, 10, None).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.fd_error[0] < r.tail_bound);
        }
    }

    #[test]
    fn step_leaving_the_cell_is_reported() {
        let h = f2();
        let addr = CellAddress::new(Dimension::Two, vec![1; 4]).unwrap();
        assert!(matches!(
            criticality_probe(&h, &addr, 4, Some(0.05)),
            Err(Error::StepTooLarge { depth: 4, .. })
        ));
    }

    #[test]
    fn preconditions() {
        let h = f2();
        let addr = CellAddress::new(Dimension::Two, vec![1; 3]).unwrap();
        assert_eq!(
            criticality_probe(&h, &addr, 4, None).unwrap_err(),
            Error::AddressTooShort { len: 3, needed: 4 }
        );
        let one = FunctionHandle::new(Dimension::One, AlphaSchedule::InverseSquare).unwrap();
        assert_eq!(criticality_probe(&one, &addr, 2, None).unwrap_err(), Error::WrongDimension(2));
    }
}
