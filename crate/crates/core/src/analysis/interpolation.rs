//! The interpolation inequality `[g]_a <= 2 |g|^(1-a) |grad g|^a` on a convex cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::FunctionHandle;
use crate::geometry::{CellAddress, Dimension};
use crate::plateau::PlateauProfile;
use crate::rational::to_f64;

/// Relative allowance for rounding in the sampled quotients.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub alpha: f64,
    pub samples: usize,
    /// Largest sampled `|g(x) - g(y)| / |x - y|^a`.
    pub seminorm: f64,
    pub sup_value: f64,
    pub sup_gradient: f64,
    /// `2 sup_value^(1-a) sup_gradient^a`.
    pub bound: f64,
    /// `bound - seminorm`.
    pub margin: f64,
    pub pass: bool,
}

/// Checks the inequality on samples `(point, value)` given a bound on `|grad g|`.
///
/// `sup |g|` is taken over the samples, which is enough: the pairs are drawn
/// from the same samples. The gradient bound must hold on the whole cell, since
/// a pair can straddle a region no sample resolves.
pub fn interpolation_check_samples(samples: &[(Vec<f64>, f64)], sup_gradient: f64, alpha: f64) -> Result<InterpolationReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidExponent(alpha));
    }
    if samples.len() < 2 {
        return Err(Error::Degenerate("need at least two samples".into()));
    }
    if !(sup_gradient >= 0.0 && sup_gradient.is_finite()) {
        return Err(Error::Degenerate(format!("gradient bound {sup_gradient} is not finite")));
    }
    let sup_value = samples.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let mut seminorm = 0.0f64;
    for (i, (x, fx)) in samples.iter().enumerate() {
        for (y, fy) in &samples[i + 1..] {
            let d = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d > 0.0 {
                seminorm = seminorm.max((fx - fy).abs() / d.powf(alpha));
            }
        }
    }
    let bound = 2.0 * sup_value.powf(1.0 - alpha) * sup_gradient.powf(alpha);
    let margin = bound - seminorm;
    Ok(InterpolationReport {
        alpha,
        samples: samples.len(),
        seminorm,
        sup_value,
        sup_gradient,
        bound,
        margin,
        pass: seminorm <= bound * (1.0 + ROUNDING_SLACK),
    })
}

/// Bound on `|grad f_n|` over the cell with the given address.
///
/// Levels up to the address length are constant there. The transition zones of
/// different levels are disjoint, so the sup is a maximum over levels of
/// `beta^-m (beta - 1) |grad(psi psi)|`, with `|grad(psi psi)| <= sqrt(d) G1 / s_m`.
pub fn gradient_sup(h: &FunctionHandle, n: usize, address: &CellAddress) -> Result<f64> {
    let dim = h.dim();
    let seq = h.construction().sequences();
    let beta = f64::from(dim.base());
    let g1 = PlateauProfile.g1_upper();
    let axes = (dim.get() as f64).sqrt();
    let mut sup = 0.0f64;
    for m in address.len() + 1..=n {
        let s = to_f64(&seq.shrink(m)?);
        sup = sup.max(beta.powi(-(m as i32)) * f64::from(dim.max_digit()) * axes * g1 / s);
    }
    Ok(sup * (1.0 + 1e-12))
}

/// Interpolation check for `f_n` on an addressed cell with `res` samples per axis.
pub fn interpolation_check(
    h: &FunctionHandle,
    n: usize,
    address: &CellAddress,
    alpha: f64,
    res: usize,
) -> Result<InterpolationReport> {
    if address.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim().get(),
            actual: address.dim().get(),
        });
    }
    if res < 2 {
        return Err(Error::Degenerate(format!("grid resolution {res} below 2")));
    }
    let (corner, side) = h.float_cell(address.digits())?;
    if !(side > 0.0) {
        return Err(Error::Degenerate("cell has zero side".into()));
    }
    let coord = |c: f64, i: usize| c + side * (i as f64 + 0.5) / res as f64;
    let points: Vec<Vec<f64>> = match h.dim() {
        Dimension::One => (0..res).map(|i| vec![coord(corner[0], i)]).collect(),
        Dimension::Two => (0..res)
            .flat_map(|j| (0..res).map(move |i| (i, j)))
            .map(|(i, j)| vec![coord(corner[0], i), coord(corner[1], j)])
            .collect(),
    };
    let samples = points
        .into_iter()
        .map(|p| {
            let v = h.f_partial_value(n, &p)?;
            Ok((p, v))
        })
        .collect::<Result<Vec<_>>>()?;
    interpolation_check_samples(&samples, gradient_sup(h, n, address)?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::AlphaSchedule;

    fn f2() -> FunctionHandle {
        FunctionHandle::new(Dimension::Two, AlphaSchedule::InverseSquare).unwrap()
    }

    #[test]
    fn f2_on_unit_square() {
        let h = f2();
        let r = interpolation_check(&h, 2, &CellAddress::root(Dimension::Two), 0.5, 24).unwrap();
        assert!(r.pass && r.margin > 0.0 && r.seminorm > 0.0);
    }

    #[test]
    fn f4_on_level_two_cell() {
        let h = f2();
        let addr = CellAddress::new(Dimension::Two, vec![2]).unwrap();
        let r = interpolation_check(&h, 4, &addr, 0.9, 24).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn constant_passes_with_zero_seminorm() {
        let samples: Vec<_> = (0..10).map(|i| (vec![i as f64 / 10.0], 0.5)).collect();
        let r = interpolation_check_samples(&samples, 0.0, 0.5).unwrap();
        assert!(r.pass);
        assert_eq!(r.seminorm, 0.0);
    }

    #[test]
    fn gradient_sup_dominates_sampled_gradient() {
        let h = f2();
        let addr = CellAddress::new(Dimension::Two, vec![0, 3]).unwrap();
        let bound = gradient_sup(&h, 6, &addr).unwrap();
        let (corner, side) = h.float_cell(addr.digits()).unwrap();
        let mut seen = 0.0f64;
        for j in 0..200 {
            for i in 0..200 {
                let p = [corner[0] + side * i as f64 / 199.0, corner[1] + side * j as f64 / 199.0];
                let g = h.f_partial_gradient(6, &p).unwrap();
                seen = seen.max(g[0].hypot(g[1]));
            }
        }
        assert!(seen > 0.0 && seen <= bound);
        // only levels below the cell contribute
        let one = FunctionHandle::new(Dimension::One, AlphaSchedule::InverseSquare).unwrap();
        let deep = CellAddress::new(Dimension::One, vec![1; 5]).unwrap();
        assert_eq!(gradient_sup(&one, 5, &deep).unwrap(), 0.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(interpolation_check_samples(&[(vec![0.0], 1.0)], 1.0, 0.5).is_err());
        let h = f2();
        assert_eq!(
            interpolation_check(&h, 2, &CellAddress::root(Dimension::Two), 1.0, 8),
            Err(Error::InvalidExponent(1.0))
        );
    }
}
