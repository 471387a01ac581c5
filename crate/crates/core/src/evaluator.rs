//! Evaluation of the step functions `h_n`, the partial sums `f_n` and the limits
//!
//! ```text
//! 1D: f = sum_n 2^-n h_n,    2D: f = sum_n 4^-n h_n.
//! ```
//!
//! The level cells are disjoint, so at a point `x` only one cell per level can
//! carry a nonzero term. A single walk down the levels finds, at each level, the
//! half/quadrant containing `x` and its offset from that quadrant's centre. While
//! `x` sits on the plateau of the quadrant it is inside the child cell and the
//! term is exactly the digit; the first level where it is not is the only
//! transition term, and every deeper term vanishes.
//!
//! Walks run in floating point with a guard band around every comparison. A
//! comparison falling inside the guard restarts the walk in exact arithmetic.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{quadrant_digit, quadrant_offset, CellAddress, Construction, Dimension};
use crate::interval::RatInterval;
use crate::plateau::{BumpSpec, PlateauProfile};
use crate::rational::{from_f64, int, inv_pow, serde_rational, to_f64, Rational};
use crate::schedule::AlphaSchedule;
use crate::series::level_series;

/// Default depth caps. Digit prefix sums stay exact in f64 below 2^-53.
pub const DEPTH_CAP_1D: usize = 48;
pub const DEPTH_CAP_2D: usize = 24;
/// Largest depth caps accepted by `with_depth_cap`.
pub const MAX_DEPTH_1D: usize = 52;
pub const MAX_DEPTH_2D: usize = 26;

/// Absolute error budget for local coordinates in the float walk. Each level
/// subtracts constants bounded by the cell side, and the sides sum to below 2.
const GUARD: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone)]
struct LevelConsts<T> {
    half: T,
    quarter: T,
    /// Plateau half-width of a quadrant bump, `a/4 - s`.
    inner: T,
    shrink: T,
}

trait Coord: Clone {
    fn minus(&self, other: &Self) -> Self;
    fn magnitude(&self) -> Self;
    fn as_f64(&self) -> f64;
}

impl Coord for f64 {
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Coord for Rational {
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn as_f64(&self) -> f64 {
        to_f64(self)
    }
}

fn cmp_guarded(a: &f64, b: &f64) -> Option<Ordering> {
    if (a - b).abs() <= GUARD {
        None
    } else {
        a.partial_cmp(b)
    }
}

fn cmp_exact(a: &Rational, b: &Rational) -> Option<Ordering> {
    Some(a.cmp(b))
}

/// How a walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WalkEnd {
    /// The point left the child cell at the last recorded level; offsets are
    /// taken from the centre of the quadrant given by the last digit.
    Exit { offsets: [f64; 2] },
    /// The point lies in a cell at level `depth + 1`.
    Deep,
}

/// Digits of the cells containing a point, and how the walk ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    pub digits: Vec<u8>,
    pub end: WalkEnd,
}

impl Walk {
    /// Levels on which the point sits on a plateau of value `digit`.
    pub fn plateau_levels(&self) -> usize {
        match self.end {
            WalkEnd::Exit { .. } => self.digits.len() - 1,
            WalkEnd::Deep => self.digits.len(),
        }
    }

    /// Level of the single transition term, if the walk ended in one.
    pub fn exit_level(&self) -> Option<usize> {
        match self.end {
            WalkEnd::Exit { .. } => Some(self.digits.len()),
            WalkEnd::Deep => None,
        }
    }
}

fn walk_generic<T: Coord>(
    dim: Dimension,
    levels: &[LevelConsts<T>],
    mut u: Vec<T>,
    depth: usize,
    cmp: impl Fn(&T, &T) -> Option<Ordering>,
) -> Option<Walk> {
    let d = dim.get();
    let mut digits = Vec::with_capacity(depth);
    for c in &levels[..depth] {
        let mut upper = [false; 2];
        let mut offsets = [0.0; 2];
        let mut inside = true;
        let mut next = Vec::with_capacity(d);
        for i in 0..d {
            upper[i] = cmp(&u[i], &c.half)? != Ordering::Less;
            let local = if upper[i] { u[i].minus(&c.half) } else { u[i].clone() };
            let off = local.minus(&c.quarter);
            offsets[i] = off.as_f64();
            inside &= cmp(&off.magnitude(), &c.inner)? != Ordering::Greater;
            next.push(local.minus(&c.shrink));
        }
        digits.push(quadrant_digit(dim, upper[0], upper[1]));
        if !inside {
            return Some(Walk {
                digits,
                end: WalkEnd::Exit { offsets },
            });
        }
        u = next;
    }
    Some(Walk {
        digits,
        end: WalkEnd::Deep,
    })
}

/// Either a value or a gradient, depending on the requested order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalOutput {
    Value(f64),
    Gradient([f64; 2]),
}

impl EvalOutput {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Gradient(_) => None,
        }
    }

    pub fn gradient(&self) -> Option<[f64; 2]> {
        match self {
            Self::Value(_) => None,
            Self::Gradient(g) => Some(*g),
        }
    }
}

/// Value with a certified bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: f64,
    /// `|f(x) - value| <= radius`; zero when the point leaves the core.
    pub radius: f64,
    /// Number of levels summed.
    pub n_used: usize,
}

impl CertifiedValue {
    pub fn lo(&self) -> f64 {
        self.value - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.value + self.radius
    }
}

/// Evaluation at an exact rational point: the plateau prefix is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalValue {
    #[serde(with = "serde_rational")]
    pub prefix: Rational,
    /// The single transition term, if any.
    pub transition: Option<f64>,
    #[serde(with = "serde_rational")]
    pub radius: Rational,
    pub n_used: usize,
}

impl RationalValue {
    /// `f(x)` as an exact rational, when it is one.
    pub fn exact(&self) -> Option<Rational> {
        match self.transition {
            None if self.radius.is_zero() => Some(self.prefix.clone()),
            Some(t) if t == 0.0 => Some(self.prefix.clone()),
            _ => None,
        }
    }
}

/// Digit value of a core address with its tail radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreValue {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub radius: Rational,
}

impl CoreValue {
    pub fn contains(&self, v: &Rational) -> bool {
        self.value <= *v && *v <= &self.value + &self.radius
    }
}

/// Finite-difference quotients of the 1D function at a core point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientProbe {
    pub address: CellAddress,
    pub n: usize,
    /// Midpoint `c` and right endpoint `b` of the level-`n` ancestor.
    #[serde(with = "serde_rational")]
    pub left_point: Rational,
    #[serde(with = "serde_rational")]
    pub right_point: Rational,
    /// `f(c) = f(b)`, the digit prefix below level `n`.
    #[serde(with = "serde_rational")]
    pub probe_value: Rational,
    /// Enclosure of the base point from its deep cell.
    pub x0: RatInterval,
    pub h_left: RatInterval,
    pub h_right: RatInterval,
    pub delta_f: RatInterval,
    pub left_quotient: RatInterval,
    pub right_quotient: RatInterval,
    /// `(2 - alpha_n) a_n / 4`.
    #[serde(with = "serde_rational")]
    pub h_bound: Rational,
    /// `1 / r_{n-1}`.
    #[serde(with = "serde_rational")]
    pub quotient_floor: Rational,
}

impl QuotientProbe {
    /// Left quotient at least `+1`, right quotient at most `-1`.
    pub fn conclusive(&self) -> bool {
        self.left_quotient.lo >= Rational::one() && self.right_quotient.hi <= -Rational::one()
    }

    pub fn h_within_bound(&self) -> bool {
        self.h_left.abs_max() <= self.h_bound && self.h_right.abs_max() <= self.h_bound
    }

    pub fn delta_at_least_digit_weight(&self) -> bool {
        self.delta_f.abs_min() >= inv_pow(2, self.n)
    }
}

/// One row of an evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub point: Vec<f64>,
    pub value: f64,
    pub radius: f64,
    pub n_used: usize,
}

/// `f` for one dimension and schedule, with precomputed level constants.
#[derive(Debug, Clone)]
pub struct FunctionHandle {
    construction: Construction,
    depth_cap: usize,
    float_levels: Vec<LevelConsts<f64>>,
    exact_levels: Vec<LevelConsts<Rational>>,
    bumps: Vec<BumpSpec>,
}

impl FunctionHandle {
    pub fn new(dim: Dimension, schedule: AlphaSchedule) -> Result<Self> {
        Self::from_construction(Construction::new(dim, schedule))
    }

    pub fn from_construction(construction: Construction) -> Result<Self> {
        let cap = match construction.dim() {
            Dimension::One => DEPTH_CAP_1D,
            Dimension::Two => DEPTH_CAP_2D,
        };
        Self::with_depth_cap(construction, cap)
    }

    pub fn with_depth_cap(construction: Construction, depth_cap: usize) -> Result<Self> {
        let max = match construction.dim() {
            Dimension::One => MAX_DEPTH_1D,
            Dimension::Two => MAX_DEPTH_2D,
        };
        if depth_cap == 0 {
            return Err(Error::ZeroLevel);
        }
        if depth_cap > max {
            return Err(Error::DepthCap {
                requested: depth_cap,
                cap: max,
            });
        }
        let levels = construction.sequences().levels(depth_cap)?;
        let mut float_levels = Vec::with_capacity(depth_cap);
        let mut exact_levels = Vec::with_capacity(depth_cap);
        let mut bumps = Vec::with_capacity(depth_cap);
        for l in &levels {
            let half = &l.side / int(2);
            let quarter = &l.side / int(4);
            let inner = &quarter - &l.shrink;
            bumps.push(BumpSpec::from_rationals(&quarter, &inner)?);
            float_levels.push(LevelConsts {
                half: to_f64(&half),
                quarter: to_f64(&quarter),
                inner: to_f64(&inner),
                shrink: to_f64(&l.shrink),
            });
            exact_levels.push(LevelConsts {
                half,
                quarter,
                inner,
                shrink: l.shrink.clone(),
            });
        }
        Ok(Self {
            construction,
            depth_cap,
            float_levels,
            exact_levels,
            bumps,
        })
    }

    pub fn dim(&self) -> Dimension {
        self.construction.dim()
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn schedule(&self) -> &AlphaSchedule {
        self.construction.sequences().schedule()
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    fn base(&self) -> f64 {
        f64::from(self.dim().base())
    }

    /// `beta^-n`, the sup of `|f - f_n|`.
    pub fn tail(&self, n: usize) -> f64 {
        self.base().powi(-(n as i32))
    }

    pub fn tail_exact(&self, n: usize) -> Rational {
        inv_pow(u32::from(self.dim().base()), n)
    }

    fn check_depth(&self, n: usize) -> Result<()> {
        if n > self.depth_cap {
            return Err(Error::DepthCap {
                requested: n,
                cap: self.depth_cap,
            });
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim().get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().get(),
                actual: x.len(),
            });
        }
        if !x.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::PointOutsideUnitCell);
        }
        Ok(())
    }

    /// Corner and side of the addressed cell in floating point, for sampling.
    pub fn float_cell(&self, digits: &[u8]) -> Result<(Vec<f64>, f64)> {
        self.check_depth(digits.len() + 1)?;
        let mut corner = vec![0.0; self.dim().get()];
        for (c, &d) in self.float_levels.iter().zip(digits) {
            let off = quadrant_offset(self.dim(), d);
            for (x, o) in corner.iter_mut().zip(off) {
                *x += f64::from(o) * c.half + c.shrink;
            }
        }
        Ok((corner, 2.0 * self.float_levels[digits.len()].half))
    }

    /// `s_n` and `a_n` in floating point.
    pub fn float_level(&self, n: usize) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        self.check_depth(n)?;
        let c = &self.float_levels[n - 1];
        Ok((c.shrink, 2.0 * c.half))
    }

    /// Walk `depth` levels from a float point, exactly when the guard is hit.
    pub fn walk(&self, x: &[f64], depth: usize) -> Result<Walk> {
        self.check_point(x)?;
        self.check_depth(depth)?;
        if let Some(w) = walk_generic(self.dim(), &self.float_levels, x.to_vec(), depth, cmp_guarded) {
            return Ok(w);
        }
        let exact = x
            .iter()
            .map(|&v| from_f64(v).ok_or(Error::PointOutsideUnitCell))
            .collect::<Result<Vec<_>>>()?;
        self.walk_exact(&exact, depth)
    }

    pub fn walk_exact(&self, x: &[Rational], depth: usize) -> Result<Walk> {
        if x.len() != self.dim().get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().get(),
                actual: x.len(),
            });
        }
        if !x.iter().all(|v| !v.is_negative() && *v <= Rational::one()) {
            return Err(Error::PointOutsideUnitCell);
        }
        self.check_depth(depth)?;
        Ok(walk_generic(self.dim(), &self.exact_levels, x.to_vec(), depth, cmp_exact)
            .expect("exact comparisons always decide"))
    }

    /// Product of quadrant bumps at the exit level (the transition weight).
    fn exit_weight(&self, level: usize, offsets: &[f64; 2]) -> f64 {
        let b = &self.bumps[level - 1];
        match self.dim() {
            Dimension::One => b.value(offsets[0]),
            Dimension::Two => b.value(offsets[0]) * b.value(offsets[1]),
        }
    }

    fn exit_gradient(&self, level: usize, offsets: &[f64; 2]) -> [f64; 2] {
        let b = &self.bumps[level - 1];
        match self.dim() {
            Dimension::One => [b.d1(offsets[0]), 0.0],
            Dimension::Two => [
                b.d1(offsets[0]) * b.value(offsets[1]),
                b.value(offsets[0]) * b.d1(offsets[1]),
            ],
        }
    }

    /// `h_m` read off a walk of depth at least `m`.
    fn h_from_walk(&self, walk: &Walk, m: usize) -> f64 {
        if m > walk.digits.len() {
            return 0.0;
        }
        let digit = f64::from(walk.digits[m - 1]);
        match (walk.end, walk.exit_level()) {
            (WalkEnd::Exit { offsets }, Some(e)) if e == m => digit * self.exit_weight(m, &offsets),
            _ => digit,
        }
    }

    fn h_gradient_from_walk(&self, walk: &Walk, m: usize) -> [f64; 2] {
        match walk.end {
            WalkEnd::Exit { offsets } if walk.digits.len() == m => {
                let digit = f64::from(walk.digits[m - 1]);
                let g = self.exit_gradient(m, &offsets);
                [digit * g[0], digit * g[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    fn partial_from_walk(&self, walk: &Walk, n: usize) -> f64 {
        (1..=n.min(walk.digits.len()))
            .map(|m| self.h_from_walk(walk, m) * self.tail(m))
            .sum()
    }

    fn partial_gradient_from_walk(&self, walk: &Walk, n: usize) -> [f64; 2] {
        match walk.exit_level() {
            Some(e) if e <= n => {
                let g = self.h_gradient_from_walk(walk, e);
                let w = self.tail(e);
                [w * g[0], w * g[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    fn require_order(&self, order: u8) -> Result<()> {
        match (order, self.dim()) {
            (0, _) | (1, Dimension::Two) => Ok(()),
            (1, Dimension::One) => Err(Error::WrongDimension(2)),
            (k, _) => Err(Error::UnsupportedOrder(k)),
        }
    }

    /// `h_n(x)` (order 0) or its gradient (order 1, 2D only).
    pub fn h_eval(&self, n: usize, x: &[f64], order: u8) -> Result<EvalOutput> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        self.require_order(order)?;
        let walk = self.walk(x, n)?;
        Ok(if order == 0 {
            EvalOutput::Value(self.h_from_walk(&walk, n))
        } else {
            EvalOutput::Gradient(self.h_gradient_from_walk(&walk, n))
        })
    }

    /// `h_n'(x)` in 1D.
    pub fn h_derivative_1d(&self, n: usize, x: f64) -> Result<f64> {
        if self.dim() != Dimension::One {
            return Err(Error::WrongDimension(1));
        }
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let walk = self.walk(&[x], n)?;
        Ok(self.h_gradient_from_walk(&walk, n)[0])
    }

    /// `f_n(x)` (order 0) or `grad f_n(x)` (order 1, 2D only).
    pub fn f_partial(&self, n: usize, x: &[f64], order: u8) -> Result<EvalOutput> {
        self.require_order(order)?;
        let walk = self.walk(x, n)?;
        Ok(if order == 0 {
            EvalOutput::Value(self.partial_from_walk(&walk, n))
        } else {
            EvalOutput::Gradient(self.partial_gradient_from_walk(&walk, n))
        })
    }

    pub fn f_partial_value(&self, n: usize, x: &[f64]) -> Result<f64> {
        let walk = self.walk(x, n)?;
        Ok(self.partial_from_walk(&walk, n))
    }

    pub fn f_partial_gradient(&self, n: usize, x: &[f64]) -> Result<[f64; 2]> {
        self.require_order(1)?;
        let walk = self.walk(x, n)?;
        Ok(self.partial_gradient_from_walk(&walk, n))
    }

    /// `1D f_n'(x)`.
    pub fn f_partial_derivative_1d(&self, n: usize, x: f64) -> Result<f64> {
        if self.dim() != Dimension::One {
            return Err(Error::WrongDimension(1));
        }
        let walk = self.walk(&[x], n)?;
        Ok(self.partial_gradient_from_walk(&walk, n)[0])
    }

    /// Smallest `n` with `tail(n) <= tol`.
    pub fn depth_for(&self, tol: f64) -> Result<usize> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidTolerance(tol));
        }
        let mut n = 1;
        while self.tail(n) > tol {
            n += 1;
            if n > self.depth_cap {
                return Err(Error::ToleranceBelowResolution {
                    tol,
                    resolution: self.tail(self.depth_cap),
                    cap: self.depth_cap,
                });
            }
        }
        Ok(n)
    }

    /// `f(x)` within `tol`. Off the core the sum is finite and the radius is 0.
    pub fn f_eval(&self, x: &[f64], tol: f64) -> Result<CertifiedValue> {
        let n = self.depth_for(tol)?;
        let walk = self.walk(x, n)?;
        Ok(self.certified_from_walk(&walk, n))
    }

    fn certified_from_walk(&self, walk: &Walk, n: usize) -> CertifiedValue {
        match walk.end {
            WalkEnd::Exit { .. } => CertifiedValue {
                value: self.partial_from_walk(walk, n),
                radius: 0.0,
                n_used: walk.digits.len(),
            },
            WalkEnd::Deep => CertifiedValue {
                value: self.partial_from_walk(walk, n),
                radius: self.tail(n),
                n_used: n,
            },
        }
    }

    /// `f(x)` at a rational point, with the plateau prefix kept exact.
    pub fn f_eval_rational(&self, x: &[Rational], tol: f64) -> Result<RationalValue> {
        let n = self.depth_for(tol)?;
        let walk = self.walk_exact(x, n)?;
        let base = u32::from(self.dim().base());
        let prefix: Rational = (1..=walk.plateau_levels())
            .map(|m| int(i64::from(walk.digits[m - 1])) * inv_pow(base, m))
            .sum();
        Ok(match walk.end {
            WalkEnd::Exit { .. } => {
                let m = walk.digits.len();
                RationalValue {
                    prefix,
                    transition: Some(self.h_from_walk(&walk, m) * self.tail(m)),
                    radius: Rational::zero(),
                    n_used: m,
                }
            }
            WalkEnd::Deep => RationalValue {
                prefix,
                transition: None,
                radius: self.tail_exact(n),
                n_used: n,
            },
        })
    }

    /// `f_n` at a rational point where it is an exact plateau value.
    pub fn f_partial_rational(&self, n: usize, x: &[Rational]) -> Result<Option<Rational>> {
        let walk = self.walk_exact(x, n)?;
        let base = u32::from(self.dim().base());
        let plateau: Rational = (1..=walk.plateau_levels().min(n))
            .map(|m| int(i64::from(walk.digits[m - 1])) * inv_pow(base, m))
            .sum();
        match walk.exit_level() {
            Some(e) if e <= n => {
                if self.h_from_walk(&walk, e) == 0.0 {
                    Ok(Some(plateau))
                } else {
                    Ok(None)
                }
            }
            _ => Ok(Some(plateau)),
        }
    }

    /// `f` on the core cells with this address: `[v, v + beta^-m]`.
    pub fn f_core_exact(&self, address: &CellAddress) -> Result<CoreValue> {
        if address.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim().get(),
                actual: address.dim().get(),
            });
        }
        Ok(CoreValue {
            value: address.value(),
            radius: self.tail_exact(address.len()),
        })
    }

    /// Certified bound on `sup |grad f - grad f_n|`, summing the componentwise
    /// sup norms `4^-m 3 G1 / s_m` over `m > n`.
    pub fn gradient_tail_bound(&self, n: usize) -> Result<f64> {
        if self.dim() != Dimension::Two {
            return Err(Error::WrongDimension(2));
        }
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let g1 = PlateauProfile.g1_upper();
        let sum = level_series(self.schedule(), (3.0 * g1).ln(), 0.25, 1.0, n as u64 + 1, 1e-12)?;
        Ok(sum.upper())
    }

    /// Quotients `(f(x0 + h) - f(x0)) / h` of the 1D function at a core point
    /// named by `address`, with `x0 + h` the midpoint and right endpoint of the
    /// level-`n` ancestor.
    pub fn quotient_probe(&self, address: &CellAddress, n: usize) -> Result<QuotientProbe> {
        if self.dim() != Dimension::One || address.dim() != Dimension::One {
            return Err(Error::WrongDimension(1));
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
        let digit = address.digits()[n - 1];
        if digit != 1 {
            return Err(Error::DigitPrecondition {
                position: n,
                digit,
                expected: "1",
            });
        }
        let c = &self.construction;
        let ancestor = c.cell_of(&address.prefix(n - 1))?;
        let left = ancestor.midpoint()[0].clone();
        let right = ancestor.upper()[0].clone();
        let deep = c.cell_of(address)?;
        let x0 = RatInterval::new(deep.corner()[0].clone(), deep.upper()[0].clone());

        // f(c) and f(b) from the evaluator, checked against the digit prefix
        let probe_value = address.prefix(n - 1).value();
        let depth = (n + 1).min(self.depth_cap);
        for p in [&left, &right] {
            let v = self.f_eval_rational(std::slice::from_ref(p), self.tail(depth))?;
            if v.exact().as_ref() != Some(&probe_value) {
                return Err(Error::Degenerate(format!(
                    "probe point {p} does not carry the digit prefix {probe_value}"
                )));
            }
        }
        let core = self.f_core_exact(address)?;
        let fx0 = RatInterval::new(core.value.clone(), &core.value + &core.radius);
        let fc = RatInterval::new(probe_value.clone(), probe_value.clone());
        let delta_f = fc.sub(&fx0);
        let h_left = RatInterval::new(left.clone(), left.clone()).sub(&x0);
        let h_right = RatInterval::new(right.clone(), right.clone()).sub(&x0);
        let needed = || Error::Inconclusive {
            reason: "offset enclosure contains zero".into(),
            needed_depth: address.len() + 4,
        };
        let left_quotient = delta_f.div(&h_left).ok_or_else(needed)?;
        let right_quotient = delta_f.div(&h_right).ok_or_else(needed)?;
        let level = c.sequences().level(n)?;
        let h_bound = (int(2) - &level.alpha) * &level.side / int(4);
        let quotient_floor = Rational::one() / c.sequences().partial(n - 1)?;
        let probe = QuotientProbe {
            address: address.clone(),
            n,
            left_point: left,
            right_point: right,
            probe_value,
            x0,
            h_left,
            h_right,
            delta_f,
            left_quotient,
            right_quotient,
            h_bound,
            quotient_floor,
        };
        if !probe.conclusive() {
            return Err(Error::Inconclusive {
                reason: "quotient enclosures straddle +-1".into(),
                needed_depth: address.len() + 4,
            });
        }
        Ok(probe)
    }

    /// Values of `f_n` on exact sample points of `Z_1..Z_n` and of every
    /// level-`n+1` cell. All are multiples of `beta^-n`.
    pub fn critical_values_off_core(&self, n: usize) -> Result<BTreeSet<Rational>> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        self.check_depth(n)?;
        let c = &self.construction;
        let mut points: Vec<Vec<Rational>> = Vec::new();
        for m in 1..=n {
            points.extend(c.z_set(m)?.iter().map(|z| z.sample_point()));
        }
        points.extend(c.family(n + 1)?.iter().map(|cell| cell.midpoint()));
        let mut values = BTreeSet::new();
        for p in &points {
            let v = self.f_partial_rational(n, p)?.ok_or_else(|| {
                Error::Degenerate("sample point fell in a transition zone".into())
            })?;
            values.insert(v);
        }
        Ok(values)
    }

    /// Evaluation grid on `[0,1]^dim` at cell centres, `res` points per axis.
    pub fn grid(&self, res: usize, tol: f64) -> Result<Vec<GridRow>> {
        let n = self.depth_for(tol)?;
        if res == 0 {
            return Err(Error::Degenerate("grid resolution must be positive".into()));
        }
        let coord = |i: usize| (i as f64 + 0.5) / res as f64;
        let points: Vec<Vec<f64>> = match self.dim() {
            Dimension::One => (0..res).map(|i| vec![coord(i)]).collect(),
            Dimension::Two => (0..res)
                .flat_map(|j| (0..res).map(move |i| vec![coord(i), coord(j)]))
                .collect(),
        };
        points
            .into_iter()
            .map(|p| {
                let walk = self.walk(&p, n)?;
                let v = self.certified_from_walk(&walk, n);
                Ok(GridRow {
                    point: p,
                    value: v.value,
                    radius: v.radius,
                    n_used: v.n_used,
                })
            })
            .collect()
    }
}

/// Centre of sub-cell `digit` of a cell with the given corner and side, as floats.
pub fn quadrant_centre(dim: Dimension, corner: &[f64], side: f64, digit: u8) -> Vec<f64> {
    let off = quadrant_offset(dim, digit);
    corner
        .iter()
        .zip(off)
        .map(|(c, o)| c + f64::from(o) * side / 2.0 + side / 4.0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plateau::{step_1d_eval, step_2d_eval, step_2d_gradient};
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f1() -> FunctionHandle {
        FunctionHandle::new(Dimension::One, AlphaSchedule::InverseSquare).unwrap()
    }

    fn f2() -> FunctionHandle {
        FunctionHandle::new(Dimension::Two, AlphaSchedule::InverseSquare).unwrap()
    }

    fn addr(dim: Dimension, d: &[u8]) -> CellAddress {
        CellAddress::new(dim, d.to_vec()).unwrap()
    }

    #[test]
    fn h_examples() {
        assert_eq!(f2().h_eval(1, &[0.75, 0.25], 0).unwrap(), EvalOutput::Value(3.0));
        assert_eq!(f1().h_eval(1, &[0.75], 0).unwrap(), EvalOutput::Value(1.0));
        // 1/2 lies between the level-2 cells
        assert_eq!(f1().h_eval(2, &[0.5], 0).unwrap(), EvalOutput::Value(0.0));
        assert_eq!(f2().h_eval(3, &[0.5, 0.01], 0).unwrap(), EvalOutput::Value(0.0));
        assert_eq!(f1().h_eval(1, &[0.3], 1), Err(Error::WrongDimension(2)));
        assert_eq!(f2().h_eval(1, &[0.3, 0.3], 2), Err(Error::UnsupportedOrder(2)));
        assert_eq!(f1().h_eval(1, &[1.5], 0), Err(Error::PointOutsideUnitCell));
    }

    #[test]
    fn h_matches_direct_step_sums() {
        // independent oracle: sum H over the whole family from the plateau module
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for h in [f1(), f2()] {
            let c = h.construction().clone();
            let seq = c.sequences().clone();
            for n in 1..=4 {
                let fam = c.family(n).unwrap();
                let s = seq.shrink(n).unwrap();
                for _ in 0..150 {
                    let x: Vec<f64> = (0..h.dim().get()).map(|_| rng.random::<f64>()).collect();
                    let direct: f64 = fam
                        .iter()
                        .map(|q| match h.dim() {
                            Dimension::One => step_1d_eval(q, &s, x[0]).unwrap(),
                            Dimension::Two => step_2d_eval(q, &s, [x[0], x[1]]).unwrap(),
                        })
                        .sum();
                    let v = h.h_eval(n, &x, 0).unwrap().value().unwrap();
                    assert!((v - direct).abs() < 1e-12, "n={n} x={x:?}: {v} vs {direct}");
                    if h.dim() == Dimension::Two {
                        let g: [f64; 2] = fam.iter().fold([0.0, 0.0], |acc, q| {
                            let gq = step_2d_gradient(q, &s, [x[0], x[1]]).unwrap();
                            [acc[0] + gq[0], acc[1] + gq[1]]
                        });
                        let ours = h.h_eval(n, &x, 1).unwrap().gradient().unwrap();
                        let scale = 1.0 + g[0].abs().max(g[1].abs());
                        assert!((ours[0] - g[0]).abs() < 1e-9 * scale);
                        assert!((ours[1] - g[1]).abs() < 1e-9 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn f_partial_examples() {
        assert_eq!(f2().f_partial(1, &[0.75, 0.25], 0).unwrap(), EvalOutput::Value(0.75));
        for x in [81.0 / 128.0, 0.7, 95.0 / 128.0] {
            assert_eq!(f1().f_partial(2, &[x], 0).unwrap(), EvalOutput::Value(0.5));
        }
    }

    #[test]
    fn gradient_vanishes_exactly_on_next_level_cells() {
        let h = f2();
        for n in 1..=5 {
            for cell in h.construction().family(n + 1).unwrap() {
                let g = h.f_partial_gradient(n, &cell.midpoint_f64()).unwrap();
                assert_eq!(g, [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn f_eval_examples() {
        let h = f1();
        for tol in [1e-1, 1e-6, 1e-12] {
            let v = h.f_eval(&[0.0], tol).unwrap();
            assert_eq!(v.value, 0.0);
            assert!(v.radius <= tol);
            let m = h.f_eval(&[0.5], tol).unwrap();
            assert_eq!((m.value, m.radius), (0.0, 0.0));
        }
        let h2 = f2();
        let v = h2.f_eval(&[0.75, 0.25], 1e-6).unwrap();
        assert!(v.radius <= 1e-6);
        let walk = h2.walk(&[0.75, 0.25], 10).unwrap();
        let core = h2.f_core_exact(&addr(Dimension::Two, &walk.digits)).unwrap();
        assert_eq!(walk.digits[0], 3);
        assert!(to_f64(&core.value) <= v.value && v.value <= to_f64(&(&core.value + &core.radius)));
        assert!(matches!(h.f_eval(&[0.3], 0.0), Err(Error::InvalidTolerance(_))));
        assert!(matches!(
            h.f_eval(&[0.3], 1e-300),
            Err(Error::ToleranceBelowResolution { cap: 48, .. })
        ));
    }

    #[test]
    fn f_core_examples() {
        let h = f1();
        let v = h.f_core_exact(&addr(Dimension::One, &[1, 0, 1])).unwrap();
        assert_eq!((v.value.clone(), v.radius.clone()), (rat(5, 8), rat(1, 8)));
        let mid = h.construction().cell_of(&addr(Dimension::One, &[1, 0, 1])).unwrap().midpoint_f64();
        let fv = h.f_eval(&mid, 1e-9).unwrap();
        assert!(fv.value >= 0.625 && fv.hi() <= 0.75 + 1e-12);
        let v2 = f2().f_core_exact(&addr(Dimension::Two, &[3])).unwrap();
        assert_eq!((v2.value, v2.radius), (rat(3, 4), rat(1, 4)));
        let z = h.f_core_exact(&addr(Dimension::One, &[0; 7])).unwrap();
        assert_eq!((z.value, z.radius), (Rational::zero(), rat(1, 128)));
    }

    #[test]
    fn float_and_exact_walks_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for h in [f1(), f2()] {
            for _ in 0..500 {
                let x: Vec<f64> = (0..h.dim().get()).map(|_| rng.random::<f64>()).collect();
                let q: Vec<Rational> = x.iter().map(|&v| from_f64(v).unwrap()).collect();
                let a = h.walk(&x, 16).unwrap();
                let b = h.walk_exact(&q, 16).unwrap();
                assert_eq!(a.digits, b.digits);
                match (a.end, b.end) {
                    (WalkEnd::Deep, WalkEnd::Deep) => {}
                    (WalkEnd::Exit { offsets: o1 }, WalkEnd::Exit { offsets: o2 }) => {
                        assert!((o1[0] - o2[0]).abs() < 1e-13 && (o1[1] - o2[1]).abs() < 1e-13)
                    }
                    other => panic!("walks disagree: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn guard_ties_fall_back_to_exact() {
        // the midpoint of the root sits exactly on a comparison boundary
        let w = f1().walk(&[0.5], 3).unwrap();
        assert_eq!(w.digits, vec![1]);
        assert_eq!(w.end, WalkEnd::Exit { offsets: [-0.25, 0.0] });
        // the endpoint 5/8 of the right child is a closed-cell member
        let w = f1().walk(&[0.625], 1).unwrap();
        assert_eq!(w.end, WalkEnd::Deep);
    }

    #[test]
    fn quotient_probe_all_ones() {
        let h = f1();
        let a = addr(Dimension::One, &[1; 20]);
        let p = h.quotient_probe(&a, 1).unwrap();
        assert_eq!(p.left_point, rat(1, 2));
        assert_eq!(p.right_point, rat(1, 1));
        assert_eq!(p.probe_value, Rational::zero());
        assert!(p.delta_f.lo >= -Rational::one());
        assert!(p.delta_f.hi <= -(Rational::one() - inv_pow(2, 19)));
        assert!(p.left_quotient.lo >= int(2));
        assert!(p.right_quotient.hi <= int(-2));
        assert_eq!(p.h_bound, rat(3, 8));
        assert!(p.h_within_bound() && p.delta_at_least_digit_weight() && p.conclusive());
    }

    #[test]
    fn quotient_probe_preconditions() {
        let h = f1();
        let a = addr(Dimension::One, &[1, 0, 1, 1]);
        assert!(matches!(
            h.quotient_probe(&a, 2),
            Err(Error::DigitPrecondition { position: 2, digit: 0, .. })
        ));
        assert!(matches!(h.quotient_probe(&a, 6), Err(Error::AddressTooShort { .. })));
        assert!(matches!(
            f2().quotient_probe(&addr(Dimension::Two, &[1]), 1),
            Err(Error::WrongDimension(1))
        ));
    }

    #[test]
    fn quotient_probes_on_random_addresses() {
        let h = f1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let digits: Vec<u8> = (0..24).map(|_| rng.random_range(0..2u8)).collect();
            let a = addr(Dimension::One, &digits);
            for n in 1..=12 {
                if digits[n - 1] != 1 {
                    continue;
                }
                let p = h.quotient_probe(&a, n).unwrap();
                assert!(p.h_left.hi.is_negative() && p.h_right.lo.is_positive());
                assert!(p.h_within_bound());
                assert!(p.delta_at_least_digit_weight());
                assert!(p.left_quotient.lo >= p.quotient_floor);
                assert!(p.right_quotient.hi <= -p.quotient_floor.clone());
            }
        }
    }

    #[test]
    fn critical_values_are_dyadic() {
        let h = f2();
        let v1 = h.critical_values_off_core(1).unwrap();
        assert!(v1.iter().all(|v| (0..4).any(|k| *v == rat(k, 4))));
        let v2 = h.critical_values_off_core(2).unwrap();
        assert_eq!(v2.len(), 16);
        for n in 1..=4 {
            let den = num_traits::pow(num_bigint::BigInt::from(4), n);
            for v in h.critical_values_off_core(n).unwrap() {
                assert!((&v * Rational::from_integer(den.clone())).is_integer());
            }
        }
    }

    #[test]
    fn f_equals_f_n_off_core() {
        let h = f2();
        let c = h.construction();
        for n in 2..=4 {
            for m in 1..n {
                for z in c.z_set(m).unwrap() {
                    let p = z.sample_point();
                    let full = h.f_eval_rational(&p, 1e-9).unwrap();
                    assert_eq!(full.radius, Rational::zero());
                    assert_eq!(full.exact(), h.f_partial_rational(n, &p).unwrap());
                }
            }
        }
    }

    #[test]
    fn gradient_tail_bound_examples() {
        let h = f2();
        let mut prev = f64::INFINITY;
        for n in 1..=20 {
            let b = h.gradient_tail_bound(n).unwrap();
            assert!(b < prev && b > 0.0);
            prev = b;
        }
        // 4^-m / s_m ratios tend to 1/2
        let seq = h.construction().sequences();
        let term = |m: usize| 0.25f64.powi(m as i32) / to_f64(&seq.shrink(m).unwrap());
        assert!((term(41) / term(40) - 0.5).abs() < 0.05);
        assert!(f1().gradient_tail_bound(3).is_err());
    }

    #[test]
    fn grid_rows() {
        let rows = f2().grid(8, 1e-4).unwrap();
        assert_eq!(rows.len(), 64);
        assert!(rows.iter().all(|r| r.radius <= 1e-4));
    }
}
