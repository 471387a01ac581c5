//! Smooth transition profile and the plateau/step functions built from it.
//!
//! The transition is the classical smooth step
//! `g(t) = e(t) / (e(t) + e(1 - t))` with `e(t) = exp(-1/t)` for `t > 0`.
//! Every derivative of `g` vanishes at `t = 0` and `t = 1`, so bumps glued from
//! it are `C^inf` across plateau edges.

use std::sync::OnceLock;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RationalCell;
use crate::rational::{int, to_f64, Rational};

/// Logistic function, evaluated without overflow for large `|z|`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// On `(0,1)`, `g = sigmoid(z)` with `z = 1/(1-t) - 1/t`; returns `(g, 1-g)`.
fn split(t: f64) -> (f64, f64) {
    let z = 1.0 / (1.0 - t) - 1.0 / t;
    (sigmoid(z), sigmoid(-z))
}

/// The transition `g : [0,1] -> [0,1]` and its first two derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlateauProfile;

impl PlateauProfile {
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            split(t).0
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (p, q) = split(t);
        let w = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
        p * q * w
    }

    pub fn d2(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (p, q) = split(t);
        let u = 1.0 - t;
        let w = 1.0 / (t * t) + 1.0 / (u * u);
        let dw = -2.0 / (t * t * t) + 2.0 / (u * u * u);
        p * q * (w * w * (q - p) + dw)
    }

    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        match order {
            0 => Ok(self.value(t)),
            1 => Ok(self.d1(t)),
            2 => Ok(self.d2(t)),
            k => Err(Error::UnsupportedOrder(k)),
        }
    }

    /// `G1 = sup |g'|`.
    pub fn g1(&self) -> f64 {
        sup_constants().0
    }

    /// `G2 = sup |g''|`.
    pub fn g2(&self) -> f64 {
        sup_constants().1
    }

    /// `G1` rounded up past the error of the numerical maximisation.
    pub fn g1_upper(&self) -> f64 {
        self.g1() * (1.0 + SUP_SLACK)
    }

    pub fn g2_upper(&self) -> f64 {
        self.g2() * (1.0 + SUP_SLACK)
    }
}

const SUP_GRID: usize = 20_000;
const SUP_TOL: f64 = 1e-10;
/// Near a smooth maximum the golden-section error in the value is far below this.
const SUP_SLACK: f64 = 1e-6;

fn sup_constants() -> (f64, f64) {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let p = PlateauProfile;
        (
            maximize_abs(|t| p.d1(t), SUP_GRID, SUP_TOL),
            maximize_abs(|t| p.d2(t), SUP_GRID, SUP_TOL),
        )
    })
}

/// Max of `|f|` on `(0,1)`: dense grid, then golden-section refinement
/// around the best grid node.
pub(crate) fn maximize_abs(f: impl Fn(f64) -> f64, grid: usize, tol: f64) -> f64 {
    let step = 1.0 / grid as f64;
    let (mut best_i, mut best) = (1, 0.0f64);
    for i in 1..grid {
        let v = f(i as f64 * step).abs();
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i as f64 - 1.0) * step;
    let mut hi = (best_i as f64 + 1.0) * step;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c).abs(), f(d).abs());
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c).abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d).abs();
        }
    }
    best.max(fc).max(fd).max(f(0.5 * (lo + hi)).abs())
}

/// Half-widths of a symmetric bump `psi_{a,b}`: `psi = 1` on `[-b,b]`, `0` outside `(-a,a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    outer: f64,
    inner: f64,
}

impl BumpSpec {
    pub fn new(outer: f64, inner: f64) -> Result<Self> {
        if !(outer.is_finite() && inner.is_finite() && inner >= 0.0 && inner < outer) {
            return Err(Error::InvalidBump {
                outer: outer.to_string(),
                inner: inner.to_string(),
            });
        }
        Ok(Self { outer, inner })
    }

    pub fn from_rationals(outer: &Rational, inner: &Rational) -> Result<Self> {
        if inner.is_negative() || inner >= outer {
            return Err(Error::InvalidBump {
                outer: outer.to_string(),
                inner: inner.to_string(),
            });
        }
        Self::new(to_f64(outer), to_f64(inner))
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    /// Width of the transition zone, `a - b`.
    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }

    pub fn value(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= self.inner {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            PlateauProfile.value((self.outer - r) / self.width())
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        -x.signum() * PlateauProfile.d1((self.outer - r) / self.width()) / self.width()
    }

    pub fn d2(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        let w = self.width();
        PlateauProfile.d2((self.outer - r) / w) / (w * w)
    }
}

/// `psi_{a,b}(x)` or one of its first two derivatives.
pub fn psi_eval(spec: &BumpSpec, x: f64, order: u8) -> Result<f64> {
    match order {
        0 => Ok(spec.value(x)),
        1 => Ok(spec.d1(x)),
        2 => Ok(spec.d2(x)),
        k => Err(Error::UnsupportedOrder(k)),
    }
}

/// `(sup|psi|, sup|psi'|, sup|psi''|) = (1, G1/(a-b), G2/(a-b)^2)`.
pub fn sup_norms(spec: &BumpSpec) -> (f64, f64, f64) {
    let w = spec.width();
    let p = PlateauProfile;
    (1.0, p.g1() / w, p.g2() / (w * w))
}

fn check_margin(side: &Rational, s: &Rational, parts: i64) -> Result<()> {
    let limit = side / int(parts);
    if !s.is_positive() || s >= &limit {
        return Err(Error::MarginOutOfRange {
            s: s.to_string(),
            side: side.to_string(),
            limit: limit.to_string(),
        });
    }
    Ok(())
}

/// Bump of a cell (interval or square): `1` on the cell shrunk by `s`, `0` off the open cell.
/// Returns the per-axis bump and the cell centre as floats.
fn cell_bump(cell: &RationalCell, s: &Rational) -> Result<(BumpSpec, Vec<f64>)> {
    let half = cell.side() / int(2);
    let spec = BumpSpec::from_rationals(&half, &(&half - s))?;
    let center = cell.corner().iter().map(|c| to_f64(&(c + &half))).collect();
    Ok((spec, center))
}

/// `F_{I,s}(x)`: `1` on `[a+s, b-s]`, `0` off `(a,b)`.
pub fn plateau_1d_eval(interval: &RationalCell, s: &Rational, x: f64) -> Result<f64> {
    interval.expect_dim(1)?;
    check_margin(interval.side(), s, 2)?;
    let (spec, c) = cell_bump(interval, s)?;
    Ok(spec.value(x - c[0]))
}

/// `F_{Q,s}(x) = psi(x1 - c1) psi(x2 - c2)` with `psi = psi_{a/2, a/2 - s}`.
pub fn plateau_2d_eval(square: &RationalCell, s: &Rational, x: [f64; 2]) -> Result<f64> {
    square.expect_dim(2)?;
    check_margin(square.side(), s, 2)?;
    let (spec, c) = cell_bump(square, s)?;
    Ok(spec.value(x[0] - c[0]) * spec.value(x[1] - c[1]))
}

/// Analytic gradient of `F_{Q,s}` by the product rule.
pub fn plateau_2d_gradient(square: &RationalCell, s: &Rational, x: [f64; 2]) -> Result<[f64; 2]> {
    square.expect_dim(2)?;
    check_margin(square.side(), s, 2)?;
    let (spec, c) = cell_bump(square, s)?;
    let (u, v) = (x[0] - c[0], x[1] - c[1]);
    Ok([spec.d1(u) * spec.value(v), spec.value(u) * spec.d1(v)])
}

fn sub_cells(cell: &RationalCell) -> Vec<(u8, RationalCell)> {
    (0..cell.dim().base()).map(|k| (k, cell.sub_cell(k))).collect()
}

/// `H_{I,s} = 0 * F_{I_0,s} + 1 * F_{I_1,s}` on the two halves of `I`.
pub fn step_1d_eval(interval: &RationalCell, s: &Rational, x: f64) -> Result<f64> {
    interval.expect_dim(1)?;
    check_margin(interval.side(), s, 4)?;
    let mut total = 0.0;
    for (k, half) in sub_cells(interval) {
        if k != 0 {
            total += f64::from(k) * plateau_1d_eval(&half, s, x)?;
        }
    }
    Ok(total)
}

/// `H_{Q,s} = sum_k k F_{Q_k,s}` over the four quadrants.
pub fn step_2d_eval(square: &RationalCell, s: &Rational, x: [f64; 2]) -> Result<f64> {
    square.expect_dim(2)?;
    check_margin(square.side(), s, 4)?;
    let mut total = 0.0;
    for (k, q) in sub_cells(square) {
        if k != 0 {
            total += f64::from(k) * plateau_2d_eval(&q, s, x)?;
        }
    }
    Ok(total)
}

pub fn step_2d_gradient(square: &RationalCell, s: &Rational, x: [f64; 2]) -> Result<[f64; 2]> {
    square.expect_dim(2)?;
    check_margin(square.side(), s, 4)?;
    let mut g = [0.0, 0.0];
    for (k, q) in sub_cells(square) {
        if k != 0 {
            let gk = plateau_2d_gradient(&q, s, x)?;
            g[0] += f64::from(k) * gk[0];
            g[1] += f64::from(k) * gk[1];
        }
    }
    Ok(g)
}

impl BumpSpec {
    /// Spec with `b = 0` and `a = 1`, the reference scale for `G1`, `G2`.
    pub fn unit() -> Self {
        Self {
            outer: 1.0,
            inner: 0.0,
        }
    }
}
