//! Hölder seminorms: sampled lower bounds against summed level bounds.
//!
//! Per level, `[g]_a <= 2 |g|^(1-a) |Dg|^a`. For `2^-n h_n` in 1D this gives
//! `2 2^-n (G1/s_n)^a`; for `grad(4^-n h_n)` in 2D it gives
//! `2 4^-n (3 sqrt2 G1/s_n)^(1-a) (6 max(G2, G1^2)/s_n^2)^a`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::FunctionHandle;
use crate::geometry::{quadrant_offset, Dimension};
use crate::plateau::PlateauProfile;
use crate::schedule::{AlphaSchedule, ScheduleKind};
use crate::series::{level_series, SeriesBound};

const SERIES_REL_TOL: f64 = 1e-9;
/// Tolerance for 1D evaluations in sampled quotients.
const EVAL_TOL_1D: f64 = 1e-12;
/// Deepest level used by the cross-gap sampler in 1D.
const CROSS_GAP_DEPTH_1D: usize = 30;
/// Default level for `[grad f_n]_a` in 2D.
pub const DEFAULT_GRADIENT_LEVEL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStrategy {
    Uniform,
    /// Pairs straddling the transition zone next to a child cell, at random levels.
    CrossGap,
    /// Midpoints of two cells whose addresses differ in one digit.
    DigitAligned,
}

impl fmt::Display for PairStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::CrossGap => "cross-gap",
            Self::DigitAligned => "digit-aligned",
        })
    }
}

impl std::str::FromStr for PairStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "cross-gap" => Ok(Self::CrossGap),
            "digit-aligned" => Ok(Self::DigitAligned),
            other => Err(format!("unknown pair strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub dim: Dimension,
    pub schedule: ScheduleKind,
    pub alpha: f64,
    /// `None` for `[f]_a` in 1D, `Some(n)` for `[grad f_n]_a` in 2D.
    pub gradient_level: Option<usize>,
    pub strategy: PairStrategy,
    pub pairs: usize,
    pub seed: u64,
    /// Sampled lower bound of the seminorm.
    pub lower: f64,
    pub best_pair: Option<(Vec<f64>, Vec<f64>)>,
    /// Certified upper bound from the level series.
    pub upper: f64,
    pub series: SeriesBound,
}

impl HolderReport {
    pub fn consistent(&self) -> bool {
        self.lower <= self.upper
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidExponent(alpha));
    }
    Ok(())
}

/// Series upper bound for `[f]_a` (1D) or `[grad f]_a` (2D).
pub fn holder_upper_bound(schedule: &AlphaSchedule, dim: Dimension, alpha: f64) -> Result<SeriesBound> {
    check_alpha(alpha)?;
    let g1 = PlateauProfile.g1_upper();
    let g2 = PlateauProfile.g2_upper();
    match dim {
        Dimension::One => level_series(schedule, 2f64.ln() + alpha * g1.ln(), 0.5, alpha, 1, SERIES_REL_TOL),
        Dimension::Two => {
            let grad = 3.0 * std::f64::consts::SQRT_2 * g1;
            let hess = 6.0 * g2.max(g1 * g1);
            let log_c = 2f64.ln() + (1.0 - alpha) * grad.ln() + alpha * hess.ln();
            level_series(schedule, log_c, 0.25, 1.0 + alpha, 1, SERIES_REL_TOL)
        }
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Sampled `max (|v(x) - v(y)| - r_x - r_y) / |x - y|^a` over generated pairs.
///
/// `eval` returns a value vector and a bound on its error. Pairs come from one
/// stream, so a longer run sees a superset of the pairs of a shorter one.
pub fn sampled_lower_bound<R: Rng>(
    alpha: f64,
    pairs: usize,
    rng: &mut R,
    mut sample: impl FnMut(&mut R) -> Result<(Vec<f64>, Vec<f64>)>,
    eval: impl Fn(&[f64]) -> Result<(Vec<f64>, f64)>,
) -> Result<(f64, Option<(Vec<f64>, Vec<f64>)>)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidExponent(alpha));
    }
    if pairs == 0 {
        return Err(Error::Degenerate("at least one pair is required".into()));
    }
    let mut best = 0.0f64;
    let mut best_pair = None;
    for _ in 0..pairs {
        let (x, y) = sample(rng)?;
        let d = distance(&x, &y);
        if !(d > 0.0) {
            continue;
        }
        let (vx, rx) = eval(&x)?;
        let (vy, ry) = eval(&y)?;
        let diff = distance(&vx, &vy);
        // values carry a few ulps of evaluation error on top of the truncation radius
        let slack = rx + ry + 8.0 * f64::EPSILON * (vx.iter().chain(&vy).fold(0.0f64, |m, v| m.max(v.abs())));
        let q = (diff - slack) / d.powf(alpha);
        if q > best {
            best = q;
            best_pair = Some((x, y));
        }
    }
    Ok((best, best_pair))
}

/// Pair generator for the construction of `h`.
struct PairSampler<'a> {
    h: &'a FunctionHandle,
    strategy: PairStrategy,
    max_level: usize,
}

impl PairSampler<'_> {
    fn random_digits<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<u8> {
        let base = self.h.dim().base();
        (0..len).map(|_| rng.random_range(0..base)).collect()
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.h.dim().get();
        match self.strategy {
            PairStrategy::Uniform => Ok((
                (0..d).map(|_| rng.random::<f64>()).collect(),
                (0..d).map(|_| rng.random::<f64>()).collect(),
            )),
            PairStrategy::CrossGap => self.cross_gap(rng),
            PairStrategy::DigitAligned => {
                let len = rng.random_range(1..=self.max_level);
                let a = self.random_digits(rng, len);
                let mut b = a.clone();
                let j = rng.random_range(0..len);
                let base = self.h.dim().base();
                b[j] = (a[j] + rng.random_range(1..base)) % base;
                Ok((self.midpoint(&a)?, self.midpoint(&b)?))
            }
        }
    }

    fn midpoint(&self, digits: &[u8]) -> Result<Vec<f64>> {
        let (corner, side) = self.h.float_cell(digits)?;
        Ok(corner.iter().map(|c| c + side / 2.0).collect())
    }

    /// `x` in the band between a quadrant edge and its child, `y` just inside the child.
    fn cross_gap<R: Rng>(&self, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        let dim = self.h.dim();
        let m = rng.random_range(1..=self.max_level);
        let digits = self.random_digits(rng, m - 1);
        let (corner, side) = self.h.float_cell(&digits)?;
        let (s, _) = self.h.float_level(m)?;
        let k = rng.random_range(0..dim.base());
        let off = quadrant_offset(dim, k);
        let child_lo: Vec<f64> = corner
            .iter()
            .zip(off)
            .map(|(c, o)| c + f64::from(o) * side / 2.0 + s)
            .collect();
        let child_side = side / 2.0 - 2.0 * s;
        let axis = rng.random_range(0..dim.get());
        let reach = s.min(child_side / 2.0);
        let (t1, t2): (f64, f64) = (rng.random(), rng.random());
        let upper_edge = rng.random::<bool>();
        let mut x = Vec::with_capacity(dim.get());
        let mut y = Vec::with_capacity(dim.get());
        for i in 0..dim.get() {
            if i == axis {
                let (edge, sign) = if upper_edge {
                    (child_lo[i] + child_side, 1.0)
                } else {
                    (child_lo[i], -1.0)
                };
                x.push(edge + sign * t1 * s);
                y.push(edge - sign * t2 * reach);
            } else {
                let c = child_lo[i] + rng.random::<f64>() * child_side;
                x.push(c);
                y.push(c);
            }
        }
        let clamp = |v: Vec<f64>| v.into_iter().map(|t| t.clamp(0.0, 1.0)).collect();
        Ok((clamp(x), clamp(y)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderOptions {
    pub pairs: usize,
    pub strategy: PairStrategy,
    pub seed: u64,
    /// Level `n` of `[grad f_n]_a` in 2D.
    pub gradient_level: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            strategy: PairStrategy::CrossGap,
            seed: 0,
            gradient_level: DEFAULT_GRADIENT_LEVEL,
        }
    }
}

/// Sampled lower bound of `[f]_a` (1D) or `[grad f_n]_a` (2D) with the series upper bound.
pub fn holder_estimate(h: &FunctionHandle, alpha: f64, opts: &HolderOptions) -> Result<HolderReport> {
    check_alpha(alpha)?;
    let series = holder_upper_bound(h.schedule(), h.dim(), alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lower, best_pair, gradient_level) = match h.dim() {
        Dimension::One => {
            let sampler = PairSampler {
                h,
                strategy: opts.strategy,
                max_level: CROSS_GAP_DEPTH_1D.min(h.depth_cap() - 1),
            };
            let (lower, pair) = sampled_lower_bound(
                alpha,
                opts.pairs,
                &mut rng,
                |r| sampler.sample(r),
                |x| {
                    let v = h.f_eval(x, EVAL_TOL_1D)?;
                    Ok((vec![v.value], v.radius))
                },
            )?;
            (lower, pair, None)
        }
        Dimension::Two => {
            let n = opts.gradient_level;
            let sampler = PairSampler {
                h,
                strategy: opts.strategy,
                max_level: n.min(h.depth_cap() - 1),
            };
            let (lower, pair) = sampled_lower_bound(
                alpha,
                opts.pairs,
                &mut rng,
                |r| sampler.sample(r),
                |x| Ok((h.f_partial_gradient(n, x)?.to_vec(), 0.0)),
            )?;
            (lower, pair, Some(n))
        }
    };
    Ok(HolderReport {
        dim: h.dim(),
        schedule: h.schedule().kind(),
        alpha,
        gradient_level,
        strategy: opts.strategy,
        pairs: opts.pairs,
        seed: opts.seed,
        lower,
        best_pair,
        upper: series.upper(),
        series,
    })
}
