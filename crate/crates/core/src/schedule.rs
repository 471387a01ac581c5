//! Parameter sequences of the construction.
//!
//! For a schedule `alpha_n` in `(0,1)`:
//!
//! ```text
//! a_1 = 1,  s_n = alpha_n a_n / 4,  a_{n+1} = (1 - alpha_n) a_n / 2,
//! r_n = prod_{k<=n} (1 - alpha_k),  r_0 = 1.
//! ```
//!
//! All of these are kept as exact rationals, so `a_n 2^n = 2 r_{n-1}` holds as an
//! equality of rationals. The limit `r = lim r_n` is only available as a
//! certified float enclosure.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Dimension;
use crate::interval::{round_down, round_up, Interval};
use crate::rational::{int, rat, to_f64, Rational};

/// Which schedule a construction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `alpha_n = 1 / (2 n^2)`: summable, so `r > 0`.
    InverseSquare,
    /// `alpha_n = 1 / (n + 1)`: `r_n = 1/(n+1)`, so `r = 0`.
    Harmonic,
    Custom,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InverseSquare => "inverse-square",
            Self::Harmonic => "harmonic",
            Self::Custom => "custom",
        })
    }
}

type AlphaRule = Arc<dyn Fn(u64) -> Rational + Send + Sync>;

#[derive(Clone)]
pub enum AlphaSchedule {
    InverseSquare,
    Harmonic,
    Custom { name: String, rule: AlphaRule },
}

impl fmt::Debug for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InverseSquare => f.write_str("InverseSquare"),
            Self::Harmonic => f.write_str("Harmonic"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl AlphaSchedule {
    pub fn custom(name: impl Into<String>, rule: impl Fn(u64) -> Rational + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        match self {
            Self::InverseSquare => ScheduleKind::InverseSquare,
            Self::Harmonic => ScheduleKind::Harmonic,
            Self::Custom { .. } => ScheduleKind::Custom,
        }
    }

    pub fn from_kind(kind: ScheduleKind) -> Option<Self> {
        match kind {
            ScheduleKind::InverseSquare => Some(Self::InverseSquare),
            ScheduleKind::Harmonic => Some(Self::Harmonic),
            ScheduleKind::Custom => None,
        }
    }

    pub fn alpha(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        let value = match self {
            Self::InverseSquare => Rational::new(1.into(), (2 * u128::from(n) * u128::from(n)).into()),
            Self::Harmonic => Rational::new(1.into(), (u128::from(n) + 1).into()),
            Self::Custom { rule, .. } => rule(n),
        };
        if !value.is_positive() || value >= Rational::one() {
            return Err(Error::AlphaOutOfRange {
                n,
                value: value.to_string(),
            });
        }
        Ok(value)
    }

    /// `alpha_n` as a float, for series bounds running far past the exact tables.
    pub(crate) fn alpha_f64(&self, n: u64) -> Result<f64> {
        let nf = n as f64;
        match self {
            Self::InverseSquare => Ok(0.5 / (nf * nf)),
            Self::Harmonic => Ok(1.0 / (nf + 1.0)),
            Self::Custom { .. } => self.alpha(n).map(|a| to_f64(&a)),
        }
    }

    /// Upper bound, valid for every `m >= n`, of
    /// `alpha_m / (alpha_{m+1} (1 - alpha_m))`. Since `s_m / s_{m+1}` is twice
    /// this ratio, it controls every geometric tail over the levels.
    pub(crate) fn shrink_ratio_bound(&self, n: u64) -> Result<f64> {
        let nf = n as f64;
        match self {
            // (n+1)^2/n^2 / (1 - 1/(2n^2)), decreasing in n
            Self::InverseSquare => {
                let v = ((nf + 1.0) * (nf + 1.0)) / (nf * nf) / (1.0 - 0.5 / (nf * nf));
                Ok(round_up(v))
            }
            // (n+2)/(n+1) * (n+1)/n = (n+2)/n, decreasing in n
            Self::Harmonic => Ok(round_up((nf + 2.0) / nf)),
            Self::Custom { .. } => Err(Error::NoTailBound),
        }
    }
}

/// One level of the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub n: usize,
    pub alpha: Rational,
    /// Side length `a_n` of a level-`n` cell.
    pub side: Rational,
    /// Shrink margin `s_n`.
    pub shrink: Rational,
    /// Partial product `r_n`.
    pub partial: Rational,
}

/// Memoised exact sequences `alpha_n, a_n, s_n, r_n`.
pub struct GeometrySequences {
    schedule: AlphaSchedule,
    levels: RwLock<Vec<Level>>,
}

impl fmt::Debug for GeometrySequences {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeometrySequences")
            .field("schedule", &self.schedule)
            .field("cached", &self.levels.read().len())
            .finish()
    }
}

impl GeometrySequences {
    pub fn new(schedule: AlphaSchedule) -> Self {
        Self {
            schedule,
            levels: RwLock::new(Vec::new()),
        }
    }

    pub fn schedule(&self) -> &AlphaSchedule {
        &self.schedule
    }

    fn ensure(&self, n: usize) -> Result<()> {
        if self.levels.read().len() >= n {
            return Ok(());
        }
        let mut levels = self.levels.write();
        while levels.len() < n {
            let k = levels.len() + 1;
            let alpha = self.schedule.alpha(k as u64)?;
            let (side, prev_partial) = match levels.last() {
                None => (Rational::one(), Rational::one()),
                Some(prev) => (
                    (Rational::one() - &prev.alpha) * &prev.side / int(2),
                    prev.partial.clone(),
                ),
            };
            let shrink = &alpha * &side / int(4);
            let partial = prev_partial * (Rational::one() - &alpha);
            levels.push(Level {
                n: k,
                alpha,
                side,
                shrink,
                partial,
            });
        }
        Ok(())
    }

    pub fn level(&self, n: usize) -> Result<Level> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        self.ensure(n)?;
        Ok(self.levels.read()[n - 1].clone())
    }

    /// Levels `1..=n`.
    pub fn levels(&self, n: usize) -> Result<Vec<Level>> {
        self.ensure(n)?;
        Ok(self.levels.read()[..n].to_vec())
    }

    pub fn alpha(&self, n: usize) -> Result<Rational> {
        self.level(n).map(|l| l.alpha)
    }

    pub fn side(&self, n: usize) -> Result<Rational> {
        self.level(n).map(|l| l.side)
    }

    pub fn shrink(&self, n: usize) -> Result<Rational> {
        self.level(n).map(|l| l.shrink)
    }

    /// `r_n`, with `r_0 = 1`.
    pub fn partial(&self, n: usize) -> Result<Rational> {
        if n == 0 {
            Ok(Rational::one())
        } else {
            self.level(n).map(|l| l.partial)
        }
    }

    /// `(a_n, s_n, r_n)`.
    pub fn geometry(&self, n: usize) -> Result<(Rational, Rational, Rational)> {
        let l = self.level(n)?;
        Ok((l.side, l.shrink, l.partial))
    }

    /// Measure of the union of the level-`n` cells: `2^{n-1} a_n` or `4^{n-1} a_n^2`.
    pub fn core_measure(&self, dim: Dimension, n: usize) -> Result<Rational> {
        let a = self.side(n)?;
        Ok(match dim {
            Dimension::One => a * Rational::from_integer(num_traits::pow(2.into(), n - 1)),
            Dimension::Two => &a * &a * Rational::from_integer(num_traits::pow(4.into(), n - 1)),
        })
    }
}

/// `r_N` as a float enclosure, from the log-sum of `ln(1 - alpha_n)` with an
/// explicit rounding budget.
fn partial_product_enclosure(schedule: &AlphaSchedule, big_n: u64) -> Result<Interval> {
    let mut sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    for n in 1..=big_n {
        let t = (-schedule.alpha_f64(n)?).ln_1p();
        sum += t;
        abs_sum += t.abs();
    }
    let err = (big_n as f64 + 8.0) * 4.0 * f64::EPSILON * abs_sum;
    Ok(Interval::new(
        round_down((sum - err).exp()),
        round_up((sum + err).exp()),
    ))
}

/// Certified enclosure of `r` from the first `big_n` factors.
///
/// Inverse-square: with `T_lo = 1/(2(N+1)) <= sum_{n>N} alpha_n` and
/// `T_hi = 1/(2N) >= sum_{n>N} alpha_n/(1 - alpha_n)`, and
/// `-alpha/(1-alpha) <= ln(1-alpha) <= -alpha`,
/// `r_N e^{-T_hi} <= r <= r_N e^{-T_lo}`.
pub fn r_enclosure_at(schedule: &AlphaSchedule, big_n: u64) -> Result<Interval> {
    if big_n == 0 {
        return Err(Error::ZeroLevel);
    }
    match schedule {
        AlphaSchedule::InverseSquare => {
            let r_n = partial_product_enclosure(schedule, big_n)?;
            let nf = big_n as f64;
            let t_lo = round_down(0.5 / (nf + 1.0));
            let t_hi = round_up(0.5 / nf);
            Ok(Interval::new(
                round_down(r_n.lo * round_down((-t_hi).exp())),
                round_up(r_n.hi * round_up((-t_lo).exp())),
            ))
        }
        AlphaSchedule::Harmonic => {
            let hi = to_f64(&rat(1, big_n as i64 + 1));
            Ok(Interval::new(0.0, round_up(hi)))
        }
        AlphaSchedule::Custom { .. } => Err(Error::NoTailBound),
    }
}

const MAX_FACTORS: u64 = 1 << 26;

/// Enclosure of `r` of width at most `tol`.
pub fn r_enclosure(schedule: &AlphaSchedule, tol: f64) -> Result<Interval> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut big_n = match schedule {
        // width ~ r / (2 N (N+1)) < 1 / (2 N^2)
        AlphaSchedule::InverseSquare => ((0.5 / tol).sqrt().ceil() as u64).max(1),
        // closed form r_N = 1/(N+1), no product to evaluate
        AlphaSchedule::Harmonic => return r_enclosure_at(schedule, ((1.0 / tol).ceil() as u64).max(1)),
        AlphaSchedule::Custom { .. } => return Err(Error::NoTailBound),
    };
    loop {
        if big_n > MAX_FACTORS {
            return Err(Error::ToleranceBelowResolution {
                tol,
                resolution: r_enclosure_at(schedule, MAX_FACTORS)?.width(),
                cap: MAX_FACTORS as usize,
            });
        }
        let enc = r_enclosure_at(schedule, big_n)?;
        if enc.width() <= tol {
            return Ok(enc);
        }
        big_n *= 2;
    }
}

/// Enclosure of the limiting core measure: `r` in 1D, `r^2` in 2D.
pub fn core_mass_enclosure(schedule: &AlphaSchedule, dim: Dimension, tol: f64) -> Result<Interval> {
    let r = r_enclosure(schedule, tol)?;
    Ok(match dim {
        Dimension::One => r,
        Dimension::Two => r.square(),
    })
}
