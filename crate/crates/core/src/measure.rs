//! Pushforwards of the core measure under `f_n` and `f`.
//!
//! On a level-`n+1` cell, `f_n` is the constant digit prefix. Sibling subtrees
//! are congruent, so every level-`n+1` cell carries the same share `beta^-n`
//! of the core measure, and the pushforward is uniform on `{k beta^-n}`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{FunctionHandle, WalkEnd};
use crate::geometry::{CellAddress, Construction, Dimension};
use crate::interval::Interval;
use crate::rational::{fmt_rational, int, inv_pow, serde_rational, Rational};
use crate::schedule::{core_mass_enclosure, ScheduleKind};

/// Enumeration caps for pushforwards (`2^14` and `4^8` atoms).
pub const ENUMERATION_CAP_1D: usize = 14;
pub const ENUMERATION_CAP_2D: usize = 8;

/// Width requested for limit-mass enclosures.
const LIMIT_TOL: f64 = 1e-9;

pub fn enumeration_cap(dim: Dimension) -> usize {
    match dim {
        Dimension::One => ENUMERATION_CAP_1D,
        Dimension::Two => ENUMERATION_CAP_2D,
    }
}

fn check_cap(dim: Dimension, n: usize) -> Result<()> {
    let cap = enumeration_cap(dim);
    if n > cap {
        return Err(Error::DepthCap { requested: n, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "serde_rational")]
    pub location: Rational,
    #[serde(with = "serde_rational")]
    pub mass: Rational,
}

/// Finite atomic measure on `[0,1]` with exact locations and masses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    #[serde(with = "serde_rational")]
    total: Rational,
}

impl DiscreteMeasure {
    /// Merges atoms at equal locations and sorts them. Masses must be positive.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (loc, mass) in atoms {
            if !mass.is_positive() {
                return Err(Error::Degenerate(format!("atom mass {mass} is not positive")));
            }
            *merged.entry(loc).or_insert_with(Rational::zero) += mass;
        }
        let atoms: Vec<Atom> = merged
            .into_iter()
            .map(|(location, mass)| Atom { location, mass })
            .collect();
        let total = atoms.iter().map(|a| &a.mass).sum();
        Ok(Self { atoms, total })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn normalized(&self) -> Result<DiscreteMeasure> {
        if self.total.is_zero() {
            return Err(Error::ZeroMass);
        }
        Ok(DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location.clone(),
                    mass: &a.mass / &self.total,
                })
                .collect(),
            total: Rational::one(),
        })
    }

    /// Right-continuous CDF as a staircase.
    pub fn cdf(&self) -> Staircase {
        let mut acc = Rational::zero();
        let steps = self
            .atoms
            .iter()
            .map(|a| {
                acc += &a.mass;
                Step {
                    t: a.location.clone(),
                    value: acc.clone(),
                }
            })
            .collect();
        Staircase { steps }
    }

    /// Exact `sup_t |F(t) - t|` on `[0,1]` for the normalized measure.
    pub fn ks_to_uniform(&self) -> Result<Rational> {
        Ok(self.normalized()?.cdf().sup_distance_to_identity())
    }

    /// Rows `location_num, location_den, mass_num, mass_den`.
    pub fn csv_rows(&self) -> Vec<[String; 4]> {
        self.atoms
            .iter()
            .map(|a| {
                [
                    a.location.numer().to_string(),
                    a.location.denom().to_string(),
                    a.mass.numer().to_string(),
                    a.mass.denom().to_string(),
                ]
            })
            .collect()
    }
}

/// Jump of a staircase: `value` holds from `t` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

/// Right-continuous nondecreasing step function, zero left of the first step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staircase {
    steps: Vec<Step>,
}

impl Staircase {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn at(&self, t: &Rational) -> Rational {
        let i = self.steps.partition_point(|s| s.t <= *t);
        if i == 0 {
            Rational::zero()
        } else {
            self.steps[i - 1].value.clone()
        }
    }

    /// Left limit at `t`.
    pub fn left_limit(&self, t: &Rational) -> Rational {
        let i = self.steps.partition_point(|s| s.t < *t);
        if i == 0 {
            Rational::zero()
        } else {
            self.steps[i - 1].value.clone()
        }
    }

    /// Points where `|S(t) - t|` or its left limit can be extremal on `[0,1]`.
    fn candidates(&self) -> Vec<Rational> {
        let mut ts: Vec<Rational> = self.steps.iter().map(|s| s.t.clone()).collect();
        ts.push(Rational::zero());
        ts.push(Rational::one());
        ts.retain(|t| !t.is_negative() && *t <= Rational::one());
        ts.sort();
        ts.dedup();
        ts
    }

    /// `sup_{t in [0,1]} |S(t) - t|`. Between steps `S` is constant and `t`
    /// linear, so the sup is reached at a step or as a left limit.
    pub fn sup_distance_to_identity(&self) -> Rational {
        self.candidates()
            .iter()
            .flat_map(|t| [(self.at(t) - t).abs(), (self.left_limit(t) - t).abs()])
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// One value stratum `[v, v + width]` carrying normalized mass `weight`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub address: CellAddress,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    #[serde(with = "serde_rational")]
    pub weight: Rational,
}

/// CDF sandwich for the normalized pushforward `f_#(core measure)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratifiedEnclosure {
    pub dim: Dimension,
    pub depth: usize,
    pub strata: Vec<Stratum>,
}

/// `(t, lower(t), upper(t))` at a breakpoint of either staircase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoint {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub upper: Rational,
}

/// Certified interval for a KS distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsInterval {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl StratifiedEnclosure {
    /// Mass of the strata lying entirely at or below `t`.
    pub fn lower_staircase(&self) -> Staircase {
        Self::staircase(self.strata.iter().map(|s| (s.hi.clone(), s.weight.clone())))
    }

    /// Mass of the strata starting at or below `t`.
    pub fn upper_staircase(&self) -> Staircase {
        Self::staircase(self.strata.iter().map(|s| (s.lo.clone(), s.weight.clone())))
    }

    fn staircase(points: impl Iterator<Item = (Rational, Rational)>) -> Staircase {
        let m = DiscreteMeasure::from_atoms(points).expect("stratum weights are positive");
        m.cdf()
    }

    pub fn total_weight(&self) -> Rational {
        self.strata.iter().map(|s| &s.weight).sum()
    }

    /// `sup_t (upper - lower)`.
    pub fn max_gap(&self) -> Rational {
        let (lo, up) = (self.lower_staircase(), self.upper_staircase());
        self.breakpoints_with(&lo, &up)
            .into_iter()
            .map(|b| b.upper - b.lower)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        self.breakpoints_with(&self.lower_staircase(), &self.upper_staircase())
    }

    fn breakpoints_with(&self, lower: &Staircase, upper: &Staircase) -> Vec<Breakpoint> {
        let mut ts: Vec<Rational> = lower
            .steps()
            .iter()
            .chain(upper.steps())
            .map(|s| s.t.clone())
            .collect();
        ts.sort();
        ts.dedup();
        ts.into_iter()
            .map(|t| Breakpoint {
                lower: lower.at(&t),
                upper: upper.at(&t),
                t,
            })
            .collect()
    }

    /// Interval containing `sup_t |F(t) - t|` for every CDF `F` in the sandwich.
    pub fn ks_to_uniform(&self) -> Result<KsInterval> {
        if self.total_weight().is_zero() {
            return Err(Error::ZeroMass);
        }
        let (lower, upper) = (self.lower_staircase(), self.upper_staircase());
        let mut ts: Vec<Rational> = lower.candidates();
        ts.extend(upper.candidates());
        ts.sort();
        ts.dedup();
        let dist = |t: &Rational, l: Rational, u: Rational| {
            if *t < l {
                l - t
            } else if *t > u {
                t - u
            } else {
                Rational::zero()
            }
        };
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for t in &ts {
            let (l, u) = (lower.at(t), upper.at(t));
            let (l_, u_) = (lower.left_limit(t), upper.left_limit(t));
            lo = lo.max(dist(t, l.clone(), u.clone())).max(dist(t, l_.clone(), u_.clone()));
            hi = hi
                .max((l - t).abs())
                .max((u - t).abs())
                .max((l_ - t).abs())
                .max((u_ - t).abs());
        }
        Ok(KsInterval { lo, hi })
    }
}

/// Exact atomic pushforward of the level-`n+1` core under `f_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardPartial {
    pub dim: Dimension,
    pub n: usize,
    /// Atoms carrying the exact measure of each level-`n+1` cell.
    pub measure: DiscreteMeasure,
    /// Enclosure of the limiting core mass (`r` or `r^2`); absent for custom schedules.
    pub limit_mass: Option<Interval>,
}

impl PushforwardPartial {
    /// Enclosure of the mass of one atom of the limit pushforward, `limit_mass / beta^n`.
    pub fn limit_atom_mass(&self) -> Option<Interval> {
        let w = f64::from(self.dim.base()).powi(-(self.n as i32));
        self.limit_mass.map(|m| Interval::new(m.lo * w, m.hi * w))
    }
}

fn limit_mass(c: &Construction) -> Option<Interval> {
    core_mass_enclosure(c.sequences().schedule(), c.dim(), LIMIT_TOL).ok()
}

/// Enumerates level-`n+1` cells: each contributes its measure at its digit value.
pub fn pushforward_partial(c: &Construction, n: usize) -> Result<PushforwardPartial> {
    check_cap(c.dim(), n)?;
    let atoms = c
        .family_with_addresses(n + 1)?
        .into_iter()
        .map(|(address, cell)| (address.value(), cell.measure()));
    Ok(PushforwardPartial {
        dim: c.dim(),
        n,
        measure: DiscreteMeasure::from_atoms(atoms)?,
        limit_mass: limit_mass(c),
    })
}

/// The uniform atomic measure `total beta^-n sum_k delta_{k beta^-n}`.
pub fn uniform_atoms(dim: Dimension, n: usize, total: &Rational) -> Result<DiscreteMeasure> {
    let base = u32::from(dim.base());
    let count = num_traits::pow(u64::from(base), n);
    let w = inv_pow(base, n);
    DiscreteMeasure::from_atoms((0..count).map(|k| (int(k as i64) * &w, total * &w)))
}

/// Stratified enclosure at depth `m`: one stratum per address of length `m`.
pub fn pushforward_certified(c: &Construction, m: usize) -> Result<StratifiedEnclosure> {
    check_cap(c.dim(), m)?;
    let base = u32::from(c.dim().base());
    let w = inv_pow(base, m);
    let strata = c
        .addresses(m)
        .into_iter()
        .map(|address| {
            let lo = address.value();
            Stratum {
                hi: &lo + &w,
                lo,
                weight: w.clone(),
                address,
            }
        })
        .collect();
    Ok(StratifiedEnclosure {
        dim: c.dim(),
        depth: m,
        strata,
    })
}

/// The depth-`m` sandwich in closed form, without listing strata.
///
/// The address of length `m` with digit value `k beta^-m` gives the stratum
/// `[k beta^-m, (k+1) beta^-m]` of weight `beta^-m`, so counting the strata
/// below `t` is a floor of `t beta^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressSandwich {
    pub dim: Dimension,
    pub depth: usize,
}

impl AddressSandwich {
    pub fn new(dim: Dimension, depth: usize) -> Self {
        Self { dim, depth }
    }

    pub fn weight(&self) -> Rational {
        inv_pow(u32::from(self.dim.base()), self.depth)
    }

    fn strata_count(&self) -> Rational {
        Rational::one() / self.weight()
    }

    fn clamp_count(&self, k: Rational) -> Rational {
        k.max(Rational::zero()).min(self.strata_count())
    }

    /// Number of strata whose upper end is at most `t`.
    fn ending_by(&self, t: &Rational) -> Rational {
        self.clamp_count((t * self.strata_count()).floor())
    }

    /// Number of strata whose lower end is at most `t`.
    fn starting_by(&self, t: &Rational) -> Rational {
        if t.is_negative() {
            return Rational::zero();
        }
        self.clamp_count((t * self.strata_count()).floor() + Rational::one())
    }

    pub fn lower_at(&self, t: &Rational) -> Rational {
        self.ending_by(t) * self.weight()
    }

    pub fn upper_at(&self, t: &Rational) -> Rational {
        self.starting_by(t) * self.weight()
    }

    /// `sup_t (upper - lower)`.
    ///
    /// On `[0, 1)` both staircases jump by one weight at every interior
    /// multiple of the weight, so the gap is constant there; outside it is 0.
    pub fn max_gap(&self) -> Rational {
        let zero = Rational::zero();
        self.upper_at(&zero) - self.lower_at(&zero)
    }

    /// KS interval over the sandwich.
    ///
    /// The identity lies between the staircases, so the lower end is 0; the
    /// upper staircase at `0` already reaches the gap, which bounds both sides.
    pub fn ks_to_uniform(&self) -> KsInterval {
        KsInterval {
            lo: Rational::zero(),
            hi: self.max_gap(),
        }
    }
}

/// Exact check that every level-`k` cell holds the same measure of `K_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualSplitCheck {
    pub k: usize,
    pub m: usize,
    #[serde(with = "serde_rational")]
    pub share: Rational,
    pub all_equal: bool,
    /// `share` times the number of level-`k` cells equals the measure of `K_m`.
    pub sums_to_total: bool,
}

pub fn equal_split_check(c: &Construction, k: usize, m: usize) -> Result<EqualSplitCheck> {
    if k == 0 || m < k {
        return Err(Error::Inapplicable(format!("need 1 <= k <= m, got k={k}, m={m}")));
    }
    let fine = c.family_with_addresses(m)?;
    let mut by_prefix: BTreeMap<Vec<u8>, Rational> = BTreeMap::new();
    for (address, cell) in &fine {
        *by_prefix
            .entry(address.digits()[..k - 1].to_vec())
            .or_insert_with(Rational::zero) += cell.measure();
    }
    let shares: Vec<&Rational> = by_prefix.values().collect();
    let share = shares[0].clone();
    let all_equal = shares.iter().all(|s| **s == share);
    let total = c.sequences().core_measure(c.dim(), m)?;
    let count = Rational::from_integer(by_prefix.len().into());
    Ok(EqualSplitCheck {
        k,
        m,
        sums_to_total: &share * count == total,
        share,
        all_equal,
    })
}

/// Values of `f` on one off-core region `Z_m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZAtom {
    pub level: usize,
    pub address: CellAddress,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub mass: Rational,
}

/// Split of the level-`n` approximation of `f_#(critical set)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPushforwardReport {
    pub dim: Dimension,
    pub schedule: ScheduleKind,
    pub n: usize,
    /// Exact measure of the level-`n+1` core, carried uniformly by `f`.
    #[serde(with = "serde_rational")]
    pub uniform_mass: Rational,
    /// Enclosure of the limiting core mass.
    pub uniform_limit_mass: Option<Interval>,
    /// KS distance of the normalized level-`n` uniform part to the uniform law.
    #[serde(with = "serde_rational")]
    pub uniform_ks: Rational,
    pub z_atoms: Vec<ZAtom>,
    /// Z-part aggregated by value.
    pub z_measure: DiscreteMeasure,
    #[serde(with = "serde_rational")]
    pub z_mass: Rational,
    /// Every Z value is `k / beta^n`.
    pub z_values_dyadic: bool,
    /// Every Z value equals the digit prefix of its region.
    pub z_values_match_digits: bool,
}

pub fn critical_pushforward_report(h: &FunctionHandle, n: usize) -> Result<CriticalPushforwardReport> {
    let c = h.construction();
    check_cap(c.dim(), n)?;
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let beta_n = Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(c.dim().base()), n));
    let mut z_atoms = Vec::new();
    let mut dyadic = true;
    let mut digits_match = true;
    for m in 1..=n {
        for z in c.z_set(m)? {
            // the sample point lies off K_{m+1}: f is an exact finite sum there
            let v = h
                .f_eval_rational(&z.sample_point(), h.tail(m + 1))?
                .exact()
                .ok_or_else(|| Error::Degenerate(format!("Z_{m} sample hit a transition zone")))?;
            dyadic &= (&v * &beta_n).is_integer();
            digits_match &= v == z.address.value();
            z_atoms.push(ZAtom {
                level: m,
                mass: z.measure(),
                address: z.address,
                value: v,
            });
        }
    }
    let z_measure = DiscreteMeasure::from_atoms(z_atoms.iter().map(|z| (z.value.clone(), z.mass.clone())))?;
    let uniform = pushforward_partial(c, n)?;
    Ok(CriticalPushforwardReport {
        dim: c.dim(),
        schedule: c.sequences().schedule().kind(),
        n,
        uniform_mass: uniform.measure.total().clone(),
        uniform_limit_mass: uniform.limit_mass,
        uniform_ks: uniform.measure.ks_to_uniform()?,
        z_mass: z_measure.total().clone(),
        z_measure,
        z_atoms,
        z_values_dyadic: dyadic,
        z_values_match_digits: digits_match,
    })
}

/// Seeded Monte Carlo sample of `f` on points of the level-`depth+1` core.
/// Exploratory only.
pub fn sample_core_values(h: &FunctionHandle, count: usize, depth: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = h.dim().get();
    let tol = h.tail(depth);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::Degenerate("core rarely hit by uniform samples".into()));
        }
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let walk = h.walk(&x, depth)?;
        if walk.end == WalkEnd::Deep {
            out.push(h.f_eval(&x, tol)?.value);
        }
    }
    Ok(out)
}

/// Formats an atom list for display.
pub fn describe(m: &DiscreteMeasure) -> String {
    m.atoms()
        .iter()
        .map(|a| format!("({}, {})", fmt_rational(&a.location), fmt_rational(&a.mass)))
        .collect::<Vec<_>>()
        .join(" ")
}
