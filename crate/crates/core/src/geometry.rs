//! Nested cell families with exact rational corners.
//!
//! Level 1 is the unit interval or square. A level-`n` cell of side `a_n` is split
//! into halves (1D) or quadrants (2D), and each part shrunk by `s_n` on every side
//! gives the level-`n+1` children. A digit string selects one child per level, so an
//! address of length `m` names a level-`m+1` cell.
//!
//! Quadrant numbering follows the Cartesian quadrants I..IV:
//! `0` upper-right, `1` upper-left, `2` lower-left, `3` lower-right.
//! In 1D digit `0` is the left half and `1` the right half.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_f64, int, serde_rational, serde_rational_vec, to_f64, Rational};
use crate::schedule::{AlphaSchedule, GeometrySequences};

/// Tag recorded in serialized reports so the digit convention is explicit.
pub const QUADRANT_CONVENTION: &str = "cartesian: 0=upper-right 1=upper-left 2=lower-left 3=lower-right";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn from_usize(d: usize) -> Option<Self> {
        match d {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            _ => None,
        }
    }

    pub fn get(self) -> usize {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }

    /// Number of children per cell, also the base of the value digits.
    pub fn base(self) -> u8 {
        match self {
            Self::One => 2,
            Self::Two => 4,
        }
    }

    /// Sup norm of one step function `H`: `1` in 1D, `3` in 2D.
    pub fn max_digit(self) -> u8 {
        self.base() - 1
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.get() as u8
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        Dimension::from_usize(v as usize).ok_or_else(|| format!("dimension must be 1 or 2, got {v}"))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D", self.get())
    }
}

/// Per-axis offset (in half-sides) of sub-cell `k` inside its parent.
pub fn quadrant_offset(dim: Dimension, k: u8) -> [u8; 2] {
    match (dim, k) {
        (Dimension::One, k) => [k, 0],
        (Dimension::Two, 0) => [1, 1],
        (Dimension::Two, 1) => [0, 1],
        (Dimension::Two, 2) => [0, 0],
        (Dimension::Two, _) => [1, 0],
    }
}

/// Inverse of [`quadrant_offset`].
pub fn quadrant_digit(dim: Dimension, upper_x: bool, upper_y: bool) -> u8 {
    match (dim, upper_x, upper_y) {
        (Dimension::One, x, _) => u8::from(x),
        (Dimension::Two, true, true) => 0,
        (Dimension::Two, false, true) => 1,
        (Dimension::Two, false, false) => 2,
        (Dimension::Two, true, false) => 3,
    }
}

/// Closed interval or square with exact corner and side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalCell {
    dim: Dimension,
    #[serde(with = "serde_rational_vec")]
    corner: Vec<Rational>,
    #[serde(with = "serde_rational")]
    side: Rational,
}

impl RationalCell {
    pub fn new(dim: Dimension, corner: Vec<Rational>, side: Rational) -> Self {
        assert_eq!(corner.len(), dim.get(), "corner arity must match dimension");
        assert!(side > Rational::zero(), "cells are nonempty");
        Self { dim, corner, side }
    }

    pub fn unit(dim: Dimension) -> Self {
        Self::new(dim, vec![Rational::zero(); dim.get()], Rational::one())
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn corner(&self) -> &[Rational] {
        &self.corner
    }

    pub fn side(&self) -> &Rational {
        &self.side
    }

    pub(crate) fn expect_dim(&self, d: usize) -> Result<()> {
        if self.dim.get() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: self.dim.get(),
            });
        }
        Ok(())
    }

    pub fn upper(&self) -> Vec<Rational> {
        self.corner.iter().map(|c| c + &self.side).collect()
    }

    pub fn midpoint(&self) -> Vec<Rational> {
        let half = &self.side / int(2);
        self.corner.iter().map(|c| c + &half).collect()
    }

    pub fn midpoint_f64(&self) -> Vec<f64> {
        self.midpoint().iter().map(to_f64).collect()
    }

    /// Length or area.
    pub fn measure(&self) -> Rational {
        match self.dim {
            Dimension::One => self.side.clone(),
            Dimension::Two => &self.side * &self.side,
        }
    }

    pub fn diameter(&self) -> f64 {
        let s = to_f64(&self.side);
        match self.dim {
            Dimension::One => s,
            Dimension::Two => s * std::f64::consts::SQRT_2,
        }
    }

    /// Closed-cell membership.
    pub fn contains(&self, point: &[Rational]) -> bool {
        point.len() == self.dim.get()
            && self
                .corner
                .iter()
                .zip(point)
                .all(|(c, p)| c <= p && *p <= c + &self.side)
    }

    /// Interior membership.
    pub fn contains_interior(&self, point: &[Rational]) -> bool {
        point.len() == self.dim.get()
            && self
                .corner
                .iter()
                .zip(point)
                .all(|(c, p)| c < p && *p < c + &self.side)
    }

    /// `true` when the closed cells share no point.
    pub fn is_disjoint(&self, other: &RationalCell) -> bool {
        self.corner
            .iter()
            .zip(&other.corner)
            .any(|(a, b)| a + &self.side < *b || b + &other.side < *a)
    }

    /// The cell with `margin` removed from every side.
    pub fn shrunk(&self, margin: &Rational) -> RationalCell {
        let corner = self.corner.iter().map(|c| c + margin).collect();
        RationalCell::new(self.dim, corner, &self.side - margin - margin)
    }

    /// Half-side sub-cell `k` (before shrinking).
    pub fn sub_cell(&self, k: u8) -> RationalCell {
        let half = &self.side / int(2);
        let off = quadrant_offset(self.dim, k);
        let corner = self
            .corner
            .iter()
            .zip(off)
            .map(|(c, o)| if o == 1 { c + &half } else { c.clone() })
            .collect();
        RationalCell::new(self.dim, corner, half)
    }
}

/// Digit string addressing nested cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellAddress {
    dim: Dimension,
    digits: Vec<u8>,
}

impl CellAddress {
    pub fn new(dim: Dimension, digits: Vec<u8>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d >= dim.base()) {
            return Err(Error::DigitOutOfRange {
                digit: d,
                base: dim.base(),
            });
        }
        Ok(Self { dim, digits })
    }

    pub fn root(dim: Dimension) -> Self {
        Self {
            dim,
            digits: Vec::new(),
        }
    }

    /// Parse a compact digit string such as `"10110"`.
    pub fn parse(dim: Dimension, s: &str) -> Result<Self> {
        let digits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or(Error::DigitOutOfRange { digit: u8::MAX, base: dim.base() })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, digits)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Level of the addressed cell (`len + 1`).
    pub fn level(&self) -> usize {
        self.digits.len() + 1
    }

    pub fn prefix(&self, len: usize) -> CellAddress {
        CellAddress {
            dim: self.dim,
            digits: self.digits[..len.min(self.digits.len())].to_vec(),
        }
    }

    pub fn push(&mut self, digit: u8) -> Result<()> {
        if digit >= self.dim.base() {
            return Err(Error::DigitOutOfRange {
                digit,
                base: self.dim.base(),
            });
        }
        self.digits.push(digit);
        Ok(())
    }

    /// `sum d_i base^-i`.
    pub fn value(&self) -> Rational {
        crate::rational::digit_value(&self.digits, u32::from(self.dim.base()))
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Result of locating a point in the nested families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    /// The point lies in the addressed cell.
    Inside(CellAddress),
    /// First level whose union of cells misses the point.
    Outside(usize),
}

/// `Q_0 minus its child`: the off-core plateau at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZRegion {
    pub level: usize,
    pub address: CellAddress,
    /// Sub-cell `0` of the level cell, before shrinking.
    pub outer: RationalCell,
    /// Its shrunk child, a level `level + 1` cell.
    pub excluded: RationalCell,
}

impl ZRegion {
    pub fn measure(&self) -> Rational {
        self.outer.measure() - self.excluded.measure()
    }

    /// Exact point of the region: inside `outer` but in the gap around `excluded`.
    pub fn sample_point(&self) -> Vec<Rational> {
        // the gap between outer and excluded has width s on every side
        let gap = (self.excluded.corner()[0].clone() - &self.outer.corner()[0]) / int(2);
        self.outer.corner().iter().map(|c| c + &gap).collect()
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.outer.contains(p) && !self.excluded.contains(p)
    }
}

/// Band of width `s_m` inside the boundary of a level-`m` cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRegion {
    pub level: usize,
    pub cell: RationalCell,
    #[serde(with = "serde_rational")]
    pub width: Rational,
}

impl FrameRegion {
    /// Open band: distance to the boundary strictly below the width.
    pub fn contains(&self, p: &[Rational]) -> bool {
        self.cell.contains(p) && !self.cell.shrunk(&self.width).contains(p)
    }

    pub fn measure(&self) -> Rational {
        self.cell.measure() - self.cell.shrunk(&self.width).measure()
    }

    /// Deterministic lattice of about `count` points in the open band.
    ///
    /// Points are spread along the boundary at `depth_steps` depths strictly
    /// between `0` and the band width.
    pub fn lattice(&self, count: usize) -> Vec<Vec<f64>> {
        let side = to_f64(self.cell.side());
        let width = to_f64(&self.width);
        let corner: Vec<f64> = self.cell.corner().iter().map(to_f64).collect();
        let depth_steps = 8usize;
        let depths: Vec<f64> = (0..depth_steps)
            .map(|i| width * (i as f64 + 0.5) / depth_steps as f64)
            .collect();
        match self.cell.dim() {
            Dimension::One => depths
                .iter()
                .flat_map(|&d| [vec![corner[0] + d], vec![corner[0] + side - d]])
                .collect(),
            Dimension::Two => {
                let per_side = (count / (4 * depth_steps)).max(1);
                let mut pts = Vec::with_capacity(per_side * 4 * depth_steps);
                for &d in &depths {
                    for i in 0..per_side {
                        let t = side * (i as f64 + 0.5) / per_side as f64;
                        pts.push(vec![corner[0] + t, corner[1] + d]);
                        pts.push(vec![corner[0] + t, corner[1] + side - d]);
                        pts.push(vec![corner[0] + d, corner[1] + t]);
                        pts.push(vec![corner[0] + side - d, corner[1] + t]);
                    }
                }
                pts
            }
        }
    }

    /// Uniform sample from the band by rejection.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let side = to_f64(self.cell.side());
        let width = to_f64(&self.width);
        let corner: Vec<f64> = self.cell.corner().iter().map(to_f64).collect();
        loop {
            let p: Vec<f64> = corner.iter().map(|c| c + rng.random::<f64>() * side).collect();
            let inner = p
                .iter()
                .zip(&corner)
                .all(|(x, c)| *x >= c + width && *x <= c + side - width);
            if !inner {
                return p;
            }
        }
    }
}

/// Enumeration caps (cells per family grow like `2^n` / `4^n`).
pub const FAMILY_CAP_1D: usize = 24;
pub const FAMILY_CAP_2D: usize = 12;

/// The nested families for one dimension and schedule.
#[derive(Debug, Clone)]
pub struct Construction {
    dim: Dimension,
    seq: Arc<GeometrySequences>,
}

impl Construction {
    pub fn new(dim: Dimension, schedule: AlphaSchedule) -> Self {
        Self {
            dim,
            seq: Arc::new(GeometrySequences::new(schedule)),
        }
    }

    pub fn with_sequences(dim: Dimension, seq: Arc<GeometrySequences>) -> Self {
        Self { dim, seq }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn sequences(&self) -> &Arc<GeometrySequences> {
        &self.seq
    }

    pub fn family_cap(&self) -> usize {
        match self.dim {
            Dimension::One => FAMILY_CAP_1D,
            Dimension::Two => FAMILY_CAP_2D,
        }
    }

    /// Level-`n+1` child of a level-`n` cell.
    pub fn child(&self, cell: &RationalCell, n: usize, digit: u8) -> Result<RationalCell> {
        if cell.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                actual: cell.dim().get(),
            });
        }
        if digit >= self.dim.base() {
            return Err(Error::DigitOutOfRange {
                digit,
                base: self.dim.base(),
            });
        }
        let level = self.seq.level(n)?;
        if cell.side() != &level.side {
            return Err(Error::Degenerate(format!(
                "cell of side {} is not a level-{n} cell (side {})",
                cell.side(),
                level.side
            )));
        }
        Ok(cell.sub_cell(digit).shrunk(&level.shrink))
    }

    /// Cell at level `address.len() + 1`.
    pub fn cell_of(&self, address: &CellAddress) -> Result<RationalCell> {
        if address.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                actual: address.dim().get(),
            });
        }
        let mut cell = RationalCell::unit(self.dim);
        for (i, &d) in address.digits().iter().enumerate() {
            cell = self.child(&cell, i + 1, d)?;
        }
        Ok(cell)
    }

    /// All addresses of length `len`, in lexicographic digit order.
    pub fn addresses(&self, len: usize) -> Vec<CellAddress> {
        let base = self.dim.base();
        let mut out = vec![CellAddress::root(self.dim)];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|a| {
                    (0..base).map(move |d| {
                        let mut digits = a.digits.clone();
                        digits.push(d);
                        CellAddress { dim: a.dim, digits }
                    })
                })
                .collect();
        }
        out
    }

    /// The family of level-`n` cells with their addresses.
    pub fn family_with_addresses(&self, n: usize) -> Result<Vec<(CellAddress, RationalCell)>> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        if n > self.family_cap() {
            return Err(Error::DepthCap {
                requested: n,
                cap: self.family_cap(),
            });
        }
        let mut cells = vec![(CellAddress::root(self.dim), RationalCell::unit(self.dim))];
        for level in 1..n {
            let mut next = Vec::with_capacity(cells.len() * self.dim.base() as usize);
            for (addr, cell) in &cells {
                for d in 0..self.dim.base() {
                    let mut a = addr.clone();
                    a.digits.push(d);
                    next.push((a, self.child(cell, level, d)?));
                }
            }
            cells = next;
        }
        Ok(cells)
    }

    pub fn family(&self, n: usize) -> Result<Vec<RationalCell>> {
        Ok(self
            .family_with_addresses(n)?
            .into_iter()
            .map(|(_, c)| c)
            .collect())
    }

    /// Address of length `depth` of the cell containing `point`, or the first level it leaves.
    pub fn locate(&self, point: &[Rational], depth: usize) -> Result<Location> {
        if point.len() != self.dim.get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                actual: point.len(),
            });
        }
        let mut cell = RationalCell::unit(self.dim);
        if !cell.contains(point) {
            return Err(Error::PointOutsideUnitCell);
        }
        let mut address = CellAddress::root(self.dim);
        for level in 1..=depth {
            let mut found = None;
            for d in 0..self.dim.base() {
                let c = self.child(&cell, level, d)?;
                if c.contains(point) {
                    found = Some((d, c));
                    break;
                }
            }
            match found {
                Some((d, c)) => {
                    address.digits.push(d);
                    cell = c;
                }
                None => return Ok(Location::Outside(level + 1)),
            }
        }
        Ok(Location::Inside(address))
    }

    pub fn locate_f64(&self, point: &[f64], depth: usize) -> Result<Location> {
        let p = point
            .iter()
            .map(|&x| from_f64(x).ok_or(Error::PointOutsideUnitCell))
            .collect::<Result<Vec<_>>>()?;
        self.locate(&p, depth)
    }

    /// `Z_n = (union of sub-cells 0 of level-n cells) minus K_{n+1}`, one region per cell.
    pub fn z_set(&self, n: usize) -> Result<Vec<ZRegion>> {
        self.family_with_addresses(n)?
            .into_iter()
            .map(|(address, cell)| self.z_region(&address, &cell, n))
            .collect()
    }

    pub fn z_region(&self, address: &CellAddress, cell: &RationalCell, n: usize) -> Result<ZRegion> {
        Ok(ZRegion {
            level: n,
            address: address.clone(),
            outer: cell.sub_cell(0),
            excluded: self.child(cell, n, 0)?,
        })
    }

    /// Frame of the level-`m` ancestor of the addressed cell.
    pub fn frame(&self, address: &CellAddress, m: usize) -> Result<FrameRegion> {
        if m == 0 {
            return Err(Error::ZeroLevel);
        }
        if address.len() + 1 < m {
            return Err(Error::AddressTooShort {
                len: address.len(),
                needed: m - 1,
            });
        }
        let cell = self.cell_of(&address.prefix(m - 1))?;
        Ok(FrameRegion {
            level: m,
            cell,
            width: self.seq.shrink(m)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::SeedableRng;

    fn c1() -> Construction {
        Construction::new(Dimension::One, AlphaSchedule::InverseSquare)
    }

    fn c2() -> Construction {
        Construction::new(Dimension::Two, AlphaSchedule::InverseSquare)
    }

    fn interval(lo: Rational, hi: Rational) -> RationalCell {
        let side = &hi - &lo;
        RationalCell::new(Dimension::One, vec![lo], side)
    }

    #[test]
    fn child_examples() {
        let g = c1();
        let root = RationalCell::unit(Dimension::One);
        let right = g.child(&root, 1, 1).unwrap();
        assert_eq!(right, interval(rat(5, 8), rat(7, 8)));
        assert_eq!(g.child(&right, 2, 0).unwrap(), interval(rat(81, 128), rat(95, 128)));
        assert!(g.child(&root, 1, 2).is_err());

        let q = c2().child(&RationalCell::unit(Dimension::Two), 1, 0).unwrap();
        assert_eq!(q.corner(), &[rat(5, 8), rat(5, 8)]);
        assert_eq!(q.side(), &rat(1, 4));
    }

    #[test]
    fn family_examples() {
        let g = c1();
        assert_eq!(
            g.family(2).unwrap(),
            vec![interval(rat(1, 8), rat(3, 8)), interval(rat(5, 8), rat(7, 8))]
        );
        assert!(g.family(3).unwrap().contains(&interval(rat(17, 128), rat(31, 128))));
        let f2 = c2().family(2).unwrap();
        assert_eq!(f2.len(), 4);
        assert!(f2.iter().all(|c| c.side() == &rat(1, 4)));
        assert_eq!(g.family(25), Err(Error::DepthCap { requested: 25, cap: 24 }));
        assert!(c2().family(13).is_err());
    }

    #[test]
    fn locate_examples() {
        let g = c1();
        assert_eq!(
            g.locate(&[from_f64(0.7).unwrap()], 2).unwrap(),
            Location::Inside(CellAddress::new(Dimension::One, vec![1, 0]).unwrap())
        );
        assert_eq!(g.locate(&[rat(1, 2)], 1).unwrap(), Location::Outside(2));
        assert_eq!(
            c2().locate(&[rat(3, 4), rat(3, 4)], 1).unwrap(),
            Location::Inside(CellAddress::new(Dimension::Two, vec![0]).unwrap())
        );
        assert_eq!(g.locate(&[rat(3, 2)], 1), Err(Error::PointOutsideUnitCell));
        // closed cells: the endpoint 5/8 belongs to the right child
        assert_eq!(
            g.locate(&[rat(5, 8)], 1).unwrap(),
            Location::Inside(CellAddress::new(Dimension::One, vec![1]).unwrap())
        );
    }

    #[test]
    fn families_disjoint_with_gaps() {
        for g in [c1(), c2()] {
            for n in 2..=4 {
                let fam = g.family(n).unwrap();
                let gap = int(2) * g.sequences().shrink(n - 1).unwrap();
                for (i, a) in fam.iter().enumerate() {
                    for b in &fam[i + 1..] {
                        // some axis is separated by at least 2 s_{n-1}
                        let separated = a.corner().iter().zip(b.corner()).any(|(x, y)| {
                            x + a.side() + &gap <= *y || y + b.side() + &gap <= *x
                        });
                        assert!(separated && a.is_disjoint(b));
                    }
                }
            }
        }
    }

    #[test]
    fn family_measure_matches_core_measure() {
        for g in [c1(), c2()] {
            for n in 1..=5 {
                let total: Rational = g.family(n).unwrap().iter().map(|c| c.measure()).sum();
                assert_eq!(total, g.sequences().core_measure(g.dim(), n).unwrap());
                let r = g.sequences().partial(n - 1).unwrap();
                let expect = if g.dim() == Dimension::One { r.clone() } else { &r * &r };
                assert_eq!(total, expect);
            }
        }
    }

    #[test]
    fn child_nesting_margin_is_exact() {
        let g = c2();
        let root = RationalCell::unit(Dimension::Two);
        for d in 0..4 {
            let child = g.child(&root, 1, d).unwrap();
            let quadrant = root.sub_cell(d);
            for (c, q) in child.corner().iter().zip(quadrant.corner()) {
                assert_eq!(c - q, rat(1, 8));
            }
            assert_eq!(quadrant.side() - child.side(), rat(1, 4));
        }
    }

    #[test]
    fn midpoints_locate_back() {
        for g in [c1(), c2()] {
            for addr in g.addresses(4) {
                let mid = g.cell_of(&addr).unwrap().midpoint();
                assert_eq!(g.locate(&mid, 4).unwrap(), Location::Inside(addr));
            }
        }
    }

    #[test]
    fn diameters_shrink() {
        let g = c2();
        let mut prev = f64::INFINITY;
        for n in 1..=20 {
            let cell = g.cell_of(&CellAddress::new(Dimension::Two, vec![2; n - 1]).unwrap()).unwrap();
            let d = cell.diameter();
            let a = to_f64(&g.sequences().side(n).unwrap());
            assert!((d - a * std::f64::consts::SQRT_2).abs() < 1e-15);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn z_set_examples() {
        let g = c2();
        let z1 = g.z_set(1).unwrap();
        assert_eq!(z1.len(), 1);
        assert_eq!(z1[0].outer.corner(), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(z1[0].outer.side(), &rat(1, 2));
        assert_eq!(z1[0].excluded.corner(), &[rat(5, 8), rat(5, 8)]);
        assert_eq!(z1[0].measure(), rat(3, 16));
        let z2 = g.z_set(2).unwrap();
        assert_eq!(z2.len(), 4);
        let a3 = g.sequences().side(3).unwrap();
        for z in &z2 {
            assert_eq!(z.measure(), rat(1, 64) - &a3 * &a3);
            assert!(z.contains(&z.sample_point()));
        }
    }

    #[test]
    fn frame_samples_leave_next_level() {
        let g = c2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let addr = CellAddress::new(Dimension::Two, vec![3, 1, 2]).unwrap();
        for m in 1..=3 {
            let frame = g.frame(&addr, m).unwrap();
            assert_eq!(frame.width, g.sequences().shrink(m).unwrap());
            let mut pts = frame.lattice(400);
            pts.extend((0..200).map(|_| frame.sample(&mut rng)));
            for p in pts {
                let q: Vec<Rational> = p.iter().map(|&x| from_f64(x).unwrap()).collect();
                assert!(frame.contains(&q));
                match g.locate(&q, m).unwrap() {
                    Location::Outside(l) => assert!(l <= m + 1),
                    Location::Inside(_) => panic!("frame point inside level {}", m + 1),
                }
            }
        }
        let root = g.frame(&CellAddress::root(Dimension::Two), 1).unwrap();
        assert_eq!(root.width, rat(1, 8));
        assert_eq!(root.measure(), rat(1, 1) - rat(9, 16));
    }

    #[test]
    fn serde_round_trip() {
        let g = c2();
        let addr = CellAddress::new(Dimension::Two, vec![0, 3]).unwrap();
        let cell = g.cell_of(&addr).unwrap();
        let json = serde_json::to_string(&cell).unwrap();
        assert!(json.contains("\"num\""));
        let back: RationalCell = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cell);
        let a_json = serde_json::to_string(&addr).unwrap();
        assert_eq!(a_json, r#"{"dim":2,"digits":[0,3]}"#);
    }
}
