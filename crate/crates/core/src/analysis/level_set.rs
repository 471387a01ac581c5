//! Level-set components through points with a nonzero digit at level `M`.
//!
//! Let `x` be the midpoint of the addressed cell and `P` the value of the
//! first `M - 1` digits. On the ring `sub_cell(b_M)` minus its child, `f` stays
//! strictly below `P + b_M 4^-M`, while `f(x)` exceeds it by the weight of the
//! later digits. The level set through `x` therefore cannot cross the ring and
//! stays inside the level-`(M+1)` cell. The frame of the level-`M` cell
//! carries values in `[P, P + 3 4^-M)`, so it separates only when `b_M = 3`.

use std::collections::VecDeque;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::FunctionHandle;
use crate::geometry::{CellAddress, Dimension, RationalCell};
use crate::rational::{int, inv_pow, serde_rational, to_f64, Rational};

pub const DEFAULT_RESOLUTION: usize = 256;
pub const FRAME_SAMPLES: usize = 10_000;
/// Evaluation tolerance relative to `eps`, clipped to the depth cap.
const TOL_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterCell {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub in_component: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComponentReport {
    pub address: CellAddress,
    pub m: usize,
    pub digit: u8,
    pub eps: f64,
    pub resolution: usize,
    pub base_point: [f64; 2],
    #[serde(with = "serde_rational")]
    pub base_value: Rational,
    /// Flood-fill window.
    pub region: RationalCell,
    pub frame_samples: usize,
    /// `min |f(z) - f(x)|` over the frame lattice, less evaluation radii.
    pub frame_min: f64,
    /// Proven gap between frame values and `f(x)`; only when `b_M = 3`.
    pub frame_certified_gap: Option<f64>,
    /// Proven gap between ring values and `f(x)`: the weight of digits after `M`.
    #[serde(with = "serde_rational")]
    pub ring_gap: Rational,
    /// Below this `eps` the relaxed set also misses the ring.
    pub eps_threshold: f64,
    pub component_cells: usize,
    /// Diagonal of the component's bounding box, counting whole grid cells.
    pub diameter: f64,
    /// Diameter of the level-`M` cell.
    pub diameter_bound: f64,
    pub touches_region_boundary: bool,
    pub pass: bool,
    #[serde(skip)]
    pub raster: Vec<RasterCell>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelProbeOptions {
    pub resolution: Option<usize>,
    /// Address of the flood-fill window; defaults to the level-`(M-1)` ancestor.
    pub region: Option<CellAddress>,
    pub frame_samples: Option<usize>,
}

fn check_preconditions(address: &CellAddress, m: usize) -> Result<u8> {
    if m == 0 {
        return Err(Error::ZeroLevel);
    }
    let digits = address.digits();
    if digits.len() < m {
        return Err(Error::AddressTooShort {
            len: digits.len(),
            needed: m,
        });
    }
    if digits[m - 1..].iter().all(|&d| d == 0) {
        return Err(Error::Inapplicable(format!(
            "all digits from position {m} on are zero, so f(x) is a plateau value"
        )));
    }
    let b = digits[m - 1];
    if b == 0 {
        return Err(Error::DigitPrecondition {
            position: m,
            digit: 0,
            expected: "nonzero",
        });
    }
    if digits[m..].iter().all(|&d| d == 0) {
        return Err(Error::Inapplicable(format!(
            "all digits after position {m} are zero, so f(x) is a plateau value"
        )));
    }
    Ok(b)
}

pub fn level_component_probe(
    h: &FunctionHandle,
    address: &CellAddress,
    m: usize,
    eps: f64,
    opts: &LevelProbeOptions,
) -> Result<LevelComponentReport> {
    if h.dim() != Dimension::Two || address.dim() != Dimension::Two {
        return Err(Error::WrongDimension(2));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidTolerance(eps));
    }
    let b = check_preconditions(address, m)?;
    let c = h.construction();
    let tol = (eps * TOL_FACTOR).max(h.tail(h.depth_cap()));

    let mid = c.cell_of(address)?.midpoint();
    let base_point = [to_f64(&mid[0]), to_f64(&mid[1])];
    // the walk has to reach the level where the midpoint leaves every child
    let base = h.f_eval_rational(&mid, tol.min(h.tail(address.len() + 1)))?;
    let base_value = base.exact().ok_or_else(|| Error::Inconclusive {
        reason: "midpoint value is not an exact plateau value".into(),
        needed_depth: address.len() + 1,
    })?;
    let fx = to_f64(&base_value);

    let ring_gap: Rational = address.digits()[m..]
        .iter()
        .enumerate()
        .map(|(i, &d)| int(i64::from(d)) * inv_pow(4, m + 1 + i))
        .sum();
    let frame_certified_gap = (b == 3).then(|| to_f64(&ring_gap));

    let frame = c.frame(address, m)?;
    let lattice = frame.lattice(opts.frame_samples.unwrap_or(FRAME_SAMPLES));
    let mut frame_min = f64::INFINITY;
    for p in &lattice {
        let v = h.f_eval(p, tol)?;
        frame_min = frame_min.min((v.value - fx).abs() - v.radius);
    }

    let region = match &opts.region {
        Some(r) => {
            if !address.digits().starts_with(r.digits()) {
                return Err(Error::Degenerate("flood-fill region does not contain the base point".into()));
            }
            c.cell_of(r)?
        }
        None => c.cell_of(&address.prefix(m.saturating_sub(2)))?,
    };
    let res = opts.resolution.unwrap_or(DEFAULT_RESOLUTION);
    if res < 2 {
        return Err(Error::Degenerate(format!("grid resolution {res} below 2")));
    }
    let fill = flood_fill(h, &region, res, base_point, fx, eps, tol)?;

    let diameter_bound = to_f64(&c.sequences().side(m)?) * std::f64::consts::SQRT_2;
    let pass = frame_min > 0.0
        && !ring_gap.is_zero()
        && fill.diameter <= diameter_bound
        && !(m >= 2 && fill.touches_boundary);
    Ok(LevelComponentReport {
        address: address.clone(),
        m,
        digit: b,
        eps,
        resolution: res,
        base_point,
        base_value,
        region,
        frame_samples: lattice.len(),
        frame_min,
        frame_certified_gap,
        eps_threshold: to_f64(&ring_gap),
        ring_gap,
        component_cells: fill.cells,
        diameter: fill.diameter,
        diameter_bound,
        touches_region_boundary: fill.touches_boundary,
        pass,
        raster: fill.raster,
    })
}

struct Fill {
    cells: usize,
    diameter: f64,
    touches_boundary: bool,
    raster: Vec<RasterCell>,
}

/// 4-connected component of `{|f - fx| <= eps}` on cell centres, seeded at `x`.
fn flood_fill(
    h: &FunctionHandle,
    region: &RationalCell,
    res: usize,
    x: [f64; 2],
    fx: f64,
    eps: f64,
    tol: f64,
) -> Result<Fill> {
    let corner = [to_f64(&region.corner()[0]), to_f64(&region.corner()[1])];
    let step = to_f64(region.side()) / res as f64;
    let centre = |i: usize, j: usize| [corner[0] + (i as f64 + 0.5) * step, corner[1] + (j as f64 + 0.5) * step];
    let mut values = Vec::with_capacity(res * res);
    let mut inside = Vec::with_capacity(res * res);
    for j in 0..res {
        for i in 0..res {
            let v = h.f_eval(&centre(i, j), tol)?;
            values.push(v.value);
            inside.push((v.value - fx).abs() - v.radius <= eps);
        }
    }
    let index = |t: f64, k: usize| (((t - corner[k]) / step).floor().max(0.0) as usize).min(res - 1);
    let seed = (index(x[0], 0), index(x[1], 1));
    inside[seed.1 * res + seed.0] = true;

    let mut seen = vec![false; res * res];
    let mut queue = VecDeque::from([seed]);
    seen[seed.1 * res + seed.0] = true;
    let (mut imin, mut imax, mut jmin, mut jmax) = (seed.0, seed.0, seed.1, seed.1);
    let mut cells = 0;
    while let Some((i, j)) = queue.pop_front() {
        cells += 1;
        imin = imin.min(i);
        imax = imax.max(i);
        jmin = jmin.min(j);
        jmax = jmax.max(j);
        let mut visit = |a: usize, b: usize| {
            let k = b * res + a;
            if inside[k] && !seen[k] {
                seen[k] = true;
                queue.push_back((a, b));
            }
        };
        if i > 0 {
            visit(i - 1, j);
        }
        if i + 1 < res {
            visit(i + 1, j);
        }
        if j > 0 {
            visit(i, j - 1);
        }
        if j + 1 < res {
            visit(i, j + 1);
        }
    }
    let w = (imax - imin + 1) as f64 * step;
    let ht = (jmax - jmin + 1) as f64 * step;
    let raster = (0..res * res)
        .map(|k| {
            let p = centre(k % res, k / res);
            RasterCell {
                x: p[0],
                y: p[1],
                value: values[k],
                in_component: seen[k],
            }
        })
        .collect();
    Ok(Fill {
        cells,
        diameter: w.hypot(ht),
        touches_boundary: imin == 0 || jmin == 0 || imax == res - 1 || jmax == res - 1,
        raster,
    })
}
