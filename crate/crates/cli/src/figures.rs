//! Plot data for the construction and critical-set figures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use sardlab::evaluator::FunctionHandle;
use sardlab::geometry::ZRegion;
use sardlab::measure::pushforward_partial;
use sardlab::rational::{fmt_rational, from_f64, to_f64};
use sardlab::{CellAddress, Construction, Dimension, Rational, RationalCell};

use crate::config::{Format, RunConfig, Settings};
use crate::exit::{CliError, PASS};
use crate::output::{envelope, fmt_f64, print_json, write_csv};

/// Levels drawn in every figure.
const LEVELS: [usize; 2] = [1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "construction-1d")]
    Construction1d,
    #[value(name = "construction-2d")]
    Construction2d,
    CriticalSets,
}

impl Figure {
    fn name(self) -> &'static str {
        match self {
            Self::Construction1d => "construction-1d",
            Self::Construction2d => "construction-2d",
            Self::CriticalSets => "critical-sets",
        }
    }
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    pub figure: Figure,
    /// Samples per axis; 1024 for graphs, 128 for rasters, 256 for region maps.
    #[arg(long)]
    pub res: Option<usize>,
}

fn centre(i: usize, res: usize) -> f64 {
    (i as f64 + 0.5) / res as f64
}

fn cell_columns(dim: Dimension, cell: Option<&RationalCell>) -> Vec<String> {
    match cell {
        Some(c) => c
            .corner()
            .iter()
            .chain(std::iter::once(c.side()))
            .map(fmt_rational)
            .collect(),
        None => vec![String::new(); dim.get() + 1],
    }
}

fn cell_header(dim: Dimension, prefix: &str) -> Vec<String> {
    let mut h = vec![format!("{prefix}corner_x")];
    if dim == Dimension::Two {
        h.push(format!("{prefix}corner_y"));
    }
    h.push(format!("{prefix}side"));
    h
}

/// Plateaus of `f_n`: level-`(n+1)` cells and the regions `Z_1..Z_n`, with exact values.
fn plateau_rows(h: &FunctionHandle, n: usize) -> Result<Vec<(String, usize, CellAddress, RationalCell, Option<RationalCell>, Rational)>, CliError> {
    let c = h.construction();
    let mut rows = Vec::new();
    for (address, cell) in c.family_with_addresses(n + 1)? {
        let v = h
            .f_partial_rational(n, &cell.midpoint())?
            .ok_or_else(|| CliError::usage("cell midpoint off the plateau"))?;
        rows.push(("cell".to_string(), n + 1, address, cell, None, v));
    }
    for m in 1..=n {
        for z in c.z_set(m)? {
            let v = h
                .f_partial_rational(n, &z.sample_point())?
                .ok_or_else(|| CliError::usage("region sample off the plateau"))?;
            let ZRegion { level, address, outer, excluded } = z;
            rows.push(("z".to_string(), level, address, outer, Some(excluded), v));
        }
    }
    Ok(rows)
}

fn write_plateaus(h: &FunctionHandle, path: &PathBuf) -> Result<BTreeMap<usize, Vec<String>>, CliError> {
    let dim = h.dim();
    let mut header = vec!["n".to_string(), "kind".into(), "level".into(), "address".into()];
    header.extend(cell_header(dim, ""));
    header.extend(cell_header(dim, "excluded_"));
    header.extend(["value".to_string(), "value_decimal".into()]);
    let mut records = Vec::new();
    let mut values = BTreeMap::new();
    for n in LEVELS {
        let mut set = BTreeSet::new();
        for (kind, level, address, cell, excluded, v) in plateau_rows(h, n)? {
            let digits: String = address.digits().iter().map(|d| d.to_string()).collect();
            let mut r = vec![n.to_string(), kind, level.to_string(), digits];
            r.extend(cell_columns(dim, Some(&cell)));
            r.extend(cell_columns(dim, excluded.as_ref()));
            r.extend([fmt_rational(&v), fmt_f64(to_f64(&v))]);
            records.push(r);
            set.insert(v);
        }
        values.insert(n, set.iter().map(fmt_rational).collect());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(Some(path), &header, records)?;
    Ok(values)
}

fn write_pushforwards(c: &Construction, path: &PathBuf) -> Result<(), CliError> {
    let mut records = Vec::new();
    for n in LEVELS {
        let p = pushforward_partial(c, n)?;
        for a in p.measure.atoms() {
            records.push([
                n.to_string(),
                fmt_rational(&a.location),
                fmt_f64(to_f64(&a.location)),
                fmt_rational(&a.mass),
                fmt_f64(to_f64(&a.mass)),
            ]);
        }
    }
    write_csv(Some(path), &["n", "location", "location_decimal", "mass", "mass_decimal"], records)
}

/// Membership label of a point in `K_{n+1}` or `Z_m`, `m <= n`.
struct RegionMap {
    n: usize,
    core: Vec<RationalCell>,
    z: Vec<ZRegion>,
}

impl RegionMap {
    fn new(c: &Construction, n: usize) -> Result<Self, CliError> {
        let mut z = Vec::new();
        for m in 1..=n {
            z.extend(c.z_set(m)?);
        }
        Ok(Self {
            n,
            core: c.family(n + 1)?,
            z,
        })
    }

    fn label(&self, p: &[Rational]) -> String {
        if self.core.iter().any(|cell| cell.contains(p)) {
            return format!("K{}", self.n + 1);
        }
        match self.z.iter().find(|z| z.contains(p)) {
            Some(z) => format!("Z{}", z.level),
            None => "none".to_string(),
        }
    }
}

pub fn figure_data(cfg: &RunConfig, args: &FigureArgs) -> Result<u8, CliError> {
    let default_dim = match args.figure {
        Figure::Construction1d => Dimension::One,
        _ => Dimension::Two,
    };
    let mut cfg = cfg.clone();
    cfg.dimension = Some(default_dim.get() as u8);
    let st = Settings::resolve(&cfg, default_dim, Format::Csv)?;
    let h = st.handle()?;
    let c = h.construction();
    let dir = st.out_path(args.figure.name())?;
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut summary = json!({});
    match args.figure {
        Figure::Construction1d => {
            let res = args.res.unwrap_or(1024);
            let graph = dir.join("graph.csv");
            let rows = (0..res)
                .map(|i| {
                    let x = centre(i, res);
                    Ok([fmt_f64(x), fmt_f64(h.f_partial_value(1, &[x])?), fmt_f64(h.f_partial_value(2, &[x])?)])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            write_csv(Some(&graph), &["x", "f1", "f2"], rows)?;
            let plateaus = dir.join("plateaus.csv");
            summary["plateau_values"] = json!(write_plateaus(&h, &plateaus)?);
            let push = dir.join("pushforward.csv");
            write_pushforwards(c, &push)?;
            files.extend([graph, plateaus, push]);
        }
        Figure::Construction2d => {
            let res = args.res.unwrap_or(128);
            let raster = dir.join("raster.csv");
            let mut rows = Vec::with_capacity(res * res);
            for j in 0..res {
                for i in 0..res {
                    let p = [centre(i, res), centre(j, res)];
                    rows.push([
                        fmt_f64(p[0]),
                        fmt_f64(p[1]),
                        fmt_f64(h.f_partial_value(1, &p)?),
                        fmt_f64(h.f_partial_value(2, &p)?),
                    ]);
                }
            }
            write_csv(Some(&raster), &["x", "y", "f1", "f2"], rows)?;
            let plateaus = dir.join("plateaus.csv");
            summary["plateau_values"] = json!(write_plateaus(&h, &plateaus)?);
            let push = dir.join("pushforward.csv");
            write_pushforwards(c, &push)?;
            files.extend([raster, plateaus, push]);
        }
        Figure::CriticalSets => {
            let res = args.res.unwrap_or(256);
            let maps = LEVELS
                .iter()
                .map(|&n| RegionMap::new(c, n))
                .collect::<Result<Vec<_>, _>>()?;
            let raster = dir.join("raster.csv");
            let mut rows = Vec::with_capacity(res * res);
            let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); maps.len()];
            for j in 0..res {
                for i in 0..res {
                    let (x, y) = (centre(i, res), centre(j, res));
                    let p = [from_f64(x).expect("finite"), from_f64(y).expect("finite")];
                    let mut row = vec![fmt_f64(x), fmt_f64(y)];
                    for (k, map) in maps.iter().enumerate() {
                        let label = map.label(&p);
                        *counts[k].entry(label.clone()).or_default() += 1;
                        row.push(label);
                    }
                    rows.push(row);
                }
            }
            write_csv(Some(&raster), &["x", "y", "f1", "f2"], rows)?;
            let regions = dir.join("regions.csv");
            let dim = Dimension::Two;
            let mut header = vec!["n".to_string(), "label".into(), "address".into()];
            header.extend(cell_header(dim, ""));
            header.extend(cell_header(dim, "excluded_"));
            let mut records = Vec::new();
            for map in &maps {
                for cell in &map.core {
                    let mut r = vec![map.n.to_string(), format!("K{}", map.n + 1), String::new()];
                    r.extend(cell_columns(dim, Some(cell)));
                    r.extend(cell_columns(dim, None));
                    records.push(r);
                }
                for z in &map.z {
                    let digits: String = z.address.digits().iter().map(|d| d.to_string()).collect();
                    let mut r = vec![map.n.to_string(), format!("Z{}", z.level), digits];
                    r.extend(cell_columns(dim, Some(&z.outer)));
                    r.extend(cell_columns(dim, Some(&z.excluded)));
                    records.push(r);
                }
            }
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            write_csv(Some(&regions), &header, records)?;
            summary["label_counts"] = json!({ "f1": counts[0], "f2": counts[1] });
            files.extend([raster, regions]);
        }
    }
    print_json(&envelope(
        "figure-data",
        json!({
            "figure": args.figure.name(),
            "schedule": st.kind,
            "files": files,
            "summary": summary,
        }),
    )?)?;
    Ok(PASS)
}
