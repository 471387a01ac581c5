use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use sardlab::analysis::criticality::criticality_probe;
use sardlab::analysis::holder::{holder_estimate, HolderOptions, PairStrategy, DEFAULT_GRADIENT_LEVEL};
use sardlab::analysis::interpolation::interpolation_check;
use sardlab::analysis::level_set::{level_component_probe, LevelProbeOptions};
use sardlab::analysis::nondiff::{digit_one_levels, nondiff_suite};
use sardlab::measure::{critical_pushforward_report, pushforward_partial};
use sardlab::rational::{fmt_rational, inv_pow, parse_rational, to_f64};
use sardlab::schedule::{r_enclosure, r_enclosure_at};
use sardlab::{CellAddress, Construction, Dimension, GeometrySequences};

use crate::config::{Format, RunConfig, Settings};
use crate::exit::{CliError, FAIL, PASS};
use crate::output::{envelope, fmt_f64, print_json, write_csv, RatOut};

fn verdict(pass: bool) -> u8 {
    if pass {
        PASS
    } else {
        FAIL
    }
}

fn parse_address(dim: Dimension, s: &str) -> Result<CellAddress, CliError> {
    CellAddress::parse(dim, s).map_err(|e| CliError::usage(format!("bad address {s:?}: {e}")))
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// Print rows 1..=n.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Enclose the limit product r instead of printing the table.
    #[arg(long)]
    pub limit: bool,
    /// With --limit, use exactly this many factors instead of --tol.
    #[arg(long)]
    pub factors: Option<u64>,
}

#[derive(Serialize)]
struct ScheduleRow {
    n: usize,
    alpha: RatOut,
    a: RatOut,
    s: RatOut,
    r: RatOut,
}

pub fn schedule(cfg: &RunConfig, args: &ScheduleArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::One, Format::Csv)?;
    if args.limit {
        let enc = match args.factors {
            Some(n) => r_enclosure_at(&st.schedule(), n)?,
            None => r_enclosure(&st.schedule(), st.tol)?,
        };
        match st.format {
            Format::Csv => write_csv(
                None,
                &["schedule", "lo", "hi", "width"],
                [[st.kind.to_string(), fmt_f64(enc.lo), fmt_f64(enc.hi), fmt_f64(enc.width())]],
            )?,
            Format::Json => print_json(&envelope(
                "schedule",
                json!({ "schedule": st.kind, "factors": args.factors, "tol": st.tol, "enclosure": enc }),
            )?)?,
        }
        return Ok(PASS);
    }
    if args.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let seq = GeometrySequences::new(st.schedule());
    let rows: Vec<ScheduleRow> = seq
        .levels(args.n)?
        .iter()
        .map(|l| ScheduleRow {
            n: l.n,
            alpha: (&l.alpha).into(),
            a: (&l.side).into(),
            s: (&l.shrink).into(),
            r: (&l.partial).into(),
        })
        .collect();
    match st.format {
        Format::Csv => {
            let header = ["n", "alpha", "alpha_decimal", "a", "a_decimal", "s", "s_decimal", "r", "r_decimal"];
            write_csv(
                None,
                &header,
                rows.iter().map(|r| {
                    let mut v = vec![r.n.to_string()];
                    for q in [&r.alpha, &r.a, &r.s, &r.r] {
                        v.push(q.exact.clone());
                        v.push(fmt_f64(q.decimal));
                    }
                    v
                }),
            )?;
        }
        Format::Json => print_json(&envelope("schedule", json!({ "schedule": st.kind, "rows": rows }))?)?,
    }
    Ok(PASS)
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Point as `x` or `x,y`; coordinates may be decimals or `p/q`. Repeatable.
    #[arg(long = "point", value_name = "X[,Y]")]
    pub points: Vec<String>,
    /// Evaluate on a RES^dim grid of cell centres instead.
    #[arg(long, value_name = "RES")]
    pub grid: Option<usize>,
    /// Output file; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_point(dim: Dimension, s: &str) -> Result<Vec<f64>, CliError> {
    let coords = s
        .split(',')
        .map(|c| {
            let c = c.trim();
            parse_rational(c)
                .map(|q| to_f64(&q))
                .or_else(|| c.parse::<f64>().ok())
                .ok_or_else(|| CliError::usage(format!("bad coordinate {c:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != dim.get() {
        return Err(CliError::usage(format!("point {s:?} has {} coordinates, expected {}", coords.len(), dim.get())));
    }
    Ok(coords)
}

#[derive(Serialize)]
struct EvalRow {
    point: Vec<f64>,
    value: f64,
    radius: f64,
    n_used: usize,
}

pub fn eval(cfg: &RunConfig, args: &EvalArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::One, Format::Csv)?;
    let h = st.handle()?;
    let rows: Vec<EvalRow> = match (args.grid, args.points.is_empty()) {
        (Some(res), true) => h
            .grid(res, st.tol)?
            .into_iter()
            .map(|g| EvalRow {
                point: g.point,
                value: g.value,
                radius: g.radius,
                n_used: g.n_used,
            })
            .collect(),
        (None, false) => args
            .points
            .iter()
            .map(|s| {
                let p = parse_point(st.dim, s)?;
                let v = h.f_eval(&p, st.tol)?;
                Ok(EvalRow {
                    point: p,
                    value: v.value,
                    radius: v.radius,
                    n_used: v.n_used,
                })
            })
            .collect::<Result<_, CliError>>()?,
        _ => return Err(CliError::usage("give either --point (repeatable) or --grid")),
    };
    match st.format {
        Format::Csv => {
            let header: &[&str] = match st.dim {
                Dimension::One => &["x", "value", "radius", "n_used"],
                Dimension::Two => &["x", "y", "value", "radius", "n_used"],
            };
            write_csv(
                args.out.as_deref(),
                header,
                rows.iter().map(|r| {
                    let mut v: Vec<String> = r.point.iter().map(|&c| fmt_f64(c)).collect();
                    v.extend([fmt_f64(r.value), fmt_f64(r.radius), r.n_used.to_string()]);
                    v
                }),
            )?;
        }
        Format::Json => {
            let doc = envelope(
                "eval",
                json!({ "dim": st.dim, "schedule": st.kind, "tol": st.tol, "rows": rows }),
            )?;
            match &args.out {
                Some(p) => std::fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?,
                None => print_json(&doc)?,
            }
        }
    }
    Ok(PASS)
}

#[derive(Args, Debug)]
pub struct PushforwardArgs {
    /// Level n of f_n.
    #[arg(long)]
    pub depth: usize,
    /// Also report the split of the critical-set pushforward.
    #[arg(long)]
    pub critical: bool,
}

pub fn pushforward(cfg: &RunConfig, args: &PushforwardArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::One, Format::Json)?;
    let c = Construction::new(st.dim, st.schedule());
    let p = pushforward_partial(&c, args.depth)?;
    let ks = p.measure.ks_to_uniform()?;
    let expected = inv_pow(u32::from(st.dim.base()), args.depth);
    let pass = ks == expected;
    let path = st.out_path(&format!("pushforward-{}d-{}-n{}.csv", st.dim.get(), st.kind, args.depth))?;
    write_csv(
        Some(&path),
        &["location", "location_decimal", "mass", "mass_decimal"],
        p.measure.atoms().iter().map(|a| {
            [
                fmt_rational(&a.location),
                fmt_f64(to_f64(&a.location)),
                fmt_rational(&a.mass),
                fmt_f64(to_f64(&a.mass)),
            ]
        }),
    )?;
    let critical = if args.critical {
        let h = st.handle()?;
        Some(critical_pushforward_report(&h, args.depth)?)
    } else {
        None
    };
    print_json(&envelope(
        "pushforward",
        json!({
            "dim": st.dim,
            "schedule": st.kind,
            "depth": args.depth,
            "atoms": p.measure.len(),
            "total_mass": RatOut::from(p.measure.total()),
            "atom_mass": p.measure.atoms().first().map(|a| RatOut::from(&a.mass)),
            "limit_mass": p.limit_mass,
            "limit_atom_mass": p.limit_atom_mass(),
            "ks": RatOut::from(&ks),
            "expected_ks": RatOut::from(&expected),
            "pass": pass,
            "atoms_csv": path,
            "critical": critical,
        }),
    )?)?;
    Ok(verdict(pass))
}

#[derive(Args, Debug)]
pub struct NondiffArgs {
    /// Binary digit string of the base point.
    #[arg(long)]
    pub address: String,
    /// Probe level; by default every level with digit 1 up to --max-n.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 15)]
    pub max_n: usize,
}

pub fn nondiff(cfg: &RunConfig, args: &NondiffArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::One, Format::Json)?;
    let h = st.handle()?;
    let a = parse_address(st.dim, &args.address)?;
    let levels = match args.n {
        Some(n) => vec![n],
        None => digit_one_levels(&a, args.max_n),
    };
    if levels.is_empty() {
        return Err(CliError::usage("address has no digit 1 in the probed range"));
    }
    let probes: Vec<_> = levels.into_iter().map(|n| (a.clone(), n)).collect();
    let suite = nondiff_suite(&h, &probes)?;
    print_json(&envelope(
        "probe nondiff",
        json!({ "schedule": st.kind, "pass": suite.all_pass, "suite": suite }),
    )?)?;
    Ok(verdict(suite.all_pass))
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    /// Base-4 digit string; the probe point is the midpoint of its cell.
    #[arg(long)]
    pub address: String,
    /// Truncation level n of f_n.
    #[arg(long)]
    pub depth: usize,
    /// Finite-difference step; defaults to 4^-(depth+4).
    #[arg(long)]
    pub step: Option<f64>,
}

pub fn critical(cfg: &RunConfig, args: &CriticalArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::Two, Format::Json)?;
    let h = st.handle()?;
    let a = parse_address(st.dim, &args.address)?;
    let r = criticality_probe(&h, &a, args.depth, args.step)?;
    print_json(&envelope("probe critical", json!({ "schedule": st.kind, "report": r }))?)?;
    Ok(verdict(r.pass))
}

#[derive(Args, Debug)]
pub struct LevelsetArgs {
    #[arg(long)]
    pub address: String,
    /// Level M with a nonzero digit.
    #[arg(long = "m", visible_alias = "M")]
    pub m: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Flood-fill grid points per axis.
    #[arg(long)]
    pub res: Option<usize>,
    /// Address of the flood-fill window; defaults to the level-(M-1) ancestor.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub frame_samples: Option<usize>,
}

pub fn levelset(cfg: &RunConfig, args: &LevelsetArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::Two, Format::Json)?;
    let h = st.handle()?;
    let a = parse_address(st.dim, &args.address)?;
    let opts = LevelProbeOptions {
        resolution: args.res,
        region: args.region.as_deref().map(|r| parse_address(st.dim, r)).transpose()?,
        frame_samples: args.frame_samples,
    };
    let r = level_component_probe(&h, &a, args.m, args.eps, &opts)?;
    let path = st.out_path(&format!("levelset-{}-m{}.csv", args.address, args.m))?;
    write_csv(
        Some(&path),
        &["x", "y", "value", "in_component"],
        r.raster.iter().map(|c| {
            [
                fmt_f64(c.x),
                fmt_f64(c.y),
                fmt_f64(c.value),
                u8::from(c.in_component).to_string(),
            ]
        }),
    )?;
    print_json(&envelope(
        "probe levelset",
        json!({ "schedule": st.kind, "report": r, "raster_csv": path }),
    )?)?;
    Ok(verdict(r.pass))
}

#[derive(Args, Debug)]
pub struct HolderArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    /// uniform, cross-gap or digit-aligned.
    #[arg(long, default_value = "cross-gap", value_parser = crate::parse_strategy)]
    pub strategy: PairStrategy,
    /// Level n of grad f_n in 2D.
    #[arg(long, default_value_t = DEFAULT_GRADIENT_LEVEL)]
    pub level: usize,
}

pub fn holder(cfg: &RunConfig, args: &HolderArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::One, Format::Json)?;
    let h = st.handle()?;
    let opts = HolderOptions {
        pairs: args.pairs,
        strategy: args.strategy,
        seed: st.seed,
        gradient_level: args.level,
    };
    let r = holder_estimate(&h, args.alpha, &opts)?;
    let pass = r.consistent();
    print_json(&envelope("probe holder", json!({ "pass": pass, "report": r }))?)?;
    Ok(verdict(pass))
}

#[derive(Args, Debug)]
pub struct InterpolationArgs {
    /// Level n of f_n.
    #[arg(long)]
    pub n: usize,
    /// Cell address; the whole unit cell by default.
    #[arg(long, default_value = "")]
    pub address: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 32)]
    pub res: usize,
}

pub fn interpolation(cfg: &RunConfig, args: &InterpolationArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::Two, Format::Json)?;
    let h = st.handle()?;
    let a = parse_address(st.dim, &args.address)?;
    let r = interpolation_check(&h, args.n, &a, args.alpha, args.res)?;
    print_json(&envelope(
        "probe interpolation",
        json!({ "dim": st.dim, "schedule": st.kind, "n": args.n, "address": a, "report": r }),
    )?)?;
    Ok(verdict(r.pass))
}

#[derive(Args, Debug)]
pub struct CriticalValuesArgs {
    #[arg(long)]
    pub n: usize,
}

pub fn critical_values(cfg: &RunConfig, args: &CriticalValuesArgs) -> Result<u8, CliError> {
    let st = Settings::resolve(cfg, Dimension::Two, Format::Json)?;
    let h = st.handle()?;
    let values = h.critical_values_off_core(args.n)?;
    let grid = inv_pow(u32::from(st.dim.base()), args.n);
    let pass = values.iter().all(|v| (v / &grid).is_integer());
    let out: Vec<RatOut> = values.iter().map(RatOut::from).collect();
    print_json(&envelope(
        "probe critical-values",
        json!({ "dim": st.dim, "schedule": st.kind, "n": args.n, "pass": pass, "values": out }),
    )?)?;
    Ok(verdict(pass))
}
