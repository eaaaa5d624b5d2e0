use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use majorisation::empirical::{
    default_z_grid, discrete_empirical_dr, empirical_dr, empirical_dr_cdf, fit_kde, read_counts_csv, Bandwidth,
    Dataset, McConfig,
};
use majorisation::entropy::{entropy_dr, moments_dr, EntropyKind};
use majorisation::expr::{evaluate, DrValue, Env};
use majorisation::order::{default_comparison_grid, default_tolerance, majorizes_cdf};
use majorisation::sampling::SamplerKind;
use majorisation::{DrCdf, Error, Grid, Monotonicity, TabulatedFn};

#[derive(Parser, Debug)]
#[command(
    name = "majorise",
    version,
    about = "Decreasing rearrangements and the majorisation order"
)]
struct Cli {
    /// Directory for output tables.
    #[arg(long, global = true, default_value = "majorise-out")]
    out: PathBuf,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of points in written tables (and in comparison grids).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Tabulate the DR of a named family, e.g. `exp:n=2` or `mvn:n=2,var=3`.
    Family { spec: String },
    /// Compare two DRs; `precedes` means the first is majorised by the second.
    Compare {
        a: String,
        b: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "let", value_name = "NAME=INPUT")]
        bindings: Vec<String>,
    },
    /// Evaluate an expression such as `mix(exp:n=1,exp:n=2,alpha=0.5)`.
    Expr {
        expression: String,
        #[arg(long = "let", value_name = "NAME=INPUT")]
        bindings: Vec<String>,
    },
    /// Empirical DR of a CSV dataset (or of a counts table with --discrete).
    Empirical {
        data: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 1024)]
        thresholds: usize,
        #[arg(long, default_value_t = 1000)]
        bins: usize,
        /// Sampling box as `lo:hi` per dimension, comma separated.
        #[arg(long)]
        bounds: Option<String>,
        /// `silverman`, `scott` or a fixed positive bandwidth.
        #[arg(long, default_value = "silverman")]
        bandwidth: String,
        #[arg(long, value_enum, default_value = "uniform")]
        sampler: SamplerArg,
        /// Divide the DR pdf by the binned mass as well as the cdf.
        #[arg(long)]
        renormalise_pdf: bool,
        /// Treat the input as a table of nonnegative integer counts.
        #[arg(long)]
        discrete: bool,
    },
    /// Mean, variance, Shannon and Tsallis entropy of a DR.
    Entropy {
        input: String,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long = "let", value_name = "NAME=INPUT")]
        bindings: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Uniform,
    Halton,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Vec<String>,
    seed: u64,
    config: Value,
    version: &'a str,
    started_unix: u64,
    elapsed_seconds: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.cmd {
        Cmd::Family { spec } => {
            let spec: majorisation::families::FamilySpec = spec.parse()?;
            let v = DrValue::family(&spec)?;
            let files = write_value(cli, &v)?;
            report(cli, json!({ "spec": spec.to_string(), "files": files }))
        }
        Cmd::Compare { a, b, tol, bindings } => {
            let env = bind_all(bindings)?;
            let (fa, fb) = (load(a, &env)?.cdf, load(b, &env)?.cdf);
            let grid = match cli.grid {
                Some(n) => {
                    let end = fa.quantile_end(1e-8).max(fb.quantile_end(1e-8));
                    Grid::uniform(0.0, end, n)?
                }
                None => default_comparison_grid(&fa, &fb)?,
            };
            let tol = tol.unwrap_or_else(|| default_tolerance(&fa, &fb));
            let c = majorizes_cdf(&fa, &fb, &grid, tol)?;
            println!(
                "{}",
                serde_json::to_string(
                    &json!({ "verdict": c.verdict, "max_gap": c.max_gap, "crossing_z": c.crossing_z })
                )?
            );
            Ok(())
        }
        Cmd::Expr { expression, bindings } => {
            let env = bind_all(bindings)?;
            let v = evaluate(expression, &env)?;
            let files = write_value(cli, &v)?;
            report(cli, json!({ "expression": expression, "files": files }))
        }
        Cmd::Entropy { input, gamma, bindings } => {
            let env = bind_all(bindings)?;
            let pdf = load(input, &env)?.density()?;
            let kind = EntropyKind::tsallis(*gamma)?;
            let (shannon, tsallis, divergent) = match (entropy_dr(&pdf, EntropyKind::Shannon), entropy_dr(&pdf, kind)) {
                (Ok(s), Ok(t)) => (Some(s), Some(t), false),
                (Err(Error::DivergentIntegral(_)), _) | (_, Err(Error::DivergentIntegral(_))) => (None, None, true),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let (mean, variance) = match moments_dr(&pdf) {
                Ok(m) => (Some(m.mean), Some(m.variance)),
                Err(Error::DivergentIntegral(_)) => (None, None),
                Err(e) => return Err(e),
            };
            let out = json!({
                "input": input,
                "mean": mean,
                "variance": variance,
                "shannon": shannon,
                "tsallis": { "gamma": gamma, "value": tsallis },
                "divergent": divergent,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(())
        }
        Cmd::Empirical {
            data,
            mc_samples,
            thresholds,
            bins,
            bounds,
            bandwidth,
            sampler,
            renormalise_pdf,
            discrete,
        } => {
            let started = Instant::now();
            fs::create_dir_all(&cli.out)?;
            let (config, summary) = if *discrete {
                let counts = read_counts_csv(File::open(data)?)?;
                let d = discrete_empirical_dr(&counts)?;
                fs::write(cli.out.join("pmf.json"), serde_json::to_string(d.pmf.probs())?)?;
                let t = d.cdf.tabulate_adaptive(1e-12)?;
                let mut files = vec![path_str(&cli.out.join("pmf.json"))];
                files.extend(write_table(&cli.out, "cdf", &t)?);
                let config = json!({ "data": data, "discrete": true, "categories": counts.len() });
                (
                    config,
                    json!({ "categories": counts.len(), "pmf": d.pmf.probs(), "files": files }),
                )
            } else {
                let dataset = Dataset::from_csv(File::open(data)?)?;
                let rule = parse_bandwidth(bandwidth)?;
                let kde = fit_kde(&dataset, rule)?;
                let cfg = McConfig {
                    n_points: *mc_samples,
                    n_thresholds: *thresholds,
                    bounds: bounds.as_deref().map(parse_bounds).transpose()?,
                    seed: cli.seed,
                    sampler: match sampler {
                        SamplerArg::Uniform => SamplerKind::Uniform,
                        SamplerArg::Halton => SamplerKind::LowDiscrepancy,
                    },
                };
                let e = empirical_dr(&kde, &cfg)?;
                let grid = default_z_grid(&e.dr, *bins)?;
                let ec = empirical_dr_cdf(&e.dr, &grid, *renormalise_pdf)?;
                let mut files = write_table(&cli.out, "measure", &e.measure.to_table()?)?;
                let pdf = match &ec.renormalised_pdf {
                    Some(p) => p.table()?.into_owned(),
                    None => e.dr.table()?.into_owned(),
                };
                files.extend(write_table(&cli.out, "pdf", &pdf)?);
                files.extend(write_table(&cli.out, "cdf", &ec.cdf.tabulate_adaptive(1e-12)?)?);
                for w in &e.warnings {
                    eprintln!("warning: {w}");
                }
                let config = json!({
                    "data": data,
                    "rows": dataset.rows(),
                    "columns": dataset.labels(),
                    "mc_samples": cfg.n_points,
                    "thresholds": cfg.n_thresholds,
                    "bins": bins,
                    "bounds": e.bounds,
                    "bandwidth_rule": rule,
                    "bandwidths": kde.bandwidths(),
                    "sampler": cfg.sampler,
                    "renormalise_pdf": renormalise_pdf,
                });
                let summary = json!({
                    "binned_mass": ec.total,
                    "box_mass_estimate": e.mass_estimate,
                    "warnings": e.warnings,
                    "files": files,
                });
                (config, summary)
            };
            let manifest = Manifest {
                command: std::env::args().collect(),
                seed: cli.seed,
                config,
                version: env!("CARGO_PKG_VERSION"),
                started_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                elapsed_seconds: started.elapsed().as_secs_f64(),
            };
            fs::write(cli.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
            report(cli, summary)
        }
    }
}

fn report(cli: &Cli, v: Value) -> Result<(), Error> {
    if cli.json {
        println!("{}", serde_json::to_string(&v)?);
    } else if let Some(files) = v.get("files").and_then(Value::as_array) {
        for f in files {
            println!("wrote {}", f.as_str().unwrap_or_default());
        }
    }
    Ok(())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn write_table(dir: &Path, stem: &str, t: &TabulatedFn) -> Result<Vec<String>, Error> {
    fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    fs::write(&json_path, t.to_json()?)?;
    t.write_csv(File::create(&csv_path)?)?;
    Ok(vec![path_str(&json_path), path_str(&csv_path)])
}

/// Writes `pdf` (when known) and `cdf` sampled on a uniform grid over
/// the support.
fn write_value(cli: &Cli, v: &DrValue) -> Result<Vec<String>, Error> {
    let n = cli.grid.unwrap_or(1001);
    if n < 2 {
        return Err(Error::InvalidGrid("need at least two grid points".into()));
    }
    let end = match &v.pdf {
        Some(p) if p.support_end().is_finite() => p.support_end(),
        _ => v.cdf.quantile_end(1e-10),
    };
    let grid = Grid::uniform(0.0, end, n)?;
    let mut files = Vec::new();
    if let Some(p) = &v.pdf {
        let vals = grid
            .points()
            .iter()
            .map(|&z| p.eval(z))
            .collect::<Result<Vec<_>, _>>()?;
        files.extend(write_table(
            &cli.out,
            "pdf",
            &TabulatedFn::new(grid.clone(), vals, Monotonicity::Nonincreasing)?,
        )?);
    }
    files.extend(write_table(&cli.out, "cdf", &v.cdf.tabulate_on(&grid)?)?);
    Ok(files)
}

/// A table file (`.json`, or `z,value` CSV) or an expression.
fn load(input: &str, env: &Env) -> Result<DrValue, Error> {
    let path = Path::new(input);
    if path.is_file() {
        let t = if path.extension().is_some_and(|e| e == "json") {
            TabulatedFn::from_json(&fs::read_to_string(path)?)?
        } else {
            TabulatedFn::read_csv_infer(File::open(path)?)?
        };
        if t.monotone() == Monotonicity::Nondecreasing && t.first_value() == 0.0 {
            return Ok(DrValue::from_cdf(DrCdf::from_table(t)?));
        }
        return DrValue::from_table(t);
    }
    evaluate(input, env)
}

fn bind_all(bindings: &[String]) -> Result<Env, Error> {
    let mut env = Env::new();
    for b in bindings {
        let (name, input) = b
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=INPUT, got {b:?}")))?;
        let v = load(input, &env)?;
        env.bind(name, v)?;
    }
    Ok(env)
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, Error> {
    match s {
        "silverman" => Ok(Bandwidth::Silverman),
        "scott" => Ok(Bandwidth::Scott),
        _ => match s.parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Fixed(h)),
            _ => Err(Error::InvalidArgument(format!("bad bandwidth {s:?}"))),
        },
    }
}

fn parse_bounds(s: &str) -> Result<Vec<(f64, f64)>, Error> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("expected lo:hi, got {part:?}")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad bound {v:?}")))
            };
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}
