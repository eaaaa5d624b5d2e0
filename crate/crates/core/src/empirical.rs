//! Empirical DRs from data: a Gaussian kernel density estimate, Monte
//! Carlo volumes of its superlevel sets, and the axis swap. Also the
//! discrete pipeline for binned counts.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::isotonic::{pava_unweighted, Direction};
use crate::order::ProbVector;
use crate::rearrange::{DensityFn, DrCdf, DrPdf, MeasureFn};
use crate::sampling::{BoxSampler, SamplerKind};
use crate::tabulated::{Grid, Monotonicity, TabulatedFn};

pub const MIN_ROWS: usize = 10;
pub const MIN_MC_POINTS: usize = 100;
pub const MIN_THRESHOLDS: usize = 64;
/// Fraction of mass the sampling box must hold.
pub const BOX_MASS: f64 = 1.0 - 1e-3;
/// Smallest acceptable pre-normalisation total of Algorithm-2 binning.
pub const MIN_BINNED_MASS: f64 = 0.9;

/// Observations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    labels: Vec<String>,
    values: Vec<f64>,
    rows: usize,
}

impl Dataset {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = labels.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("dataset has no columns".into()));
        }
        if rows.len() < MIN_ROWS {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} rows, need at least {MIN_ROWS}",
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} fields, expected {dim}",
                    i + 1,
                    r.len()
                )));
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "row {} holds non-finite value {v}",
                    i + 1
                )));
            }
            values.extend_from_slice(r);
        }
        Ok(Dataset {
            labels,
            values,
            rows: rows.len(),
        })
    }

    /// CSV with one header row of column labels.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let labels: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(i + 2, format!("not a number: {s:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Dataset::new(labels, rows)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.dim()).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A density that the Monte Carlo pipeline can rearrange.
pub trait Density: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// Box used when the caller gives none.
    fn default_bounds(&self) -> Vec<(f64, f64)>;
    /// Exact mass inside `bounds`, if available.
    fn box_mass(&self, _bounds: &[(f64, f64)]) -> Option<f64> {
        None
    }
}

impl Density for DensityFn {
    fn dim(&self) -> usize {
        DensityFn::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        DensityFn::eval(self, x)
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        self.support().to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "h")]
pub enum Bandwidth {
    Silverman,
    Scott,
    Fixed(f64),
}

/// Product-Gaussian kernel mixture with diagonal bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeModel {
    dim: usize,
    centers: Vec<f64>,
    bandwidths: Vec<f64>,
}

const KERNEL_CUTOFF: f64 = 40.0;

impl KdeModel {
    /// Direct construction; `centers` row-major with `bandwidths.len()`
    /// columns.
    pub fn from_centers(centers: Vec<f64>, bandwidths: Vec<f64>) -> Result<Self> {
        let dim = bandwidths.len();
        if dim == 0 || centers.is_empty() || centers.len() % dim != 0 {
            return Err(Error::InvalidArgument(
                "centres do not match the bandwidth dimension".into(),
            ));
        }
        if bandwidths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidArgument("bandwidths must be positive".into()));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("centres must be finite".into()));
        }
        Ok(KdeModel {
            dim,
            centers,
            bandwidths,
        })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len() / self.dim
    }

    fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    /// Data range widened by three bandwidths.
    pub fn padded_range(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|j| {
                let col = self.centers.iter().skip(j).step_by(self.dim);
                let lo = col.clone().copied().fold(f64::INFINITY, f64::min);
                let hi = col.copied().fold(f64::NEG_INFINITY, f64::max);
                let h = self.bandwidths[j];
                (lo - 3.0 * h, hi + 3.0 * h)
            })
            .collect()
    }
}

impl Density for KdeModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let norm: f64 = self
            .bandwidths
            .iter()
            .map(|h| h * (2.0 * std::f64::consts::PI).sqrt())
            .product();
        let mut s = 0.0;
        for i in 0..self.n_centers() {
            let c = self.center(i);
            let mut q = 0.0;
            for j in 0..self.dim {
                let u = (x[j] - c[j]) / self.bandwidths[j];
                q += 0.5 * u * u;
                if q > KERNEL_CUTOFF {
                    break;
                }
            }
            if q <= KERNEL_CUTOFF {
                s += (-q).exp();
            }
        }
        s / (norm * self.n_centers() as f64)
    }

    fn default_bounds(&self) -> Vec<(f64, f64)> {
        self.padded_range()
    }

    fn box_mass(&self, bounds: &[(f64, f64)]) -> Option<f64> {
        let phi = |u: f64| 0.5 * erfc(-u / std::f64::consts::SQRT_2);
        let total: f64 = (0..self.n_centers())
            .map(|i| {
                let c = self.center(i);
                (0..self.dim)
                    .map(|j| {
                        let h = self.bandwidths[j];
                        let (lo, hi) = bounds[j];
                        phi((hi - c[j]) / h) - phi((lo - c[j]) / h)
                    })
                    .product::<f64>()
            })
            .sum();
        Some(total / self.n_centers() as f64)
    }
}

/// Diagonal bandwidths `factor · σ̂_j · m^{-1/(n+4)}`; Silverman's factor
/// is `(4 / (n+2))^{1/(n+4)}`, Scott's is 1.
pub fn fit_kde(data: &Dataset, rule: Bandwidth) -> Result<KdeModel> {
    let (m, n) = (data.rows() as f64, data.dim());
    let mut hs = Vec::with_capacity(n);
    for j in 0..n {
        let mean = data.column(j).sum::<f64>() / m;
        let var = data.column(j).map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let sd = var.sqrt();
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::DegenerateDimension(j));
        }
        let h = match rule {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Silverman => {
                (4.0 / (n as f64 + 2.0)).powf(1.0 / (n as f64 + 4.0)) * sd * m.powf(-1.0 / (n as f64 + 4.0))
            }
            Bandwidth::Scott => sd * m.powf(-1.0 / (n as f64 + 4.0)),
        };
        hs.push(h);
    }
    KdeModel::from_centers(data.values().to_vec(), hs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_points: usize,
    pub n_thresholds: usize,
    /// Sampling box; the density's default when absent.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub seed: u64,
    pub sampler: SamplerKind,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_points: 100_000,
            n_thresholds: 1024,
            bounds: None,
            seed: 0,
            sampler: SamplerKind::Uniform,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < MIN_MC_POINTS {
            return Err(Error::InsufficientResolution {
                got: self.n_points,
                min: MIN_MC_POINTS,
            });
        }
        if self.n_thresholds < MIN_THRESHOLDS {
            return Err(Error::InsufficientResolution {
                got: self.n_thresholds,
                min: MIN_THRESHOLDS,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EmpiricalDr {
    pub measure: MeasureFn,
    pub dr: DrPdf,
    pub bounds: Vec<(f64, f64)>,
    /// `Vol(R) · mean f̂(s)`, an estimate of the mass inside the box.
    pub mass_estimate: f64,
    /// Largest change made by the monotone repair.
    pub repair_shift: f64,
    pub warnings: Vec<String>,
}

/// Level-set measures by Monte Carlo: `m̂(y) = Vol(R) · #{s : f̂(s) > y} / N` over the sample
/// `S ⊂ R`, at geometric thresholds in `(max f̂ · 1e-6, max f̂]`, then
/// swapped into the DR.
pub fn empirical_dr(f: &dyn Density, cfg: &McConfig) -> Result<EmpiricalDr> {
    cfg.validate()?;
    let bounds = cfg.bounds.clone().unwrap_or_else(|| f.default_bounds());
    if bounds.len() != f.dim() {
        return Err(Error::InvalidArgument(format!(
            "box has {} dimensions, density has {}",
            bounds.len(),
            f.dim()
        )));
    }
    let sampler = BoxSampler::new(cfg.sampler, cfg.seed, &bounds)?;
    let vol = sampler.volume();
    let n = cfg.n_points;
    let dim = f.dim();
    let mut values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, i| {
                sampler.point(i, buf);
                f.eval(buf)
            },
        )
        .collect();
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Numerical(
            "density returned a negative or non-finite value".into(),
        ));
    }

    // mass inside the box: exact when known, else the sample mean with a
    // three-standard-error allowance
    let mean = values.iter().sum::<f64>() / n as f64;
    let mass_estimate = vol * mean;
    let box_mass = match f.box_mass(&bounds) {
        Some(m) => m,
        None => {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            mass_estimate + 3.0 * vol * (var / n as f64).sqrt()
        }
    };
    if box_mass < BOX_MASS {
        return Err(Error::SupportTruncated { mass: box_mass });
    }

    values.par_sort_unstable_by(f64::total_cmp);
    let top = *values.last().unwrap();
    if !(top > 0.0) {
        return Err(Error::Numerical("density vanishes on every sample point".into()));
    }
    let levels = Grid::geometric(top * 1e-6, top, cfg.n_thresholds)?;
    let thresholds: Vec<f64> = levels.points().iter().rev().copied().collect();
    let raw: Vec<f64> = thresholds
        .iter()
        .map(|&y| {
            let above = n - values.partition_point(|&v| v <= y);
            vol * above as f64 / n as f64
        })
        .collect();
    let repaired = pava_unweighted(&raw, Direction::Increasing);
    let repair_shift = raw
        .iter()
        .zip(&repaired)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut warnings = Vec::new();
    if values.partition_point(|&v| v <= *thresholds.last().unwrap()) == 0 {
        warnings.push("box too tight: every sample lies above the lowest threshold".to_string());
    }
    let measure = MeasureFn::new(thresholds, repaired)?;
    let dr = measure.rearrangement()?;
    Ok(EmpiricalDr {
        measure,
        dr,
        bounds,
        mass_estimate,
        repair_shift,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    pub cdf: DrCdf,
    /// Binned mass before normalisation.
    pub total: f64,
    /// The DR divided by `total`, when requested.
    pub renormalised_pdf: Option<DrPdf>,
}

/// Trapezoid bin masses of the DR between consecutive points
/// of `z_star`, accumulated and divided by their total.
pub fn empirical_dr_cdf(dr: &DrPdf, z_star: &Grid, renormalise_pdf: bool) -> Result<EmpiricalCdf> {
    if z_star.len() < 3 {
        return Err(Error::InsufficientResolution {
            got: z_star.len().saturating_sub(1),
            min: 2,
        });
    }
    if z_star.first() < 0.0 {
        return Err(Error::InvalidGrid("cdf grid must start at z >= 0".into()));
    }
    let zs = z_star.points();
    let f: Vec<f64> = zs.iter().map(|&z| dr.value(z)).collect();
    let mut cum = Vec::with_capacity(zs.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 1..zs.len() {
        acc += 0.5 * (f[i - 1] + f[i]) * (zs[i] - zs[i - 1]);
        cum.push(acc);
    }
    let total = acc;
    if total < MIN_BINNED_MASS {
        return Err(Error::SupportTruncated { mass: total });
    }
    let vals: Vec<f64> = cum.iter().map(|c| c / total).collect();
    let table = TabulatedFn::new(
        z_star.clone(),
        crate::rearrange::running_max(vals),
        Monotonicity::Nondecreasing,
    )?;
    let cdf = DrCdf::from_table(table)?;
    let renormalised_pdf = if renormalise_pdf {
        let t = dr.table()?;
        Some(DrPdf::from_table(
            t.map_values(|v| v / total, Monotonicity::Nonincreasing)?,
        )?)
    } else {
        None
    };
    let cdf = match &renormalised_pdf {
        Some(p) => cdf.with_density(p.clone()),
        None => cdf,
    };
    Ok(EmpiricalCdf {
        cdf,
        total,
        renormalised_pdf,
    })
}

/// `bins + 1` equally spaced points over the DR's support.
pub fn default_z_grid(dr: &DrPdf, bins: usize) -> Result<Grid> {
    let end = dr.effective_end();
    if !(end > 0.0 && end.is_finite()) {
        return Err(Error::UnboundedSupport);
    }
    Grid::uniform(0.0, end, bins + 1)
}

#[derive(Debug, Clone)]
pub struct DiscreteDr {
    /// Nonincreasing probabilities.
    pub pmf: ProbVector,
    /// Cumulative sums at `k = 0, 1, ..., K`, joined linearly.
    pub cdf: DrCdf,
}

/// Normalises counts, sorts them and accumulates.
pub fn discrete_empirical_dr(counts: &[u64]) -> Result<DiscreteDr> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("all counts are zero".into()));
    }
    let mut probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    probs.sort_by(|a, b| b.total_cmp(a));
    let pmf = ProbVector::normalised(&probs)?;
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mut acc = 0.0;
    for (k, p) in pmf.probs().iter().enumerate() {
        acc += p;
        xs.push((k + 1) as f64);
        ys.push(acc.min(1.0));
    }
    *ys.last_mut().unwrap() = 1.0;
    let cdf = DrCdf::from_table(TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nondecreasing)?)?;
    Ok(DiscreteDr { pmf, cdf })
}

/// Nonnegative integer counts from CSV, flattened row by row. A first
/// row that is not all integers is taken as a header.
pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<u64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<u64>, _> = rec.iter().map(str::parse::<u64>).collect();
        match parsed {
            Ok(v) => out.extend(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::parse(i + 1, "counts must be nonnegative integers")),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no counts found".into()));
    }
    Ok(out)
}

/// Equal-width 2-d histogram over the data range; `counts[i][j]` counts
/// points in x-bin `i` and y-bin `j`.
pub fn bin_2d(points: &[(f64, f64)], bins_x: usize, bins_y: usize) -> Result<Vec<Vec<u64>>> {
    if bins_x < 2 || bins_y < 2 {
        return Err(Error::InvalidArgument("need at least two bins per axis".into()));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point".into()));
    }
    let range = |f: fn(&(f64, f64)) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (rx, ry) = (range(|p| p.0), range(|p| p.1));
    let index = |v: f64, (lo, hi): (f64, f64), k: usize| {
        if hi > lo {
            (((v - lo) / (hi - lo) * k as f64) as usize).min(k - 1)
        } else {
            0
        }
    };
    let mut counts = vec![vec![0u64; bins_y]; bins_x];
    for &(x, y) in points {
        counts[index(x, rx, bins_x)][index(y, ry, bins_y)] += 1;
    }
    Ok(counts)
}

/// [`bin_2d`] on the two columns of a dataset.
pub fn bin_dataset(data: &Dataset, bins_x: usize, bins_y: usize) -> Result<Vec<Vec<u64>>> {
    if data.dim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "binning needs two columns, got {}",
            data.dim()
        )));
    }
    let pts: Vec<(f64, f64)> = (0..data.rows()).map(|i| (data.row(i)[0], data.row(i)[1])).collect();
    bin_2d(&pts, bins_x, bins_y)
}
