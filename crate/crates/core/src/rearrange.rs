//! Decreasing rearrangements (DRs) and their cdfs.
//!
//! A [`DrPdf`] is a nonincreasing density on `[0, ∞)`; a [`DrCdf`] is its
//! integral. Both come either as closed-form evaluators or as
//! piecewise-linear tables. The bridge between a density and its DR is the
//! level-set measure `m(y) = |{x : f(x) ≥ y}|`: the DR is its inverse,
//! `f̃(z) = sup{y : m(y) > z}`.

use std::borrow::Cow;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad;
use crate::sampling::{BoxSampler, SamplerKind};
use crate::tabulated::{lerp, pl_envelope, Grid, Monotonicity, TabulatedFn, MONOTONE_TOL};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Default number of thresholds when rearranging a univariate density.
pub const DEFAULT_THRESHOLDS: usize = 8192;

/// Default absolute accuracy of adaptive cdf tabulation.
pub const CDF_TABULATION_TOL: f64 = 1e-10;

/// Mass tolerance applied when a pdf is integrated into a cdf.
pub const CDF_MASS_TOL: f64 = 1e-4;

/// Geometric grid of density values used to tabulate and invert DRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueGrid {
    pub points: usize,
    /// Lowest tabulated value relative to the peak.
    pub floor: f64,
}

impl Default for ValueGrid {
    fn default() -> Self {
        ValueGrid {
            points: 16_384,
            floor: 1e-18,
        }
    }
}

impl ValueGrid {
    /// Levels from `top` down to `top * floor`, strictly decreasing.
    pub fn levels(&self, top: f64) -> Vec<f64> {
        let n = self.points.max(2);
        let r = self.floor.ln() / (n - 1) as f64;
        (0..n).map(|i| top * (r * i as f64).exp()).collect()
    }
}

// ---------------------------------------------------------------------------
// DrPdf

#[derive(Clone)]
struct AnalyticPdf {
    label: String,
    density: ScalarFn,
    level_measure: Option<ScalarFn>,
    cdf: Option<ScalarFn>,
    /// Levels in `(0, peak)` where `m` is not smooth.
    breaks: Vec<f64>,
    support_end: f64,
    peak: f64,
    table: OnceLock<TabulatedFn>,
}

#[derive(Clone)]
enum PdfRepr {
    Analytic(Arc<AnalyticPdf>),
    Tabulated(Arc<TabulatedFn>),
}

/// A decreasing rearrangement: nonincreasing, nonnegative density on
/// `[0, z_max]`, `z_max` possibly infinite.
#[derive(Clone)]
pub struct DrPdf {
    repr: PdfRepr,
}

impl fmt::Debug for DrPdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            PdfRepr::Analytic(a) => write!(f, "DrPdf::Analytic({})", a.label),
            PdfRepr::Tabulated(t) => write!(f, "DrPdf::Tabulated({} knots)", t.len()),
        }
    }
}

impl DrPdf {
    /// Closed-form DR. `density` must be nonincreasing on
    /// `[0, support_end]`; it is not evaluated beyond.
    pub fn analytic(
        label: impl Into<String>,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support_end: f64,
    ) -> Result<Self> {
        let peak = density(0.0);
        if !(peak.is_finite() && peak > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "density at 0 must be positive, got {peak}"
            )));
        }
        if !(support_end > 0.0) {
            return Err(Error::InvalidArgument("support end must be positive".into()));
        }
        Ok(DrPdf {
            repr: PdfRepr::Analytic(Arc::new(AnalyticPdf {
                label: label.into(),
                density: Arc::new(density),
                level_measure: None,
                cdf: None,
                breaks: Vec::new(),
                support_end,
                peak,
                table: OnceLock::new(),
            })),
        })
    }

    /// A DR given only through its level-set measure `m` on `(0, peak]`;
    /// the density is found by inverting `m`.
    pub fn from_level_measure_fn(
        label: impl Into<String>,
        m: impl Fn(f64) -> f64 + Send + Sync + 'static,
        peak: f64,
        support_end: f64,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        if !(peak.is_finite() && peak > 0.0) {
            return Err(Error::InvalidArgument(format!("peak must be positive, got {peak}")));
        }
        let m: ScalarFn = Arc::new(m);
        let inv = m.clone();
        let density = move |z: f64| {
            // sup{y : m(y) > z}
            let (mut lo, mut hi) = (0.0, peak);
            if inv(peak) > z {
                return peak;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if inv(mid) > z {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if !(support_end > 0.0) {
            return Err(Error::InvalidArgument("support end must be positive".into()));
        }
        let mut breaks: Vec<f64> = breaks.into_iter().filter(|&b| b > 0.0 && b < peak).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(DrPdf {
            repr: PdfRepr::Analytic(Arc::new(AnalyticPdf {
                label: label.into(),
                density: Arc::new(density),
                level_measure: Some(m),
                cdf: None,
                breaks,
                support_end,
                peak,
                table: OnceLock::new(),
            })),
        })
    }

    fn modify(self, f: impl FnOnce(&mut AnalyticPdf)) -> Self {
        match self.repr {
            PdfRepr::Analytic(a) => {
                let mut a = (*a).clone();
                a.table = OnceLock::new();
                f(&mut a);
                DrPdf {
                    repr: PdfRepr::Analytic(Arc::new(a)),
                }
            }
            PdfRepr::Tabulated(_) => self,
        }
    }

    /// Attaches a closed-form level-set measure `m(y)` (valid for
    /// `0 < y`), replacing numerical inversion.
    pub fn with_level_measure(self, m: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.modify(|a| a.level_measure = Some(Arc::new(m)))
    }

    /// Attaches the closed-form cdf `F̃`.
    pub fn with_cdf(self, cdf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.modify(|a| a.cdf = Some(Arc::new(cdf)))
    }

    /// Closed-form level-set measure, if known.
    pub fn closed_level_measure(&self) -> Option<ScalarFn> {
        match &self.repr {
            PdfRepr::Analytic(a) => a.level_measure.clone(),
            PdfRepr::Tabulated(_) => None,
        }
    }

    /// Closed-form cdf, if known.
    pub fn closed_cdf(&self) -> Option<ScalarFn> {
        match &self.repr {
            PdfRepr::Analytic(a) => a.cdf.clone(),
            PdfRepr::Tabulated(_) => None,
        }
    }

    /// Interior levels where the level-set measure has a kink.
    pub fn level_breaks(&self) -> &[f64] {
        match &self.repr {
            PdfRepr::Analytic(a) => &a.breaks,
            PdfRepr::Tabulated(_) => &[],
        }
    }

    /// Tabulated DR. A table starting right of 0 is extended flat to 0.
    pub fn from_table(table: TabulatedFn) -> Result<Self> {
        let v = table.values();
        if v.iter().any(|&x| x < -MONOTONE_TOL) {
            return Err(Error::InvalidArgument("DR pdf has negative values".into()));
        }
        if v.windows(2).any(|w| w[1] > w[0] + MONOTONE_TOL) {
            return Err(Error::NotMonotone("DR pdf must be nonincreasing".into()));
        }
        if table.xs()[0] < 0.0 {
            return Err(Error::InvalidArgument("DR pdf grid must start at z >= 0".into()));
        }
        if !(table.first_value() > 0.0) {
            return Err(Error::InvalidArgument("DR pdf vanishes at z = 0".into()));
        }
        let table = if table.xs()[0] > 0.0 {
            let mut xs = vec![0.0];
            xs.extend_from_slice(table.xs());
            let mut ys = vec![table.first_value()];
            ys.extend_from_slice(table.values());
            TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nonincreasing)?
        } else if table.monotone() != Monotonicity::Nonincreasing {
            TabulatedFn::new(table.grid().clone(), v.to_vec(), Monotonicity::Nonincreasing)?
        } else {
            table
        };
        Ok(DrPdf {
            repr: PdfRepr::Tabulated(Arc::new(table)),
        })
    }

    /// Builds the DR from samples of its level-set measure: `levels`
    /// strictly decreasing, `measures[i] = m(levels[i])` nondecreasing.
    /// The axes are swapped; a top plateau gets an explicit knot at 0.
    pub fn from_level_measure(levels: &[f64], measures: &[f64]) -> Result<Self> {
        if levels.len() != measures.len() || levels.len() < 2 {
            return Err(Error::InvalidArgument("need at least two level/measure pairs".into()));
        }
        if levels.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("levels must be strictly decreasing".into()));
        }
        if measures.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidArgument("measures must be finite and nonnegative".into()));
        }
        let mut zs = Vec::with_capacity(levels.len() + 1);
        let mut ys = Vec::with_capacity(levels.len() + 1);
        if measures[0] > 0.0 {
            zs.push(0.0);
            ys.push(levels[0]);
        }
        let mut run_max = 0.0f64;
        for (&y, &m) in levels.iter().zip(measures) {
            run_max = run_max.max(m);
            zs.push(run_max);
            ys.push(y);
        }
        if *zs.last().unwrap() <= 0.0 {
            return Err(Error::InverseUndefined("level-set measure is identically zero".into()));
        }
        let t = TabulatedFn::from_points_with_steps(&zs, &ys, Monotonicity::Nonincreasing)?;
        DrPdf::from_table(t)
    }

    pub fn label(&self) -> Option<&str> {
        match &self.repr {
            PdfRepr::Analytic(a) => Some(&a.label),
            PdfRepr::Tabulated(_) => None,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.repr, PdfRepr::Tabulated(_))
    }

    /// `f̃(z)`; beyond a table the density is 0.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if z < 0.0 || z.is_nan() {
            return Err(Error::InvalidArgument(format!("DR evaluated at negative z = {z}")));
        }
        Ok(self.value(z))
    }

    pub(crate) fn value(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        match &self.repr {
            PdfRepr::Analytic(a) => {
                if z > a.support_end {
                    0.0
                } else {
                    (a.density)(z)
                }
            }
            PdfRepr::Tabulated(t) => t.interpolate(z).unwrap_or(0.0),
        }
    }

    pub fn peak(&self) -> f64 {
        match &self.repr {
            PdfRepr::Analytic(a) => a.peak,
            PdfRepr::Tabulated(t) => t.first_value(),
        }
    }

    pub fn support_end(&self) -> f64 {
        match &self.repr {
            PdfRepr::Analytic(a) => a.support_end,
            PdfRepr::Tabulated(t) => t.grid().last(),
        }
    }

    /// `m(y) = sup{z : f̃(z) ≥ y}`, 0 above the peak.
    pub fn level_measure(&self, y: f64) -> f64 {
        match &self.repr {
            PdfRepr::Tabulated(t) => table_level_measure(t, y),
            PdfRepr::Analytic(a) => {
                if y > a.peak {
                    return 0.0;
                }
                if y <= 0.0 {
                    return a.support_end;
                }
                if let Some(m) = &a.level_measure {
                    return m(y).clamp(0.0, a.support_end);
                }
                bisect_level(&*a.density, a.support_end, y)
            }
        }
    }

    /// Tabulates through the level-set measure on a geometric value grid.
    pub fn tabulate(&self, vg: ValueGrid) -> Result<TabulatedFn> {
        match &self.repr {
            PdfRepr::Tabulated(t) => Ok((**t).clone()),
            PdfRepr::Analytic(a) => {
                let mut levels = vg.levels(a.peak);
                if !a.breaks.is_empty() {
                    levels.extend_from_slice(&a.breaks);
                    levels.sort_by(|x, y| y.total_cmp(x));
                    levels.dedup();
                }
                let measures: Vec<f64> = levels.par_iter().map(|&y| self.level_measure(y)).collect();
                let pdf = DrPdf::from_level_measure(&levels, &measures)?;
                let mut t = match pdf.repr {
                    PdfRepr::Tabulated(t) => (*t).clone(),
                    PdfRepr::Analytic(_) => unreachable!(),
                };
                if a.support_end.is_finite() && t.grid().last() < a.support_end {
                    // keep the closed-form support end as the last knot
                    let mut xs = t.xs().to_vec();
                    let mut ys = t.values().to_vec();
                    xs.push(a.support_end);
                    ys.push((a.density)(a.support_end).max(0.0).min(*ys.last().unwrap()));
                    t = TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nonincreasing)?;
                }
                Ok(t)
            }
        }
    }

    /// The default tabulation, cached for closed forms.
    pub fn table(&self) -> Result<Cow<'_, TabulatedFn>> {
        match &self.repr {
            PdfRepr::Tabulated(t) => Ok(Cow::Borrowed(t)),
            PdfRepr::Analytic(a) => {
                if let Some(t) = a.table.get() {
                    return Ok(Cow::Borrowed(t));
                }
                let t = self.tabulate(ValueGrid::default())?;
                Ok(Cow::Borrowed(a.table.get_or_init(|| t)))
            }
        }
    }

    /// Total mass; exact for tables, by quadrature for closed forms.
    pub fn mass(&self) -> Result<f64> {
        match &self.repr {
            PdfRepr::Tabulated(t) => Ok(t.integral()),
            PdfRepr::Analytic(a) => {
                if a.level_measure.is_some() {
                    return Ok(self.level_integral(|_, m| m)?.value);
                }
                let end = self.effective_end();
                let knots = integration_knots(end);
                let f = |z: f64| if z > a.support_end { 0.0 } else { (a.density)(z) };
                Ok(quad::integrate_over(&f, &knots))
            }
        }
    }

    /// `∫₀^peak g(y, m(y)) dy` for closed forms with a closed level-set
    /// measure. Integrals of `h(f̃(z))` over `z` become integrals of
    /// `h'(y) m(y)` over `y`, which avoids inverting `m`.
    pub(crate) fn level_integral(&self, g: impl Fn(f64, f64) -> f64 + Sync) -> Result<LevelIntegral> {
        let (a, m) = match &self.repr {
            PdfRepr::Analytic(a) => match &a.level_measure {
                Some(m) => (a, m),
                None => return Err(Error::InvalidArgument("no closed-form level measure".into())),
            },
            PdfRepr::Tabulated(_) => return Err(Error::InvalidArgument("tabulated DR".into())),
        };
        let mut ends = vec![0.0];
        ends.extend_from_slice(&a.breaks);
        ends.push(a.peak);
        let f = |y: f64| g(y, m(y).clamp(0.0, a.support_end));
        let mut value = 0.0;
        let mut tail = 0.0;
        for (i, w) in ends.windows(2).enumerate() {
            let knots = clustered_knots(w[0], w[1]);
            let parts: Vec<f64> = knots.windows(2).map(|k| quad::gauss_legendre(&f, k[0], k[1])).collect();
            if i == 0 {
                // the first ten panels hug y = 0, where a divergent integrand piles up
                tail = parts.iter().take(10).sum::<f64>();
            }
            value += parts.iter().sum::<f64>();
        }
        if !value.is_finite() {
            return Err(Error::DivergentIntegral("non-finite level integral".into()));
        }
        Ok(LevelIntegral { value, tail })
    }

    /// Where the density has dropped below `1e-20` of its peak (or the
    /// support end, if finite and sooner).
    pub fn effective_end(&self) -> f64 {
        let end = self.level_measure(self.peak() * 1e-20);
        if end > 0.0 {
            end.min(self.support_end())
        } else {
            self.support_end()
        }
    }

    /// Smallest `z` with `F̃(z) ≥ 1 - eps` on the default tabulation.
    pub fn quantile_end(&self, eps: f64) -> Result<f64> {
        let t = self.table()?;
        let cum = t.cumulative_integral();
        let total = *cum.last().unwrap();
        let target = (1.0 - eps) * total;
        match cum.iter().position(|&c| c >= target) {
            Some(0) => Ok(t.xs()[0]),
            Some(i) => Ok(t.xs()[i]),
            None => Ok(t.grid().last()),
        }
    }

    /// `f̃(z / k) / k`: the DR of `k X`.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive, got {k}"
            )));
        }
        match &self.repr {
            PdfRepr::Tabulated(t) => {
                DrPdf::from_table(t.dilate(k)?.map_values(|v| v / k, Monotonicity::Nonincreasing)?)
            }
            PdfRepr::Analytic(a) => {
                let d = a.density.clone();
                let end = a.support_end * k;
                let mut pdf = DrPdf::analytic(format!("dilate({},{k})", a.label), move |z| d(z / k) / k, end)?;
                if a.level_measure.is_some() {
                    let inner = self.clone();
                    pdf = pdf.with_level_measure(move |y| k * inner.level_measure(k * y));
                }
                if let Some(c) = a.cdf.clone() {
                    pdf = pdf.with_cdf(move |z| c(z / k));
                }
                let breaks: Vec<f64> = a.breaks.iter().map(|b| b / k).collect();
                Ok(pdf.modify(|p| p.breaks = breaks))
            }
        }
    }

    /// The natural cdf: exact running integral of the table, the attached
    /// closed form, or the closed-form pdf integrated on the knots of the
    /// default tabulation.
    pub fn cdf(&self) -> Result<DrCdf> {
        match &self.repr {
            PdfRepr::Tabulated(t) => cdf_of_dr(self, t.grid()),
            PdfRepr::Analytic(a) if a.cdf.is_some() => {
                let support = if a.support_end.is_finite() {
                    a.support_end
                } else {
                    self.effective_end()
                };
                let c = a.cdf.clone().unwrap();
                Ok(DrCdf::analytic(a.label.clone(), move |z| c(z), support)?.with_density(self.clone()))
            }
            PdfRepr::Analytic(a) => {
                let mut knots: Vec<f64> = self.table()?.xs().to_vec();
                let end = self.effective_end();
                if a.support_end.is_finite() {
                    knots.push(a.support_end);
                } else {
                    knots.push(end);
                }
                let grid = Grid::from_unsorted(knots)?;
                cdf_of_dr(self, &grid)
            }
        }
    }

    /// The DR as a univariate density on `[0, z_max]` (finite support).
    pub fn to_density_fn(&self) -> Result<DensityFn> {
        let end = self.support_end();
        if !end.is_finite() {
            return Err(Error::UnboundedSupport);
        }
        let me = self.clone();
        DensityFn::univariate(0.0, end, move |z| me.value(z))
    }
}

fn table_level_measure(t: &TabulatedFn, y: f64) -> f64 {
    let xs = t.xs();
    let v = t.values();
    if y > v[0] {
        return 0.0;
    }
    // first index whose value drops below y
    let i = v.partition_point(|&u| u >= y);
    if i >= v.len() {
        return xs[xs.len() - 1];
    }
    // v[i-1] >= y > v[i]
    let (x0, v0, x1, v1) = (xs[i - 1], v[i - 1], xs[i], v[i]);
    x0 + (v0 - y) / (v0 - v1) * (x1 - x0)
}

/// `sup{z ∈ [0, end] : f(z) ≥ y}` for nonincreasing `f`.
fn bisect_level(f: &dyn Fn(f64) -> f64, end: f64, y: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = if end.is_finite() {
        if f(end) >= y {
            return end;
        }
        end
    } else {
        let mut h = 1.0;
        while f(h) >= y {
            lo = h;
            h *= 2.0;
            if h > 1e300 {
                return f64::INFINITY;
            }
        }
        h
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of [`DrPdf::level_integral`]; `tail` is the share contributed
/// right next to `y = 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelIntegral {
    pub value: f64,
    pub tail: f64,
}

/// Knots on `[a, b]` refined geometrically towards both ends.
fn clustered_knots(a: f64, b: f64) -> Vec<f64> {
    let h = 0.5 * (b - a);
    let depth = if a == 0.0 { 110 } else { 50 };
    let mut k = vec![a];
    k.extend((0..=depth).rev().map(|i| a + h * 0.5f64.powi(i)));
    k.extend((1..=50).map(|i| b - h * 0.5f64.powi(i)));
    k.push(b);
    k.dedup_by(|x, prev| *x <= *prev);
    k
}

fn integration_knots(end: f64) -> Vec<f64> {
    let mut k = vec![0.0];
    let g = Grid::geometric(end * 1e-12, end, 2048).expect("positive end");
    k.extend_from_slice(g.points());
    k
}

// ---------------------------------------------------------------------------
// DrCdf

#[derive(Clone)]
enum CdfRepr {
    Analytic {
        label: Arc<str>,
        eval: ScalarFn,
        support: f64,
    },
    Tabulated(Arc<TabulatedFn>),
    Lattice {
        join: bool,
        parts: Arc<(DrCdf, DrCdf)>,
    },
    Dilated {
        inner: Arc<DrCdf>,
        factor: f64,
    },
}

/// The cdf of a DR: nondecreasing, concave, `F̃(0) = 0`, tending to 1.
#[derive(Clone)]
pub struct DrCdf {
    repr: CdfRepr,
    density: Option<DrPdf>,
}

impl fmt::Debug for DrCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            CdfRepr::Analytic { label, .. } => write!(f, "DrCdf::Analytic({label})"),
            CdfRepr::Tabulated(t) => write!(f, "DrCdf::Tabulated({} knots)", t.len()),
            CdfRepr::Lattice { join, parts } => {
                write!(
                    f,
                    "DrCdf::{}({:?}, {:?})",
                    if *join { "Join" } else { "Meet" },
                    parts.0,
                    parts.1
                )
            }
            CdfRepr::Dilated { inner, factor } => write!(f, "DrCdf::Dilated({inner:?}, {factor})"),
        }
    }
}

impl DrCdf {
    /// Closed-form cdf. `support` is where it has (numerically) reached 1;
    /// beyond it the cdf is taken to be exactly `F(support)`.
    pub fn analytic(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: f64,
    ) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidArgument("cdf support must be finite and positive".into()));
        }
        Ok(DrCdf {
            repr: CdfRepr::Analytic {
                label: Arc::from(label.into()),
                eval: Arc::new(f),
                support,
            },
            density: None,
        })
    }

    /// Tabulated cdf. Must be nondecreasing, start at `F(0) = 0` and end
    /// within `1e-6` of 1. Concavity is not enforced; see
    /// [`DrCdf::concavity_defect`].
    pub fn from_table(table: TabulatedFn) -> Result<Self> {
        let v = table.values();
        if v.windows(2).any(|w| w[1] < w[0] - MONOTONE_TOL) {
            return Err(Error::NotMonotone("DR cdf must be nondecreasing".into()));
        }
        if table.xs()[0] < 0.0 {
            return Err(Error::InvalidArgument("DR cdf grid must start at z >= 0".into()));
        }
        let start = table.first_value();
        if table.xs()[0] == 0.0 && start.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("DR cdf must vanish at 0, got {start}")));
        }
        let end = table.last_value();
        if !(end > 1.0 - 1e-6 && end <= 1.0 + 1e-9) {
            return Err(Error::NotNormalised {
                total: end,
                tolerance: 1e-6,
            });
        }
        let table = if table.xs()[0] > 0.0 {
            let mut xs = vec![0.0];
            xs.extend_from_slice(table.xs());
            let mut ys = vec![0.0];
            ys.extend_from_slice(v);
            TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nondecreasing)?
        } else {
            TabulatedFn::new(table.grid().clone(), v.to_vec(), Monotonicity::Nondecreasing)?
        };
        Ok(DrCdf {
            repr: CdfRepr::Tabulated(Arc::new(table)),
            density: None,
        })
    }

    pub fn with_density(mut self, pdf: DrPdf) -> Self {
        self.density = Some(pdf);
        self
    }

    /// The density this cdf was built from, if it was recorded.
    pub fn attached_density(&self) -> Option<&DrPdf> {
        self.density.as_ref()
    }

    /// Pointwise maximum (lattice join, tropical sum).
    pub fn join(a: &DrCdf, b: &DrCdf) -> DrCdf {
        DrCdf {
            repr: CdfRepr::Lattice {
                join: true,
                parts: Arc::new((a.clone(), b.clone())),
            },
            density: None,
        }
    }

    /// Pointwise minimum (lattice meet).
    pub fn meet(a: &DrCdf, b: &DrCdf) -> DrCdf {
        DrCdf {
            repr: CdfRepr::Lattice {
                join: false,
                parts: Arc::new((a.clone(), b.clone())),
            },
            density: None,
        }
    }

    /// `F(z / k)`.
    pub fn dilate(&self, k: f64) -> Result<DrCdf> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive, got {k}"
            )));
        }
        if k == 1.0 {
            return Ok(self.clone());
        }
        let density = match &self.density {
            Some(p) => Some(p.dilate(k)?),
            None => None,
        };
        Ok(DrCdf {
            repr: CdfRepr::Dilated {
                inner: Arc::new(self.clone()),
                factor: k,
            },
            density,
        })
    }

    pub fn label(&self) -> Option<String> {
        match &self.repr {
            CdfRepr::Analytic { label, .. } => Some(label.to_string()),
            _ => None,
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if z < 0.0 || z.is_nan() {
            return Err(Error::InvalidArgument(format!("DR cdf evaluated at negative z = {z}")));
        }
        Ok(self.value(z))
    }

    pub(crate) fn value(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            CdfRepr::Analytic { eval, support, .. } => eval(z.min(*support)),
            CdfRepr::Tabulated(t) => t.eval_clamped(z),
            CdfRepr::Lattice { join, parts } => {
                let (a, b) = (parts.0.value(z), parts.1.value(z));
                if *join {
                    a.max(b)
                } else {
                    a.min(b)
                }
            }
            CdfRepr::Dilated { inner, factor } => inner.value(z / factor),
        }
    }

    /// True when no tabulated approximation is involved.
    pub fn is_closed_form(&self) -> bool {
        match &self.repr {
            CdfRepr::Analytic { .. } => true,
            CdfRepr::Tabulated(_) => false,
            CdfRepr::Lattice { parts, .. } => parts.0.is_closed_form() && parts.1.is_closed_form(),
            CdfRepr::Dilated { inner, .. } => inner.is_closed_form(),
        }
    }

    /// A point beyond which the cdf is (numerically) constant.
    pub fn support(&self) -> f64 {
        match &self.repr {
            CdfRepr::Analytic { support, .. } => *support,
            CdfRepr::Tabulated(t) => t.grid().last(),
            CdfRepr::Lattice { parts, .. } => parts.0.support().max(parts.1.support()),
            CdfRepr::Dilated { inner, factor } => inner.support() * factor,
        }
    }

    /// Knots of the underlying tables, if any.
    pub fn knots(&self) -> Option<Vec<f64>> {
        match &self.repr {
            CdfRepr::Analytic { .. } => None,
            CdfRepr::Tabulated(t) => Some(t.xs().to_vec()),
            CdfRepr::Lattice { parts, .. } => match (parts.0.knots(), parts.1.knots()) {
                (None, None) => None,
                (a, b) => Some(a.into_iter().chain(b).flatten().collect()),
            },
            CdfRepr::Dilated { inner, factor } => inner.knots().map(|k| k.into_iter().map(|x| x * factor).collect()),
        }
    }

    /// Smallest grid point (on a fine scan) where `F ≥ 1 - eps`.
    pub fn quantile_end(&self, eps: f64) -> f64 {
        let s = self.support();
        let target = self.value(s) - eps;
        let (mut lo, mut hi) = (0.0, s);
        if self.value(lo) >= target {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn tabulate_on(&self, grid: &Grid) -> Result<TabulatedFn> {
        let vals = grid.points().iter().map(|&z| self.value(z)).collect();
        TabulatedFn::new(grid.clone(), vals, Monotonicity::Nondecreasing)
    }

    /// Piecewise-linear approximation accurate to about `tol` in absolute
    /// value. Tables are returned as-is and lattice combinations are
    /// formed exactly from their operands' tables.
    pub fn tabulate_adaptive(&self, tol: f64) -> Result<TabulatedFn> {
        match &self.repr {
            CdfRepr::Tabulated(t) => Ok((**t).clone()),
            CdfRepr::Dilated { inner, factor } => inner.tabulate_adaptive(tol)?.dilate(*factor),
            CdfRepr::Lattice { join, parts } => {
                let a = parts.0.tabulate_adaptive(tol)?;
                let b = parts.1.tabulate_adaptive(tol)?;
                pl_envelope(
                    &extend_to(&a, b.grid().last())?,
                    &extend_to(&b, a.grid().last())?,
                    *join,
                )
            }
            CdfRepr::Analytic { eval, support, .. } => {
                let (xs, ys) = adaptive_samples(&**eval, *support, tol);
                let ys = running_max(ys);
                TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nondecreasing)
            }
        }
    }

    /// Largest violation of concavity on `grid`: how far any sample lies
    /// below the chord of its neighbours. Zero for a proper DR cdf.
    pub fn concavity_defect(&self, grid: &Grid) -> f64 {
        let xs = grid.points();
        let ys: Vec<f64> = xs.iter().map(|&z| self.value(z)).collect();
        (1..xs.len() - 1)
            .map(|i| lerp(xs[i - 1], ys[i - 1], xs[i + 1], ys[i + 1], xs[i]) - ys[i])
            .fold(0.0, f64::max)
    }

    /// The DR pdf: the attached density if known, otherwise the slopes of
    /// a concave tabulation (a step function).
    pub fn density(&self) -> Result<DrPdf> {
        if let Some(p) = &self.density {
            return Ok(p.clone());
        }
        let t = self.tabulate_adaptive(CDF_TABULATION_TOL)?;
        let xs = t.xs();
        let ys = t.values();
        let slopes: Vec<f64> = (1..xs.len())
            .map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]))
            .collect();
        let scale = slopes.iter().cloned().fold(0.0, f64::max).max(1e-300);
        if let Some(i) = slopes.windows(2).position(|w| w[1] > w[0] + 1e-6 * scale) {
            return Err(Error::Numerical(format!(
                "cdf is not concave near z = {}; it has no nonincreasing density",
                xs[i + 1]
            )));
        }
        let mut zs = Vec::with_capacity(2 * slopes.len());
        let mut fs = Vec::with_capacity(2 * slopes.len());
        let mut current = f64::INFINITY;
        for (i, &s) in slopes.iter().enumerate() {
            let s = s.max(0.0).min(current);
            current = s;
            zs.push(xs[i]);
            fs.push(s);
            zs.push(xs[i + 1]);
            fs.push(s);
        }
        let table = TabulatedFn::from_points_with_steps(&zs, &fs, Monotonicity::Nonincreasing)?;
        DrPdf::from_table(table)
    }
}

pub(crate) fn extend_to(t: &TabulatedFn, end: f64) -> Result<TabulatedFn> {
    if t.grid().last() >= end {
        return Ok(t.clone());
    }
    let mut xs = t.xs().to_vec();
    let mut ys = t.values().to_vec();
    xs.push(end);
    ys.push(t.last_value());
    TabulatedFn::new(Grid::new(xs)?, ys, t.monotone())
}

pub(crate) fn running_max(mut ys: Vec<f64>) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    for y in ys.iter_mut() {
        m = m.max(*y);
        *y = m;
    }
    ys
}

/// Samples `f` on `[0, end]`, bisecting intervals whose midpoint deviates
/// from the chord by more than `tol`.
fn adaptive_samples(f: &dyn Fn(f64) -> f64, end: f64, tol: f64) -> (Vec<f64>, Vec<f64>) {
    const MAX_POINTS: usize = 1 << 21;
    let mut seeds = vec![0.0];
    seeds.extend_from_slice(Grid::geometric(end * 1e-12, end, 257).unwrap().points());
    seeds.extend_from_slice(Grid::uniform(0.0, end, 257).unwrap().points());
    let seeds = Grid::from_unsorted(seeds).unwrap().into_points();
    let fs: Vec<f64> = seeds.iter().map(|&x| f(x)).collect();

    let mut xs = vec![seeds[0]];
    let mut ys = vec![fs[0]];
    for i in 1..seeds.len() {
        let mut stack = vec![(seeds[i - 1], fs[i - 1], seeds[i], fs[i], 0u32)];
        while let Some((a, fa, b, fb, depth)) = stack.pop() {
            let m = 0.5 * (a + b);
            let fm = f(m);
            let refine = depth < 60 && xs.len() < MAX_POINTS && m > a && m < b && (fm - 0.5 * (fa + fb)).abs() > tol;
            if refine {
                // right half first so the left half is processed next
                stack.push((m, fm, b, fb, depth + 1));
                stack.push((a, fa, m, fm, depth + 1));
            } else {
                xs.push(b);
                ys.push(fb);
            }
        }
    }
    (xs, ys)
}

// ---------------------------------------------------------------------------
// Measure functions and multivariate densities

/// Samples of `m(y) = |{x : f(x) ≥ y}|` at decreasing thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFn {
    thresholds: Vec<f64>,
    measures: Vec<f64>,
}

impl MeasureFn {
    pub fn new(thresholds: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        if thresholds.len() != measures.len() || thresholds.is_empty() {
            return Err(Error::InvalidArgument(
                "thresholds and measures differ in length".into(),
            ));
        }
        if thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("thresholds must be strictly decreasing".into()));
        }
        if measures.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidArgument("measures must be nonnegative".into()));
        }
        if measures.windows(2).any(|w| w[1] < w[0] - MONOTONE_TOL) {
            return Err(Error::NotMonotone(
                "measure must be nonincreasing in the threshold".into(),
            ));
        }
        Ok(MeasureFn { thresholds, measures })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// As a table over increasing thresholds (values nonincreasing).
    pub fn to_table(&self) -> Result<TabulatedFn> {
        let xs: Vec<f64> = self.thresholds.iter().rev().copied().collect();
        let ys: Vec<f64> = self.measures.iter().rev().copied().collect();
        TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::Nonincreasing)
    }

    /// Swaps the axes.
    pub fn rearrangement(&self) -> Result<DrPdf> {
        DrPdf::from_level_measure(&self.thresholds, &self.measures)
    }
}

/// An evaluable density on a finite axis-aligned box.
#[derive(Clone)]
pub struct DensityFn {
    dim: usize,
    support: Vec<(f64, f64)>,
    eval: VectorFn,
}

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFn")
            .field("dim", &self.dim)
            .field("support", &self.support)
            .finish()
    }
}

/// Tolerance of the normalisation check performed on construction.
pub const DENSITY_MASS_TOL: f64 = 5e-2;

impl DensityFn {
    /// Validates the box and checks `∫ f ≈ 1` (quadrature in one dimension,
    /// fixed-seed Monte Carlo otherwise).
    pub fn new(support: Vec<(f64, f64)>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("density needs at least one dimension".into()));
        }
        for &(lo, hi) in &support {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::UnboundedSupport);
            }
            if !(hi > lo) {
                return Err(Error::InvalidArgument(format!("empty support [{lo}, {hi}]")));
            }
        }
        let d = DensityFn {
            dim: support.len(),
            support,
            eval: Arc::new(f),
        };
        let mass = d.mass_estimate()?;
        if (mass - 1.0).abs() > DENSITY_MASS_TOL {
            return Err(Error::NotNormalised {
                total: mass,
                tolerance: DENSITY_MASS_TOL,
            });
        }
        Ok(d)
    }

    pub fn univariate(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        DensityFn::new(vec![(lo, hi)], move |x: &[f64]| f(x[0]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn volume(&self) -> f64 {
        self.support.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// `f(x)`, zero outside the box and clamped at zero.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x.iter().zip(&self.support).any(|(v, (lo, hi))| v < lo || v > hi) {
            return 0.0;
        }
        (self.eval)(x).max(0.0)
    }

    fn mass_estimate(&self) -> Result<f64> {
        if self.dim == 1 {
            let (lo, hi) = self.support[0];
            let knots = Grid::uniform(lo, hi, 4097)?.into_points();
            return Ok(quad::integrate_over(&|x: f64| self.eval(&[x]), &knots));
        }
        let n = 1u64 << 15;
        let sampler = BoxSampler::new(SamplerKind::Uniform, 0x5eed, &self.support)?;
        let sum: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut p = vec![0.0; self.dim];
                sampler.point(i, &mut p);
                self.eval(&p)
            })
            .sum();
        Ok(sum / n as f64 * self.volume())
    }
}

/// Adaptive sampling of a univariate density used to locate its level
/// sets. Cells are refined until the density is close to linear on each.
struct LevelScanner<'a> {
    f: &'a (dyn Fn(f64) -> f64 + Sync),
    xs: Vec<f64>,
    fs: Vec<f64>,
    max: f64,
}

impl<'a> LevelScanner<'a> {
    fn new(f: &'a (dyn Fn(f64) -> f64 + Sync), lo: f64, hi: f64) -> Self {
        let coarse = Grid::uniform(lo, hi, 2049).unwrap().into_points();
        let cf: Vec<f64> = coarse.iter().map(|&x| f(x)).collect();
        let scale = cf.iter().cloned().fold(0.0, f64::max).max(1e-300);
        let min_width = (hi - lo) * 1e-9;

        let mut xs = vec![coarse[0]];
        let mut fs = vec![cf[0]];
        for i in 1..coarse.len() {
            let mut stack = vec![(coarse[i - 1], cf[i - 1], coarse[i], cf[i])];
            while let Some((a, fa, b, fb)) = stack.pop() {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if b - a > min_width && (fm - 0.5 * (fa + fb)).abs() > 1e-6 * scale {
                    stack.push((m, fm, b, fb));
                    stack.push((a, fa, m, fm));
                } else {
                    xs.push(m);
                    fs.push(fm);
                    xs.push(b);
                    fs.push(fb);
                }
            }
        }

        // refine the maximum with a golden-section search around the best sample
        let k = fs
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v > fs[b] { i } else { b });
        let (mut a, mut b) = (xs[k.saturating_sub(1)], xs[(k + 1).min(xs.len() - 1)]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) >= f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let xm = 0.5 * (a + b);
        let fm = f(xm);
        let mut max = fs[k];
        if fm > max {
            max = fm;
            let pos = xs.partition_point(|&x| x < xm);
            if xs.get(pos) != Some(&xm) {
                xs.insert(pos, xm);
                fs.insert(pos, fm);
            }
        }
        LevelScanner { f, xs, fs, max }
    }

    fn root(&self, mut a: f64, mut b: f64, y: f64) -> f64 {
        // f(a) - y and f(b) - y have opposite signs (≥ / <)
        let a_in = (self.f)(a) >= y;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if ((self.f)(m) >= y) == a_in {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn measure(&self, y: f64) -> f64 {
        let mut total = 0.0;
        for i in 1..self.xs.len() {
            let (a, b) = (self.xs[i - 1], self.xs[i]);
            let (ina, inb) = (self.fs[i - 1] >= y, self.fs[i] >= y);
            total += match (ina, inb) {
                (true, true) => b - a,
                (false, false) => 0.0,
                (true, false) => self.root(a, b, y) - a,
                (false, true) => b - self.root(a, b, y),
            };
        }
        total
    }
}

fn univariate_fn(f: &DensityFn) -> Result<impl Fn(f64) -> f64 + Sync + '_> {
    if f.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a univariate density, got dim {}",
            f.dim()
        )));
    }
    Ok(move |x: f64| f.eval(&[x]))
}

/// Level-set measures `m(y_i)` of a univariate density. Thresholds above
/// the maximum give 0.
pub fn measure_function(f: &DensityFn, thresholds: &Grid) -> Result<MeasureFn> {
    let g = univariate_fn(f)?;
    if thresholds.first() <= 0.0 {
        return Err(Error::InvalidArgument("thresholds must be positive".into()));
    }
    let (lo, hi) = f.support()[0];
    let scanner = LevelScanner::new(&g, lo, hi);
    let ys: Vec<f64> = thresholds.points().iter().rev().copied().collect();
    let ms: Vec<f64> = ys.par_iter().map(|&y| scanner.measure(y)).collect();
    MeasureFn::new(ys, running_max(ms))
}

/// Numerical DR of a univariate density: the level-set measure on
/// `m_thresholds` geometric thresholds between `max f · (1 - 1e-6)` and
/// `max f · 1e-6`, inverted.
pub fn dr_from_density_1d(f: &DensityFn, m_thresholds: usize) -> Result<DrPdf> {
    const MIN_THRESHOLDS: usize = 8;
    if m_thresholds < MIN_THRESHOLDS {
        return Err(Error::InsufficientResolution {
            got: m_thresholds,
            min: MIN_THRESHOLDS,
        });
    }
    let g = univariate_fn(f)?;
    let (lo, hi) = f.support()[0];
    let scanner = LevelScanner::new(&g, lo, hi);
    let top = scanner.max;
    if !(top > 0.0) {
        return Err(Error::InvalidArgument("density is identically zero".into()));
    }
    let levels = Grid::geometric(top * 1e-6, top * (1.0 - 1e-6), m_thresholds)?;
    let ys: Vec<f64> = levels.points().iter().rev().copied().collect();
    let ms: Vec<f64> = running_max(ys.par_iter().map(|&y| scanner.measure(y)).collect());
    let mut all_y = vec![top];
    all_y.extend_from_slice(&ys);
    let mut all_m = vec![0.0];
    all_m.extend_from_slice(&ms);
    DrPdf::from_level_measure(&all_y, &all_m)
}

/// Integrates a DR onto `grid`, normalised by the DR's total mass.
pub fn cdf_of_dr(f: &DrPdf, grid: &Grid) -> Result<DrCdf> {
    if grid.first() < 0.0 {
        return Err(Error::InvalidGrid("cdf grid must start at z >= 0".into()));
    }
    let mut zs: Vec<f64> = Vec::with_capacity(grid.len() + 1);
    if grid.first() > 0.0 {
        zs.push(0.0);
    }
    zs.extend_from_slice(grid.points());

    let (raw, total) = match &f.repr {
        PdfRepr::Tabulated(t) => {
            let cum = t.cumulative_integral();
            let total = *cum.last().unwrap();
            let xs = t.xs();
            let at = |z: f64| -> f64 {
                if z <= xs[0] {
                    return 0.0;
                }
                if z >= xs[xs.len() - 1] {
                    return total;
                }
                let i = crate::tabulated::segment_index(xs, z);
                let v0 = t.values()[i];
                let vz = lerp(xs[i], v0, xs[i + 1], t.values()[i + 1], z);
                cum[i] + 0.5 * (v0 + vz) * (z - xs[i])
            };
            (zs.iter().map(|&z| at(z)).collect::<Vec<_>>(), total)
        }
        PdfRepr::Analytic(a) => {
            let end = a.support_end;
            let dens = |z: f64| if z > end { 0.0 } else { (a.density)(z) };
            let mut acc = 0.0;
            let mut raw = Vec::with_capacity(zs.len());
            let mut prev = 0.0;
            for &z in &zs {
                let z = z.min(end);
                if z > prev {
                    // split long panels so the fixed-order rule stays accurate
                    let pieces = (((z - prev) / 0.25).ceil() as usize).clamp(1, 64);
                    let knots = Grid::uniform(prev, z, pieces + 1)
                        .map(Grid::into_points)
                        .unwrap_or_else(|_| vec![prev, z]);
                    acc += quad::integrate_over(&dens, &knots);
                    prev = z;
                }
                raw.push(acc);
            }
            (raw, f.mass()?)
        }
    };
    if (total - 1.0).abs() > CDF_MASS_TOL {
        return Err(Error::NotNormalised {
            total,
            tolerance: CDF_MASS_TOL,
        });
    }
    let vals: Vec<f64> = running_max(raw.into_iter().map(|v| (v / total).min(1.0)).collect());
    let t = TabulatedFn::new(Grid::new(zs)?, vals, Monotonicity::Nondecreasing)?;
    let cdf = DrCdf {
        repr: CdfRepr::Tabulated(Arc::new(t)),
        density: None,
    };
    Ok(cdf.with_density(f.clone()))
}

/// Swaps grid and values of a monotone table. Flat stretches are
/// collapsed first (keeping the right-most abscissa for nonincreasing
/// input, the left-most for nondecreasing input).
pub fn functional_inverse(g: &TabulatedFn) -> Result<TabulatedFn> {
    let v = g.values();
    let x = g.xs();
    let decreasing = match g.monotone() {
        Monotonicity::Nonincreasing => true,
        Monotonicity::Nondecreasing => false,
        Monotonicity::None => {
            if v.windows(2).all(|w| w[1] <= w[0]) {
                true
            } else if v.windows(2).all(|w| w[1] >= w[0]) {
                false
            } else {
                return Err(Error::InverseUndefined("function is not monotone".into()));
            }
        }
    };
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        match pairs.last_mut() {
            Some(last) if last.0 == v[i] => {
                if decreasing {
                    last.1 = x[i];
                }
            }
            _ => pairs.push((v[i], x[i])),
        }
    }
    if pairs.len() < 2 {
        return Err(Error::InverseUndefined("function is constant".into()));
    }
    if decreasing {
        pairs.reverse();
    }
    let (gx, gy): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let monotone = if decreasing {
        Monotonicity::Nonincreasing
    } else {
        Monotonicity::Nondecreasing
    };
    TabulatedFn::new(
        Grid::new(gx).map_err(|e| Error::InverseUndefined(e.to_string()))?,
        gy,
        monotone,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_pdf() -> DrPdf {
        DrPdf::analytic("exp", |z: f64| (-z).exp(), f64::INFINITY)
            .unwrap()
            .with_level_measure(|y: f64| -y.ln())
    }

    fn beta32(z: f64) -> f64 {
        12.0 * (1.0 - z) * z * z
    }

    #[test]
    fn measure_of_beta_at_its_maximum_is_zero() {
        let f = DensityFn::univariate(0.0, 1.0, beta32).unwrap();
        let m = measure_function(&f, &Grid::new(vec![8.0 / 9.0, 16.0 / 9.0]).unwrap()).unwrap();
        // thresholds are stored decreasing
        assert!(m.measures()[0] < 1e-6, "{:?}", m.measures());
        assert!((m.measures()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn measure_of_uniform_is_full_support() {
        let f = DensityFn::univariate(0.0, 1.0, |_| 1.0).unwrap();
        let m = measure_function(&f, &Grid::new(vec![0.25, 0.5]).unwrap()).unwrap();
        assert!((m.measures()[0] - 1.0).abs() < 1e-12);
        let above = measure_function(&f, &Grid::new(vec![1.5, 2.0]).unwrap()).unwrap();
        assert_eq!(above.measures(), &[0.0, 0.0]);
    }

    #[test]
    fn unbounded_support_is_refused() {
        assert!(matches!(
            DensityFn::univariate(0.0, f64::INFINITY, |x| (-x).exp()),
            Err(Error::UnboundedSupport)
        ));
    }

    #[test]
    fn too_few_thresholds() {
        let f = DensityFn::univariate(0.0, 1.0, |_| 1.0).unwrap();
        assert!(matches!(
            dr_from_density_1d(&f, 7),
            Err(Error::InsufficientResolution { got: 7, min: 8 })
        ));
    }

    #[test]
    fn decreasing_density_is_its_own_rearrangement() {
        let f = DensityFn::univariate(0.0, 40.0, |x| (-x).exp()).unwrap();
        let dr = dr_from_density_1d(&f, DEFAULT_THRESHOLDS).unwrap();
        let err = (0..=1000)
            .map(|i| i as f64 * 0.01)
            .map(|z| (dr.eval(z).unwrap() - (-z).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        assert!((dr.mass().unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn standard_normal_rearrangement() {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let f = DensityFn::univariate(-8.0, 8.0, phi).unwrap();
        let dr = dr_from_density_1d(&f, DEFAULT_THRESHOLDS).unwrap();
        let err = (0..=1600)
            .map(|i| i as f64 * 0.01)
            .map(|z| (dr.eval(z).unwrap() - phi(z / 2.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn uniform_rearranges_to_a_step() {
        let f = DensityFn::univariate(2.0, 3.0, |_| 1.0).unwrap();
        let dr = dr_from_density_1d(&f, 64).unwrap();
        assert_eq!(dr.eval(0.0).unwrap(), 1.0);
        assert!((dr.eval(0.999).unwrap() - 1.0).abs() < 1e-5);
        assert!(dr.eval(1.0 + 1e-9).unwrap() < 1e-5);
        let cdf = cdf_of_dr(&dr, &Grid::uniform(0.0, 1.0, 101).unwrap()).unwrap();
        for i in 0..=100 {
            let z = i as f64 / 100.0;
            assert!((cdf.eval(z).unwrap() - z).abs() < 1e-5);
        }
    }

    #[test]
    fn cdf_of_exponential() {
        let grid = Grid::uniform(0.0, 20.0, 10_000).unwrap();
        let cdf = cdf_of_dr(&exp_pdf(), &grid).unwrap();
        let err = grid
            .points()
            .iter()
            .map(|&z| (cdf.eval(z).unwrap() - (1.0 - (-z).exp())).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert_eq!(cdf.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn cdf_of_tabulated_exponential() {
        let t = exp_pdf().tabulate(ValueGrid::default()).unwrap();
        let dr = DrPdf::from_table(t).unwrap();
        let grid = Grid::uniform(0.0, 20.0, 10_000).unwrap();
        let cdf = cdf_of_dr(&dr, &grid).unwrap();
        let err = grid
            .points()
            .iter()
            .map(|&z| (cdf.eval(z).unwrap() - (1.0 - (-z).exp())).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn eval_rejects_negative_z() {
        assert!(exp_pdf().eval(-1.0).is_err());
        let cdf = exp_pdf().cdf().unwrap();
        assert!(cdf.eval(-0.5).is_err());
        assert_eq!(cdf.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_evaluation_beyond_the_table() {
        let t = TabulatedFn::new(
            Grid::uniform(0.0, 1.0, 2).unwrap(),
            vec![1.5, 0.5],
            Monotonicity::Nonincreasing,
        )
        .unwrap();
        let dr = DrPdf::from_table(t).unwrap();
        assert_eq!(dr.eval(2.0).unwrap(), 0.0);
        let cdf = cdf_of_dr(&dr, &Grid::uniform(0.0, 1.0, 3).unwrap()).unwrap();
        assert_eq!(cdf.eval(5.0).unwrap(), 1.0);
    }

    #[test]
    fn level_measure_of_tables_and_closed_forms_agree() {
        let pdf = exp_pdf();
        let t = DrPdf::from_table(pdf.tabulate(ValueGrid::default()).unwrap()).unwrap();
        for y in [0.9, 0.5, 0.1, 1e-3, 1e-9] {
            assert!((t.level_measure(y) - (-y.ln())).abs() < 2e-6);
        }
        assert_eq!(t.level_measure(2.0), 0.0);
        // numerical inversion without the closed-form measure
        let bare = DrPdf::analytic("exp", |z: f64| (-z).exp(), f64::INFINITY).unwrap();
        assert!((bare.level_measure(0.25) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_exponential_is_minus_log() {
        let g = Grid::uniform(0.0, 10.0, 2001).unwrap();
        let t = TabulatedFn::new(
            g.clone(),
            g.points().iter().map(|z| (-z).exp()).collect(),
            Monotonicity::Nonincreasing,
        )
        .unwrap();
        let inv = functional_inverse(&t).unwrap();
        assert_eq!(inv.monotone(), Monotonicity::Nonincreasing);
        for &y in inv.xs().iter().step_by(97) {
            assert!((inv.interpolate(y).unwrap() + y.ln()).abs() < 1e-12);
        }
        // between knots only the interpolation error remains
        assert!((inv.interpolate(0.5).unwrap() + 0.5f64.ln()).abs() < 1e-5);
        let back = functional_inverse(&inv).unwrap();
        for (a, b) in back.values().iter().zip(t.values()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn inverse_of_identity_and_scaled_exponential() {
        let g = Grid::uniform(0.0, 1.0, 11).unwrap();
        let id = TabulatedFn::new(g.clone(), g.points().to_vec(), Monotonicity::Nondecreasing).unwrap();
        assert_eq!(functional_inverse(&id).unwrap(), id);

        let g = Grid::uniform(0.0, 30.0, 3001).unwrap();
        let t = TabulatedFn::new(
            g.clone(),
            g.points().iter().map(|z| 0.5 * (-z / 2.0).exp()).collect(),
            Monotonicity::None,
        )
        .unwrap();
        let inv = functional_inverse(&t).unwrap();
        for &y in inv.xs().iter().step_by(101) {
            assert!((inv.interpolate(y).unwrap() + 2.0 * (2.0 * y).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn non_monotone_has_no_inverse() {
        let g = Grid::uniform(0.0, 1.0, 3).unwrap();
        let t = TabulatedFn::new(g, vec![0.0, 1.0, 0.0], Monotonicity::None).unwrap();
        assert!(matches!(functional_inverse(&t), Err(Error::InverseUndefined(_))));
    }

    #[test]
    fn adaptive_tabulation_meets_tolerance() {
        let cdf = DrCdf::analytic("exp", |z: f64| 1.0 - (-z).exp(), 46.0).unwrap();
        let t = cdf.tabulate_adaptive(1e-9).unwrap();
        let worst = (0..20_000)
            .map(|i| i as f64 * 0.0023)
            .map(|z| (t.eval_clamped(z) - (1.0 - (-z).exp())).abs())
            .fold(0.0, f64::max);
        assert!(worst < 3e-9, "{worst}");
    }

    #[test]
    fn density_of_a_concave_table() {
        let g = Grid::new(vec![0.0, 1.0, 3.0]).unwrap();
        let t = TabulatedFn::new(g, vec![0.0, 0.5, 1.0], Monotonicity::Nondecreasing).unwrap();
        let pdf = DrCdf::from_table(t).unwrap().density().unwrap();
        assert_eq!(pdf.eval(0.5).unwrap(), 0.5);
        assert_eq!(pdf.eval(2.0).unwrap(), 0.25);
        assert!((pdf.mass().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dilation_matches_closed_form() {
        let pdf = exp_pdf().dilate(2.0).unwrap();
        assert!((pdf.eval(1.0).unwrap() - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((pdf.level_measure(0.25) - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((pdf.mass().unwrap() - 1.0).abs() < 1e-9);
    }
}
