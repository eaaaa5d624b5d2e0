//! Operations on DRs and their cdfs: inverse and direct mixing, the
//! ⊗ product and its powers, lattice join and meet, scalar action and
//! convolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::ProbVector;
use crate::rearrange::{cdf_of_dr, extend_to, DrCdf, DrPdf, ValueGrid, CDF_TABULATION_TOL};
use crate::tabulated::{pl_envelope, Grid, Monotonicity, TabulatedFn};

/// Relative mass tolerance on mixtures.
pub const MIX_MASS_TOL: f64 = 1e-4;
/// Mass allowed to fall off the end of a convolution grid.
pub const CONV_MASS_TOL: f64 = 1e-4;

const RUN_BEND_TOL: f64 = 1e-13;
const CONV_MIN_SAMPLES: usize = 512;
const CONV_TARGET_SAMPLES: usize = 2048;
const CONV_MAX_POINTS: usize = 32_768;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MixWeight(f64);

impl MixWeight {
    pub const HALF: MixWeight = MixWeight(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(MixWeight(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MixWeight {
    type Error = Error;
    fn try_from(a: f64) -> Result<Self> {
        MixWeight::new(a)
    }
}

impl From<MixWeight> for f64 {
    fn from(w: MixWeight) -> f64 {
        w.0
    }
}

#[derive(Clone, Copy, PartialEq)]
enum MixKind {
    Inverse,
    Direct,
}

/// Inverse mixing, weight `1 - α` on `f1`: the level-set measures add
/// after rescaling, `m(y) = m₁(y / (1-α)) + m₂(y / α)`. This is the DR of
/// `X₁` with probability `1 - α` and `X₂` otherwise, the two placed on
/// disjoint supports.
pub fn inverse_mix(f1: &DrPdf, f2: &DrPdf, w: MixWeight) -> Result<DrPdf> {
    mix(f1, f2, w, MixKind::Inverse)
}

/// Direct mixing: `m(y) = (1-α) m₁(y) + α m₂(y)`, the DR of the mixture of
/// the original densities when their supports are laid over each other.
pub fn direct_mix(f1: &DrPdf, f2: &DrPdf, w: MixWeight) -> Result<DrPdf> {
    mix(f1, f2, w, MixKind::Direct)
}

fn check_nondegenerate(f: &DrPdf) -> Result<()> {
    let p = f.peak();
    if !(p.is_finite() && p > 0.0) || !(f.level_measure(p * 1e-12) > 0.0) {
        return Err(Error::InverseUndefined("input DR has no spread to invert".into()));
    }
    Ok(())
}

fn mix(f1: &DrPdf, f2: &DrPdf, w: MixWeight, kind: MixKind) -> Result<DrPdf> {
    check_nondegenerate(f1)?;
    check_nondegenerate(f2)?;
    let a = w.alpha();
    // level y of the mixture reads level y / s_i of input i, weighted by c_i
    let (s1, s2, c1, c2) = match kind {
        MixKind::Inverse => (1.0 - a, a, 1.0, 1.0),
        MixKind::Direct => (1.0, 1.0, 1.0 - a, a),
    };
    let expected = (1.0 - a) * f1.mass()? + a * f2.mass()?;
    let closed = f1.closed_level_measure().is_some()
        && f2.closed_level_measure().is_some()
        && f1.closed_cdf().is_some()
        && f2.closed_cdf().is_some();
    let out = if closed {
        mix_closed(f1, f2, (s1, s2, c1, c2), kind, a)?
    } else {
        mix_tabulated(f1, f2, (s1, s2, c1, c2))?
    };
    let mass = out.mass()?;
    if (mass - expected).abs() > MIX_MASS_TOL * expected {
        return Err(Error::Numerical(format!(
            "mixture has mass {mass}, expected {expected}"
        )));
    }
    Ok(out)
}

fn mix_closed(f1: &DrPdf, f2: &DrPdf, (s1, s2, c1, c2): (f64, f64, f64, f64), kind: MixKind, a: f64) -> Result<DrPdf> {
    let (p1, p2) = (f1.peak() * s1, f2.peak() * s2);
    let peak = p1.max(p2);
    let end = c1 * f1.support_end() + c2 * f2.support_end();
    let mut breaks = vec![p1, p2];
    breaks.extend(f1.level_breaks().iter().map(|b| b * s1));
    breaks.extend(f2.level_breaks().iter().map(|b| b * s2));
    let (g1, g2) = (f1.clone(), f2.clone());
    let m = move |y: f64| c1 * g1.level_measure(y / s1) + c2 * g2.level_measure(y / s2);
    let tag = match kind {
        MixKind::Inverse => "mix",
        MixKind::Direct => "dmix",
    };
    let label = format!(
        "{tag}({},{},alpha={a})",
        f1.label().unwrap_or("table"),
        f2.label().unwrap_or("table")
    );
    let pdf = DrPdf::from_level_measure_fn(label, m, peak, end, breaks)?;

    // F(z) = z y + Σ_i c_i ∫ (f̃_i - y / s_i)₊ s_i  with y = f̃(z)
    let (g1, g2) = (f1.clone(), f2.clone());
    let (cdf1, cdf2) = (f1.closed_cdf().unwrap(), f2.closed_cdf().unwrap());
    let (w1, w2) = match kind {
        MixKind::Inverse => (1.0 - a, a),
        MixKind::Direct => (1.0 - a, a),
    };
    let me = pdf.clone();
    let cdf = move |z: f64| {
        if z <= 0.0 {
            return 0.0;
        }
        let y = me.value(z);
        if !(y > 0.0) {
            return w1 + w2;
        }
        let part = |g: &DrPdf, c: &dyn Fn(f64) -> f64, s: f64, cw: f64, w: f64| {
            let yi = y / s;
            if yi >= g.peak() && g.level_measure(yi) == 0.0 {
                return 0.0;
            }
            let zi = g.level_measure(yi);
            w * c(zi) - cw * zi * y
        };
        z * y + part(&g1, &*cdf1, s1, c1, w1) + part(&g2, &*cdf2, s2, c2, w2)
    };
    Ok(pdf.with_cdf(cdf))
}

fn table_levels(f: &DrPdf, s: f64, levels: &mut Vec<f64>) -> Result<()> {
    if f.is_tabulated() {
        let t = f.table()?;
        let v = t.values();
        for (i, &y) in v.iter().enumerate() {
            if y > 0.0 {
                levels.push(y * s);
                // a plateau in f̃ is a jump in m: bracket it
                if i + 1 < v.len() && v[i + 1] == y {
                    levels.push(y * s * (1.0 + 1e-12));
                }
            }
        }
    } else {
        levels.extend(ValueGrid::default().levels(f.peak() * s));
        levels.extend(f.level_breaks().iter().map(|b| b * s));
        levels.push(f.peak() * s);
    }
    Ok(())
}

fn mix_tabulated(f1: &DrPdf, f2: &DrPdf, (s1, s2, c1, c2): (f64, f64, f64, f64)) -> Result<DrPdf> {
    let mut levels = Vec::new();
    table_levels(f1, s1, &mut levels)?;
    table_levels(f2, s2, &mut levels)?;
    levels.retain(|y| *y > 0.0 && y.is_finite());
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let m = |y: f64| c1 * f1.level_measure(y / s1) + c2 * f2.level_measure(y / s2);
    let measures: Vec<f64> = levels.iter().map(|&y| m(y)).collect();
    let (levels, measures) = refine_levels(&levels, &measures, &m);
    DrPdf::from_level_measure(&levels, &measures)
}

const REFINE_DEPTH: u32 = 60;
const REFINE_MAX_POINTS: usize = 250_000;

/// Bisects level intervals until linear interpolation of `m` is accurate
/// to `1e-10` of the support length.
fn refine_levels(levels: &[f64], measures: &[f64], m: &dyn Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    let tol = 1e-10 * measures.last().copied().unwrap_or(1.0).max(1.0);
    let mut ys = vec![levels[0]];
    let mut ms = vec![measures[0]];
    let mut stack = Vec::new();
    for i in 1..levels.len() {
        stack.push((levels[i - 1], measures[i - 1], levels[i], measures[i], 0u32));
        while let Some((y0, m0, y1, m1, depth)) = stack.pop() {
            let ym = 0.5 * (y0 + y1);
            let split = depth < REFINE_DEPTH && ym < y0 && ym > y1 && ys.len() + stack.len() < REFINE_MAX_POINTS;
            if split {
                let mm = m(ym);
                if (mm - 0.5 * (m0 + m1)).abs() > tol {
                    // upper half first
                    stack.push((ym, mm, y1, m1, depth + 1));
                    stack.push((y0, m0, ym, mm, depth + 1));
                    continue;
                }
            }
            ys.push(y1);
            ms.push(m1);
        }
    }
    (ys, ms)
}

/// Sorted union of `(1-α) p` and `α q`.
pub fn inverse_mix_discrete(p: &[f64], q: &[f64], w: MixWeight) -> Vec<f64> {
    let a = w.alpha();
    let mut v: Vec<f64> = p.iter().map(|x| (1.0 - a) * x).chain(q.iter().map(|x| a * x)).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Sorted pointwise average `(1-α) p̃ + α q̃` of the nonincreasing
/// rearrangements, the shorter padded with zeros.
pub fn direct_mix_discrete(p: &[f64], q: &[f64], w: MixWeight) -> Vec<f64> {
    let a = w.alpha();
    let n = p.len().max(q.len());
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        s.resize(n, 0.0);
        s
    };
    let (ps, qs) = (sorted(p), sorted(q));
    ps.iter().zip(&qs).map(|(x, y)| (1.0 - a) * x + a * y).collect()
}

/// [`inverse_mix_discrete`] on probability vectors.
pub fn inverse_mix_prob(p: &ProbVector, q: &ProbVector, w: MixWeight) -> Result<ProbVector> {
    ProbVector::new(inverse_mix_discrete(p.probs(), q.probs(), w))
}

/// [`direct_mix_discrete`] on probability vectors.
pub fn direct_mix_prob(p: &ProbVector, q: &ProbVector, w: MixWeight) -> Result<ProbVector> {
    ProbVector::new(direct_mix_discrete(p.probs(), q.probs(), w))
}

fn closed_density(f: &DrCdf) -> Option<&DrPdf> {
    f.attached_density()
        .filter(|p| p.closed_level_measure().is_some() && p.closed_cdf().is_some())
}

/// `F₁ ⊗ F₂`: the cdf of the equal-weight inverse mix.
///
/// Closed forms go through [`inverse_mix`]. Otherwise the product is the
/// sup-convolution `max_{a+b=z} ½F₁(a) + ½F₂(b)` of the tabulated cdfs,
/// computed exactly on the piecewise-linear tables.
pub fn otimes(f1: &DrCdf, f2: &DrCdf) -> Result<DrCdf> {
    if let (Some(p1), Some(p2)) = (closed_density(f1), closed_density(f2)) {
        return inverse_mix(p1, p2, MixWeight::HALF)?.cdf();
    }
    let t1 = f1.tabulate_adaptive(CDF_TABULATION_TOL)?;
    let t2 = f2.tabulate_adaptive(CDF_TABULATION_TOL)?;
    DrCdf::from_table(sup_convolve(&t1, &t2)?)
}

/// `⊗ᵏ F = F(z / k)`.
pub fn otimes_power(f: &DrCdf, k: u32) -> Result<DrCdf> {
    if k == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    f.dilate(k as f64)
}

/// Pointwise maximum.
pub fn join(f1: &DrCdf, f2: &DrCdf) -> DrCdf {
    DrCdf::join(f1, f2)
}

/// Pointwise minimum.
pub fn meet(f1: &DrCdf, f2: &DrCdf) -> DrCdf {
    DrCdf::meet(f1, f2)
}

/// A concave piece of a table: start point and segments `(dx, slope)`.
struct Run {
    x0: f64,
    y0: f64,
    segs: Vec<(f64, f64)>,
}

/// Splits a piecewise-linear function into maximal concave runs. A slope
/// increase counts only if it bends the graph by more than `RUN_BEND_TOL`
/// over the shorter adjacent segment; smaller ones are rounding in the
/// table values.
fn concave_runs(t: &TabulatedFn, weight: f64) -> Vec<Run> {
    let (xs, ys) = (t.xs(), t.values());
    let slopes: Vec<f64> = (1..xs.len())
        .map(|i| weight * (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]))
        .collect();
    let mut runs = Vec::new();
    let mut cur = Run {
        x0: xs[0],
        y0: weight * ys[0],
        segs: Vec::new(),
    };
    for (i, &s) in slopes.iter().enumerate() {
        if let Some(&(dx_prev, prev)) = cur.segs.last() {
            let dx = xs[i + 1] - xs[i];
            if (s - prev) * dx.min(dx_prev) > RUN_BEND_TOL {
                let next = Run {
                    x0: xs[i],
                    y0: weight * ys[i],
                    segs: Vec::new(),
                };
                runs.push(std::mem::replace(&mut cur, next));
            }
        }
        cur.segs.push((xs[i + 1] - xs[i], s));
    }
    runs.push(cur);
    for r in &mut runs {
        r.segs.sort_by(|a, b| b.1.total_cmp(&a.1));
    }
    runs
}

fn merge_runs(a: &Run, b: &Run) -> Result<TabulatedFn> {
    let mut xs = vec![a.x0 + b.x0];
    let mut ys = vec![a.y0 + b.y0];
    let (mut i, mut j) = (0, 0);
    while i < a.segs.len() || j < b.segs.len() {
        let take_a = j >= b.segs.len() || (i < a.segs.len() && a.segs[i].1 >= b.segs[j].1);
        let (dx, s) = if take_a {
            i += 1;
            a.segs[i - 1]
        } else {
            j += 1;
            b.segs[j - 1]
        };
        let (x, y) = (*xs.last().unwrap(), *ys.last().unwrap());
        let nx = x + dx;
        if nx > x {
            xs.push(nx);
            ys.push(y + s * dx);
        }
    }
    if xs.len() == 1 {
        xs.push(xs[0] + 1.0);
        ys.push(ys[0]);
    }
    TabulatedFn::new(Grid::new(xs)?, ys, Monotonicity::None)
}

/// `z ↦ max_{a+b=z} ½g(a) + ½h(b)` for nondecreasing tables, each held
/// constant beyond its last knot.
fn sup_convolve(g: &TabulatedFn, h: &TabulatedFn) -> Result<TabulatedFn> {
    let rg = concave_runs(g, 0.5);
    let rh = concave_runs(h, 0.5);
    let end = g.grid().last() + h.grid().last();
    let mut acc: Option<TabulatedFn> = None;
    for a in &rg {
        for b in &rh {
            let piece = merge_runs(a, b)?;
            acc = Some(match acc {
                None => piece,
                Some(t) => pl_envelope(&t, &piece, true)?,
            });
        }
    }
    let t = extend_to(&acc.expect("at least one run"), end)?;
    let ys = crate::rearrange::running_max(t.values().to_vec());
    TabulatedFn::new(t.grid().clone(), ys, Monotonicity::Nondecreasing)
}

/// `β F` sampled on an adaptive tabulation of `F`; a cdf only for `β = 1`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub table: TabulatedFn,
    pub is_cdf: bool,
}

pub fn scalar_scale(f: &DrCdf, beta: f64) -> Result<Scaled> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {beta}")));
    }
    let t = f.tabulate_adaptive(CDF_TABULATION_TOL)?;
    Ok(Scaled {
        table: t.map_values(|v| beta * v, Monotonicity::Nondecreasing)?,
        is_cdf: beta == 1.0,
    })
}

/// DR cdf of `X₁ + X₂` for independent `X_i` with densities `f_i`.
///
/// The densities are sampled on a shared uniform grid fine enough to give
/// each at least 512 points over its `1 - 1e-6` quantile range, convolved
/// by the trapezoid rule, and the resulting piecewise-linear density is
/// rearranged exactly.
pub fn convolve_dr(f1: &DrPdf, f2: &DrPdf) -> Result<DrCdf> {
    let l1 = f1.quantile_end(1e-6)?;
    let l2 = f2.quantile_end(1e-6)?;
    if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
        return Err(Error::InvalidArgument("convolution needs densities with spread".into()));
    }
    let mut h = l1.min(l2) / CONV_TARGET_SAMPLES as f64;
    if ((l1 + l2) / h) as usize + 1 > CONV_MAX_POINTS {
        h = (l1 + l2) / (CONV_MAX_POINTS - 1) as f64;
        let got = (l1.min(l2) / h) as usize;
        if got < CONV_MIN_SAMPLES {
            return Err(Error::InsufficientResolution {
                got,
                min: CONV_MIN_SAMPLES,
            });
        }
    }
    let n1 = (l1 / h).ceil() as usize + 1;
    let n2 = (l2 / h).ceil() as usize + 1;
    let a: Vec<f64> = (0..n1).map(|i| f1.value(i as f64 * h)).collect();
    let b: Vec<f64> = (0..n2).map(|i| f2.value(i as f64 * h)).collect();
    let n = n1 + n2 - 1;
    let c: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let lo = k.saturating_sub(n2 - 1);
            let hi = k.min(n1 - 1);
            let mut s = 0.0;
            for i in lo..=hi {
                s += a[i] * b[k - i];
            }
            if k < n1.min(n2) {
                // trapezoid end weights on [0, z_k]
                s -= 0.5 * (a[0] * b[k] + a[k] * b[0]);
            } else {
                s -= 0.5 * (a[lo] * b[k - lo] + a[hi] * b[k - hi]);
            }
            (h * s).max(0.0)
        })
        .collect();
    let grid = Grid::new((0..n).map(|k| k as f64 * h).collect())?;
    let density = TabulatedFn::new(grid, c, Monotonicity::None)?;
    let mass = density.integral();
    let beyond = (f1.mass()? * f2.mass()? - mass).max(0.0);
    if beyond > CONV_MASS_TOL {
        return Err(Error::ExtendSupport { mass_beyond: beyond });
    }
    let dr = rearrange_table(&density)?;
    let knots = dr.table()?.grid().clone();
    cdf_of_dr(&dr, &knots)
}

/// Exact DR of a nonnegative piecewise-linear function: its level-set
/// measure is piecewise linear in the level, with jumps at flat pieces.
pub fn rearrange_table(t: &TabulatedFn) -> Result<DrPdf> {
    let (xs, v) = (t.xs(), t.values());
    if v.iter().any(|&y| !(y >= 0.0)) {
        return Err(Error::InvalidArgument("density has negative values".into()));
    }
    // per distinct level: jump in m from flat pieces, and change of dm/d(-y)
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * xs.len());
    for i in 1..xs.len() {
        let dx = xs[i] - xs[i - 1];
        let (lo, hi) = (v[i - 1].min(v[i]), v[i - 1].max(v[i]));
        if hi <= 0.0 {
            continue;
        }
        if hi == lo {
            events.push((hi, dx, 0.0));
        } else {
            let rate = dx / (hi - lo);
            events.push((hi, 0.0, rate));
            events.push((lo, 0.0, -rate));
        }
    }
    if events.is_empty() {
        return Err(Error::InverseUndefined("density is identically zero".into()));
    }
    events.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut zs = vec![0.0];
    let mut ys = vec![events[0].0];
    let (mut m, mut rate, mut y) = (0.0, 0.0, events[0].0);
    let mut i = 0;
    while i < events.len() {
        let level = events[i].0;
        m += rate * (y - level);
        y = level;
        zs.push(m);
        ys.push(y);
        while i < events.len() && events[i].0 == level {
            m += events[i].1;
            rate += events[i].2;
            i += 1;
        }
        zs.push(m);
        ys.push(y);
    }
    let mut pz = Vec::with_capacity(zs.len());
    let mut py = Vec::with_capacity(ys.len());
    for (z, y) in zs.into_iter().zip(ys) {
        if pz.last() == Some(&z) && py.last() == Some(&y) {
            continue;
        }
        pz.push(z);
        py.push(y);
    }
    // merge duplicated abscissae from jumps into steps
    let mut fz = vec![pz[0]];
    let mut fy = vec![py[0]];
    for k in 1..pz.len() {
        if pz[k] <= *fz.last().unwrap() {
            *fy.last_mut().unwrap() = py[k].min(*fy.last().unwrap());
            continue;
        }
        fz.push(pz[k]);
        fy.push(py[k]);
    }
    let table = TabulatedFn::from_points_with_steps(&fz, &fy, Monotonicity::Nonincreasing)?;
    DrPdf::from_table(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{entropy_dr, moments_dr, EntropyKind};
    use crate::families::FamilySpec;
    use std::f64::consts::LN_2;

    fn exp(n: usize) -> (DrPdf, DrCdf) {
        FamilySpec::exp_iid(n).unwrap().dr().unwrap()
    }

    fn sup_gap(f: &DrPdf, g: impl Fn(f64) -> f64, end: f64) -> f64 {
        (0..=2000)
            .map(|i| end * i as f64 / 2000.0)
            .map(|z| (f.value(z) - g(z)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn weights_are_checked() {
        assert!(MixWeight::new(0.0).is_err());
        assert!(MixWeight::new(1.0).is_err());
        assert!(MixWeight::new(f64::NAN).is_err());
    }

    #[test]
    fn mixing_two_exponentials() {
        let (a, _) = exp(1);
        let (b, _) = exp(2);
        let inv = inverse_mix(&a, &b, MixWeight::HALF).unwrap();
        let dir = direct_mix(&a, &b, MixWeight::HALF).unwrap();
        assert!(sup_gap(&inv, |z| 0.5 * (1.0 - (1.0 + 2.0 * z).sqrt()).exp(), 50.0) < 1e-12);
        assert!(sup_gap(&dir, |z| (1.0 - (1.0 + 4.0 * z).sqrt()).exp(), 50.0) < 1e-12);
        for z in [0.0, 0.3, 2.0, 9.0] {
            assert!((dir.value(z) - 2.0 * inv.value(2.0 * z)).abs() < 1e-12);
        }
        let m = moments_dr(&inv).unwrap();
        assert!((m.mean - 3.5).abs() < 1e-6 && (m.variance - 24.75).abs() < 1e-6);
        let m = moments_dr(&dir).unwrap();
        assert!((m.mean - 1.75).abs() < 1e-6 && (m.variance - 99.0 / 16.0).abs() < 1e-6);
        assert!((entropy_dr(&inv, EntropyKind::Shannon).unwrap() - (1.5 + LN_2)).abs() < 1e-6);
        assert!((entropy_dr(&dir, EntropyKind::Shannon).unwrap() - 1.5).abs() < 1e-6);
    }

    #[test]
    fn mixing_exponentials_with_different_means() {
        let (a, _) = FamilySpec::exp_rate(1.0).unwrap().dr().unwrap();
        let (b, _) = FamilySpec::exp_rate(0.5).unwrap().dr().unwrap();
        let inv = inverse_mix(&a, &b, MixWeight::HALF).unwrap();
        let want = |z: f64| {
            if z < LN_2 {
                0.5 * (-z).exp()
            } else {
                ((-5.0 * LN_2 - z) / 3.0).exp()
            }
        };
        assert!(sup_gap(&inv, want, 60.0) < 1e-12);
        let dir = direct_mix(&a, &b, MixWeight::HALF).unwrap();
        let want = |z: f64| {
            if z < 0.5 * LN_2 {
                (-2.0 * z).exp()
            } else {
                (-(2.0 / 3.0) * (z + LN_2)).exp()
            }
        };
        assert!(sup_gap(&dir, want, 60.0) < 1e-12);
        let m = moments_dr(&inv).unwrap();
        assert!((m.mean - 2.85).abs() < 1e-2 && (m.variance - 8.91).abs() < 1e-2);
        let m = moments_dr(&dir).unwrap();
        assert!((m.mean - 1.42).abs() < 1e-2 && (m.variance - 2.23).abs() < 1e-2);
    }

    #[test]
    fn closed_and_tabulated_mixes_agree() {
        let (a, _) = exp(1);
        let (b, _) = FamilySpec::beta32().dr().unwrap();
        let ta = DrPdf::from_table(a.table().unwrap().into_owned()).unwrap();
        let w = MixWeight::new(0.3).unwrap();
        let closed = inverse_mix(&a, &b, w).unwrap();
        let tab = inverse_mix(&ta, &b, w).unwrap();
        assert!(tab.is_tabulated());
        assert!(sup_gap(&tab, |z| closed.value(z), 20.0) < 1e-5);
        let c = closed.cdf().unwrap();
        let t = tab.cdf().unwrap();
        for z in [0.01, 0.5, 1.0, 3.0, 10.0] {
            assert!((c.value(z) - t.value(z)).abs() < 1e-5, "{z}");
        }
    }

    #[test]
    fn self_mixes() {
        let (b, _) = FamilySpec::beta32().dr().unwrap();
        let inv = inverse_mix(&b, &b, MixWeight::HALF).unwrap();
        let g = sup_gap(&inv, |z| 0.5 * b.value(z / 2.0), 2.0);
        assert!(g < 1e-9, "{g}");
        let dir = direct_mix(&b, &b, MixWeight::new(0.2).unwrap()).unwrap();
        assert!(sup_gap(&dir, |z| b.value(z), 1.0) < 1e-9);
    }

    #[test]
    fn discrete_mixes() {
        let p = [0.577, 0.192, 0.128, 0.064, 0.038];
        let q = [0.730, 0.219, 0.036, 0.007, 0.007];
        let got = inverse_mix_discrete(&p, &q, MixWeight::HALF);
        let want = [0.365, 0.2885, 0.1095, 0.096, 0.064, 0.032, 0.019, 0.018, 0.0035, 0.0035];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
        let d = direct_mix_discrete(&[0.2, 0.8], &[1.0], MixWeight::HALF);
        assert_eq!(d, vec![0.9, 0.1]);
    }

    #[test]
    fn products_of_exponential_cdfs() {
        let (_, f1) = exp(1);
        let (_, f2) = exp(2);
        let f3 = otimes(&f1, &f1).unwrap();
        let f4 = otimes(&f2, &f2).unwrap();
        for z in [0.1, 1.0, 4.0, 20.0] {
            assert!((f3.value(z) - (1.0 - (-z / 2.0).exp())).abs() < 1e-10);
            let r = z.sqrt();
            assert!((f4.value(z) - (1.0 - (1.0 + r) * (-r).exp())).abs() < 1e-10);
        }
        let p2 = otimes_power(&f1, 2).unwrap();
        let p3 = otimes_power(&f1, 3).unwrap();
        for z in [0.1, 1.0, 4.0, 20.0] {
            assert!((p2.value(z) - f3.value(z)).abs() < 1e-10);
            assert!((p3.value(z) - (1.0 - (-z / 3.0).exp())).abs() < 1e-14);
        }
        assert!(otimes_power(&f1, 0).is_err());
    }

    #[test]
    fn tabulated_products_match_closed_forms() {
        let (_, f1) = exp(1);
        let (_, f2) = exp(2);
        let t1 = DrCdf::from_table(f1.tabulate_adaptive(1e-10).unwrap()).unwrap();
        let t2 = DrCdf::from_table(f2.tabulate_adaptive(1e-10).unwrap()).unwrap();
        let closed = otimes(&f1, &f2).unwrap();
        let tab = otimes(&t1, &t2).unwrap();
        for i in 0..400 {
            let z = i as f64 * 0.1;
            assert!((closed.value(z) - tab.value(z)).abs() < 1e-8, "{z}");
        }
    }

    #[test]
    fn product_distributes_over_join() {
        let (_, f1) = exp(1);
        let (_, f2) = exp(2);
        let f3 = f1.dilate(2.0).unwrap();
        let lhs = otimes(&f3, &join(&f1, &f2)).unwrap();
        let rhs = join(&otimes(&f3, &f1).unwrap(), &otimes(&f3, &f2).unwrap());
        for i in 0..600 {
            let z = i as f64 * 0.05;
            assert!((lhs.value(z) - rhs.value(z)).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn scaling() {
        let (_, f1) = exp(1);
        let s = scalar_scale(&f1, 0.5).unwrap();
        assert!(!s.is_cdf);
        assert!((s.table.interpolate(1.0).unwrap() - 0.5 * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        assert!(scalar_scale(&f1, 1.0).unwrap().is_cdf);
        assert!((scalar_scale(&f1, 2.0).unwrap().table.last_value() - 2.0).abs() < 1e-9);
        assert!(scalar_scale(&f1, 0.0).is_err());
    }

    #[test]
    fn convolving_exponentials() {
        let (a, _) = exp(1);
        let f5 = convolve_dr(&a, &a).unwrap();
        let want = |z: f64| {
            let e = z.exp_m1();
            (-z / e).exp() - (-z * z.exp() / e).exp()
        };
        let gap = (1..3000)
            .map(|i| i as f64 * 0.01)
            .map(|z| (f5.value(z) - want(z)).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-3, "{gap}");
    }

    #[test]
    fn convolving_uniforms_gives_a_triangle() {
        let u = DrPdf::analytic("uniform", |_| 1.0, 1.0).unwrap();
        let c = convolve_dr(&u, &u).unwrap();
        let d = c.density().unwrap();
        // triangle on [0, 2]; its DR is 1 - z/2 on [0, 2]
        for z in [0.1, 0.5, 1.0, 1.5, 1.9] {
            assert!((d.value(z) - (1.0 - z / 2.0)).abs() < 5e-3, "{z}");
            assert!((c.value(z) - (z - z * z / 4.0)).abs() < 2e-3, "{z}");
        }
    }

    #[test]
    fn table_rearrangement_is_exact() {
        // tent on [0, 2] with a flat top, plus a separate block
        let g = Grid::new(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let t = TabulatedFn::new(g, vec![0.0, 0.5, 0.5, 0.0, 0.25, 0.25], Monotonicity::None).unwrap();
        let dr = rearrange_table(&t).unwrap();
        assert!((dr.table().unwrap().integral() - t.integral()).abs() < 1e-12);
        assert!((dr.level_measure(0.5) - 1.0).abs() < 1e-9);
        assert!((dr.level_measure(0.25) - 3.0).abs() < 1e-9);
        assert!((dr.value(0.5) - 0.5).abs() < 1e-12);
    }
}
