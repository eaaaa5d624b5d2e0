//! The majorisation order on probability vectors, matrices and DR cdfs.
//!
//! `p ≼ q` reads "q majorises p": q is the more concentrated, less
//! uncertain distribution. Comparators return an [`OrderVerdict`] for the
//! ordered pair `(first, second)`, where `Precedes` means `first ≼ second`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_discrete, EntropyKind};
use crate::error::{Error, Result};
use crate::quad;
use crate::rearrange::{dr_from_density_1d, DensityFn, DrCdf, DrPdf, ScalarFn, DEFAULT_THRESHOLDS};
use crate::tabulated::Grid;

/// Tolerance on the total of a probability vector or matrix.
pub const SUM_TOL: f64 = 1e-12;
/// Default comparison tolerance for discrete distributions.
pub const DISCRETE_TOL: f64 = 1e-12;
/// Default comparison tolerance for closed-form cdfs.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Default comparison tolerance for tabulated or empirical cdfs.
pub const TABULATED_TOL: f64 = 1e-3;

const MIN_CDF_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        if let Some(x) = probs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "probabilities must be finite and nonnegative, got {x}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalised {
                total,
                tolerance: SUM_TOL,
            });
        }
        Ok(ProbVector(probs))
    }

    /// Divides nonnegative weights by their total.
    pub fn normalised(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        Ok(ProbVector(weights.iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        Ok(ProbVector(vec![1.0 / n as f64; n]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Nonincreasing copy.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Vec<f64> {
        p.0
    }
}

/// Row-major `rows × cols` table of probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl ProbMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        ProbVector::new(entries.clone())?;
        Ok(ProbMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix".into()));
        }
        ProbMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn flatten(&self) -> ProbVector {
        ProbVector(self.entries.clone())
    }
}

/// Square matrix with unit row and column sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublyStochastic {
    n: usize,
    entries: Vec<f64>,
}

impl DoublyStochastic {
    pub const TOL: f64 = 1e-10;

    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidArgument("entries do not fill a square matrix".into()));
        }
        let d = DoublyStochastic { n, entries };
        if d.entries.iter().any(|x| !(*x >= -Self::TOL)) {
            return Err(Error::InvalidArgument("negative entry".into()));
        }
        let worst = d.max_margin_error();
        if worst > Self::TOL {
            return Err(Error::InvalidArgument(format!("row or column sum off by {worst}")));
        }
        Ok(d)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        DoublyStochastic { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest deviation of a row or column sum from 1.
    pub fn max_margin_error(&self) -> f64 {
        let n = self.n;
        let rows = self.entries.chunks(n).map(|r| (r.iter().sum::<f64>() - 1.0).abs());
        let cols = (0..n).map(|j| ((0..n).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderVerdict {
    Precedes,
    Succeeds,
    Equal,
    Incomparable,
}

impl OrderVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderVerdict::Precedes => "precedes",
            OrderVerdict::Succeeds => "succeeds",
            OrderVerdict::Equal => "equal",
            OrderVerdict::Incomparable => "incomparable",
        }
    }

    /// Precedes or Equal.
    pub fn is_below(&self) -> bool {
        matches!(self, OrderVerdict::Precedes | OrderVerdict::Equal)
    }

    pub fn reversed(&self) -> Self {
        match self {
            OrderVerdict::Precedes => OrderVerdict::Succeeds,
            OrderVerdict::Succeeds => OrderVerdict::Precedes,
            v => *v,
        }
    }
}

impl fmt::Display for OrderVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of comparing two functions sampled at common abscissae, with
/// `gap = second - first`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub verdict: OrderVerdict,
    pub max_gap: f64,
    /// Abscissae where the gap changes sign beyond the tolerance.
    pub crossing_z: Vec<f64>,
}

fn classify(xs: &[f64], gaps: &[f64], tol: f64) -> Comparison {
    let any_pos = gaps.iter().any(|&d| d > tol);
    let any_neg = gaps.iter().any(|&d| d < -tol);
    let verdict = match (any_pos, any_neg) {
        (false, false) => OrderVerdict::Equal,
        (true, false) => OrderVerdict::Precedes,
        (false, true) => OrderVerdict::Succeeds,
        (true, true) => OrderVerdict::Incomparable,
    };
    let max_gap = gaps.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut crossing_z = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, &d) in xs.iter().zip(gaps) {
        if d.abs() <= tol {
            continue;
        }
        if let Some((x0, d0)) = last {
            if d0.signum() != d.signum() {
                // locate the zero by linear interpolation of the gap
                crossing_z.push(x0 + (x - x0) * d0 / (d0 - d));
            }
        }
        last = Some((x, d));
    }
    Comparison {
        verdict,
        max_gap,
        crossing_z,
    }
}

fn partial_sums(p: &[f64], n: usize) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.resize(n, 0.0);
    v.iter()
        .scan(0.0, |s, x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// Compares sorted partial sums; `Precedes` iff `p ≼ q`.
pub fn majorizes_discrete(p: &ProbVector, q: &ProbVector) -> OrderVerdict {
    compare_discrete(p, q, DISCRETE_TOL).verdict
}

/// As [`majorizes_discrete`], with the gaps of the partial sums.
pub fn compare_discrete(p: &ProbVector, q: &ProbVector, tol: f64) -> Comparison {
    let n = p.len().max(q.len());
    let sp = partial_sums(p.probs(), n);
    let sq = partial_sums(q.probs(), n);
    let gaps: Vec<f64> = sq.iter().zip(&sp).map(|(a, b)| a - b).collect();
    let ks: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    classify(&ks, &gaps, tol)
}

/// Flattens both matrices and compares the entries.
pub fn majorizes_matrix(x: &ProbMatrix, y: &ProbMatrix) -> OrderVerdict {
    majorizes_discrete(&x.flatten(), &y.flatten())
}

/// Compares `F1` and `F2` on `grid`: `Precedes` iff `F1 ≤ F2 + tol`
/// everywhere and the gap exceeds `tol` somewhere.
pub fn majorizes_cdf(f1: &DrCdf, f2: &DrCdf, grid: &Grid, tol: f64) -> Result<Comparison> {
    if grid.len() < MIN_CDF_GRID {
        return Err(Error::InvalidGrid(format!(
            "comparison grid has {} points, need at least {MIN_CDF_GRID}",
            grid.len()
        )));
    }
    if grid.first() < 0.0 {
        return Err(Error::InvalidGrid("comparison grid must lie in z >= 0".into()));
    }
    let gaps: Vec<f64> = grid.points().iter().map(|&z| f2.value(z) - f1.value(z)).collect();
    Ok(classify(grid.points(), &gaps, tol))
}

/// Compares on [`default_comparison_grid`] with [`default_tolerance`].
pub fn compare_cdfs(f1: &DrCdf, f2: &DrCdf) -> Result<Comparison> {
    let grid = default_comparison_grid(f1, f2)?;
    majorizes_cdf(f1, f2, &grid, default_tolerance(f1, f2))
}

/// `1e-9` when both cdfs are closed forms, `1e-3` otherwise.
pub fn default_tolerance(f1: &DrCdf, f2: &DrCdf) -> f64 {
    if f1.is_closed_form() && f2.is_closed_form() {
        CLOSED_FORM_TOL
    } else {
        TABULATED_TOL
    }
}

/// Both cdfs' knots, 1024 uniform points up to where both exceed
/// `1 - 1e-8`, and 256 geometric points resolving the origin.
pub fn default_comparison_grid(f1: &DrCdf, f2: &DrCdf) -> Result<Grid> {
    let end = f1.quantile_end(1e-8).max(f2.quantile_end(1e-8));
    let end = if end > 0.0 { end } else { f1.support().max(f2.support()) };
    let mut pts = Grid::uniform(0.0, end, 1024)?.into_points();
    pts.extend_from_slice(Grid::geometric(end * 1e-9, end, 256)?.points());
    for knots in [f1.knots(), f2.knots()].into_iter().flatten() {
        pts.extend(knots.into_iter().filter(|&k| k <= end));
    }
    Grid::from_unsorted(pts)
}

/// `∫ (f̃ - c)₊ dz`.
pub fn slice_integral(f: &DrPdf, c: f64) -> Result<f64> {
    if c >= f.peak() {
        return Ok(0.0);
    }
    if c <= 0.0 {
        return f.mass();
    }
    if let Some(m) = f.closed_level_measure() {
        // ∫_c^peak m(y) dy, refined towards both ends
        let (a, b) = (c, f.peak());
        let mut ends = vec![a];
        ends.extend(f.level_breaks().iter().copied().filter(|&y| y > a && y < b));
        ends.push(b);
        let g = |y: f64| m(y).max(0.0);
        let mut total = 0.0;
        for w in ends.windows(2) {
            let h = 0.5 * (w[1] - w[0]);
            let mut k: Vec<f64> = (0..=50).rev().map(|i| w[0] + h * 0.5f64.powi(i)).collect();
            k.insert(0, w[0]);
            k.extend((1..=50).map(|i| w[1] - h * 0.5f64.powi(i)));
            k.push(w[1]);
            k.dedup_by(|x, p| *x <= *p);
            total += quad::integrate_over(&g, &k);
        }
        return Ok(total);
    }
    let t = f.table()?;
    let (xs, v) = (t.xs(), t.values());
    let mut s = 0.0;
    for i in 1..xs.len() {
        let (a, b) = (v[i - 1] - c, v[i] - c);
        let dx = xs[i] - xs[i - 1];
        s += if a >= 0.0 && b >= 0.0 {
            0.5 * (a + b) * dx
        } else if a > 0.0 {
            0.5 * a * dx * a / (a - b)
        } else {
            0.0
        };
    }
    Ok(s)
}

/// The slice condition: compares `∫(f̃₁ - c)₊` with `∫(f̃₂ - c)₊` for
/// each `c` in `c_grid`.
pub fn slice_compare(f1: &DrPdf, f2: &DrPdf, c_grid: &Grid, tol: f64) -> Result<Comparison> {
    let s1: Vec<f64> = c_grid
        .points()
        .iter()
        .map(|&c| slice_integral(f1, c))
        .collect::<Result<_>>()?;
    let s2: Vec<f64> = c_grid
        .points()
        .iter()
        .map(|&c| slice_integral(f2, c))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = s2.iter().zip(&s1).map(|(a, b)| a - b).collect();
    Ok(classify(c_grid.points(), &gaps, tol))
}

/// Thresholds for [`slice_compare`]: geometric from `1e-8` of the larger
/// peak up to that peak.
pub fn default_slice_grid(f1: &DrPdf, f2: &DrPdf, points: usize) -> Result<Grid> {
    let top = f1.peak().max(f2.peak());
    let mut pts = Grid::geometric(top * 1e-8, top, points)?.into_points();
    pts.push(f1.peak().min(f2.peak()));
    Grid::from_unsorted(pts)
}

/// A doubly stochastic `P` with `p = P q`, built from at most `n - 1`
/// T-transforms.
pub fn dilation_witness(p: &ProbVector, q: &ProbVector) -> Result<DoublyStochastic> {
    let verdict = majorizes_discrete(p, q);
    if !verdict.is_below() {
        return Err(Error::NoWitness(format!(
            "first vector is not majorised by the second ({verdict})"
        )));
    }
    let n = p.len().max(q.len());
    let mut pv = p.probs().to_vec();
    let mut qv = q.probs().to_vec();
    pv.resize(n, 0.0);
    qv.resize(n, 0.0);
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        idx
    };
    let (op, oq) = (order(&pv), order(&qv));
    let target: Vec<f64> = op.iter().map(|&i| pv[i]).collect();
    let mut x: Vec<f64> = oq.iter().map(|&i| qv[i]).collect();

    // m tracks x = m · sorted(q)
    let mut m = DoublyStochastic::identity(n).entries;
    let eps = 1e-15;
    for _ in 0..n {
        let Some(j) = (0..n).rev().find(|&i| x[i] > target[i] + eps) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| x[i] < target[i] - eps) else {
            break;
        };
        let delta = (x[j] - target[j]).min(target[k] - x[k]);
        let lambda = 1.0 - delta / (x[j] - x[k]);
        let (xj, xk) = (x[j], x[k]);
        x[j] = lambda * xj + (1.0 - lambda) * xk;
        x[k] = (1.0 - lambda) * xj + lambda * xk;
        for c in 0..n {
            let (a, b) = (m[j * n + c], m[k * n + c]);
            m[j * n + c] = lambda * a + (1.0 - lambda) * b;
            m[k * n + c] = (1.0 - lambda) * a + lambda * b;
        }
    }
    // P[op[r], oq[c]] = m[r, c]
    let mut entries = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            entries[op[r] * n + oq[c]] = m[r * n + c];
        }
    }
    let w = DoublyStochastic::new(n, entries)?;
    let residual = w
        .apply(&qv)
        .iter()
        .zip(&pv)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > DoublyStochastic::TOL {
        return Err(Error::Numerical(format!("witness residual {residual}")));
    }
    Ok(w)
}

/// For `p ≼ q`, checks `H(p) ≥ H(q)`.
pub fn schur_preservation_check(p: &ProbVector, q: &ProbVector, kind: EntropyKind) -> Result<bool> {
    let verdict = majorizes_discrete(p, q);
    if !verdict.is_below() {
        return Err(Error::NotComparable(format!(
            "expected the first vector to be majorised, got {verdict}"
        )));
    }
    let slack = 1e-12 * (p.len().max(q.len()) as f64);
    Ok(entropy_discrete(p, kind) >= entropy_discrete(q, kind) - slack)
}

/// An invertible map of the line with `|h'| ≤ 1`.
#[derive(Clone)]
pub struct ContractiveMap1D {
    h: ScalarFn,
    inverse: ScalarFn,
    derivative: ScalarFn,
}

impl fmt::Debug for ContractiveMap1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ContractiveMap1D")
    }
}

impl ContractiveMap1D {
    pub fn new(
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ContractiveMap1D {
            h: Arc::new(h),
            inverse: Arc::new(inverse),
            derivative: Arc::new(derivative),
        }
    }

    /// `x ↦ a x + b`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument("affine map needs a finite nonzero slope".into()));
        }
        Ok(ContractiveMap1D::new(
            move |x| a * x + b,
            move |y| (y - b) / a,
            move |_| a,
        ))
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    /// Largest `|h'|` on a 10⁴-point probe of `[lo, hi]`.
    pub fn jacobian_bound(&self, lo: f64, hi: f64) -> (f64, f64) {
        (0..10_000)
            .map(|i| lo + (hi - lo) * i as f64 / 9_999.0)
            .map(|x| (x, (self.derivative)(x).abs()))
            .fold((lo, 0.0), |best, c| if c.1 > best.1 { c } else { best })
    }
}

/// Rearranges `X ~ f` and `Y = h(X)` and compares their DR cdfs. A
/// contractive `h` should give `Precedes` (or `Equal` for isometries).
pub fn contractive_ordering_check(f: &DensityFn, h: &ContractiveMap1D) -> Result<Comparison> {
    if f.dim() != 1 {
        return Err(Error::InvalidArgument("expected a univariate density".into()));
    }
    let (lo, hi) = f.support()[0];
    let (at, slope) = h.jacobian_bound(lo, hi);
    if slope > 1.0 + 1e-12 {
        return Err(Error::NotContractive { at, slope });
    }
    let (a, b) = (h.apply(lo), h.apply(hi));
    let (ylo, yhi) = (a.min(b), a.max(b));
    let fx = f.clone();
    let hh = h.clone();
    let g = DensityFn::univariate(ylo, yhi, move |y| {
        let x = (hh.inverse)(y);
        let d = (hh.derivative)(x).abs();
        if d > 0.0 {
            fx.eval(&[x]) / d
        } else {
            0.0
        }
    })?;
    let dx = dr_from_density_1d(f, DEFAULT_THRESHOLDS)?.cdf()?;
    let dy = dr_from_density_1d(&g, DEFAULT_THRESHOLDS)?.cdf()?;
    let grid = default_comparison_grid(&dx, &dy)?;
    majorizes_cdf(&dx, &dy, &grid, TABULATED_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn discrete_verdicts() {
        let third = 1.0 / 3.0;
        let u = ProbVector::new(vec![third, third, 1.0 - 2.0 * third]).unwrap();
        assert_eq!(majorizes_discrete(&u, &pv(&[1.0, 0.0, 0.0])), OrderVerdict::Precedes);
        assert_eq!(majorizes_discrete(&pv(&[1.0, 0.0, 0.0]), &u), OrderVerdict::Succeeds);
        assert_eq!(
            majorizes_discrete(&pv(&[0.5, 0.5]), &pv(&[0.5, 0.5])),
            OrderVerdict::Equal
        );
        assert_eq!(
            majorizes_discrete(&pv(&[0.6, 0.25, 0.15]), &pv(&[0.5, 0.45, 0.05])),
            OrderVerdict::Incomparable
        );
        // padding
        assert_eq!(
            majorizes_discrete(&pv(&[0.5, 0.25, 0.25]), &pv(&[0.5, 0.5])),
            OrderVerdict::Precedes
        );
    }

    #[test]
    fn normalisation_is_checked() {
        assert!(matches!(
            ProbVector::new(vec![0.5, 0.4]),
            Err(Error::NotNormalised { .. })
        ));
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn matrix_verdicts() {
        let x = ProbMatrix::new(2, 2, vec![0.25; 4]).unwrap();
        let y = ProbMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(majorizes_matrix(&x, &y), OrderVerdict::Precedes);
        assert_eq!(majorizes_matrix(&x, &x), OrderVerdict::Equal);
        let dep = ProbMatrix::from_rows(&[vec![0.35, 0.15], vec![0.15, 0.35]]).unwrap();
        assert_eq!(majorizes_matrix(&x, &dep), OrderVerdict::Precedes);
    }

    #[test]
    fn witnesses() {
        let w = dilation_witness(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((w.get(i, j) - 0.5).abs() < 1e-15);
            }
        }
        let w = dilation_witness(&pv(&[0.6, 0.4]), &pv(&[0.7, 0.3])).unwrap();
        assert!((w.get(0, 0) - 0.75).abs() < 1e-12 && (w.get(0, 1) - 0.25).abs() < 1e-12);
        let p = pv(&[0.2, 0.3, 0.5]);
        assert_eq!(dilation_witness(&p, &p).unwrap(), DoublyStochastic::identity(3));
        assert!(matches!(
            dilation_witness(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.5])),
            Err(Error::NoWitness(_))
        ));
    }

    #[test]
    fn witness_handles_unsorted_input() {
        let p = pv(&[0.1, 0.3, 0.2, 0.4]);
        let q = pv(&[0.05, 0.6, 0.0, 0.35]);
        let w = dilation_witness(&p, &q).unwrap();
        let r = w.apply(q.probs());
        for (a, b) in r.iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_checks() {
        let u = ProbVector::uniform(3).unwrap();
        assert!(schur_preservation_check(&u, &pv(&[1.0, 0.0, 0.0]), EntropyKind::Shannon).unwrap());
        let p = ProbVector::normalised(&[0.577, 0.192, 0.128, 0.064, 0.038]).unwrap();
        assert!(schur_preservation_check(&p, &pv(&[1.0, 0.0, 0.0, 0.0, 0.0]), EntropyKind::Shannon).unwrap());
        assert!(
            schur_preservation_check(&pv(&[0.6, 0.25, 0.15]), &pv(&[0.5, 0.45, 0.05]), EntropyKind::Shannon).is_err()
        );
    }

    #[test]
    fn exponential_chain() {
        let (_, f1) = FamilySpec::exp_iid(1).unwrap().dr().unwrap();
        let (_, f2) = FamilySpec::exp_iid(2).unwrap().dr().unwrap();
        let f3 = f1.dilate(2.0).unwrap();
        assert_eq!(compare_cdfs(&f2, &f1).unwrap().verdict, OrderVerdict::Precedes);
        let c = compare_cdfs(&f2, &f3).unwrap();
        assert_eq!(c.verdict, OrderVerdict::Incomparable);
        assert!(!c.crossing_z.is_empty());
        assert_eq!(compare_cdfs(&f1, &f1).unwrap().verdict, OrderVerdict::Equal);
        let coarse = Grid::uniform(0.0, 10.0, 63).unwrap();
        assert!(matches!(
            majorizes_cdf(&f1, &f2, &coarse, 1e-9),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn slices_agree_with_cdfs() {
        let (b, _) = FamilySpec::beta32().dr().unwrap();
        let g = default_slice_grid(&b, &b, 200).unwrap();
        assert_eq!(slice_compare(&b, &b, &g, 1e-9).unwrap().verdict, OrderVerdict::Equal);

        let (e1, _) = FamilySpec::exp_iid(1).unwrap().dr().unwrap();
        let (e2, _) = FamilySpec::exp_iid(2).unwrap().dr().unwrap();
        let g = default_slice_grid(&e2, &e1, 200).unwrap();
        assert_eq!(
            slice_compare(&e2, &e1, &g, 1e-9).unwrap().verdict,
            OrderVerdict::Precedes
        );

        let (n3, _) = FamilySpec::mvn(2, 3.0).unwrap().dr().unwrap();
        let (n1, _) = FamilySpec::mvn(2, 1.0).unwrap().dr().unwrap();
        let g = default_slice_grid(&n3, &n1, 200).unwrap();
        assert_eq!(
            slice_compare(&n3, &n1, &g, 1e-9).unwrap().verdict,
            OrderVerdict::Precedes
        );
    }

    #[test]
    fn slice_integral_of_tables_is_exact() {
        let (e1, _) = FamilySpec::exp_iid(1).unwrap().dr().unwrap();
        let t = DrPdf::from_table(e1.tabulate(Default::default()).unwrap()).unwrap();
        for c in [0.9, 0.5, 0.01] {
            // ∫(e^{-z} - c)₊ = 1 - c + c ln c
            let want = 1.0 - c + c * f64::ln(c);
            assert!((slice_integral(&e1, c).unwrap() - want).abs() < 1e-12);
            assert!((slice_integral(&t, c).unwrap() - want).abs() < 1e-6);
        }
    }

    #[test]
    fn contractive_maps_reduce_uncertainty() {
        let f = DensityFn::univariate(0.0, 40.0, |x| (-x).exp()).unwrap();
        let half = ContractiveMap1D::affine(0.5, 0.0).unwrap();
        assert_eq!(
            contractive_ordering_check(&f, &half).unwrap().verdict,
            OrderVerdict::Precedes
        );
        let id = ContractiveMap1D::affine(1.0, 0.0).unwrap();
        assert_eq!(
            contractive_ordering_check(&f, &id).unwrap().verdict,
            OrderVerdict::Equal
        );
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let n = DensityFn::univariate(-8.0, 8.0, phi).unwrap();
        let shift = ContractiveMap1D::affine(0.5, 1.0).unwrap();
        assert_eq!(
            contractive_ordering_check(&n, &shift).unwrap().verdict,
            OrderVerdict::Precedes
        );
        let double = ContractiveMap1D::affine(2.0, 0.0).unwrap();
        assert!(matches!(
            contractive_ordering_check(&f, &double),
            Err(Error::NotContractive { .. })
        ));
    }
}
