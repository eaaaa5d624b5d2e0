//! Piecewise-linear tabulated functions on strictly increasing grids.
//!
//! Every numerical object in the crate (rearranged densities, their cdfs,
//! measure functions and functional inverses) is carried by a
//! [`TabulatedFn`] and interpolated linearly between knots.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for monotonicity checks on tabulated samples.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Spacing used to split a vertical jump into two distinct knots.
pub const STEP_GAP: f64 = 1e-12;

/// Strictly increasing, finite abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point at index {i}")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at index {}: {} then {}",
                i + 1,
                points[i],
                points[i + 1]
            )));
        }
        Ok(Grid { points })
    }

    /// `n` equally spaced points on `[a, b]`, both ends included.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(Error::InvalidGrid(format!("uniform grid [{a}, {b}] with {n} points")));
        }
        let h = (b - a) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        points[n - 1] = b;
        Grid::new(points)
    }

    /// `n` geometrically spaced points on `[a, b]`, `0 < a < b`.
    pub fn geometric(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(a > 0.0) || !(b > a) {
            return Err(Error::InvalidGrid(format!("geometric grid [{a}, {b}] with {n} points")));
        }
        let r = (b / a).ln() / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| a * (r * i as f64).exp()).collect();
        points[0] = a;
        points[n - 1] = b;
        Grid::new(points)
    }

    /// Sorted union of arbitrary finite points; duplicates (within `1e-14`
    /// relative) are dropped.
    pub fn from_unsorted(mut points: Vec<f64>) -> Result<Self> {
        points.retain(|p| p.is_finite());
        points.sort_by(f64::total_cmp);
        points.dedup_by(|b, a| (*b - *a).abs() <= 1e-14 * a.abs().max(1e-300));
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Nonincreasing,
    Nondecreasing,
    None,
}

/// Samples of a function on a [`Grid`], linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFn {
    grid: Grid,
    values: Vec<f64>,
    monotone: Monotonicity,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    grid: Vec<f64>,
    values: Vec<f64>,
    monotone: Monotonicity,
}

impl TabulatedFn {
    pub fn new(grid: Grid, values: Vec<f64>, monotone: Monotonicity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at index {i}")));
        }
        let bad = match monotone {
            Monotonicity::Nonincreasing => values.windows(2).position(|w| w[1] > w[0] + MONOTONE_TOL),
            Monotonicity::Nondecreasing => values.windows(2).position(|w| w[1] < w[0] - MONOTONE_TOL),
            Monotonicity::None => None,
        };
        if let Some(i) = bad {
            return Err(Error::NotMonotone(format!(
                "{monotone:?} fails between index {i} ({}) and {} ({})",
                values[i],
                i + 1,
                values[i + 1]
            )));
        }
        Ok(TabulatedFn { grid, values, monotone })
    }

    /// Builds a table from abscissae that may contain repeats (vertical
    /// jumps). Runs of equal abscissae keep only their first and last
    /// samples, the last one pushed [`STEP_GAP`] to the right.
    pub fn from_points_with_steps(xs: &[f64], ys: &[f64], monotone: Monotonicity) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidArgument("abscissae and values differ in length".into()));
        }
        let mut gx: Vec<f64> = Vec::with_capacity(xs.len());
        let mut gy: Vec<f64> = Vec::with_capacity(xs.len());
        let mut i = 0;
        while i < xs.len() {
            let mut j = i;
            while j + 1 < xs.len() && xs[j + 1] <= xs[i] {
                j += 1;
            }
            push_strict(&mut gx, &mut gy, xs[i], ys[i]);
            if j > i {
                push_strict(&mut gx, &mut gy, xs[i], ys[j]);
            }
            i = j + 1;
        }
        TabulatedFn::new(Grid::new(gx)?, gy, monotone)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn xs(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn monotone(&self) -> Monotonicity {
        self.monotone
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_value(&self) -> f64 {
        self.values[0]
    }

    pub fn last_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let xs = self.grid.points();
        if !(x >= xs[0] && x <= xs[xs.len() - 1]) {
            return None;
        }
        let i = segment_index(xs, x);
        Some(lerp(xs[i], self.values[i], xs[i + 1], self.values[i + 1], x))
    }

    /// Linear interpolation, constant extension beyond both ends.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let xs = self.grid.points();
        if x <= xs[0] {
            return self.values[0];
        }
        if x >= xs[xs.len() - 1] {
            return self.last_value();
        }
        let i = segment_index(xs, x);
        lerp(xs[i], self.values[i], xs[i + 1], self.values[i + 1], x)
    }

    /// Exact integral of the interpolant over its whole grid.
    pub fn integral(&self) -> f64 {
        let xs = self.grid.points();
        xs.windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
            .sum()
    }

    /// Running integral of the interpolant, one value per knot.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let xs = self.grid.points();
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (self.values[i - 1] + self.values[i]) * (xs[i] - xs[i - 1]);
            out.push(acc);
        }
        out
    }

    /// The table with abscissae multiplied by `k > 0`.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        let pts = self.grid.points().iter().map(|x| x * k).collect();
        TabulatedFn::new(Grid::new(pts)?, self.values.clone(), self.monotone)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64, monotone: Monotonicity) -> Result<Self> {
        TabulatedFn::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), monotone)
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = Wire {
            grid: self.grid.points().to_vec(),
            values: self.values.clone(),
            monotone: self.monotone,
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: Wire = serde_json::from_str(s)?;
        TabulatedFn::new(Grid::new(wire.grid)?, wire.values, wire.monotone)
    }

    /// Two-column CSV with header `z,value`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "value"])?;
        for (x, v) in self.grid.points().iter().zip(&self.values) {
            w.write_record([format!("{x:.16e}"), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// Reads the `z,value` CSV format. The monotonicity is not part of the
    /// format and must be supplied.
    pub fn read_csv<R: Read>(input: R, monotone: Monotonicity) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "z" || &headers[1] != "value" {
            return Err(Error::parse(0, "expected header `z,value`"));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::parse(line + 1, "expected two columns"));
            }
            let x: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::parse(line + 1, format!("bad number {:?}", &rec[0])))?;
            let y: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(line + 1, format!("bad number {:?}", &rec[1])))?;
            xs.push(x);
            ys.push(y);
        }
        TabulatedFn::new(Grid::new(xs)?, ys, monotone)
    }

    /// Guesses the monotonicity of CSV contents from the samples.
    pub fn read_csv_infer<R: Read>(input: R) -> Result<Self> {
        let t = TabulatedFn::read_csv(input, Monotonicity::None)?;
        let v = t.values();
        let monotone = if v.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL) {
            Monotonicity::Nondecreasing
        } else if v.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL) {
            Monotonicity::Nonincreasing
        } else {
            Monotonicity::None
        };
        Ok(TabulatedFn { monotone, ..t })
    }
}

fn push_strict(gx: &mut Vec<f64>, gy: &mut Vec<f64>, x: f64, y: f64) {
    let x = match gx.last() {
        Some(&prev) if x <= prev => next_knot(prev),
        _ => x,
    };
    gx.push(x);
    gy.push(y);
}

/// The smallest abscissa strictly right of `x` that keeps a visible step.
pub(crate) fn next_knot(x: f64) -> f64 {
    let bumped = x + STEP_GAP;
    if bumped > x {
        bumped.max(x + 4.0 * ulp(x))
    } else {
        x + 4.0 * ulp(x)
    }
}

fn ulp(x: f64) -> f64 {
    let a = x.abs().max(f64::MIN_POSITIVE);
    f64::from_bits(a.to_bits() + 1) - a
}

/// Index `i` with `xs[i] <= x <= xs[i+1]`, clamped to valid segments.
pub(crate) fn segment_index(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

#[inline]
pub(crate) fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        return y0;
    }
    let t = (x - x0) / (x1 - x0);
    y0 + t * (y1 - y0)
}

/// Upper (`upper = true`) or lower envelope of two piecewise-linear
/// functions, exact: crossing points between knots are inserted. Each
/// function is treated as absent outside its own grid.
pub(crate) fn pl_envelope(a: &TabulatedFn, b: &TabulatedFn, upper: bool) -> Result<TabulatedFn> {
    let pick = |u: f64, v: f64| if upper { u.max(v) } else { u.min(v) };
    let eval = |t: &TabulatedFn, x: f64| t.interpolate(x);
    let mut knots: Vec<f64> = a.xs().iter().chain(b.xs()).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut xs = Vec::with_capacity(knots.len() + 16);
    let mut ys = Vec::with_capacity(knots.len() + 16);
    for (k, &x) in knots.iter().enumerate() {
        if k > 0 {
            let x0 = knots[k - 1];
            if let (Some(a0), Some(b0), Some(a1), Some(b1)) = (eval(a, x0), eval(b, x0), eval(a, x), eval(b, x)) {
                let d0 = a0 - b0;
                let d1 = a1 - b1;
                if d0 * d1 < 0.0 {
                    let t = d0 / (d0 - d1);
                    let xc = x0 + t * (x - x0);
                    if xc > x0 && xc < x {
                        xs.push(xc);
                        ys.push(a0 + t * (a1 - a0));
                    }
                }
            }
        }
        let y = match (eval(a, x), eval(b, x)) {
            (Some(u), Some(v)) => pick(u, v),
            (Some(u), None) | (None, Some(u)) => u,
            (None, None) => unreachable!("knot belongs to one of the grids"),
        };
        xs.push(x);
        ys.push(y);
    }
    let monotone = if a.monotone() == b.monotone() {
        a.monotone()
    } else {
        Monotonicity::None
    };
    TabulatedFn::new(Grid::new(xs)?, ys, monotone)
}
