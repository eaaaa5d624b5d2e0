//! Closed-form DRs of the analytic families: isotropic normals, iid
//! exponentials, the rate-θ exponential and Beta(3,2).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Gamma, Normal};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::rearrange::{DensityFn, DrCdf, DrPdf};
use crate::tabulated::{segment_index, Grid};

const MAX_DIM: usize = 100;

/// Relative density level treated as the end of an unbounded support.
const TAIL_LEVEL: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    MvnIsotropic,
    ExpIid,
    ExpRate,
    Beta32,
}

/// `scale` is the variance σ² for normals and the rate θ for `ExpRate`;
/// it is 1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub dim: usize,
    pub scale: f64,
}

impl FamilySpec {
    pub fn mvn(n: usize, var: f64) -> Result<Self> {
        check_dim(n)?;
        check_positive("var", var)?;
        Ok(FamilySpec {
            kind: FamilyKind::MvnIsotropic,
            dim: n,
            scale: var,
        })
    }

    pub fn exp_iid(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(FamilySpec {
            kind: FamilyKind::ExpIid,
            dim: n,
            scale: 1.0,
        })
    }

    pub fn exp_rate(theta: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        Ok(FamilySpec {
            kind: FamilyKind::ExpRate,
            dim: 1,
            scale: theta,
        })
    }

    pub fn beta32() -> Self {
        FamilySpec {
            kind: FamilyKind::Beta32,
            dim: 1,
            scale: 1.0,
        }
    }

    /// DR pdf and cdf.
    pub fn dr(&self) -> Result<(DrPdf, DrCdf)> {
        match self.kind {
            FamilyKind::MvnIsotropic => dr_mvn(self),
            FamilyKind::ExpIid => dr_exp_iid(self.dim),
            FamilyKind::ExpRate => dr_exp_rate(self.scale),
            FamilyKind::Beta32 => dr_beta32(),
        }
    }

    /// The original density at `x` (length `dim`).
    pub fn density(&self, x: &[f64]) -> f64 {
        match self.kind {
            FamilyKind::MvnIsotropic => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI * self.scale).ln() - r2 / (2.0 * self.scale))
                    .exp()
            }
            FamilyKind::ExpIid => {
                if x.iter().any(|&v| v < 0.0) {
                    0.0
                } else {
                    (-x.iter().sum::<f64>()).exp()
                }
            }
            FamilyKind::ExpRate => {
                if x[0] < 0.0 {
                    0.0
                } else {
                    self.scale * (-self.scale * x[0]).exp()
                }
            }
            FamilyKind::Beta32 => {
                let z = x[0];
                if (0.0..=1.0).contains(&z) {
                    12.0 * (1.0 - z) * z * z
                } else {
                    0.0
                }
            }
        }
    }

    /// A box holding all but about `1e-8` of the mass.
    pub fn suggested_box(&self) -> Vec<(f64, f64)> {
        let tail = 1e-8 / self.dim as f64;
        match self.kind {
            FamilyKind::MvnIsotropic => {
                let sd = self.scale.sqrt();
                let q = Normal::new(0.0, sd).unwrap().inverse_cdf(1.0 - 0.5 * tail);
                vec![(-q, q); self.dim]
            }
            FamilyKind::ExpIid => vec![(0.0, -tail.ln()); self.dim],
            FamilyKind::ExpRate => vec![(0.0, -tail.ln() / self.scale)],
            FamilyKind::Beta32 => vec![(0.0, 1.0)],
        }
    }

    /// The original density restricted to `bounds`.
    pub fn density_fn(&self, bounds: Vec<(f64, f64)>) -> Result<DensityFn> {
        if bounds.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "box has {} dimensions, family has {}",
                bounds.len(),
                self.dim
            )));
        }
        let spec = *self;
        DensityFn::new(bounds, move |x: &[f64]| spec.density(x))
    }

    /// Differential entropy of the original density.
    pub fn entropy(&self) -> f64 {
        let n = self.dim as f64;
        match self.kind {
            FamilyKind::MvnIsotropic => 0.5 * n * (2.0 * std::f64::consts::PI * std::f64::consts::E * self.scale).ln(),
            FamilyKind::ExpIid => n,
            FamilyKind::ExpRate => 1.0 - self.scale.ln(),
            // E[-ln(12 (1-x) x^2)] for x ~ Beta(3, 2)
            FamilyKind::Beta32 => -(12f64.ln() + (-13.0 / 12.0) + 2.0 * (-7.0 / 12.0)),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension must be in 1..={MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{name} must be finite and positive, got {v}"
        )));
    }
    Ok(())
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::MvnIsotropic => write!(f, "mvn:n={},var={}", self.dim, self.scale),
            FamilyKind::ExpIid => write!(f, "exp:n={}", self.dim),
            FamilyKind::ExpRate => write!(f, "exprate:theta={}", self.scale),
            FamilyKind::Beta32 => f.write_str("beta32"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.find(':') {
            Some(i) => (&s[..i], Some((i + 1, &s[i + 1..]))),
            None => (s, None),
        };
        let allowed: &[&str] = match name {
            "mvn" => &["n", "var"],
            "exp" => &["n"],
            "exprate" => &["theta"],
            "beta32" => &[],
            _ => return Err(Error::parse(0, format!("unknown family {name:?}"))),
        };
        let mut n: Option<usize> = None;
        let mut real: Option<f64> = None;
        if let Some((start, body)) = params {
            if allowed.is_empty() {
                return Err(Error::parse(start - 1, format!("{name} takes no parameters")));
            }
            let mut pos = start;
            for item in body.split(',') {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| Error::parse(pos, format!("expected key=value, got {item:?}")))?;
                if !allowed.contains(&key) {
                    return Err(Error::parse(pos, format!("unknown parameter {key:?} for {name}")));
                }
                let vpos = pos + key.len() + 1;
                if key == "n" {
                    if n.is_some() {
                        return Err(Error::parse(pos, "duplicate parameter n"));
                    }
                    n = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(vpos, format!("bad integer {value:?}")))?,
                    );
                } else {
                    if real.is_some() {
                        return Err(Error::parse(pos, format!("duplicate parameter {key}")));
                    }
                    real = Some(
                        value
                            .parse()
                            .map_err(|_| Error::parse(vpos, format!("bad number {value:?}")))?,
                    );
                }
                pos += item.len() + 1;
            }
        }
        let invalid = |e: Error| Error::parse(0, e.to_string());
        match name {
            "mvn" => FamilySpec::mvn(n.unwrap_or(1), real.unwrap_or(1.0)).map_err(invalid),
            "exp" => FamilySpec::exp_iid(n.unwrap_or(1)).map_err(invalid),
            "exprate" => {
                let theta = real.ok_or_else(|| Error::parse(s.len(), "exprate requires theta"))?;
                FamilySpec::exp_rate(theta).map_err(invalid)
            }
            _ => Ok(FamilySpec::beta32()),
        }
    }
}

/// Volume of the `n`-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    (ln_unit_ball(n) + n as f64 * r.ln()).exp()
}

fn ln_unit_ball(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)
}

/// `f̃(z) = (2πσ²)^{-n/2} exp{-(z/V_n)^{2/n} / (2σ²)}`.
pub fn dr_mvn(spec: &FamilySpec) -> Result<(DrPdf, DrCdf)> {
    if spec.kind != FamilyKind::MvnIsotropic {
        return Err(Error::InvalidArgument(format!("{spec} is not an isotropic normal")));
    }
    let n = spec.dim;
    let var = spec.scale;
    let nf = n as f64;
    let lv = ln_unit_ball(n);
    let ln_peak = -0.5 * nf * (2.0 * std::f64::consts::PI * var).ln();
    let peak = ln_peak.exp();
    // squared radius of the ball of volume z
    let r2 = move |z: f64| ((z.ln() - lv) * 2.0 / nf).exp();
    let pdf = DrPdf::analytic(
        spec.to_string(),
        move |z: f64| {
            if z <= 0.0 {
                peak
            } else {
                (ln_peak - r2(z) / (2.0 * var)).exp()
            }
        },
        f64::INFINITY,
    )?
    .with_level_measure(move |y: f64| {
        let t = 2.0 * var * (ln_peak - y.ln());
        if t <= 0.0 {
            0.0
        } else {
            (lv + 0.5 * nf * t.ln()).exp()
        }
    });
    let pdf = match n {
        1 => {
            let s = (2.0 * var).sqrt();
            pdf.with_cdf(move |z: f64| erf(0.5 * z / s))
        }
        2 => {
            let c = 2.0 * std::f64::consts::PI * var;
            pdf.with_cdf(move |z: f64| -(-z / c).exp_m1())
        }
        _ => {
            let cdf = quadrature_cdf(&pdf)?;
            pdf.with_cdf(cdf)
        }
    };
    let cdf = pdf.cdf()?;
    Ok((pdf, cdf))
}

/// `f̃(z) = exp{-(n! z)^{1/n}}`.
pub fn dr_exp_iid(n: usize) -> Result<(DrPdf, DrCdf)> {
    let spec = FamilySpec::exp_iid(n)?;
    let nf = n as f64;
    let lf = ln_gamma(nf + 1.0);
    let radius = move |z: f64| if z <= 0.0 { 0.0 } else { ((lf + z.ln()) / nf).exp() };
    let pdf = DrPdf::analytic(spec.to_string(), move |z: f64| (-radius(z)).exp(), f64::INFINITY)?.with_level_measure(
        move |y: f64| {
            let r = -y.ln();
            if r <= 0.0 {
                0.0
            } else {
                (nf * r.ln() - lf).exp()
            }
        },
    );
    let pdf = match n {
        1 => pdf.with_cdf(|z: f64| -(-z).exp_m1()),
        2 => pdf.with_cdf(|z: f64| {
            let r = (2.0 * z).sqrt();
            1.0 - (1.0 + r) * (-r).exp()
        }),
        _ => {
            let cdf = quadrature_cdf(&pdf)?;
            pdf.with_cdf(cdf)
        }
    };
    let cdf = pdf.cdf()?;
    Ok((pdf, cdf))
}

/// `f̃(z) = θ e^{-θz}`.
pub fn dr_exp_rate(theta: f64) -> Result<(DrPdf, DrCdf)> {
    let spec = FamilySpec::exp_rate(theta)?;
    let pdf = DrPdf::analytic(
        spec.to_string(),
        move |z: f64| theta * (-theta * z).exp(),
        f64::INFINITY,
    )?
    .with_level_measure(move |y: f64| ((theta / y).ln() / theta).max(0.0))
    .with_cdf(move |z: f64| -(-theta * z).exp_m1());
    let cdf = pdf.cdf()?;
    Ok((pdf, cdf))
}

/// DR of Beta(3,2) on `[0, 1]`: the two roots in `y` of
/// `48z⁶ − 96z⁴ + 9y² + 48z² − 16y = 0`, the larger one up to `1/√3`.
pub fn dr_beta32() -> Result<(DrPdf, DrCdf)> {
    let pdf = DrPdf::analytic("beta32", beta32_dr_pdf, 1.0)?.with_cdf(|z: f64| {
        let z = z.clamp(0.0, 1.0);
        z / 9.0 * ((4.0 - 3.0 * z * z).max(0.0).powf(1.5) + 8.0)
    });
    let cdf = pdf.cdf()?;
    Ok((pdf, cdf))
}

fn beta32_dr_pdf(z: f64) -> f64 {
    if !(0.0..=1.0).contains(&z) {
        return 0.0;
    }
    let w = 1.0 - z * z;
    let mut disc = 4.0 - 27.0 * z * z * w * w;
    if disc < 0.0 && disc > -1e-14 {
        disc = 0.0;
    }
    let root = 4.0 / 9.0 * disc.max(0.0).sqrt();
    if z * z <= 1.0 / 3.0 {
        8.0 / 9.0 + root
    } else {
        (8.0 / 9.0 - root).max(0.0)
    }
}

/// cdf by Gauss–Legendre quadrature of the pdf on a geometric mesh.
fn quadrature_cdf(pdf: &DrPdf) -> Result<impl Fn(f64) -> f64 + Send + Sync + 'static> {
    let support = pdf.level_measure(pdf.peak() * TAIL_LEVEL);
    let mut knots = vec![0.0];
    knots.extend_from_slice(Grid::geometric(support * 1e-14, support, 2048)?.points());
    let f = {
        let pdf = pdf.clone();
        move |z: f64| pdf.value(z)
    };
    let mut cum = Vec::with_capacity(knots.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in knots.windows(2) {
        acc += quad::gauss_legendre(&f, w[0], w[1]);
        cum.push(acc);
    }
    let knots = Arc::new(knots);
    let cum = Arc::new(cum);
    Ok(move |z: f64| {
        if z <= 0.0 {
            return 0.0;
        }
        let last = knots.len() - 1;
        if z >= knots[last] {
            return cum[last];
        }
        let i = segment_index(&knots, z);
        cum[i] + quad::gauss_legendre(&f, knots[i], z)
    })
}

/// Rebuilds the DR pdf from the law of the radial variable (χ² for
/// normals, Gamma for exponentials) and returns the sup-norm gap to the
/// closed form over a standard grid.
pub fn dr_validate_radial(spec: &FamilySpec) -> Result<f64> {
    let (pdf, cdf) = spec.dr()?;
    let n = spec.dim as f64;
    let end = cdf.quantile_end(1e-8);
    let grid = Grid::geometric(end * 1e-8, end, 1000)?;
    let rebuilt: Box<dyn Fn(f64) -> f64> = match spec.kind {
        FamilyKind::MvnIsotropic => {
            // δ(z) = R², with R²/σ² ~ χ²_n and V_n R^n = z
            let chi = ChiSquared::new(n).map_err(|e| Error::Numerical(e.to_string()))?;
            let var = spec.scale;
            let vn = ball_volume(spec.dim, 1.0);
            Box::new(move |z: f64| {
                let d = (z / vn).powf(2.0 / n);
                let dd = 2.0 / n * d / z;
                chi.pdf(d / var) / var * dd
            })
        }
        FamilyKind::ExpIid => {
            // δ(z) = Σ xᵢ ~ Gamma(n, 1) and δⁿ / n! = z
            let g = Gamma::new(n, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
            let lf = ln_gamma(n + 1.0);
            Box::new(move |z: f64| {
                let d = ((lf + z.ln()) / n).exp();
                let dd = d / (n * z);
                g.pdf(d) * dd
            })
        }
        _ => {
            return Err(Error::InvalidArgument(format!("{spec} has no radial representation")));
        }
    };
    let err = grid
        .points()
        .iter()
        .map(|&z| (rebuilt(z) - pdf.value(z)).abs())
        .fold(0.0, f64::max);
    // the radial cdf should agree as well; fold it into the same figure
    let cdf_err = match spec.kind {
        FamilyKind::MvnIsotropic => {
            let chi = ChiSquared::new(n).unwrap();
            let vn = ball_volume(spec.dim, 1.0);
            grid.points()
                .iter()
                .map(|&z| (chi.cdf((z / vn).powf(2.0 / n) / spec.scale) - cdf.value(z)).abs())
                .fold(0.0, f64::max)
        }
        _ => {
            let g = Gamma::new(n, 1.0).unwrap();
            let lf = ln_gamma(n + 1.0);
            grid.points()
                .iter()
                .map(|&z| (g.cdf(((lf + z.ln()) / n).exp()) - cdf.value(z)).abs())
                .fold(0.0, f64::max)
        }
    };
    Ok(err.max(cdf_err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(1, 1.0) - 2.0).abs() < 1e-14);
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-14);
        assert!((ball_volume(3, 2.0) - 32.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "mvn:n=2,var=3",
            "exp:n=2",
            "exprate:theta=2",
            "beta32",
            "exprate:theta=0.5",
        ] {
            let spec: FamilySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let spec: FamilySpec = "mvn:var=3,n=2".parse().unwrap();
        assert_eq!(spec, FamilySpec::mvn(2, 3.0).unwrap());
        assert_eq!("mvn".parse::<FamilySpec>().unwrap(), FamilySpec::mvn(1, 1.0).unwrap());
    }

    #[test]
    fn spec_errors() {
        for s in [
            "",
            "gauss",
            "mvn:",
            "mvn:n=0",
            "mvn:n=2,n=3",
            "exp:theta=1",
            "beta32:n=1",
            "exprate",
            "exprate:theta=-1",
            "mvn:n=2 ",
            "MVN:n=2",
            "exp:n=x",
        ] {
            assert!(matches!(s.parse::<FamilySpec>(), Err(Error::Parse { .. })), "{s}");
        }
    }

    #[test]
    fn bivariate_normal_closed_forms() {
        let (pdf, cdf) = dr_mvn(&FamilySpec::mvn(2, 1.0).unwrap()).unwrap();
        assert!((pdf.eval(0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        for z in [0.1, 1.0, 5.0, 30.0] {
            assert!((cdf.eval(z).unwrap() - (1.0 - (-z / (2.0 * PI)).exp())).abs() < 1e-15);
        }
        let (_, cdf3) = dr_mvn(&FamilySpec::mvn(2, 3.0).unwrap()).unwrap();
        assert!((cdf3.eval(4.0).unwrap() - (1.0 - (-4.0 / (6.0 * PI)).exp())).abs() < 1e-15);
    }

    #[test]
    fn quadrature_cdfs_match_radial_laws() {
        for n in 3..=5 {
            let spec = FamilySpec::mvn(n, 1.7).unwrap();
            let (_, cdf) = spec.dr().unwrap();
            let chi = ChiSquared::new(n as f64).unwrap();
            let vn = ball_volume(n, 1.0);
            for z in [1e-3, 0.5, 3.0, 40.0, 500.0] {
                let want = chi.cdf((z / vn).powf(2.0 / n as f64) / 1.7);
                assert!((cdf.eval(z).unwrap() - want).abs() < 1e-11, "n={n} z={z}");
            }
            let (_, cdf) = dr_exp_iid(n).unwrap();
            let g = Gamma::new(n as f64, 1.0).unwrap();
            let lf = ln_gamma(n as f64 + 1.0);
            for z in [1e-6, 0.01, 1.0, 100.0, 1e4] {
                let want = g.cdf(((lf + f64::ln(z)) / n as f64).exp());
                assert!((cdf.eval(z).unwrap() - want).abs() < 1e-11, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn exp_three_has_unit_mass() {
        let (pdf, cdf) = dr_exp_iid(3).unwrap();
        assert!((pdf.mass().unwrap() - 1.0).abs() < 1e-6);
        assert!((cdf.eval(cdf.support()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_branches() {
        let (pdf, cdf) = dr_beta32().unwrap();
        assert!((pdf.eval(0.0).unwrap() - 16.0 / 9.0).abs() < 1e-15);
        assert!((pdf.eval(1.0 / 3f64.sqrt()).unwrap() - 8.0 / 9.0).abs() < 1e-7);
        assert_eq!(pdf.eval(1.5).unwrap(), 0.0);
        assert_eq!(cdf.eval(1.0).unwrap(), 1.0);
        assert_eq!(cdf.eval(2.0).unwrap(), 1.0);
        let grid = Grid::uniform(0.0, 1.0, 10_000).unwrap();
        let vals: Vec<f64> = grid.points().iter().map(|&z| cdf.eval(z).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        // the branch form agrees with the derivative of the cdf
        for z in grid.points().iter().step_by(37) {
            let oracle = 8.0 / 9.0 + 4.0 / 9.0 * (1.0 - 3.0 * z * z) * (4.0 - 3.0 * z * z).sqrt();
            assert!((pdf.eval(*z).unwrap() - oracle).abs() < 1e-7, "{z}");
        }
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        let specs = [
            FamilySpec::mvn(1, 1.0).unwrap(),
            FamilySpec::mvn(2, 2.0).unwrap(),
            FamilySpec::mvn(3, 1.0).unwrap(),
            FamilySpec::exp_iid(1).unwrap(),
            FamilySpec::exp_iid(2).unwrap(),
            FamilySpec::exp_iid(4).unwrap(),
            FamilySpec::exp_rate(0.5).unwrap(),
            FamilySpec::beta32(),
        ];
        for spec in specs {
            let (pdf, cdf) = spec.dr().unwrap();
            let end = cdf.quantile_end(1e-6).min(pdf.support_end());
            for i in 1..100 {
                let z = end * i as f64 / 100.0;
                let h = 1e-5 * end;
                let fd = (cdf.eval(z + h).unwrap() - cdf.eval(z - h).unwrap()) / (2.0 * h);
                assert!((fd - pdf.eval(z).unwrap()).abs() < 1e-6, "{spec} z={z}");
            }
        }
    }

    #[test]
    fn radial_reconstruction() {
        assert!(dr_validate_radial(&FamilySpec::mvn(2, 1.0).unwrap()).unwrap() < 1e-8);
        assert!(dr_validate_radial(&FamilySpec::exp_iid(1).unwrap()).unwrap() < 1e-12);
        assert!(dr_validate_radial(&FamilySpec::exp_iid(2).unwrap()).unwrap() < 1e-8);
        assert!(dr_validate_radial(&FamilySpec::mvn(4, 0.5).unwrap()).unwrap() < 1e-8);
        assert!(dr_validate_radial(&FamilySpec::beta32()).is_err());
    }

    #[test]
    fn dimension_lowers_the_cdf() {
        let grid = Grid::uniform(0.0, 200.0, 1000).unwrap();
        for make in [
            |n| FamilySpec::mvn(n, 1.0).unwrap(),
            |n| FamilySpec::exp_iid(n).unwrap(),
        ] {
            let cdfs: Vec<DrCdf> = (1..=4).map(|n| make(n).dr().unwrap().1).collect();
            for w in cdfs.windows(2) {
                for &z in grid.points() {
                    assert!(w[1].eval(z).unwrap() <= w[0].eval(z).unwrap() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn determinant_lowers_the_cdf() {
        let (_, small) = FamilySpec::mvn(2, 1.0).unwrap().dr().unwrap();
        let (_, large) = FamilySpec::mvn(2, 3.0).unwrap().dr().unwrap();
        for i in 0..1000 {
            let z = i as f64 * 0.1;
            assert!(large.eval(z).unwrap() <= small.eval(z).unwrap());
        }
    }

    #[test]
    fn suggested_boxes_hold_the_mass() {
        let spec = FamilySpec::mvn(1, 2.0).unwrap();
        let f = spec.density_fn(spec.suggested_box()).unwrap();
        assert_eq!(f.dim(), 1);
        let spec = FamilySpec::exp_iid(2).unwrap();
        assert!(spec.density_fn(spec.suggested_box()).is_ok());
        assert!(spec.density_fn(vec![(0.0, 1.0)]).is_err());
    }
}
