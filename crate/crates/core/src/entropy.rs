//! Entropies and moments of DRs and discrete distributions, and the
//! binary dependence example.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{ProbMatrix, ProbVector};
use crate::quad;
use crate::rearrange::DrPdf;

/// Tail share (relative to the total) above which a closed-form integral
/// is reported as divergent.
const DIVERGENCE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntropyKind {
    Shannon,
    Tsallis { gamma: f64 },
}

impl EntropyKind {
    pub fn tsallis(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Tsallis gamma must be positive, got {gamma}"
            )));
        }
        Ok(EntropyKind::Tsallis { gamma })
    }

    /// `h(u)`: `-u log u` or `(u/γ)(1 - u^γ)`, with `h(0) = 0`.
    pub fn h(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match *self {
            EntropyKind::Shannon => -u * u.ln(),
            EntropyKind::Tsallis { gamma } => u / gamma * (1.0 - u.powf(gamma)),
        }
    }

    /// `h'(u)`.
    pub fn h_prime(&self, u: f64) -> f64 {
        match *self {
            EntropyKind::Shannon => -u.ln() - 1.0,
            EntropyKind::Tsallis { gamma } => (1.0 - (gamma + 1.0) * u.powf(gamma)) / gamma,
        }
    }

    /// An antiderivative of `h`.
    fn h_integral(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match *self {
            EntropyKind::Shannon => -(0.5 * u * u * u.ln() - 0.25 * u * u),
            EntropyKind::Tsallis { gamma } => (0.5 * u * u - u.powf(gamma + 2.0) / (gamma + 2.0)) / gamma,
        }
    }
}

/// `Σ h(pᵢ)`.
pub fn entropy_discrete(p: &ProbVector, kind: EntropyKind) -> f64 {
    entropy_of_weights(p.probs(), kind)
}

pub(crate) fn entropy_of_weights(p: &[f64], kind: EntropyKind) -> f64 {
    p.iter().map(|&x| kind.h(x)).sum()
}

/// `∫₀^∞ h(f̃(z)) dz`. Tables are integrated exactly segment by segment
/// and contribute nothing beyond their last knot.
pub fn entropy_dr(f: &DrPdf, kind: EntropyKind) -> Result<f64> {
    if f.closed_level_measure().is_some() {
        let r = f.level_integral(|y, m| kind.h_prime(y) * m)?;
        check_tail(r.value, r.tail, "entropy")?;
        return Ok(r.value);
    }
    let t = f.table()?;
    let (xs, v) = (t.xs(), t.values());
    let phi = |u: f64| kind.h(u);
    let anti = |u: f64| kind.h_integral(u);
    Ok((1..xs.len())
        .map(|i| quad::linear_compose(xs[i] - xs[i - 1], v[i - 1].max(0.0), v[i].max(0.0), &phi, &anti))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the rearranged variable, normalised by the mass.
pub fn moments_dr(f: &DrPdf) -> Result<Moments> {
    let (m0, m1, m2) = if f.closed_level_measure().is_some() {
        let m0 = f.level_integral(|_, m| m)?;
        let m1 = f.level_integral(|_, m| 0.5 * m * m)?;
        let m2 = f.level_integral(|_, m| m * m * m / 3.0)?;
        check_tail(m1.value, m1.tail, "mean")?;
        check_tail(m2.value, m2.tail, "second moment")?;
        (m0.value, m1.value, m2.value)
    } else {
        let t = f.table()?;
        let (xs, v) = (t.xs(), t.values());
        let mut s = [0.0; 3];
        for i in 1..xs.len() {
            for (k, acc) in s.iter_mut().enumerate() {
                *acc += quad::linear_moment(xs[i - 1], v[i - 1], xs[i], v[i], k as u32);
            }
        }
        (s[0], s[1], s[2])
    };
    if !(m0 > 0.0) {
        return Err(Error::Numerical("DR has no mass".into()));
    }
    let mean = m1 / m0;
    Ok(Moments {
        mean,
        variance: (m2 / m0 - mean * mean).max(0.0),
    })
}

fn check_tail(value: f64, tail: f64, what: &str) -> Result<()> {
    if tail.abs() > DIVERGENCE_RATIO * value.abs().max(1.0) {
        return Err(Error::DivergentIntegral(format!("{what}: tail does not decay")));
    }
    Ok(())
}

/// Two binary variables with `P(X₁ = 0) = α`, `P(X₂ = 0) = β`, perturbed
/// away from independence by `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryJointSpec {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl BinaryJointSpec {
    /// `(p00, p10, p01, p11)` without validation.
    pub fn cells(&self) -> [f64; 4] {
        let (a, b, e) = (self.alpha, self.beta, self.epsilon);
        [
            a * b + e,
            (1.0 - a) * b - e,
            a * (1.0 - b) - e,
            (1.0 - a) * (1.0 - b) + e,
        ]
    }

    /// Half-width of the feasible ε interval.
    pub fn epsilon_bound(alpha: f64, beta: f64) -> f64 {
        BinaryJointSpec {
            alpha,
            beta,
            epsilon: 0.0,
        }
        .cells()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

fn check_margins(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "margins must lie in (0, 1), got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// The 2×2 table with entry `(i, j) = P(X₁ = i, X₂ = j)`.
pub fn binary_joint(spec: &BinaryJointSpec) -> Result<ProbMatrix> {
    check_margins(spec.alpha, spec.beta)?;
    let bound = BinaryJointSpec::epsilon_bound(spec.alpha, spec.beta);
    if !(spec.epsilon.abs() < bound) {
        return Err(Error::InvalidArgument(format!(
            "|epsilon| = {} must be below {bound}",
            spec.epsilon.abs()
        )));
    }
    let [p00, p10, p01, p11] = spec.cells();
    ProbMatrix::new(2, 2, vec![p00, p01, p10, p11])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOptimum {
    pub epsilon: f64,
    /// The stationary point lies outside the feasible interval and the
    /// nearest endpoint was returned.
    pub boundary: bool,
}

/// The ε maximising `H` over tables with fixed margins.
pub fn max_entropy_epsilon(alpha: f64, beta: f64, kind: EntropyKind) -> Result<EpsilonOptimum> {
    check_margins(alpha, beta)?;
    let bound = BinaryJointSpec::epsilon_bound(alpha, beta);
    let gamma = match kind {
        // p10 p01 = p00 p11 holds exactly at independence
        EntropyKind::Shannon => {
            return Ok(EpsilonOptimum {
                epsilon: 0.0,
                boundary: false,
            })
        }
        EntropyKind::Tsallis { gamma } => gamma,
    };
    if gamma == 1.0 {
        let e = -0.25 * (2.0 * alpha - 1.0) * (2.0 * beta - 1.0);
        return Ok(clamp_epsilon(e, bound));
    }
    // H'(ε) ∝ -(p00^γ + p11^γ - p10^γ - p01^γ), increasing in ε inside the bracket
    let phi = |e: f64| {
        let [p00, p10, p01, p11] = BinaryJointSpec {
            alpha,
            beta,
            epsilon: e,
        }
        .cells();
        p00.max(0.0).powf(gamma) + p11.max(0.0).powf(gamma) - p10.max(0.0).powf(gamma) - p01.max(0.0).powf(gamma)
    };
    let (mut lo, mut hi) = (-bound, bound);
    if phi(lo) >= 0.0 {
        return Ok(EpsilonOptimum {
            epsilon: -bound,
            boundary: true,
        });
    }
    if phi(hi) <= 0.0 {
        return Ok(EpsilonOptimum {
            epsilon: bound,
            boundary: true,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonOptimum {
        epsilon: 0.5 * (lo + hi),
        boundary: false,
    })
}

fn clamp_epsilon(e: f64, bound: f64) -> EpsilonOptimum {
    if e.abs() < bound {
        EpsilonOptimum {
            epsilon: e,
            boundary: false,
        }
    } else {
        EpsilonOptimum {
            epsilon: bound.copysign(e),
            boundary: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;
    use crate::rearrange::ValueGrid;
    use std::f64::consts::LN_2;

    #[test]
    fn discrete_entropies() {
        let u = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert!((entropy_discrete(&u, EntropyKind::Shannon) - LN_2).abs() < 1e-15);
        let point = ProbVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(entropy_discrete(&point, EntropyKind::Shannon), 0.0);
        let table = binary_joint(&BinaryJointSpec {
            alpha: 0.5,
            beta: 0.5,
            epsilon: 0.0,
        })
        .unwrap();
        let t1 = EntropyKind::tsallis(1.0).unwrap();
        assert!((entropy_discrete(&table.flatten(), t1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exponential_dr() {
        let (pdf, _) = FamilySpec::exp_iid(1).unwrap().dr().unwrap();
        assert!((entropy_dr(&pdf, EntropyKind::Shannon).unwrap() - 1.0).abs() < 1e-10);
        let m = moments_dr(&pdf).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-10 && (m.variance - 1.0).abs() < 1e-10);
        // same figures from the table, to interpolation accuracy
        let tab = DrPdf::from_table(pdf.tabulate(ValueGrid::default()).unwrap()).unwrap();
        assert!((entropy_dr(&tab, EntropyKind::Shannon).unwrap() - 1.0).abs() < 1e-5);
        let m = moments_dr(&tab).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-5 && (m.variance - 1.0).abs() < 1e-4);
    }

    #[test]
    fn tsallis_of_exponential() {
        // ∫ (e^{-z}/γ)(1 - e^{-γz}) dz = 1/(γ+1)
        let (pdf, _) = FamilySpec::exp_iid(1).unwrap().dr().unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let h = entropy_dr(&pdf, EntropyKind::tsallis(gamma).unwrap()).unwrap();
            assert!((h - 1.0 / (gamma + 1.0)).abs() < 1e-10, "{gamma}");
        }
    }

    #[test]
    fn heavy_tail_is_divergent() {
        // f(z) = 1/(1+z)², m(y) = y^{-1/2} - 1: mass 1, infinite mean
        let pdf =
            DrPdf::from_level_measure_fn("pareto", |y: f64| y.powf(-0.5) - 1.0, 1.0, f64::INFINITY, vec![]).unwrap();
        assert!((pdf.mass().unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(moments_dr(&pdf), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn binary_table_layout() {
        let t = binary_joint(&BinaryJointSpec {
            alpha: 0.4,
            beta: 0.3,
            epsilon: 0.0,
        })
        .unwrap();
        assert!((t.get(0, 0) - 0.12).abs() < 1e-15);
        assert!((t.get(1, 0) - 0.18).abs() < 1e-15);
        assert!((t.get(0, 1) - 0.28).abs() < 1e-15);
        assert!((t.get(1, 1) - 0.42).abs() < 1e-15);
        let p = binary_joint(&BinaryJointSpec {
            alpha: 0.4,
            beta: 0.3,
            epsilon: 0.07,
        })
        .unwrap();
        for i in 0..2 {
            assert!((p.row_sums()[i] - t.row_sums()[i]).abs() < 1e-15);
            assert!((p.col_sums()[i] - t.col_sums()[i]).abs() < 1e-15);
        }
        assert!(binary_joint(&BinaryJointSpec {
            alpha: 0.4,
            beta: 0.3,
            epsilon: 0.12
        })
        .is_err());
    }

    #[test]
    fn stationary_epsilons() {
        let t1 = EntropyKind::tsallis(1.0).unwrap();
        let e = max_entropy_epsilon(0.4, 0.3, t1).unwrap();
        assert!((e.epsilon + 0.02).abs() < 1e-15 && !e.boundary);
        assert_eq!(max_entropy_epsilon(0.5, 0.9, t1).unwrap().epsilon, 0.0);
        assert_eq!(
            max_entropy_epsilon(0.2, 0.7, EntropyKind::Shannon).unwrap().epsilon,
            0.0
        );
        // bisection path agrees with the closed form at γ = 1
        let g = EntropyKind::tsallis(1.0 + 1e-12).unwrap();
        assert!((max_entropy_epsilon(0.4, 0.3, g).unwrap().epsilon + 0.02).abs() < 1e-9);
    }

    #[test]
    fn extreme_margins_hit_the_boundary() {
        let t1 = EntropyKind::tsallis(1.0).unwrap();
        let e = max_entropy_epsilon(0.02, 0.02, t1).unwrap();
        assert!(e.boundary);
        assert!((e.epsilon.abs() - BinaryJointSpec::epsilon_bound(0.02, 0.02)).abs() < 1e-15);
    }
}
