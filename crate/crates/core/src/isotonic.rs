//! Weighted isotonic regression by pool-adjacent-violators.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Least-squares projection of `y` (weights `w`, all positive) onto the
/// monotone sequences in direction `dir`.
pub fn pava(y: &[f64], w: &[f64], dir: Direction) -> Result<Vec<f64>> {
    if y.len() != w.len() {
        return Err(Error::InvalidArgument("values and weights differ in length".into()));
    }
    if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) || y.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "weights must be positive and values finite".into(),
        ));
    }
    let sign = match dir {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    // blocks of (mean, weight, length), kept increasing in sign * mean
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        let mut cur = (sign * v, wt, 1usize);
        while let Some(&(m, bw, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = bw + cur.1;
            cur = ((m * bw + cur.0 * cur.1) / tw, tw, len + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, _, len) in blocks {
        out.extend(std::iter::repeat(sign * m).take(len));
    }
    Ok(out)
}

/// Unweighted [`pava`].
pub fn pava_unweighted(y: &[f64], dir: Direction) -> Vec<f64> {
    let w = vec![1.0; y.len()];
    pava(y, &w, dir).expect("unit weights")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_violators() {
        assert_eq!(
            pava_unweighted(&[1.0, 3.0, 2.0, 4.0], Direction::Increasing),
            vec![1.0, 2.5, 2.5, 4.0]
        );
        assert_eq!(
            pava_unweighted(&[3.0, 1.0, 2.0], Direction::Decreasing),
            vec![3.0, 1.5, 1.5]
        );
        assert_eq!(
            pava_unweighted(&[1.0, 2.0, 3.0], Direction::Increasing),
            vec![1.0, 2.0, 3.0]
        );
        assert!(pava_unweighted(&[], Direction::Increasing).is_empty());
    }

    #[test]
    fn weights_pull_the_pooled_mean() {
        let r = pava(&[2.0, 0.0], &[3.0, 1.0], Direction::Increasing).unwrap();
        assert_eq!(r, vec![1.5, 1.5]);
        assert!(pava(&[1.0], &[0.0], Direction::Increasing).is_err());
    }

    #[test]
    fn cascading_merges() {
        let r = pava_unweighted(&[5.0, 4.0, 3.0, 2.0, 1.0], Direction::Increasing);
        assert!(r.iter().all(|&v| (v - 3.0).abs() < 1e-15));
    }
}
