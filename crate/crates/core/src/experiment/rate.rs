//! Log₂–log₂ rate fits and rank trend statistics.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// `(log₂ ε, log₂ error)`
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log₂ error` on `log₂ ε`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|(e, v)| !(*e > 0.0) || !(*v > 0.0) || !e.is_finite() || !v.is_finite())
    {
        return Err(Error::Argument(format!(
            "rate fit needs positive finite values, got {p:?}"
        )));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(e, v)| (libm::log2(e), libm::log2(v)))
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument(
            "all epsilons are equal; slope is undefined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    // a perfectly flat response is perfectly explained by the fit
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        points: logs,
        slope,
        intercept,
        r_squared,
    })
}

/// Average ranks (1-based), ties sharing their mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Argument(
            "spearman needs two equal-length samples of size ≥ 2".into(),
        ));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    Ok(cov / libm::sqrt(vx * vy))
}

/// Number of `i` with `values[i + 1] >= values[i]`, i.e. breaks in a strictly
/// decreasing sequence.
pub fn adjacent_inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] >= w[0]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_power_laws() {
        let eps = [1.0, 0.5, 0.25];
        let f = fit_rate(&eps.map(|e| (e, e))).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14 && (f.r_squared - 1.0).abs() < 1e-14);
        let f = fit_rate(&eps.map(|e| (e, e * e))).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        let f = fit_rate(&eps.map(|e| (e, 3.0))).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
        assert!((f.intercept - libm::log2(3.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[(1.0, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (0.5, 0.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (-0.5, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn spearman_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman_rho(&x, &[10.0, 5.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman_rho(&x, &[1.0, 5.0, 7.0, 100.0]).unwrap() - 1.0).abs() < 1e-15);
        // one swap among 4: 1 − 6·2/(4·15) = 0.8
        assert!((spearman_rho(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn inversions() {
        assert_eq!(adjacent_inversions(&[5.0, 4.0, 3.0]), 0);
        assert_eq!(adjacent_inversions(&[5.0, 6.0, 3.0, 3.0]), 2);
    }
}
