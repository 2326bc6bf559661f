//! Goodness-of-fit machinery and the digamma function.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Digamma `ψ(x)` for `x > 0`: upward recurrence to `x >= 10`, then the
/// asymptotic expansion in `1/x²`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("digamma argument", "(0, inf)", x));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    // B_{2k} / (2k) for k = 1..6
    let series = z
        * (1.0 / 12.0
            - z * (1.0 / 120.0
                - z * (1.0 / 252.0 - z * (1.0 / 240.0 - z * (1.0 / 132.0 - z * 691.0 / 32760.0)))));
    Ok(shift + x.ln() - 0.5 / x - series)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub sample_size: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function `P(K > λ)` of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    const TOL: f64 = 1e-10;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form, converges fast for small λ
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        let mut k = 1.0f64;
        loop {
            let t = (-(2.0 * k - 1.0).powi(2) * c).exp();
            cdf += t;
            if t < TOL {
                break;
            }
            k += 1.0;
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut k = 1.0f64;
    let mut sign = 1.0;
    loop {
        let t = (-2.0 * k * k * lambda * lambda).exp();
        sum += sign * t;
        if t < TOL {
            break;
        }
        sign = -sign;
        k += 1.0;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test of nondecreasing `sorted` against a
/// continuous `cdf`. The p-value uses the asymptotic law with Stephens'
/// finite-sample scaling `(√n + 0.12 + 0.11/√n) D`.
pub fn ks_test(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let n = sorted.len();
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "KS test needs at least 8 samples, got {n}"
        )));
    }
    if sorted.iter().any(|x| x.is_nan()) || sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Unsorted);
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let d = d.clamp(0.0, 1.0);
    let sq = nf.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(KsResult {
        sample_size: n,
        statistic: d,
        p_value: kolmogorov_survival(lambda),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
/// Cells with expected count below 5 are pooled into one.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::InvalidParameter(
            "observed and probability vectors must have equal, nonzero length".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total;
        if e < 5.0 {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_exp > 0.0 {
        cells.push((pool_obs, pool_exp));
    }
    if cells.len() < 2 {
        return Err(Error::InvalidParameter("fewer than two usable cells".into()));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use rand::Rng;

    #[test]
    fn digamma_special_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-13);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-13);
        assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * ln2).abs() < 1e-13);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
    }

    #[test]
    fn digamma_matches_reference() {
        for i in 1..400 {
            let x = 0.013 * i as f64 * i as f64 / 10.0 + 0.001;
            let ours = digamma(x).unwrap();
            let reference = statrs::function::gamma::digamma(x);
            assert!((ours - reference).abs() < 1e-10, "x={x}: {ours} vs {reference}");
        }
    }

    #[test]
    fn digamma_recurrence() {
        for &x in &[0.01, 0.3, 1.7, 4.2, 9.99, 25.0] {
            let gap = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            assert!(gap.abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn ks_deciles() {
        let xs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ks_constant_samples() {
        let xs = vec![0.5; 20];
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic >= 0.5);
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert_eq!(ks_test(&[0.3, 0.1, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95], |x| x), Err(Error::Unsorted));
        assert!(ks_test(&[0.1, 0.2], |x| x).is_err());
    }

    #[test]
    fn ks_null_uniform() {
        let mut rng = trial_rng(41, 0);
        let mut xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p_value > 0.01, "{r:?}");
        assert!((0.0..=1.0).contains(&r.statistic));
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid near the switch point
        for &l in &[1.0, 1.1, 1.18, 1.25] {
            let mut alt = 0.0;
            for k in 1..200 {
                let k = k as f64;
                alt += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * l * l).exp();
            }
            assert!((kolmogorov_survival(l) - alt).abs() < 1e-9, "λ={l}");
        }
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn chi_square_fair_die() {
        let r = chi_square_gof(&[100, 100, 100, 100, 100, 100], &[1.0 / 6.0; 6]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 5);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_gof(&[200, 0, 100, 100, 100, 100], &[1.0 / 6.0; 6]).unwrap();
        assert!(r.p_value < 1e-10);
    }
}
