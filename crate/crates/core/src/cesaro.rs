//! The weights `Ψ_n(j)`, Cesàro numbers and means of fractional order, and
//! the summation identities they satisfy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default size cap for the O(n²) double sums.
pub const DEFAULT_QUADRATIC_CAP: usize = 2000;

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("theta", "(0, inf)", theta))
    }
}

/// `Ψ_n(j) = ∏_{i=0}^{j-1} (n-i)/(θ+n-1-i)`, the ratio `E(a_{n,j}) / (θ/j)`.
pub fn psi(n: usize, j: usize, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if j == 0 || j > n {
        return Err(Error::domain("j", "[1, n]", j));
    }
    let nf = n as f64;
    Ok((0..j)
        .map(|i| (nf - i as f64) / (theta + nf - 1.0 - i as f64))
        .product())
}

/// `Ψ_n(1), …, Ψ_n(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiTable {
    n: usize,
    theta: f64,
    values: Vec<f64>,
}

impl PsiTable {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        if n == 0 {
            return Err(Error::domain("n", "[1, inf)", n));
        }
        // each factor is 1 - (θ-1)/(θ+n-1-i); summing their logs keeps the
        // relative error flat in j
        let nf = n as f64;
        let mut log_acc = CompensatedSum::new();
        let values = (0..n)
            .map(|i| {
                log_acc.add((-(theta - 1.0) / (theta + nf - 1.0 - i as f64)).ln_1p());
                log_acc.value().exp()
            })
            .collect();
        Ok(Self { n, theta, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `Ψ_n(j)` for `1 <= j <= n`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    /// `Ψ_n(j)` for `j <= n`, zero beyond.
    pub fn get_or_zero(&self, j: usize) -> f64 {
        if j <= self.n {
            self.values[j - 1]
        } else {
            0.0
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cesàro number `A_n^δ = ∏_{k=1}^n (k+δ)/k`.
pub fn cesaro_number(n: usize, delta: f64) -> Result<f64> {
    if !delta.is_finite() || (delta < 0.0 && delta.fract() == 0.0) {
        return Err(Error::domain("delta", "reals except negative integers", delta));
    }
    Ok((1..=n).map(|k| (k as f64 + delta) / k as f64).product())
}

/// `A_0^δ, …, A_n^δ`.
pub fn cesaro_numbers(n: usize, delta: f64) -> Result<Vec<f64>> {
    cesaro_number(0, delta)?;
    let mut acc = 1.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for k in 1..=n {
        acc *= (k as f64 + delta) / k as f64;
        out.push(acc);
    }
    Ok(out)
}

fn check_weights(w: &[f64]) -> Result<usize> {
    match w.first() {
        None => Err(Error::InvalidParameter("weight sequence is empty".into())),
        Some(&w0) if w0 != 0.0 => Err(Error::InvalidParameter(format!(
            "weight sequence must start with w_0 = 0, got {w0}"
        ))),
        _ => Ok(w.len() - 1),
    }
}

/// Cesàro mean of order θ, `σ_n^θ(w) = (θ/(θ+n)) Σ_{j=1}^n Ψ_n(j) w_j`,
/// for `w = (w_0 = 0, w_1, …, w_n)`.
pub fn cesaro_mean(w: &[f64], theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let n = check_weights(w)?;
    if n == 0 {
        return Ok(0.0);
    }
    let table = PsiTable::new(n, theta)?;
    let mut acc = CompensatedSum::new();
    for (j, &wj) in w.iter().enumerate().skip(1) {
        acc.add(table.get(j) * wj);
    }
    Ok(theta / (theta + n as f64) * acc.value())
}

/// The same mean in its defining form `Σ_j (A_{n-j}^{θ-1} / A_n^θ) w_j`.
pub fn cesaro_mean_from_numbers(w: &[f64], theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let n = check_weights(w)?;
    let lower = cesaro_numbers(n, theta - 1.0)?;
    let top = cesaro_number(n, theta)?;
    let mut acc = CompensatedSum::new();
    for (j, &wj) in w.iter().enumerate().skip(1) {
        acc.add(lower[n - j] * wj);
    }
    Ok(acc.value() / top)
}

/// Both sides of an identity, as computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn abs_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Gap relative to `max(|rhs|, 1e-300)`.
    pub fn relative_gap(&self) -> f64 {
        self.abs_gap() / self.rhs.abs().max(1e-300)
    }
}

/// `(1/n) Σ Ψ_n(j)` against `1/θ`.
pub fn verify_mean_identity(n: usize, theta: f64) -> Result<IdentityCheck> {
    let table = PsiTable::new(n, theta)?;
    let sum: CompensatedSum = table.values.iter().copied().collect();
    Ok(IdentityCheck {
        lhs: sum.value() / n as f64,
        rhs: 1.0 / theta,
    })
}

/// `Σ Ψ_n(j)/j` against `Σ_{j=1}^n 1/(θ+j-1)`.
pub fn verify_harmonic_identity(n: usize, theta: f64) -> Result<IdentityCheck> {
    let table = PsiTable::new(n, theta)?;
    let lhs: CompensatedSum = (1..=n).map(|j| table.get(j) / j as f64).collect();
    let rhs: CompensatedSum = (1..=n).map(|j| 1.0 / (theta + j as f64 - 1.0)).collect();
    Ok(IdentityCheck {
        lhs: lhs.value(),
        rhs: rhs.value(),
    })
}

fn quadratic_terms(
    n: usize,
    theta: f64,
    cap: usize,
    what: &'static str,
    mut f: impl FnMut(f64),
) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { what, n, cap });
    }
    let table = PsiTable::new(n, theta)?;
    for j in 1..=n {
        let pj = table.get(j);
        for k in 1..=n {
            f((pj * table.get(k) - table.get_or_zero(j + k)) / (j * k) as f64);
        }
    }
    Ok(())
}

/// `Σ_{j,k<=n} (Ψ_n(j)Ψ_n(k) - Ψ_n(j+k)1_{j+k<=n}) / (jk)` against
/// `Σ_{k<n} 1/(θ+k)²`, i.e. the variance of the number of cycles.
pub fn verify_quadratic_identity(n: usize, theta: f64, cap: usize) -> Result<IdentityCheck> {
    let mut lhs = CompensatedSum::new();
    quadratic_terms(n, theta, cap, "quadratic identity", |t| lhs.add(t))?;
    let rhs: CompensatedSum = (0..n).map(|k| (theta + k as f64).powi(-2)).collect();
    Ok(IdentityCheck {
        lhs: lhs.value(),
        rhs: rhs.value(),
    })
}

/// The same double sum with every term in absolute value.
pub fn absolute_quadratic_sum(n: usize, theta: f64, cap: usize) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    quadratic_terms(n, theta, cap, "absolute quadratic sum", |t| acc.add(t.abs()))?;
    Ok(acc.value())
}

/// `Σ_{p=j}^{n-1} A_{p-j}^{θ-1} / (p A_p^θ)` against `Ψ_n(j)(1/j - 1/n)`.
///
/// `j = n` is accepted and gives the empty sum on both sides.
pub fn verify_telescoping(n: usize, j: usize, theta: f64) -> Result<IdentityCheck> {
    check_theta(theta)?;
    if j == 0 || j > n {
        return Err(Error::domain("j", "[1, n]", j));
    }
    let lower = cesaro_numbers(n, theta - 1.0)?;
    let upper = cesaro_numbers(n, theta)?;
    let lhs: CompensatedSum = (j..n)
        .map(|p| lower[p - j] / (p as f64 * upper[p]))
        .collect();
    let rhs = psi(n, j, theta)? * (1.0 / j as f64 - 1.0 / n as f64);
    Ok(IdentityCheck {
        lhs: lhs.value(),
        rhs,
    })
}

/// `Σ_{j<=n} Ψ_n(j) w_j / j` divided by `log n`, for `w = (0, w_1, …, w_n)`.
///
/// When `(1/n) Σ Ψ_n(j) w_j → L`, this tends to `θL`, which is the ordinary
/// Cesàro limit of `w` when that exists.
pub fn log_weighted_ratio(w: &[f64], theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let n = check_weights(w)?;
    if n < 2 {
        return Err(Error::domain("n", "[2, inf)", n));
    }
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::domain("w_j", "[0, inf)", bad));
    }
    let table = PsiTable::new(n, theta)?;
    let sum: CompensatedSum = (1..=n).map(|j| table.get(j) * w[j] / j as f64).collect();
    Ok(sum.value() / (n as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::frac_h;

    const THETAS: [f64; 5] = [0.3, 0.7, 1.0, 1.5, 2.5];

    #[test]
    fn psi_examples() {
        for j in 1..=20 {
            assert_eq!(psi(20, j, 1.0).unwrap(), 1.0);
        }
        assert!((psi(5, 5, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(psi(5, 0, 1.0).is_err());
        assert!(psi(5, 6, 1.0).is_err());
        assert!(psi(5, 2, 0.0).is_err());
    }

    #[test]
    fn table_matches_pointwise() {
        let t = PsiTable::new(300, 0.7).unwrap();
        for j in [1, 2, 17, 150, 300] {
            let p = psi(300, j, 0.7).unwrap();
            assert!((t.get(j) - p).abs() < 1e-12 * p);
        }
        assert_eq!(t.get_or_zero(301), 0.0);
    }

    #[test]
    fn psi_monotonicity() {
        for (theta, increasing) in [(0.4, true), (2.5, false)] {
            let t = PsiTable::new(500, theta).unwrap();
            for w in t.values().windows(2) {
                if increasing {
                    assert!(w[1] >= w[0]);
                } else {
                    assert!(w[1] <= w[0]);
                }
            }
            assert!(t.values().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn no_overflow_for_large_n() {
        let t = PsiTable::new(1_000_000, 0.3).unwrap();
        assert!(t.values().iter().all(|v| v.is_finite() && *v > 0.0));
        let c = verify_mean_identity(1_000_000, 0.3).unwrap();
        assert!(c.relative_gap() < 1e-10, "{:e}", c.relative_gap());
    }

    #[test]
    fn mean_identity() {
        let c = verify_mean_identity(100, 0.5).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-10);
        assert_eq!(verify_mean_identity(50, 1.0).unwrap().lhs, 1.0);
        let c = verify_mean_identity(10_000, 2.5).unwrap();
        assert!((c.lhs - 0.4).abs() < 1e-10 && c.rhs == 0.4);
        for n in [100, 1000, 10_000] {
            for theta in THETAS {
                assert!(verify_mean_identity(n, theta).unwrap().relative_gap() < 1e-10);
            }
        }
    }

    #[test]
    fn harmonic_identity() {
        let c = verify_harmonic_identity(1, 0.4).unwrap();
        assert!((c.lhs - 2.5).abs() < 1e-15 && (c.rhs - 2.5).abs() < 1e-15);
        let h: f64 = (1..=200).map(|k| 1.0 / k as f64).sum();
        let c = verify_harmonic_identity(200, 1.0).unwrap();
        assert!((c.lhs - h).abs() < 1e-12 && (c.rhs - h).abs() < 1e-12);
        for n in [100, 1000, 10_000] {
            for theta in THETAS {
                assert!(verify_harmonic_identity(n, theta).unwrap().relative_gap() < 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_identity() {
        let c = verify_quadratic_identity(1, 0.7, DEFAULT_QUADRATIC_CAP).unwrap();
        assert!((c.lhs - 1.0 / 0.49).abs() < 1e-12 && c.abs_gap() < 1e-12);
        let c = verify_quadratic_identity(300, 1.0, DEFAULT_QUADRATIC_CAP).unwrap();
        let zeta: f64 = (1..=300).map(|k| 1.0 / (k * k) as f64).sum();
        assert!((c.rhs - zeta).abs() < 1e-14);
        assert!(c.abs_gap() < 1e-8);
        for theta in THETAS {
            assert!(verify_quadratic_identity(300, theta, DEFAULT_QUADRATIC_CAP)
                .unwrap()
                .abs_gap()
                < 1e-8);
        }
        assert!(matches!(
            verify_quadratic_identity(2001, 1.0, DEFAULT_QUADRATIC_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn quadratic_lhs_matches_linear_form() {
        // Σ_{j+k=m} 1/(jk) = 2H_{m-1}/m collapses the double sum
        let (n, theta) = (400, 0.7);
        let t = PsiTable::new(n, theta).unwrap();
        let first: f64 = (1..=n).map(|j| t.get(j) / j as f64).sum();
        let mut h = 0.0;
        let mut second = 0.0;
        for m in 2..=n {
            h += 1.0 / (m - 1) as f64;
            second += t.get(m) * 2.0 * h / m as f64;
        }
        let c = verify_quadratic_identity(n, theta, DEFAULT_QUADRATIC_CAP).unwrap();
        assert!((c.lhs - (first * first - second)).abs() < 1e-10);
    }

    #[test]
    fn absolute_sum() {
        let a = absolute_quadratic_sum(1, 0.5, DEFAULT_QUADRATIC_CAP).unwrap();
        assert!((a - 4.0).abs() < 1e-12);
        for theta in [1.0, 1.5, 2.5] {
            let q = verify_quadratic_identity(200, theta, DEFAULT_QUADRATIC_CAP).unwrap();
            let a = absolute_quadratic_sum(200, theta, DEFAULT_QUADRATIC_CAP).unwrap();
            assert!((a - q.lhs).abs() < 1e-9, "θ={theta}: {a} vs {}", q.lhs);
        }
        let seq: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| absolute_quadratic_sum(n, 0.5, DEFAULT_QUADRATIC_CAP).unwrap())
            .collect();
        for w in seq.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!((seq[3] - seq[2]).abs() / seq[2] < 0.05, "{seq:?}");
    }

    #[test]
    fn cesaro_number_examples() {
        for n in 0..10 {
            assert_eq!(cesaro_number(n, 0.0).unwrap(), 1.0);
        }
        assert!((cesaro_number(3, 1.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(cesaro_number(0, 2.7).unwrap(), 1.0);
        assert!(cesaro_number(3, -2.0).is_err());
        for theta in [0.5, 2.0] {
            let lower = cesaro_numbers(50, theta - 1.0).unwrap();
            for n in 0..=50 {
                let s: f64 = lower[..=n].iter().sum();
                let a = cesaro_number(n, theta).unwrap();
                assert!((s - a).abs() / a < 1e-10);
            }
        }
    }

    #[test]
    fn cesaro_mean_examples() {
        let n = 40;
        for theta in [0.5, 1.0, 3.0] {
            let mut w = vec![2.5; n + 1];
            w[0] = 0.0;
            let m = cesaro_mean(&w, theta).unwrap();
            assert!((m - 2.5 * n as f64 / (theta + n as f64)).abs() < 1e-12);
            let a = cesaro_mean_from_numbers(&w, theta).unwrap();
            assert!((m - a).abs() < 1e-10);
        }
        assert_eq!(cesaro_mean(&[0.0; 8], 1.3).unwrap(), 0.0);
        assert!((cesaro_mean(&[0.0, 1.0, 2.0, 3.0], 1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(cesaro_mean(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn cesaro_forms_agree_on_irregular_weights() {
        let w: Vec<f64> = (0..=300)
            .map(|j| if j == 0 { 0.0 } else { frac_h(j as f64 * 0.618_033_988_749_895) })
            .collect();
        for theta in THETAS {
            let a = cesaro_mean(&w, theta).unwrap();
            let b = cesaro_mean_from_numbers(&w, theta).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn telescoping() {
        let c = verify_telescoping(10, 9, 1.7).unwrap();
        assert!(c.abs_gap() < 1e-14);
        let c = verify_telescoping(200, 7, 1.5).unwrap();
        assert!(c.relative_gap() < 1e-10);
        let c = verify_telescoping(80, 5, 1.0).unwrap();
        assert!((c.rhs - (0.2 - 1.0 / 80.0)).abs() < 1e-15 && c.abs_gap() < 1e-12);
        for theta in THETAS {
            for j in [1, 2, 50, 999, 1999] {
                assert!(verify_telescoping(2000, j, theta).unwrap().abs_gap() < 1e-8);
            }
        }
    }

    #[test]
    fn log_ratio_constant_weights() {
        let n = 100_000;
        let mut w = vec![1.0; n + 1];
        w[0] = 0.0;
        // exact through the harmonic identity
        for theta in [1.0, 2.0] {
            let r = log_weighted_ratio(&w, theta).unwrap();
            let rhs: f64 = (1..=n).map(|j| 1.0 / (theta + j as f64 - 1.0)).sum();
            assert!((r - rhs / (n as f64).ln()).abs() < 1e-12);
        }
        let r = log_weighted_ratio(&w, 2.0).unwrap();
        assert!((r - 1.0).abs() < 0.05);
    }

    #[test]
    fn log_ratio_equidistributed_weights_extrapolate_to_one_sixth() {
        // the ratio behaves as 1/6 + c/log n; two sizes pin both terms
        let golden = 0.618_033_988_749_894_8;
        let ratio = |n: usize| {
            let w: Vec<f64> = (0..=n)
                .map(|j| if j == 0 { 0.0 } else { frac_h(j as f64 * golden) })
                .collect();
            log_weighted_ratio(&w, 1.0).unwrap()
        };
        let (n1, n2) = (10_000usize, 1_000_000usize);
        let (l1, l2) = ((n1 as f64).ln(), (n2 as f64).ln());
        let (r1, r2) = (ratio(n1), ratio(n2));
        let limit = (r2 * l2 - r1 * l1) / (l2 - l1);
        assert!((limit - 1.0 / 6.0).abs() < 0.02 / 6.0, "{r1} {r2} -> {limit}");
        assert!((r2 - 1.0 / 6.0).abs() < (r1 - 1.0 / 6.0).abs());
    }
}
