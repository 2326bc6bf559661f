//! Limiting constants of the count variances and covariances, in closed
//! form where the endpoint arithmetic is known and as partial averages
//! otherwise.
//!
//! Rationality cannot be read off a float, so closed forms take an
//! [`ArcClass`] declared by the caller.

use nalgebra::{DMatrix, SymmetricEigen};
use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{frac, frac_h, CompensatedSum};
use crate::spectral::Arc;

/// Default number of terms for the numeric partial averages.
pub const DEFAULT_NUMERIC_N: usize = 1_000_000;

pub const SQRT2: f64 = 1.414_213_562_373_095_048_8;
pub const SQRT3: f64 = 1.732_050_807_568_877_293_5;
pub const GOLDEN: f64 = 1.618_033_988_749_894_848_2;
pub const E: f64 = 2.718_281_828_459_045_235_4;
pub const PI: f64 = 3.141_592_653_589_793_238_5;

/// Arithmetic nature of an arc's endpoints. Linear independence over ℚ in
/// the irrational cases is declared, never checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ArcClass {
    BothIrrationalIndependent { alpha_value: f64, beta_value: f64 },
    RationalAlpha { p: i64, q: i64, beta_value: f64 },
    RationalBeta { alpha_value: f64, r: i64, s: i64 },
    BothRational { p: i64, q: i64, r: i64, s: i64 },
    /// `β = p/q + (r/s) α` with `α` irrational.
    AffineRelated { alpha_value: f64, p: i64, q: i64, r: i64, s: i64 },
}

fn check_pair(num: i64, den: i64, name: &'static str) -> Result<()> {
    if den < 1 {
        return Err(Error::domain(name, "denominators >= 1", den));
    }
    if num.gcd(&den) != 1 {
        return Err(Error::InvalidParameter(format!(
            "{name}: {num}/{den} is not in lowest terms"
        )));
    }
    Ok(())
}

impl ArcClass {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArcClass::BothIrrationalIndependent { .. } => Ok(()),
            ArcClass::RationalAlpha { p, q, .. } => check_pair(p, q, "alpha"),
            ArcClass::RationalBeta { r, s, .. } => check_pair(r, s, "beta"),
            ArcClass::BothRational { p, q, r, s } => {
                check_pair(p, q, "alpha")?;
                check_pair(r, s, "beta")
            }
            ArcClass::AffineRelated { p, q, r, s, .. } => {
                check_pair(p, q, "offset")?;
                if r == 0 {
                    return Err(Error::InvalidParameter("affine slope r must be non-zero".into()));
                }
                check_pair(r, s, "slope")
            }
        }
    }

    pub fn alpha_value(&self) -> f64 {
        match *self {
            ArcClass::BothIrrationalIndependent { alpha_value, .. }
            | ArcClass::RationalBeta { alpha_value, .. }
            | ArcClass::AffineRelated { alpha_value, .. } => alpha_value,
            ArcClass::RationalAlpha { p, q, .. } | ArcClass::BothRational { p, q, .. } => {
                p as f64 / q as f64
            }
        }
    }

    pub fn beta_value(&self) -> f64 {
        match *self {
            ArcClass::BothIrrationalIndependent { beta_value, .. }
            | ArcClass::RationalAlpha { beta_value, .. } => beta_value,
            ArcClass::RationalBeta { r, s, .. } | ArcClass::BothRational { r, s, .. } => {
                r as f64 / s as f64
            }
            ArcClass::AffineRelated {
                alpha_value,
                p,
                q,
                r,
                s,
            } => p as f64 / q as f64 + r as f64 / s as f64 * alpha_value,
        }
    }
}

/// A rational number or a declared irrational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Arithmetic {
    Rational { p: i64, q: i64 },
    Irrational,
}

/// Relations between two reals `x, y` for which `lim (1/n) Σ {jx}{jy}` is
/// known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "relation", rename_all = "kebab-case")]
pub enum S3Relation {
    /// Both irrational and independent over ℚ with 1.
    Independent,
    /// `x` irrational, `y = p/q`.
    RationalIrrational { p: i64, q: i64 },
    /// `x = p/q`, `y = r/s`.
    BothRational { p: i64, q: i64, r: i64, s: i64 },
    /// `x` irrational, `y = p/q + (r/s) x`.
    Affine { p: i64, q: i64, r: i64, s: i64 },
}

fn ratio128(p: i64, q: i64) -> Ratio<i128> {
    Ratio::new(p as i128, q as i128)
}

fn frac_ratio(x: Ratio<i128>) -> Ratio<i128> {
    x - x.floor()
}

/// `(1/T) Σ_{j=1}^T ({js} - {jt})({ju} - {jv})` over one common period `T`,
/// which is the exact limit for rational arguments.
pub fn c_rational(s: Ratio<i64>, t: Ratio<i64>, u: Ratio<i64>, v: Ratio<i64>) -> Ratio<i128> {
    let lift = |x: Ratio<i64>| ratio128(*x.numer(), *x.denom());
    let (s, t, u, v) = (lift(s), lift(t), lift(u), lift(v));
    let period = [s, t, u, v].iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let mut acc = Ratio::from_integer(0i128);
    for j in 1..=period {
        let jj = Ratio::from_integer(j);
        let w1 = frac_ratio(jj * s) - frac_ratio(jj * t);
        let w2 = frac_ratio(jj * u) - frac_ratio(jj * v);
        acc += w1 * w2;
    }
    acc / Ratio::from_integer(period)
}

/// One-period average of `(1/2)(h(t-u) + h(s-v) - h(s-u) - h(t-v))` at `j`,
/// `h(x) = {x}(1-{x})`, for rational arguments.
pub fn ctilde_rational(s: Ratio<i64>, t: Ratio<i64>, u: Ratio<i64>, v: Ratio<i64>) -> Ratio<i128> {
    let lift = |x: Ratio<i64>| ratio128(*x.numer(), *x.denom());
    let (s, t, u, v) = (lift(s), lift(t), lift(u), lift(v));
    let diffs = [t - u, s - v, s - u, t - v];
    let period = diffs.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let h = |x: Ratio<i128>| {
        let f = frac_ratio(x);
        f * (Ratio::from_integer(1) - f)
    };
    let mut acc = Ratio::from_integer(0i128);
    for j in 1..=period {
        let jj = Ratio::from_integer(j);
        acc += h(jj * diffs[0]) + h(jj * diffs[1]) - h(jj * diffs[2]) - h(jj * diffs[3]);
    }
    acc / Ratio::from_integer(2 * period)
}

/// Partial average `(1/n) Σ_{j≤n} ({js} - {jt})({ju} - {jv})`.
pub fn c_numeric(s: f64, t: f64, u: f64, v: f64, n: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let jf = j as f64;
        acc.add((frac(jf * s) - frac(jf * t)) * (frac(jf * u) - frac(jf * v)));
    }
    acc.value() / n as f64
}

/// Partial average `(1/2n) Σ_{j≤n} (h_j(t-u) + h_j(s-v) - h_j(s-u) - h_j(t-v))`
/// with `h_j(x) = {jx}(1-{jx})`.
pub fn ctilde_numeric(s: f64, t: f64, u: f64, v: f64, n: usize) -> f64 {
    let (a, b, c, d) = (t - u, s - v, s - u, t - v);
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let jf = j as f64;
        acc.add(frac_h(jf * a) + frac_h(jf * b) - frac_h(jf * c) - frac_h(jf * d));
    }
    acc.value() / (2 * n) as f64
}

/// Partial average `(1/n) Σ_{j≤n} {jx}{jy}`.
pub fn s3_numeric(x: f64, y: f64, n: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let jf = j as f64;
        acc.add(frac(jf * x) * frac(jf * y));
    }
    acc.value() / n as f64
}

/// `(1/n) Σ_{j≤n} f({jt + b})`.
pub fn equidistribution_average(f: impl Fn(f64) -> f64, t: f64, b: f64, n: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        acc.add(f(frac(j as f64 * t + b)));
    }
    acc.value() / n as f64
}

/// `lim (1/n) Σ {j p/q}²` for `p/q` in lowest terms.
fn frac_square_limit(q: i64) -> Ratio<i128> {
    let q = q as i128;
    Ratio::new((2 * q - 1) * (q - 1), 6 * q * q)
}

/// `Σ_{j=1}^{qs} {jp/q}{jr/s}`, exactly.
fn rational_cross_sum(p: i64, q: i64, r: i64, s: i64) -> Ratio<i128> {
    let (a, b) = (ratio128(p, q), ratio128(r, s));
    let mut acc = Ratio::from_integer(0i128);
    for j in 1..=(q as i128 * s as i128) {
        let jj = Ratio::from_integer(j);
        acc += frac_ratio(jj * a) * frac_ratio(jj * b);
    }
    acc
}

fn to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact value of the both-rational constant
/// `(2q-1)(q-1)/(6q²) + (2s-1)(s-1)/(6s²) - (2/(qs)) Σ_{j=1}^{qs} {jp/q}{jr/s}`.
pub fn c2_both_rational(p: i64, q: i64, r: i64, s: i64) -> Ratio<i128> {
    let qs = Ratio::from_integer(q as i128 * s as i128);
    frac_square_limit(q) + frac_square_limit(s)
        - Ratio::from_integer(2) * rational_cross_sum(p, q, r, s) / qs
}

/// `c₂ = lim (1/n) Σ ({jβ} - {jα})²` for each arithmetic case.
pub fn c2_closed(cls: &ArcClass) -> Result<f64> {
    cls.validate()?;
    Ok(match *cls {
        ArcClass::BothIrrationalIndependent { .. } => 1.0 / 6.0,
        ArcClass::RationalAlpha { q, .. } => 1.0 / 6.0 + 1.0 / (6.0 * (q * q) as f64),
        ArcClass::RationalBeta { s, .. } => 1.0 / 6.0 + 1.0 / (6.0 * (s * s) as f64),
        ArcClass::BothRational { p, q, r, s } => to_f64(c2_both_rational(p, q, r, s)),
        ArcClass::AffineRelated { q, r, s, .. } => {
            let d = s.gcd(&q) as f64;
            1.0 / 6.0 - d * d / (6.0 * s as f64 * r as f64 * (q * q) as f64)
        }
    })
}

/// `s₃ = lim (1/n) Σ {jx}{jy}` for the supported relations.
pub fn s3_closed(relation: &S3Relation) -> Result<f64> {
    Ok(match *relation {
        S3Relation::Independent => 0.25,
        S3Relation::RationalIrrational { p, q } => {
            check_pair(p, q, "rational argument")?;
            0.25 - 0.25 / q as f64
        }
        S3Relation::BothRational { p, q, r, s } => {
            check_pair(p, q, "first argument")?;
            check_pair(r, s, "second argument")?;
            to_f64(rational_cross_sum(p, q, r, s) / Ratio::from_integer(q as i128 * s as i128))
        }
        S3Relation::Affine { p, q, r, s } => {
            ArcClass::AffineRelated {
                alpha_value: 0.0,
                p,
                q,
                r,
                s,
            }
            .validate()?;
            let d = s.gcd(&q) as f64;
            0.25 + d * d / (12.0 * s as f64 * r as f64 * (q * q) as f64)
        }
    })
}

/// `ℓ = lim (1/n) Σ {jδ}(1-{jδ})`.
pub fn ell_closed(delta: &Arithmetic) -> Result<f64> {
    Ok(match *delta {
        Arithmetic::Irrational => 1.0 / 6.0,
        Arithmetic::Rational { p, q } => {
            check_pair(p, q, "delta")?;
            1.0 / 6.0 - 1.0 / (6.0 * (q * q) as f64)
        }
    })
}

/// The constant of the mesoscopic variance `θ c₂(α) log(Nδ_N)` for
/// permutation matrices.
pub fn c2_meso(alpha: &Arithmetic) -> Result<f64> {
    Ok(match *alpha {
        Arithmetic::Irrational => 1.0 / 6.0,
        Arithmetic::Rational { p, q } => {
            check_pair(p, q, "alpha")?;
            1.0 / 6.0 + 1.0 / (6.0 * (q * q) as f64)
        }
    })
}

/// A correlation matrix together with the unnormalized limits it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    pub dim: usize,
    /// Row-major correlation entries.
    pub entries: Vec<f64>,
    /// Row-major unnormalized limits (`c_{k,l}` or `c̃_{k,l}`).
    pub gram: Vec<f64>,
    /// Closed-form diagonal limits where every arc's class is declared.
    pub closed_diagonal: Option<Vec<f64>>,
}

impl CovarianceMatrix {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.dim + l]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// An arc with its optionally declared arithmetic class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedArc {
    pub arc: Arc,
    pub class: Option<ArcClass>,
}

fn normalize(
    arcs: &[ClassifiedArc],
    gram: Vec<f64>,
    closed: impl Fn(&ArcClass) -> Result<f64>,
) -> Result<CovarianceMatrix> {
    let m = arcs.len();
    for k in 0..m {
        if gram[k * m + k] <= 1e-12 {
            return Err(Error::DegenerateArc { index: k });
        }
    }
    let mut entries = vec![0.0; m * m];
    for k in 0..m {
        for l in 0..m {
            entries[k * m + l] = if k == l {
                1.0
            } else {
                gram[k * m + l] / (gram[k * m + k] * gram[l * m + l]).sqrt()
            };
        }
    }
    let closed_diagonal = arcs
        .iter()
        .map(|a| a.class.as_ref().map(&closed))
        .collect::<Option<Result<Vec<f64>>>>()
        .transpose()?;
    Ok(CovarianceMatrix {
        dim: m,
        entries,
        gram,
        closed_diagonal,
    })
}

fn build_gram(arcs: &[ClassifiedArc], entry: impl Fn(&Arc, &Arc) -> f64) -> Result<Vec<f64>> {
    if arcs.is_empty() {
        return Err(Error::InvalidParameter("at least one arc is required".into()));
    }
    let m = arcs.len();
    let mut gram = vec![0.0; m * m];
    for k in 0..m {
        for l in k..m {
            let v = entry(&arcs[k].arc, &arcs[l].arc);
            gram[k * m + l] = v;
            gram[l * m + k] = v;
        }
    }
    Ok(gram)
}

/// Correlation matrix of the limiting Gaussian for permutation-matrix
/// counts: `D_{k,l} = c_{k,l} / √(c_{k,k} c_{l,l})`, limits estimated at
/// `n_numeric`.
pub fn covariance_d(arcs: &[ClassifiedArc], n_numeric: usize) -> Result<CovarianceMatrix> {
    let gram = build_gram(arcs, |a, b| {
        c_numeric(
            a.beta().value(),
            a.alpha().value(),
            b.beta().value(),
            b.alpha().value(),
            n_numeric,
        )
    })?;
    normalize(arcs, gram, c2_closed)
}

/// Correlation matrix for modified-ensemble counts, built from
/// `c̃(α_k, β_k, α_l, β_l)`.
pub fn covariance_dtilde(arcs: &[ClassifiedArc], n_numeric: usize) -> Result<CovarianceMatrix> {
    let gram = build_gram(arcs, |a, b| {
        ctilde_numeric(
            a.alpha().value(),
            a.beta().value(),
            b.alpha().value(),
            b.beta().value(),
            n_numeric,
        )
    })?;
    normalize(arcs, gram, |cls| {
        cls.validate()?;
        let delta = match *cls {
            ArcClass::BothRational { p, q, r, s } => {
                let d = ratio128(r, s) - ratio128(p, q);
                Arithmetic::Rational {
                    p: *d.numer() as i64,
                    q: *d.denom() as i64,
                }
            }
            ArcClass::AffineRelated { p, q, r, s, .. } if r == s => Arithmetic::Rational { p, q },
            _ => Arithmetic::Irrational,
        };
        ell_closed(&delta)
    })
}
