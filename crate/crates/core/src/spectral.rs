//! Eigenangles and arc counts for permutation matrices and their
//! S¹-modified counterparts, with exact finite-N moments of the counts.
//!
//! A j-cycle of a permutation matrix contributes the angles `k/j`; in the
//! modified ensemble a j-cycle with phase `φ` contributes `(k+φ)/j`. Arcs are
//! half-open, `(α, β]`.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::cesaro::PsiTable;
use crate::error::{Error, Result};
use crate::ewens::CycleCounts;
use crate::numeric::{frac, CompensatedSum};

/// Default size cap for the quadratic-time variance of permutation counts.
pub const DEFAULT_PERM_VARIANCE_CAP: usize = 5000;

/// An arc endpoint in turns, either an exact rational or a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Rational(Ratio<i64>),
    Real(f64),
}

impl Endpoint {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Ok(Endpoint::Rational(Ratio::new(p, q)))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Endpoint::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Endpoint::Real(x) => x,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Endpoint::Rational(_))
    }

    /// `⌊j x⌋`.
    pub fn floor_mul(&self, j: u64) -> i64 {
        match *self {
            Endpoint::Rational(r) => {
                let num = *r.numer() as i128 * j as i128;
                Integer::div_floor(&num, &(*r.denom() as i128)) as i64
            }
            Endpoint::Real(x) => (j as f64 * x).floor() as i64,
        }
    }

    /// `{j x}`, consistent with [`Endpoint::floor_mul`].
    pub fn frac_mul(&self, j: u64) -> f64 {
        match *self {
            Endpoint::Rational(r) => {
                let q = *r.denom() as i128;
                let rem = (*r.numer() as i128 * j as i128).mod_floor(&q);
                rem as f64 / q as f64
            }
            Endpoint::Real(x) => {
                let y = j as f64 * x;
                y - y.floor()
            }
        }
    }

    /// `self - other`, exact when both are rational.
    pub fn sub(&self, other: &Endpoint) -> Endpoint {
        match (self, other) {
            (Endpoint::Rational(a), Endpoint::Rational(b)) => Endpoint::Rational(a - b),
            _ => Endpoint::Real(self.value() - other.value()),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Endpoint::Real(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<f64> for Endpoint {
    fn from(x: f64) -> Self {
        Endpoint::Real(x)
    }
}

/// The half-open arc `(α, β]` with `0 <= α < 1` and `α < β <= α + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    alpha: Endpoint,
    beta: Endpoint,
}

impl Arc {
    pub fn new(alpha: Endpoint, beta: Endpoint) -> Result<Self> {
        let ok = match (alpha, beta) {
            (Endpoint::Rational(a), Endpoint::Rational(b)) => {
                let zero = Ratio::from_integer(0);
                let one = Ratio::from_integer(1);
                a >= zero && a < one && a < b && b <= a + one
            }
            _ => {
                let (a, b) = (alpha.value(), beta.value());
                a.is_finite() && b.is_finite() && (0.0..1.0).contains(&a) && a < b && b <= a + 1.0
            }
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "arc ({alpha}, {beta}] needs 0 <= alpha < 1 and alpha < beta <= alpha + 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_f64(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Endpoint::Real(alpha), Endpoint::Real(beta))
    }

    pub fn alpha(&self) -> Endpoint {
        self.alpha
    }

    pub fn beta(&self) -> Endpoint {
        self.beta
    }

    /// `δ = β - α`.
    pub fn width(&self) -> Endpoint {
        self.beta.sub(&self.alpha)
    }

    /// Whether angle `x` (any real, read mod 1) lies in the arc.
    pub fn contains(&self, x: f64) -> bool {
        let a = self.alpha.value();
        let shifted = a + frac(x - a);
        // shifted ∈ [α, α+1); the arc keeps (α, β]
        shifted > a && shifted <= self.beta.value() || (shifted == a && self.beta.value() == a + 1.0)
    }

    /// Exact membership for a rational angle.
    pub fn contains_ratio(&self, x: Ratio<i64>) -> bool {
        match (self.alpha, self.beta) {
            (Endpoint::Rational(a), Endpoint::Rational(b)) => {
                let diff = x - a;
                let shifted = a + (diff - diff.floor());
                (shifted > a && shifted <= b) || (shifted == a && b == a + 1)
            }
            _ => self.contains(*x.numer() as f64 / *x.denom() as f64),
        }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.alpha, self.beta)
    }
}

/// Cycle lengths of a modified permutation, each with its phase in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifiedSpectrum {
    n: usize,
    cycles: Vec<(usize, f64)>,
}

impl ModifiedSpectrum {
    pub fn new(cycles: Vec<(usize, f64)>) -> Result<Self> {
        let mut n = 0;
        for &(j, phi) in &cycles {
            if j == 0 {
                return Err(Error::InvalidParameter("cycle length 0".into()));
            }
            if !(0.0..1.0).contains(&phi) {
                return Err(Error::domain("phase", "[0, 1)", phi));
            }
            n += j;
        }
        if n == 0 {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        Ok(Self { n, cycles })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[(usize, f64)] {
        &self.cycles
    }

    pub fn cycle_counts(&self) -> CycleCounts {
        CycleCounts::from_lengths(self.cycles.iter().map(|c| c.0)).expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Number of eigenangles (with multiplicity) in the arc:
/// `Σ_j a_j (⌊jβ⌋ - ⌊jα⌋)`.
pub fn count_arc_perm(counts: &CycleCounts, arc: &Arc) -> u64 {
    counts
        .iter()
        .map(|(j, a)| {
            let j64 = j as u64;
            a as u64 * (arc.beta.floor_mul(j64) - arc.alpha.floor_mul(j64)) as u64
        })
        .sum()
}

/// One independent uniform phase per cycle, cycles listed by length.
pub fn attach_phases<R: Rng + ?Sized>(counts: &CycleCounts, rng: &mut R) -> ModifiedSpectrum {
    let mut cycles = Vec::with_capacity(counts.total_cycles());
    for (j, a) in counts.iter() {
        for _ in 0..a {
            cycles.push((j, rng.random::<f64>()));
        }
    }
    ModifiedSpectrum { n: counts.n(), cycles }
}

/// `⌊jx - φ⌋` for `φ ∈ [0, 1)`.
fn floor_shifted(x: &Endpoint, j: u64, phi: f64) -> i64 {
    x.floor_mul(j) - (phi > x.frac_mul(j)) as i64
}

/// `⌈jx - φ⌉` for `φ ∈ [0, 1)`.
fn ceil_shifted(x: &Endpoint, j: u64, phi: f64) -> i64 {
    x.floor_mul(j) + (x.frac_mul(j) > phi) as i64
}

/// Number of angles `(k+φ)/j` in `(α, β]`: `Σ (⌊jβ-φ⌋ - ⌊jα-φ⌋)`.
pub fn count_arc_mod(spectrum: &ModifiedSpectrum, arc: &Arc) -> u64 {
    spectrum
        .cycles
        .iter()
        .map(|&(j, phi)| {
            let j = j as u64;
            (floor_shifted(&arc.beta, j, phi) - floor_shifted(&arc.alpha, j, phi)) as u64
        })
        .sum()
}

/// Number of angles `(k+φ)/j` in the left-closed arc `[α, β)`.
pub fn count_arc_mod_left_closed(spectrum: &ModifiedSpectrum, arc: &Arc) -> u64 {
    spectrum
        .cycles
        .iter()
        .map(|&(j, phi)| {
            let j = j as u64;
            (ceil_shifted(&arc.beta, j, phi) - ceil_shifted(&arc.alpha, j, phi)) as u64
        })
        .sum()
}

/// Distinct angles `k/j` in `[0, 1)` as reduced fractions, ascending, with
/// their multiplicities.
pub fn enumerate_angles_perm(counts: &CycleCounts) -> Vec<(Ratio<i64>, usize)> {
    let mut all: Vec<(Ratio<i64>, usize)> = Vec::new();
    for (j, a) in counts.iter() {
        let j = j as i64;
        all.extend((0..j).map(|k| (Ratio::new(k, j), a)));
    }
    all.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    let mut out: Vec<(Ratio<i64>, usize)> = Vec::with_capacity(all.len());
    for (x, m) in all {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => out.push((x, m)),
        }
    }
    out
}

/// All `n` angles `(k+φ)/j mod 1`, ascending.
pub fn enumerate_angles_mod(spectrum: &ModifiedSpectrum) -> Vec<f64> {
    let mut out = Vec::with_capacity(spectrum.n);
    for &(j, phi) in &spectrum.cycles {
        let jf = j as f64;
        out.extend((0..j).map(|k| (k as f64 + phi) / jf));
    }
    out.sort_unstable_by(f64::total_cmp);
    out
}

fn omegas(n: usize, arc: &Arc) -> Vec<f64> {
    (1..=n as u64)
        .map(|j| arc.beta.frac_mul(j) - arc.alpha.frac_mul(j))
        .collect()
}

/// `u_j = ω_j/j`, `Σ u_j Ψ_n(j)` and `Σ ω_j² Ψ_n(j)/j`.
fn perm_linear_terms(n: usize, arc: &Arc, table: &PsiTable) -> (Vec<f64>, f64, f64) {
    let u: Vec<f64> = omegas(n, arc)
        .iter()
        .enumerate()
        .map(|(i, w)| w / (i + 1) as f64)
        .collect();
    let mut first = CompensatedSum::new();
    let mut square = CompensatedSum::new();
    for (i, &uj) in u.iter().enumerate() {
        first.add(uj * table.get(i + 1));
        square.add(uj * uj * (i + 1) as f64 * table.get(i + 1));
    }
    (u, first.value(), square.value())
}

fn perm_moments_from(
    n: usize,
    arc: &Arc,
    table: &PsiTable,
    convolution: impl FnOnce(&[f64]) -> f64,
) -> CountMoments {
    let theta = table.theta();
    let (u, first, square) = perm_linear_terms(n, arc, table);
    let mean = n as f64 * arc.width().value() - theta * first;
    let cross = convolution(&u);
    let variance = theta * square + theta * theta * (cross - first * first);
    CountMoments {
        mean,
        variance: variance.max(0.0),
    }
}

/// Exact mean and variance of the permutation-matrix count in `arc`, using
/// the quadratic-time double sum (refused above `cap`).
pub fn exact_moments_perm(n: usize, theta: f64, arc: &Arc, cap: usize) -> Result<CountMoments> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "permutation count variance",
            n,
            cap,
        });
    }
    let table = PsiTable::new(n, theta)?;
    Ok(perm_moments_from(n, arc, &table, |u| {
        let mut acc = CompensatedSum::new();
        for j in 1..n {
            let uj = u[j - 1];
            for k in 1..=(n - j) {
                acc.add(uj * u[k - 1] * table.get(j + k));
            }
        }
        acc.value()
    }))
}

/// Same moments with the convolution `Σ_{j+k=m} u_j u_k` done by FFT, so
/// any `n` is feasible. Agrees with [`exact_moments_perm`] up to rounding.
pub fn exact_moments_perm_fft(n: usize, theta: f64, arc: &Arc) -> Result<CountMoments> {
    let table = PsiTable::new(n, theta)?;
    Ok(perm_moments_from(n, arc, &table, |u| {
        let len = (2 * n + 2).next_power_of_two();
        let mut buf: Vec<Complex<f64>> = (0..len)
            .map(|i| {
                if (1..=n).contains(&i) {
                    Complex::new(u[i - 1], 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(len).process(&mut buf);
        for z in buf.iter_mut() {
            *z = *z * *z;
        }
        planner.plan_fft_inverse(len).process(&mut buf);
        let scale = 1.0 / len as f64;
        let mut acc = CompensatedSum::new();
        for m in 2..=n {
            acc.add(buf[m].re * scale * table.get(m));
        }
        acc.value()
    }))
}

/// Exact mean `nδ` and variance `θ Σ Ψ_n(j) h(jδ)/j` of the modified count.
pub fn exact_moments_mod(n: usize, theta: f64, arc: &Arc) -> Result<CountMoments> {
    let table = PsiTable::new(n, theta)?;
    let delta = arc.width();
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let f = delta.frac_mul(j as u64);
        acc.add(table.get(j) * f * (1.0 - f) / j as f64);
    }
    Ok(CountMoments {
        mean: n as f64 * delta.value(),
        variance: theta * acc.value(),
    })
}

/// Both sides of `g({x+T} - {y+T}) = g({x} - {y})` with `g(d) = |d|(1-|d|)`.
pub fn frac_shift_invariant(x: f64, y: f64, t: f64) -> (f64, f64) {
    let g = |d: f64| d.abs() * (1.0 - d.abs());
    (g(frac(x + t) - frac(y + t)), g(frac(x) - frac(y)))
}
