//! Ewens(θ) cycle structures.
//!
//! Cycle types are read off a Feller word: independent bits with
//! `P(bit k = 1) = θ/(θ+k-1)` (bit 1 forced to 1), where the j-spacings
//! between consecutive ones in `(1 ξ₂ … ξₙ 1)` count the j-cycles. Reading
//! the same word past position `n` gives the independent Poisson(θ/j)
//! counts of the Feller coupling.
//!
//! The word is stored sparsely as the positions of its ones. Gaps between
//! ones are drawn by inverting their exact survival function
//! `P(no one in a+1..=m) = Γ(m)Γ(a+θ) / (Γ(a)Γ(m+θ))`, so extending a word
//! to a horizon of 10¹² costs O(θ log horizon) work.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Largest horizon the coupling sampler will materialize by default.
pub const DEFAULT_HORIZON_CAP: u64 = 1 << 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EwensParams {
    theta: f64,
}

impl EwensParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::domain("theta", "(0, inf)", theta));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `P(bit k = 1) = θ/(θ+k-1)`; equals 1 at `k = 1`.
    pub fn bit_probability(&self, k: usize) -> f64 {
        self.theta / (self.theta + (k as f64 - 1.0))
    }
}

// ---------------------------------------------------------------------------
// Feller gap sampling

const BERNOULLI: [f64; 10] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
];

/// `ln Γ(x+a) - ln Γ(x)` from the Bernoulli-polynomial Stirling series.
fn ln_gamma_shift_asymptotic(x: f64, a: f64) -> f64 {
    let mut acc = a * x.ln();
    let mut x_pow = x;
    for n in 2..=9usize {
        // B_n(a) - B_n(0) = sum_{k<n} C(n,k) B_k a^(n-k)
        let mut binom = 1.0;
        let mut poly = 0.0;
        for (k, b) in BERNOULLI.iter().enumerate().take(n) {
            poly += binom * b * a.powi((n - k) as i32);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * poly / ((n * (n - 1)) as f64 * x_pow);
        x_pow *= x;
    }
    acc
}

/// `ln Γ(x) - ln Γ(x+θ)`.
pub(crate) fn log_gamma_gap(x: f64, theta: f64) -> f64 {
    let switch = (64.0 * theta).max(1024.0);
    if x < switch {
        ln_gamma(x) - ln_gamma(x + theta)
    } else {
        -ln_gamma_shift_asymptotic(x, theta)
    }
}

/// Position of the first one strictly after `after`, given that every bit up
/// to `after` is already fixed. Returns `None` when it would exceed `limit`.
pub(crate) fn next_one<R: Rng + ?Sized>(
    theta: f64,
    after: usize,
    limit: usize,
    rng: &mut R,
) -> Option<usize> {
    if after >= limit {
        return None;
    }
    let log_u = (1.0 - rng.random::<f64>()).ln();
    // one step: P(bit after+1 = 0) = after/(after+θ)
    if -(theta / after as f64).ln_1p() < log_u {
        return Some(after + 1);
    }
    let base = log_gamma_gap(after as f64, theta);
    let log_survival = |m: usize| log_gamma_gap(m as f64, theta) - base;

    let mut lo = after + 1;
    let mut step = 2usize;
    let hi = loop {
        let cand = after.saturating_add(step).min(limit);
        if log_survival(cand) < log_u {
            break cand;
        }
        if cand == limit {
            return None;
        }
        lo = cand;
        step = step.saturating_mul(2);
    };
    let mut hi = hi;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if log_survival(mid) < log_u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

// ---------------------------------------------------------------------------
// Words and cycle counts

/// A Feller word materialized up to `horizon`, stored as its one positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliWord {
    n: usize,
    horizon: usize,
    ones: Vec<usize>,
}

impl BernoulliWord {
    /// Builds a word from explicit bits; `bits[0]` is position 1 and must be 1.
    pub fn from_bits(n: usize, bits: &[u8]) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", "[1, inf)", n));
        }
        if bits.len() < n {
            return Err(Error::InvalidParameter(format!(
                "word has {} bits, needs at least n = {n}",
                bits.len()
            )));
        }
        if bits[0] != 1 {
            return Err(Error::InvalidParameter("first bit must be 1".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "bit value {b} is not 0 or 1"
            )));
        }
        let ones = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i + 1)
            .collect();
        Ok(Self {
            n,
            horizon: bits.len(),
            ones,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Sorted 1-based positions of the ones; always starts with 1.
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    /// Bit at 1-based position `k` (must be within the horizon).
    pub fn bit(&self, k: usize) -> bool {
        assert!(k >= 1 && k <= self.horizon, "position {k} outside word");
        self.ones.binary_search(&k).is_ok()
    }

    pub fn bits(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.horizon];
        for &p in &self.ones {
            out[p - 1] = 1;
        }
        out
    }

    /// Draws further bits until `horizon`, conditionally independent of the
    /// bits already present.
    pub fn extend_to<R: Rng + ?Sized>(
        &mut self,
        horizon: usize,
        params: &EwensParams,
        rng: &mut R,
    ) {
        let mut last = *self.ones.last().expect("word always holds position 1");
        let mut fixed = self.horizon;
        while let Some(p) = next_one(params.theta, fixed, horizon, rng) {
            debug_assert!(p > last);
            self.ones.push(p);
            last = p;
            fixed = p;
        }
        self.horizon = self.horizon.max(horizon);
    }
}

pub fn sample_bernoulli_word<R: Rng + ?Sized>(
    n: usize,
    params: &EwensParams,
    rng: &mut R,
) -> BernoulliWord {
    assert!(n >= 1, "n must be positive");
    let mut word = BernoulliWord {
        n,
        horizon: 1,
        ones: vec![1],
    };
    word.extend_to(n, params, rng);
    word
}

/// Cycle type of an `n`-permutation: `counts[j]` = number of j-cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CycleCounts {
    n: usize,
    counts: BTreeMap<usize, usize>,
}

impl CycleCounts {
    pub fn new(n: usize, counts: BTreeMap<usize, usize>) -> Result<Self> {
        let mut counts = counts;
        counts.retain(|_, m| *m > 0);
        if counts.contains_key(&0) {
            return Err(Error::InvalidParameter("cycle length 0".into()));
        }
        let total: usize = counts.iter().map(|(j, m)| j * m).sum();
        if n == 0 || total != n {
            return Err(Error::InvalidParameter(format!(
                "cycle lengths sum to {total}, expected n = {n} >= 1"
            )));
        }
        Ok(Self { n, counts })
    }

    /// Cycle type from a list of cycle lengths (in any order).
    pub fn from_lengths<I: IntoIterator<Item = usize>>(lengths: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for j in lengths {
            *counts.entry(j).or_insert(0) += 1;
            n += j;
        }
        Self::new(n, counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn multiplicity(&self, j: usize) -> usize {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    /// `(length, multiplicity)` pairs with positive multiplicity, by length.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&j, &m)| (j, m))
    }

    pub fn distinct_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.keys().copied()
    }

    pub fn total_cycles(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn largest_length(&self) -> usize {
        *self.counts.keys().next_back().expect("non-empty")
    }
}

/// Counts the j-spacings between consecutive ones of `(1 ξ₂ … ξₙ 1)`.
pub fn cycle_counts_from_word(word: &BernoulliWord) -> CycleCounts {
    counts_from_ones(word.n, &word.ones)
}

fn counts_from_ones(n: usize, ones: &[usize]) -> CycleCounts {
    let mut counts = BTreeMap::new();
    let mut prev = 1;
    for &p in ones.iter().skip(1).take_while(|&&p| p <= n) {
        *counts.entry(p - prev).or_insert(0) += 1;
        prev = p;
    }
    *counts.entry(n + 1 - prev).or_insert(0) += 1;
    CycleCounts { n, counts }
}

/// Draws an Ewens(θ) cycle type of size `n`.
pub fn sample_cycle_counts<R: Rng + ?Sized>(
    n: usize,
    params: &EwensParams,
    rng: &mut R,
) -> CycleCounts {
    let word = sample_bernoulli_word(n, params, rng);
    cycle_counts_from_word(&word)
}

// ---------------------------------------------------------------------------
// Feller coupling

/// Expected number of j-spacings (`j <= n`) of the infinite word that end
/// beyond position `horizon`: `θ Σ_{j≤n} [1/j − Ψ_H(j)(1/j − 1/H)]`.
pub fn coupling_tail_expectation(n: usize, horizon: usize, theta: f64) -> f64 {
    assert!(horizon >= n && n >= 1);
    let h = horizon as f64;
    let mut log_psi = 0.0;
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let i = (j - 1) as f64;
        // factor (H-i)/(θ+H-1-i) = 1 - (θ-1)/(θ+H-1-i)
        log_psi += (-(theta - 1.0) / (theta + h - 1.0 - i)).ln_1p();
        let psi = log_psi.exp();
        let one_minus_psi = -log_psi.exp_m1();
        acc.add(one_minus_psi / j as f64 + psi / h);
    }
    theta * acc.value()
}

/// Horizon and certified tail bound for one `(n, θ, ε)` coupling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingPlan {
    pub n: usize,
    pub theta: f64,
    pub horizon: usize,
    pub tail_bound: f64,
}

/// Doubles the horizon from `4n` until the tail expectation drops below
/// `epsilon_tail`.
pub fn plan_coupling(
    n: usize,
    params: &EwensParams,
    epsilon_tail: f64,
    hard_cap: u64,
) -> Result<CouplingPlan> {
    if n == 0 {
        return Err(Error::domain("n", "[1, inf)", n));
    }
    if !(epsilon_tail > 0.0) {
        return Err(Error::domain("epsilon_tail", "(0, inf)", epsilon_tail));
    }
    let mut horizon = (4 * n).max(64);
    loop {
        if horizon as u64 > hard_cap {
            return Err(Error::HorizonCap {
                cap: hard_cap,
                epsilon: epsilon_tail,
            });
        }
        let tail = coupling_tail_expectation(n, horizon, params.theta);
        if tail <= epsilon_tail {
            return Ok(CouplingPlan {
                n,
                theta: params.theta,
                horizon,
                tail_bound: tail.max(0.0),
            });
        }
        horizon = horizon.checked_mul(2).ok_or(Error::HorizonCap {
            cap: hard_cap,
            epsilon: epsilon_tail,
        })?;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledSample {
    pub cycle_counts: CycleCounts,
    /// `poisson_counts[j-1]` = W_j, truncated at the horizon.
    pub poisson_counts: Vec<u64>,
    pub horizon: usize,
    pub tail_bound: f64,
}

impl CoupledSample {
    /// `Σ_j |a_{n,j} − W_j|` over `1 <= j <= n`.
    pub fn l1_distance(&self) -> u64 {
        self.poisson_counts
            .iter()
            .enumerate()
            .map(|(i, &w)| (self.cycle_counts.multiplicity(i + 1) as u64).abs_diff(w))
            .sum()
    }
}

pub fn sample_coupled<R: Rng + ?Sized>(
    n: usize,
    params: &EwensParams,
    rng: &mut R,
    epsilon_tail: f64,
) -> Result<CoupledSample> {
    let plan = plan_coupling(n, params, epsilon_tail, DEFAULT_HORIZON_CAP)?;
    Ok(sample_coupled_with_plan(&plan, rng))
}

pub fn sample_coupled_with_plan<R: Rng + ?Sized>(
    plan: &CouplingPlan,
    rng: &mut R,
) -> CoupledSample {
    let params = EwensParams { theta: plan.theta };
    let mut word = sample_bernoulli_word(plan.n, &params, rng);
    word.extend_to(plan.horizon, &params, rng);

    let cycle_counts = cycle_counts_from_word(&word);
    let mut poisson_counts = vec![0u64; plan.n];
    for w in word.ones.windows(2) {
        let j = w[1] - w[0];
        if j <= plan.n {
            poisson_counts[j - 1] += 1;
        }
    }
    CoupledSample {
        cycle_counts,
        poisson_counts,
        horizon: plan.horizon,
        tail_bound: plan.tail_bound,
    }
}

// ---------------------------------------------------------------------------
// Chinese restaurant construction

/// Cycle lengths in order of appearance of their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgeOrderedCycles {
    pub n: usize,
    pub lengths: Vec<usize>,
}

impl AgeOrderedCycles {
    pub fn cycle_counts(&self) -> CycleCounts {
        CycleCounts::from_lengths(self.lengths.iter().copied()).expect("lengths sum to n")
    }
}

pub fn sample_age_ordered<R: Rng + ?Sized>(
    n: usize,
    params: &EwensParams,
    rng: &mut R,
) -> AgeOrderedCycles {
    assert!(n >= 1, "n must be positive");
    let mut table_of: Vec<u32> = Vec::with_capacity(n);
    let mut lengths: Vec<usize> = Vec::new();
    for seated in 0..n {
        let opens =
            seated == 0 || rng.random::<f64>() < params.theta / (params.theta + seated as f64);
        if opens {
            table_of.push(lengths.len() as u32);
            lengths.push(1);
        } else {
            // joining the table of a uniformly chosen earlier customer is
            // size-biased table choice
            let t = table_of[rng.random_range(0..seated)];
            table_of.push(t);
            lengths[t as usize] += 1;
        }
    }
    AgeOrderedCycles { n, lengths }
}

// ---------------------------------------------------------------------------
// Exact law

/// Ewens probability of a cycle type:
/// `n!/∏(j^{a_j} a_j!) · θ^K / (θ(θ+1)⋯(θ+n−1))`, evaluated in log space.
pub fn cycle_type_probability(counts: &CycleCounts, params: &EwensParams) -> f64 {
    let theta = params.theta;
    let mut log_p = CompensatedSum::new();
    for k in 2..=counts.n {
        log_p.add((k as f64).ln());
    }
    for (j, a) in counts.iter() {
        log_p.add(-(a as f64) * (j as f64).ln());
        for i in 2..=a {
            log_p.add(-(i as f64).ln());
        }
    }
    log_p.add(counts.total_cycles() as f64 * theta.ln());
    for i in 0..counts.n {
        log_p.add(-(theta + i as f64).ln());
    }
    log_p.value().exp()
}

/// Every cycle type of size `n` (the integer partitions of `n`).
pub fn all_cycle_types(n: usize) -> Vec<CycleCounts> {
    fn rec(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    assert!(n >= 1);
    let mut parts = Vec::new();
    rec(n, n, &mut Vec::new(), &mut parts);
    parts
        .into_iter()
        .map(|p| CycleCounts::from_lengths(p).expect("partition of n"))
        .collect()
}

/// First `m` coordinates of a GEM(θ) vector by stick breaking with
/// Beta(1, θ) factors.
pub fn sample_gem<R: Rng + ?Sized>(params: &EwensParams, m: usize, rng: &mut R) -> Vec<f64> {
    let mut remaining = 1.0;
    (0..m)
        .map(|_| {
            // Beta(1, θ) by inversion: 1 - U^{1/θ}
            let u: f64 = 1.0 - rng.random::<f64>();
            let v = -(u.ln() / params.theta).exp_m1();
            let g = remaining * v;
            remaining -= g;
            g
        })
        .collect()
}
