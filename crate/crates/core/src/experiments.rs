//! Monte Carlo harness: fixed-arc and mesoscopic central limit checks, the
//! Feller coupling distance, and spacing quantiles.
//!
//! Every trial draws from its own stream `trial_rng(master_seed, t)` and the
//! per-trial outputs are collected in trial order before any reduction, so
//! results do not depend on the size of the rayon pool.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ewens::{plan_coupling, sample_coupled_with_plan, sample_cycle_counts, EwensParams, DEFAULT_HORIZON_CAP};
use crate::limits::{c2_meso, covariance_d, covariance_dtilde, Arithmetic, ClassifiedArc, CovarianceMatrix, DEFAULT_NUMERIC_N};
use crate::numeric::{compensated_sum, mean_variance, normal_cdf, quantile_sorted};
use crate::rng::trial_rng;
use crate::spacings::{normalized_spacings, normalized_spacings_perm, spacings_mod, spacings_perm};
use crate::spectral::{
    attach_phases, count_arc_mod, count_arc_perm, exact_moments_mod, exact_moments_perm,
    exact_moments_perm_fft, Arc, CountMoments, Endpoint, DEFAULT_PERM_VARIANCE_CAP,
};
use crate::stats::{digamma, ks_test, EULER_GAMMA};

/// Which random matrix the counts come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Ewens permutation matrices.
    Perm,
    /// Permutation matrices with independent uniform phases per cycle.
    Mod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_schedule: Vec<usize>,
    pub theta: f64,
    pub arcs: Vec<ClassifiedArc>,
    pub trials: usize,
    pub master_seed: u64,
    pub model: Model,
    /// `γ` in `δ_N = N^{-γ}`.
    pub meso_exponent: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_schedule.is_empty() || self.n_schedule.contains(&0) {
            return Err(Error::InvalidParameter("n schedule must be non-empty and positive".into()));
        }
        EwensParams::new(self.theta)?;
        if self.trials < 2 {
            return Err(Error::domain("trials", "[2, inf)", self.trials));
        }
        if let Some(g) = self.meso_exponent {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::domain("mesoscopic exponent", "(0, 1)", g));
            }
        }
        Ok(())
    }
}

/// Marginal normality summary of one column of standardized counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub sample_size: usize,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub reference_mean: f64,
    pub reference_variance: f64,
    /// Fraction of jittered standardized counts above 1.96.
    pub upper_tail_fraction: f64,
}

/// Standardized counts, one row per trial and one column per arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialMatrix {
    pub trials: usize,
    pub arcs: usize,
    /// Row-major entries.
    pub values: Vec<f64>,
}

impl TrialMatrix {
    pub fn get(&self, trial: usize, arc: usize) -> f64 {
        self.values[trial * self.arcs + arc]
    }

    pub fn column(&self, arc: usize) -> Vec<f64> {
        (0..self.trials).map(|t| self.get(t, arc)).collect()
    }

    /// Row-major sample correlation matrix of the columns.
    pub fn correlation(&self) -> Vec<f64> {
        let cols: Vec<Vec<f64>> = (0..self.arcs).map(|k| self.column(k)).collect();
        let stats: Vec<(f64, f64)> = cols.iter().map(|c| mean_variance(c)).collect();
        let m = self.arcs;
        let denom = (self.trials - 1) as f64;
        let mut out = vec![0.0; m * m];
        for k in 0..m {
            for l in k..m {
                let r = if k == l {
                    1.0
                } else {
                    let cov = compensated_sum(
                        cols[k]
                            .iter()
                            .zip(&cols[l])
                            .map(|(x, y)| (x - stats[k].0) * (y - stats[l].0)),
                    ) / denom;
                    cov / (stats[k].1 * stats[l].1).sqrt()
                };
                out[k * m + l] = r;
                out[l * m + k] = r;
            }
        }
        out
    }
}

/// Exact moments of the count of `arc` at size `n`. Permutation variances
/// use the quadratic sum up to its default cap and the FFT route above.
pub fn exact_moments(model: Model, n: usize, theta: f64, arc: &Arc) -> Result<CountMoments> {
    match model {
        Model::Mod => exact_moments_mod(n, theta, arc),
        Model::Perm if n <= DEFAULT_PERM_VARIANCE_CAP => {
            exact_moments_perm(n, theta, arc, DEFAULT_PERM_VARIANCE_CAP)
        }
        Model::Perm => exact_moments_perm_fft(n, theta, arc),
    }
}

/// Raw counts of every arc in one sampled matrix, followed by one uniform
/// jitter in `(-1/2, 1/2)` per arc.
fn sample_counts<R: Rng + ?Sized>(
    model: Model,
    n: usize,
    params: &EwensParams,
    arcs: &[Arc],
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let counts = sample_cycle_counts(n, params, rng);
    let raw: Vec<f64> = match model {
        Model::Perm => arcs.iter().map(|a| count_arc_perm(&counts, a) as f64).collect(),
        Model::Mod => {
            let spectrum = attach_phases(&counts, rng);
            arcs.iter().map(|a| count_arc_mod(&spectrum, a) as f64).collect()
        }
    };
    let jitter = arcs.iter().map(|_| rng.random::<f64>() - 0.5).collect();
    (raw, jitter)
}

/// Standardizes raw counts with exact moments and tests normality. The KS
/// test is run on `(X + U - E X) / √(Var X + 1/12)` with `U` the per-trial
/// uniform jitter, which turns the integer-valued count into a continuous
/// variable with the same Gaussian limit.
fn standardize(
    rows: &[(Vec<f64>, Vec<f64>)],
    moments: &[CountMoments],
) -> Result<(TrialMatrix, Vec<NormalityReport>)> {
    let m = moments.len();
    let trials = rows.len();
    let mut values = Vec::with_capacity(trials * m);
    for (raw, _) in rows {
        for (x, mo) in raw.iter().zip(moments) {
            values.push((x - mo.mean) / mo.variance.sqrt());
        }
    }
    let matrix = TrialMatrix {
        trials,
        arcs: m,
        values,
    };
    let mut reports = Vec::with_capacity(m);
    for (k, mo) in moments.iter().enumerate() {
        let col = matrix.column(k);
        let (mean, var) = mean_variance(&col);
        let sd = (mo.variance + 1.0 / 12.0).sqrt();
        let mut smooth: Vec<f64> = rows
            .iter()
            .map(|(raw, jit)| (raw[k] + jit[k] - mo.mean) / sd)
            .collect();
        smooth.sort_by(f64::total_cmp);
        let ks = ks_test(&smooth, normal_cdf)?;
        let above = smooth.iter().filter(|&&z| z > 1.96).count();
        reports.push(NormalityReport {
            sample_size: trials,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            empirical_mean: mean,
            empirical_variance: var,
            reference_mean: 0.0,
            reference_variance: 1.0,
            upper_tail_fraction: above as f64 / trials as f64,
        });
    }
    Ok((matrix, reports))
}

fn run_trials(
    model: Model,
    n: usize,
    params: &EwensParams,
    arcs: &[Arc],
    trials: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            sample_counts(model, n, params, arcs, &mut rng)
        })
        .collect()
}

fn checked_moments(model: Model, n: usize, theta: f64, arcs: &[Arc]) -> Result<Vec<CountMoments>> {
    arcs.iter()
        .enumerate()
        .map(|(index, arc)| {
            let mo = exact_moments(model, n, theta, arc)?;
            if mo.variance <= 1e-12 {
                return Err(Error::DegenerateArc { index });
            }
            Ok(mo)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub model: Model,
    pub theta: f64,
    pub moments: Vec<CountMoments>,
    pub normality: Vec<NormalityReport>,
    /// Row-major sample correlation of the standardized counts.
    pub empirical_correlation: Vec<f64>,
    /// Limiting correlation from the numeric limit constants.
    pub limit_correlation: CovarianceMatrix,
    pub matrix: TrialMatrix,
}

/// Fixed-arc experiment at the single size in `config.n_schedule`.
pub fn run_clt_fixed(config: &ExperimentConfig) -> Result<CltReport> {
    config.validate()?;
    if config.n_schedule.len() != 1 {
        return Err(Error::InvalidParameter(
            "fixed-arc experiment takes exactly one n".into(),
        ));
    }
    if config.arcs.is_empty() {
        return Err(Error::InvalidParameter("at least one arc is required".into()));
    }
    let n = config.n_schedule[0];
    let params = EwensParams::new(config.theta)?;
    let arcs: Vec<Arc> = config.arcs.iter().map(|a| a.arc).collect();
    let moments = checked_moments(config.model, n, config.theta, &arcs)?;
    let limit_correlation = match config.model {
        Model::Perm => covariance_d(&config.arcs, DEFAULT_NUMERIC_N)?,
        Model::Mod => covariance_dtilde(&config.arcs, DEFAULT_NUMERIC_N)?,
    };
    let rows = run_trials(config.model, n, &params, &arcs, config.trials, config.master_seed);
    let (matrix, normality) = standardize(&rows, &moments)?;
    Ok(CltReport {
        n,
        model: config.model,
        theta: config.theta,
        moments,
        normality,
        empirical_correlation: matrix.correlation(),
        limit_correlation,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MesoRow {
    pub n: usize,
    pub delta: f64,
    pub log_n_delta: f64,
    pub exact_mean: f64,
    pub exact_variance: f64,
    /// `θ c log(N δ_N)` with `c = 1/6` for the modified model and
    /// `c₂(α)` for permutation matrices.
    pub target: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MesoReport {
    pub model: Model,
    pub theta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub constant: f64,
    pub rows: Vec<MesoRow>,
    /// Normality of standardized counts at the largest size.
    pub normality: NormalityReport,
    pub normality_n: usize,
}

/// Arc `(α, α + N^{-γ}]` at size `n`.
pub fn mesoscopic_arc(alpha: Endpoint, n: usize, gamma: f64) -> Result<Arc> {
    let delta = (n as f64).powf(-gamma);
    Arc::new(alpha, Endpoint::Real(alpha.value() + delta))
}

/// Shrinking-arc experiment. The left endpoint is taken from the first
/// configured arc, or 0 when none is given.
pub fn run_mesoscopic(config: &ExperimentConfig) -> Result<MesoReport> {
    config.validate()?;
    let gamma = config
        .meso_exponent
        .ok_or_else(|| Error::InvalidParameter("mesoscopic experiment needs an exponent".into()))?;
    let params = EwensParams::new(config.theta)?;
    let alpha = config
        .arcs
        .first()
        .map(|a| a.arc.alpha())
        .unwrap_or(Endpoint::Rational(0.into()));
    let constant = match config.model {
        Model::Mod => 1.0 / 6.0,
        Model::Perm => {
            let arith = match alpha {
                Endpoint::Rational(r) => Arithmetic::Rational {
                    p: *r.numer(),
                    q: *r.denom(),
                },
                Endpoint::Real(_) => Arithmetic::Irrational,
            };
            c2_meso(&arith)?
        }
    };
    let mut rows = Vec::with_capacity(config.n_schedule.len());
    for &n in &config.n_schedule {
        let arc = mesoscopic_arc(alpha, n, gamma)?;
        let delta = arc.width().value();
        let mo = exact_moments(config.model, n, config.theta, &arc)?;
        let log_n_delta = (n as f64 * delta).ln();
        let target = config.theta * constant * log_n_delta;
        rows.push(MesoRow {
            n,
            delta,
            log_n_delta,
            exact_mean: mo.mean,
            exact_variance: mo.variance,
            target,
            ratio: mo.variance / target,
        });
    }
    let normality_n = *config.n_schedule.iter().max().expect("non-empty schedule");
    let arc = mesoscopic_arc(alpha, normality_n, gamma)?;
    let moments = checked_moments(config.model, normality_n, config.theta, &[arc])?;
    let samples = run_trials(
        config.model,
        normality_n,
        &params,
        &[arc],
        config.trials,
        config.master_seed,
    );
    let (_, normality) = standardize(&samples, &moments)?;
    Ok(MesoReport {
        model: config.model,
        theta: config.theta,
        gamma,
        alpha: alpha.value(),
        constant,
        rows,
        normality: normality[0],
        normality_n,
    })
}

/// `2 + θ(γ + ψ(θ))`.
pub fn coupling_bound(theta: f64) -> Result<f64> {
    Ok(2.0 + theta * (EULER_GAMMA + digamma(theta)?))
}

/// `2 + θ(θ - 1) Σ_{j≤n} 1/(j(θ + j - 1))`, the bound before letting the
/// sum run to infinity.
pub fn coupling_bound_finite(n: usize, theta: f64) -> f64 {
    let s = compensated_sum((1..=n).map(|j| {
        let j = j as f64;
        1.0 / (j * (theta + j - 1.0))
    }));
    2.0 + theta * (theta - 1.0) * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: usize,
    pub theta: f64,
    pub trials: usize,
    pub horizon: usize,
    pub tail_bound: f64,
    pub empirical_mean_distance: f64,
    pub std_error: f64,
    pub bound: f64,
    pub finite_n_bound: f64,
}

/// Mean of `Σ_j |a_{n,j} − W_j|` over coupled samples, where `W_j` counts
/// spacings up to a horizon whose expected missing mass is `tail_bound`.
pub fn run_coupling_check(
    n: usize,
    theta: f64,
    trials: usize,
    master_seed: u64,
    epsilon_tail: f64,
) -> Result<CouplingReport> {
    if trials < 2 {
        return Err(Error::domain("trials", "[2, inf)", trials));
    }
    let params = EwensParams::new(theta)?;
    let plan = plan_coupling(n, &params, epsilon_tail, DEFAULT_HORIZON_CAP)?;
    let distances: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            sample_coupled_with_plan(&plan, &mut rng).l1_distance() as f64
        })
        .collect();
    let (mean, var) = mean_variance(&distances);
    Ok(CouplingReport {
        n,
        theta,
        trials,
        horizon: plan.horizon,
        tail_bound: plan.tail_bound,
        empirical_mean_distance: mean,
        std_error: (var / trials as f64).sqrt(),
        bound: coupling_bound(theta)?,
        finite_n_bound: coupling_bound_finite(n, theta),
    })
}

/// Levels reported in spacing quantile tables.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingQuantiles {
    pub n_d: [f64; 5],
    pub n2_d: [f64; 5],
    pub n_d_tilde: [f64; 5],
    pub n2_d_tilde: [f64; 5],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpacingViolations {
    pub n_d_below_one: usize,
    pub n2_d_below_one: usize,
    pub tilde_exceeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingRow {
    pub n: usize,
    pub quantiles: SpacingQuantiles,
    pub violations: SpacingViolations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingsReport {
    pub theta: f64,
    pub trials: usize,
    pub rows: Vec<SpacingRow>,
    /// `max/min - 1` across sizes of each quantile of `n D_n`.
    pub n_d_spread: [f64; 5],
    /// Same for `n² d_n`.
    pub n2_d_spread: [f64; 5],
}

fn quantiles(mut xs: Vec<f64>) -> [f64; 5] {
    xs.sort_by(f64::total_cmp);
    QUANTILE_LEVELS.map(|p| quantile_sorted(&xs, p))
}

fn spread(rows: &[SpacingRow], pick: impl Fn(&SpacingRow) -> [f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| {
        let vals = rows.iter().map(|r| pick(r)[i]);
        let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.fold(f64::INFINITY, f64::min);
        max / min - 1.0
    })
}

pub fn run_spacings(
    n_schedule: &[usize],
    theta: f64,
    trials: usize,
    master_seed: u64,
) -> Result<SpacingsReport> {
    if n_schedule.is_empty() || n_schedule.contains(&0) {
        return Err(Error::InvalidParameter("n schedule must be non-empty and positive".into()));
    }
    if trials < 2 {
        return Err(Error::domain("trials", "[2, inf)", trials));
    }
    let params = EwensParams::new(theta)?;
    let mut rows = Vec::with_capacity(n_schedule.len());
    for (idx, &n) in n_schedule.iter().enumerate() {
        // distinct stream block per size
        let seed = master_seed.wrapping_add(idx as u64);
        let samples: Vec<[f64; 5]> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                let counts = sample_cycle_counts(n, &params, &mut rng);
                let d = spacings_perm(&counts);
                let tilde = spacings_mod(&attach_phases(&counts, &mut rng));
                let a = normalized_spacings_perm(&counts);
                let b = normalized_spacings(&tilde);
                let exceeds = tilde.smallest > d.smallest * (1.0 + 1e-12);
                [a.n_d, a.n2_d, b.n_d, b.n2_d, exceeds as u8 as f64]
            })
            .collect();
        let col = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<f64>>();
        rows.push(SpacingRow {
            n,
            quantiles: SpacingQuantiles {
                n_d: quantiles(col(0)),
                n2_d: quantiles(col(1)),
                n_d_tilde: quantiles(col(2)),
                n2_d_tilde: quantiles(col(3)),
            },
            violations: SpacingViolations {
                n_d_below_one: samples.iter().filter(|s| s[0] < 1.0).count(),
                n2_d_below_one: samples.iter().filter(|s| s[1] < 1.0).count(),
                tilde_exceeds: samples.iter().filter(|s| s[4] > 0.0).count(),
            },
        });
    }
    Ok(SpacingsReport {
        theta,
        trials,
        n_d_spread: spread(&rows, |r| r.quantiles.n_d),
        n2_d_spread: spread(&rows, |r| r.quantiles.n2_d),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{ArcClass, GOLDEN};

    fn classified(alpha: f64, beta: f64) -> ClassifiedArc {
        ClassifiedArc {
            arc: Arc::from_f64(alpha, beta).unwrap(),
            class: None,
        }
    }

    fn config(model: Model, n: usize, arcs: Vec<ClassifiedArc>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_schedule: vec![n],
            theta: 1.0,
            arcs,
            trials,
            master_seed: 7,
            model,
            meso_exponent: None,
        }
    }

    #[test]
    fn config_guards() {
        let mut c = config(Model::Mod, 10, vec![classified(0.0, 0.5)], 1);
        assert!(c.validate().is_err());
        c.trials = 2;
        assert!(c.validate().is_ok());
        c.meso_exponent = Some(0.0);
        assert!(c.validate().is_err());
        c.meso_exponent = Some(1.0);
        assert!(c.validate().is_err());
        c.meso_exponent = Some(0.5);
        assert!(c.validate().is_ok());
        c.theta = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn full_circle_is_degenerate() {
        let c = config(Model::Perm, 50, vec![classified(0.0, 1.0)], 10);
        assert_eq!(run_clt_fixed(&c).unwrap_err(), Error::DegenerateArc { index: 0 });
        let c = config(Model::Mod, 50, vec![classified(0.25, 1.25)], 10);
        assert_eq!(run_clt_fixed(&c).unwrap_err(), Error::DegenerateArc { index: 0 });
    }

    #[test]
    fn coupling_bound_values() {
        assert!((coupling_bound(1.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((coupling_bound_finite(100, 1.0) - 2.0).abs() < 1e-15);
        // increasing on [0.1, 5]
        let mut prev = coupling_bound(0.1).unwrap();
        for i in 1..=490 {
            let b = coupling_bound(0.1 + 0.01 * i as f64).unwrap();
            assert!(b > prev);
            prev = b;
        }
        // the finite-n bound approaches the limit from the side set by θ - 1
        for &t in &[0.3, 2.0] {
            let gap = coupling_bound_finite(100_000, t) - coupling_bound(t).unwrap();
            assert!(gap.abs() < 1e-4 * t * (t - 1.0).abs() + 1e-12);
        }
    }

    #[test]
    fn mesoscopic_guard() {
        let mut c = config(Model::Mod, 1000, vec![], 10);
        assert!(run_mesoscopic(&c).is_err());
        c.meso_exponent = Some(1.0);
        assert!(run_mesoscopic(&c).is_err());
    }

    #[test]
    fn mesoscopic_perm_constant_at_zero() {
        let mut c = config(Model::Perm, 1000, vec![], 20);
        c.meso_exponent = Some(0.5);
        let r = run_mesoscopic(&c).unwrap();
        assert!((r.constant - 1.0 / 3.0).abs() < 1e-15);
        let mut c = config(Model::Mod, 1000, vec![], 20);
        c.meso_exponent = Some(0.5);
        let r = run_mesoscopic(&c).unwrap();
        assert!((r.constant - 1.0 / 6.0).abs() < 1e-15);
        let row = r.rows[0];
        assert!((row.delta - 1000f64.powf(-0.5)).abs() < 1e-15);
        assert!((row.ratio - row.exact_variance / row.target).abs() < 1e-15);
    }

    #[test]
    fn clt_is_deterministic_across_pools() {
        let arcs = vec![
            ClassifiedArc {
                arc: Arc::from_f64(0.0, GOLDEN - 1.0).unwrap(),
                class: Some(ArcClass::RationalAlpha {
                    p: 0,
                    q: 1,
                    beta_value: GOLDEN - 1.0,
                }),
            },
            classified(0.1, 0.45),
        ];
        let c = config(Model::Mod, 300, arcs, 64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_clt_fixed(&c)).unwrap();
        let b = four.install(|| run_clt_fixed(&c)).unwrap();
        assert_eq!(a, b);
        assert!(a.matrix.values.iter().all(|v| v.is_finite()));
        assert_eq!(a.matrix.trials, 64);
    }

    #[test]
    fn clt_mod_golden_arc() {
        let c = config(Model::Mod, 10_000, vec![classified(0.0, GOLDEN - 1.0)], 2000);
        let r = run_clt_fixed(&c).unwrap();
        let rep = r.normality[0];
        let m = 2000f64;
        assert!(rep.ks_p_value > 0.01, "{rep:?}");
        assert!(rep.empirical_mean.abs() < 4.0 / m.sqrt());
        assert!((rep.empirical_variance - 1.0).abs() < 4.0 * (2.0 / m).sqrt());
        assert!((0.015..=0.035).contains(&rep.upper_tail_fraction), "{rep:?}");
    }

    #[test]
    fn spacings_small_run() {
        let r = run_spacings(&[50, 100], 1.0, 200, 3).unwrap();
        for row in &r.rows {
            assert_eq!(row.violations.n_d_below_one, 0);
            assert_eq!(row.violations.n2_d_below_one, 0);
            assert_eq!(row.violations.tilde_exceeds, 0);
            assert!(row.quantiles.n_d.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn coupling_small_run() {
        let r = run_coupling_check(200, 1.0, 500, 5, 1e-3).unwrap();
        assert!(r.tail_bound <= 1e-3);
        assert!(r.empirical_mean_distance + r.tail_bound <= r.bound + 3.0 * r.std_error);
    }
}
