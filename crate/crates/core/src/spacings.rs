//! Largest and smallest gaps between consecutive distinct eigenangles.
//!
//! For a permutation matrix the distinct angles are the union of the j-th
//! roots of unity over the cycle lengths `j` present. Two such sets meet at
//! distance at least `1/lcm(k, l)`, with equality attained, so the smallest
//! gap is `1/max lcm(k, l)` over present lengths (`k = l` allowed). The
//! largest gap is `1/L` for the largest length `L`: the `L`-th roots already
//! cut the circle into gaps of `1/L`, and the gap above 0 has exactly that
//! length.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ewens::CycleCounts;
use crate::numeric::frac;
use crate::spectral::{enumerate_angles_mod, enumerate_angles_perm, ModifiedSpectrum};

/// Extremal gaps in turns. A spectrum with a single distinct angle has one
/// gap of length 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingStats {
    pub n: usize,
    pub largest: f64,
    pub smallest: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedSpacings {
    /// `n · largest`.
    pub n_d: f64,
    /// `n² · smallest`.
    pub n2_d: f64,
}

/// `1 / max lcm(k, l)` over present lengths.
pub fn min_spacing_lcm(counts: &CycleCounts) -> Ratio<i64> {
    let lengths: Vec<i64> = counts.distinct_lengths().map(|j| j as i64).collect();
    let mut best = 1i64;
    for (i, &k) in lengths.iter().enumerate() {
        for &l in &lengths[i..] {
            best = best.max(k.lcm(&l));
        }
    }
    Ratio::new(1, best)
}

/// `1 / L` for the largest present length `L`.
pub fn max_spacing_closed(counts: &CycleCounts) -> Ratio<i64> {
    Ratio::new(1, counts.largest_length() as i64)
}

fn circular_gaps_ratio(angles: &[Ratio<i64>]) -> impl Iterator<Item = Ratio<i64>> + '_ {
    let one = Ratio::from_integer(1);
    let wrap = angles[0] + one - angles[angles.len() - 1];
    angles.windows(2).map(|w| w[1] - w[0]).chain(std::iter::once(wrap))
}

/// Smallest and largest circular gaps of the enumerated distinct angles,
/// in exact arithmetic.
pub fn spacings_perm_enumerated(counts: &CycleCounts) -> (Ratio<i64>, Ratio<i64>) {
    let angles: Vec<Ratio<i64>> = enumerate_angles_perm(counts).into_iter().map(|a| a.0).collect();
    let mut min = Ratio::from_integer(1);
    let mut max = Ratio::from_integer(0);
    for g in circular_gaps_ratio(&angles) {
        min = min.min(g);
        max = max.max(g);
    }
    (min, max)
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn spacings_perm(counts: &CycleCounts) -> SpacingStats {
    SpacingStats {
        n: counts.n(),
        largest: ratio_f64(max_spacing_closed(counts)),
        smallest: ratio_f64(min_spacing_lcm(counts)),
    }
}

/// Circular gaps of the sorted modified spectrum. Coinciding angles are
/// merged, so every reported gap is positive.
pub fn spacings_mod(spectrum: &ModifiedSpectrum) -> SpacingStats {
    let angles = enumerate_angles_mod(spectrum);
    let mut smallest = f64::INFINITY;
    let mut largest: f64 = 0.0;
    let wrap = angles[0] + 1.0 - angles[angles.len() - 1];
    for g in angles.windows(2).map(|w| w[1] - w[0]).chain(std::iter::once(wrap)) {
        if g > 0.0 {
            smallest = smallest.min(g);
            largest = largest.max(g);
        }
    }
    if !smallest.is_finite() {
        // every angle coincides
        smallest = 1.0;
        largest = 1.0;
    }
    SpacingStats {
        n: spectrum.n(),
        largest,
        smallest,
    }
}

/// Smallest circular distance between the p-th roots of unity and the
/// q-th roots rotated by `shift`: `(1/(pq)) min({s p q}, 1 - {s p q})`.
pub fn two_cycle_min_spacing(p: u64, q: u64, shift: f64) -> Result<f64> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter("cycle lengths must be positive".into()));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::InvalidParameter(format!("{p} and {q} are not coprime")));
    }
    if !(shift > 0.0 && shift < 1.0) {
        return Err(Error::domain("shift", "(0, 1)", shift));
    }
    let pq = (p * q) as f64;
    let f = frac(shift * pq);
    Ok(f.min(1.0 - f) / pq)
}

/// Normalized extremal gaps of the unmodified spectrum, formed as integer
/// quotients `n / L` and `n² / lcm` so that the lower bound 1 survives rounding.
pub fn normalized_spacings_perm(counts: &CycleCounts) -> NormalizedSpacings {
    let n = counts.n() as f64;
    let largest = *max_spacing_closed(counts).denom() as f64;
    let smallest = *min_spacing_lcm(counts).denom() as f64;
    NormalizedSpacings {
        n_d: n / largest,
        n2_d: n * n / smallest,
    }
}

pub fn normalized_spacings(stats: &SpacingStats) -> NormalizedSpacings {
    let n = stats.n as f64;
    NormalizedSpacings {
        n_d: n * stats.largest,
        n2_d: n * n * stats.smallest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ewens::{sample_cycle_counts, EwensParams};
    use crate::rng::trial_rng;
    use crate::spectral::attach_phases;
    use rand::Rng;

    fn cc(lengths: &[usize]) -> CycleCounts {
        CycleCounts::from_lengths(lengths.iter().copied()).unwrap()
    }

    #[test]
    fn perm_examples() {
        let s = spacings_perm(&cc(&[7]));
        assert_eq!((s.largest, s.smallest), (1.0 / 7.0, 1.0 / 7.0));
        let s = spacings_perm(&cc(&[2, 3]));
        assert_eq!(s.smallest, 1.0 / 6.0);
        assert_eq!(s.largest, 1.0 / 3.0);
        assert_eq!(spacings_perm_enumerated(&cc(&[2, 3])), (Ratio::new(1, 6), Ratio::new(1, 3)));
        assert_eq!(min_spacing_lcm(&cc(&[4, 6])), Ratio::new(1, 12));
        assert_eq!(spacings_perm_enumerated(&cc(&[4, 6])).0, Ratio::new(1, 12));
        let s = spacings_perm(&cc(&[1, 1, 1]));
        assert_eq!((s.largest, s.smallest), (1.0, 1.0));
        assert_eq!(spacings_perm_enumerated(&cc(&[1, 1])), (Ratio::new(1, 1), Ratio::new(1, 1)));
    }

    #[test]
    fn normalized_examples() {
        let s = spacings_perm(&cc(&[9]));
        let ns = normalized_spacings(&s);
        assert!((ns.n_d - 1.0).abs() < 1e-15 && (ns.n2_d - 9.0).abs() < 1e-12);
        let ns = normalized_spacings(&spacings_perm(&cc(&[2, 3])));
        assert!((ns.n_d - 5.0 / 3.0).abs() < 1e-15 && (ns.n2_d - 25.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn mod_examples() {
        for (j, phi) in [(1, 0.4), (5, 0.0), (6, 0.77)] {
            let s = spacings_mod(&ModifiedSpectrum::new(vec![(j, phi)]).unwrap());
            assert!((s.largest - 1.0 / j as f64).abs() < 1e-15);
            assert!((s.smallest - 1.0 / j as f64).abs() < 1e-15);
        }
        let s = spacings_mod(&ModifiedSpectrum::new(vec![(1, 0.0), (1, 0.25)]).unwrap());
        assert_eq!((s.smallest, s.largest), (0.25, 0.75));
    }

    #[test]
    fn bezout_examples() {
        assert!((two_cycle_min_spacing(2, 3, 1.0 / 12.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(two_cycle_min_spacing(2, 3, 1e-9).unwrap() < 1e-8);
        assert!(two_cycle_min_spacing(4, 6, 0.3).is_err());
        assert!(two_cycle_min_spacing(4, 5, 0.0).is_err());
    }

    #[test]
    fn bezout_matches_brute_force() {
        let mut rng = trial_rng(31, 0);
        let mut checked = 0;
        while checked < 300 {
            let p = rng.random_range(1..=50u64);
            let q = rng.random_range(1..=50u64);
            if p.gcd(&q) != 1 {
                continue;
            }
            checked += 1;
            for _ in 0..20 {
                let shift: f64 = rng.random_range(1e-6..1.0 - 1e-6);
                let mut best = f64::INFINITY;
                for k in 0..p {
                    for l in 0..q {
                        let d = frac(l as f64 / q as f64 + shift - k as f64 / p as f64);
                        best = best.min(d.min(1.0 - d));
                    }
                }
                let closed = two_cycle_min_spacing(p, q, shift).unwrap();
                assert!((closed - best).abs() < 1e-12, "p={p} q={q} s={shift}");
            }
        }
    }

    #[test]
    fn closed_forms_match_enumeration() {
        let params = EwensParams::new(1.0).unwrap();
        for t in 0..500 {
            let mut rng = trial_rng(32, t);
            let n = rng.random_range(1..=400);
            let counts = sample_cycle_counts(n, &params, &mut rng);
            let (min, max) = spacings_perm_enumerated(&counts);
            assert_eq!(min, min_spacing_lcm(&counts));
            assert_eq!(max, max_spacing_closed(&counts));
        }
    }

    #[test]
    fn samplewise_bounds() {
        let params = EwensParams::new(0.8).unwrap();
        for t in 0..3000 {
            let mut rng = trial_rng(33, t);
            let n = rng.random_range(1..=300);
            let counts = sample_cycle_counts(n, &params, &mut rng);
            let d = spacings_perm(&counts);
            let ns = normalized_spacings_perm(&counts);
            assert!(ns.n_d >= 1.0 && ns.n2_d >= 1.0);
            let float = normalized_spacings(&d);
            assert!((float.n_d - ns.n_d).abs() < 1e-12 * ns.n_d);
            let tilde = spacings_mod(&attach_phases(&counts, &mut rng));
            assert!(tilde.smallest <= d.smallest * (1.0 + 1e-12));
            assert!(tilde.largest <= 1.0 / counts.largest_length() as f64 * (1.0 + 1e-12));
            assert!(normalized_spacings(&tilde).n_d >= 1.0 - 1e-12);
        }
    }
}
