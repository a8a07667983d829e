//! Photocounting Monte Carlo for the amplifier receivers.
//!
//! Each trial draws the total count of `multiplicity * N` independent
//! thermal modes under one or both hypotheses and applies the receiver's
//! threshold test. Trial `i` always uses ChaCha stream `i` of the run seed,
//! so outcomes do not depend on the thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Geometric, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::receivers::{decision_threshold, error_probability_gaussian, ReceiverReport};

/// Mode counts up to this are sampled one geometric draw per mode.
pub const EXACT_MODE_LIMIT: u64 = 32;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Two-sample Kolmogorov-Smirnov coefficient `c(alpha)` at `alpha = 0.01`.
pub const KS_C_01: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Present,
    Absent,
    /// One draw under each hypothesis per trial.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: u64,
    /// Transmitter iterations per trial.
    pub n: u64,
    /// Photocounted modes per iteration.
    pub multiplicity: u32,
    pub hypothesis: Hypothesis,
}

impl TrialConfig {
    pub fn new(seed: u64, trials: u64, n: u64, multiplicity: u32, hypothesis: Hypothesis) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidTrialCount);
        }
        if n == 0 {
            return Err(Error::NonPositiveIterations(0));
        }
        if multiplicity == 0 {
            return Err(Error::InvalidModeCount);
        }
        Ok(Self {
            seed,
            trials,
            n,
            multiplicity,
            hypothesis,
        })
    }

    pub fn mode_count(&self) -> u64 {
        self.n * self.multiplicity as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub trials: u64,
    pub n: u64,
    pub multiplicity: u32,
    pub hypothesis: Hypothesis,
    pub threshold: f64,
    pub false_alarms: u64,
    pub misses: u64,
    pub empirical_pe: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Sample moments of the count without the target, if drawn.
    pub mean_count_absent: Option<f64>,
    pub var_count_absent: Option<f64>,
    /// Sample moments of the count with the target, if drawn.
    pub mean_count_present: Option<f64>,
    pub var_count_present: Option<f64>,
    pub analytic_pe: f64,
}

impl TrialOutcome {
    /// Number of threshold decisions behind `empirical_pe`.
    pub fn decisions(&self) -> u64 {
        match self.hypothesis {
            Hypothesis::Both => 2 * self.trials,
            _ => self.trials,
        }
    }

    pub fn errors(&self) -> u64 {
        self.false_alarms + self.misses
    }

    /// Whether the analytic prediction lies inside the Wilson interval of
    /// half-width `z` standard errors.
    pub fn agrees_within(&self, z: f64) -> bool {
        let (lo, hi) = wilson_interval(self.errors(), self.decisions(), z);
        (lo..=hi).contains(&self.analytic_pe)
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

fn check_mean(mean: f64) -> Result<()> {
    if mean.is_nan() || mean < 0.0 {
        return Err(Error::NegativeMean(mean));
    }
    if !mean.is_finite() {
        return Err(Error::NonFinite("photocount mean"));
    }
    Ok(())
}

/// Sum of `mode_count` Bose-Einstein counts, one geometric draw per mode.
pub fn sample_photocount_exact<R: Rng + ?Sized>(mean: f64, mode_count: u64, rng: &mut R) -> Result<u64> {
    check_mean(mean)?;
    if mode_count == 0 {
        return Err(Error::InvalidModeCount);
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let geo = Geometric::new(1.0 / (1.0 + mean)).map_err(|_| Error::NegativeMean(mean))?;
    Ok((0..mode_count).map(|_| geo.sample(rng)).sum())
}

/// Same distribution drawn as a negative binomial through its Gamma-Poisson
/// mixture.
pub fn sample_photocount_mixture<R: Rng + ?Sized>(mean: f64, mode_count: u64, rng: &mut R) -> Result<u64> {
    check_mean(mean)?;
    if mode_count == 0 {
        return Err(Error::InvalidModeCount);
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let gamma = Gamma::new(mode_count as f64, mean).map_err(|_| Error::NonFinite("gamma shape"))?;
    let lambda: f64 = gamma.sample(rng);
    if lambda <= 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(lambda).map_err(|_| Error::NonFinite("poisson rate"))?;
    Ok(poisson.sample(rng) as u64)
}

/// Total photocount of `mode_count` thermal modes with `mean` photons each.
pub fn sample_photocount<R: Rng + ?Sized>(mean: f64, mode_count: u64, rng: &mut R) -> Result<u64> {
    if mode_count <= EXACT_MODE_LIMIT {
        sample_photocount_exact(mean, mode_count, rng)
    } else {
        sample_photocount_mixture(mean, mode_count, rng)
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy)]
struct TrialDraw {
    absent: Option<u64>,
    present: Option<u64>,
}

fn moments(counts: impl Iterator<Item = u64>) -> Option<(f64, f64)> {
    let (mut n, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
    for c in counts {
        n += 1;
        let x = c as f64;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    match n {
        0 => None,
        1 => Some((mean, 0.0)),
        _ => Some((mean, m2 / (n - 1) as f64)),
    }
}

/// Runs the threshold test on simulated photocounts.
///
/// The means and threshold come from `report`; the threshold is rescaled to
/// the configured `n` and multiplicity.
pub fn simulate_detection(report: &ReceiverReport, config: &TrialConfig) -> Result<TrialOutcome> {
    let stats = report.photocount.ok_or(Error::NotPhotocounting)?;
    let config = TrialConfig::new(config.seed, config.trials, config.n, config.multiplicity, config.hypothesis)?;
    let threshold = decision_threshold(config.n, stats.n0, stats.n1, stats.sigma0, stats.sigma1, config.multiplicity)?;
    let modes = config.mode_count();
    let (want_absent, want_present) = match config.hypothesis {
        Hypothesis::Absent => (true, false),
        Hypothesis::Present => (false, true),
        Hypothesis::Both => (true, true),
    };

    let draws = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, i);
            let absent = want_absent
                .then(|| sample_photocount(stats.n0, modes, &mut rng))
                .transpose()?;
            let present = want_present
                .then(|| sample_photocount(stats.n1, modes, &mut rng))
                .transpose()?;
            Ok(TrialDraw { absent, present })
        })
        .collect::<Result<Vec<_>>>()?;

    let false_alarms = draws
        .iter()
        .filter_map(|d| d.absent)
        .filter(|&c| c as f64 > threshold)
        .count() as u64;
    let misses = draws
        .iter()
        .filter_map(|d| d.present)
        .filter(|&c| c as f64 <= threshold)
        .count() as u64;
    let absent = moments(draws.iter().filter_map(|d| d.absent));
    let present = moments(draws.iter().filter_map(|d| d.present));

    let decisions = if want_absent && want_present {
        2 * config.trials
    } else {
        config.trials
    };
    let errors = false_alarms + misses;
    let (ci_low, ci_high) = wilson_interval(errors, decisions, Z_95);

    Ok(TrialOutcome {
        seed: config.seed,
        trials: config.trials,
        n: config.n,
        multiplicity: config.multiplicity,
        hypothesis: config.hypothesis,
        threshold,
        false_alarms,
        misses,
        empirical_pe: errors as f64 / decisions as f64,
        ci_low,
        ci_high,
        mean_count_absent: absent.map(|m| m.0),
        var_count_absent: absent.map(|m| m.1),
        mean_count_present: present.map(|m| m.0),
        var_count_present: present.map(|m| m.1),
        analytic_pe: error_probability_gaussian(stats.r_exact, config.n, config.multiplicity).p_e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsComparison {
    pub statistic: f64,
    pub critical: f64,
}

impl KsComparison {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical
    }
}

/// Two-sample Kolmogorov-Smirnov distance between sorted samples.
pub fn ks_statistic(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Compares the per-mode geometric sampler with the Gamma-Poisson sampler
/// at the 1% level.
pub fn negative_binomial_vs_geometric_equivalence(
    mean: f64,
    mode_count: u64,
    draws: usize,
    seed: u64,
) -> Result<KsComparison> {
    let mut exact_rng = trial_rng(seed, 0);
    let mut mix_rng = trial_rng(seed, 1);
    let mut exact = (0..draws)
        .map(|_| sample_photocount_exact(mean, mode_count, &mut exact_rng))
        .collect::<Result<Vec<_>>>()?;
    let mut mixed = (0..draws)
        .map(|_| sample_photocount_mixture(mean, mode_count, &mut mix_rng))
        .collect::<Result<Vec<_>>>()?;
    exact.sort_unstable();
    mixed.sort_unstable();
    let n = draws as f64;
    Ok(KsComparison {
        statistic: ks_statistic(&exact, &mixed),
        critical: KS_C_01 * (2.0 / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ChannelParams, OpaParams, ProbeParams};
    use crate::receivers::{opa_report, OpaVariant};

    fn draws(mean: f64, modes: u64, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = trial_rng(seed, 7);
        (0..count)
            .map(|_| sample_photocount(mean, modes, &mut rng).unwrap() as f64)
            .collect()
    }

    fn sample_mean_var(x: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        (mean, var, m4)
    }

    #[test]
    fn zero_mean_gives_zero() {
        let mut rng = trial_rng(1, 0);
        for modes in [1, 32, 33, 1_000_000] {
            assert_eq!(sample_photocount(0.0, modes, &mut rng).unwrap(), 0);
        }
        assert_eq!(sample_photocount(-0.1, 1, &mut rng), Err(Error::NegativeMean(-0.1)));
        assert_eq!(sample_photocount(0.1, 0, &mut rng), Err(Error::InvalidModeCount));
    }

    #[test]
    fn single_mode_variance() {
        let x = draws(1.0, 1, 1_000_000, 3);
        let (mean, var, m4) = sample_mean_var(&x);
        let n = x.len() as f64;
        assert!((mean - 1.0).abs() <= 3.0 * (2.0 / n).sqrt(), "{mean}");
        let se = ((m4 - var * var) / n).sqrt();
        assert!((var - 2.0).abs() <= 3.0 * se, "{var} +- {se}");
    }

    #[test]
    fn many_mode_mean_at_figure_parameters() {
        let (mean, modes) = (0.0325125, 400_000u64);
        let x = draws(mean, modes, 4000, 5);
        let (m, v, _) = sample_mean_var(&x);
        let expected_var = modes as f64 * mean * (mean + 1.0);
        let se = (expected_var / x.len() as f64).sqrt();
        assert!((m - modes as f64 * mean).abs() <= 3.0 * se, "{m}");
        assert!((v / expected_var - 1.0).abs() < 0.1, "{v}");
    }

    #[test]
    fn samplers_agree_in_distribution() {
        let ks = negative_binomial_vs_geometric_equivalence(0.5, 8, 100_000, 11).unwrap();
        assert!(ks.passes(), "{ks:?}");
        let ks = negative_binomial_vs_geometric_equivalence(1.0, 1, 100_000, 12).unwrap();
        assert!(ks.passes(), "{ks:?}");
        let ks = negative_binomial_vs_geometric_equivalence(0.0, 5, 1000, 13).unwrap();
        assert_eq!(ks.statistic, 0.0);
    }

    #[test]
    fn ks_statistic_basics() {
        assert_eq!(ks_statistic(&[1, 2, 3], &[1, 2, 3]), 0.0);
        assert_eq!(ks_statistic(&[0, 0], &[5, 5]), 1.0);
        assert!((ks_statistic(&[0, 1], &[1, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((hi - 0.5 - 0.0960).abs() < 1e-3);
        let (lo, hi) = wilson_interval(7, 7, Z_95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }

    fn fig1_report(n: i64, kappa: f64) -> ReceiverReport {
        let probe = ProbeParams::new(1, 0.01, 2, n).unwrap();
        let channel = ChannelParams::new(kappa, 20.0).unwrap();
        opa_report(&probe, &channel, &OpaParams::default(), OpaVariant::Hyper).unwrap()
    }

    #[test]
    fn indistinguishable_hypotheses_give_half() {
        let report = fig1_report(1000, 0.0);
        let cfg = TrialConfig::new(21, 20_000, 1000, 4, Hypothesis::Both).unwrap();
        let out = simulate_detection(&report, &cfg).unwrap();
        assert_eq!(out.analytic_pe, 0.5);
        assert!(out.ci_low <= 0.5 && 0.5 <= out.ci_high, "{out:?}");
    }

    #[test]
    fn empirical_matches_analytic_near_five_percent() {
        let n = 362_000;
        let report = fig1_report(n, 0.01);
        let cfg = TrialConfig::new(2024, 100_000, n as u64, 4, Hypothesis::Both).unwrap();
        let out = simulate_detection(&report, &cfg).unwrap();
        assert!((0.03..=0.08).contains(&out.analytic_pe), "{}", out.analytic_pe);
        assert!(out.agrees_within(3.0), "{out:?}");
        assert!(out.ci_low <= out.empirical_pe && out.empirical_pe <= out.ci_high);
        let mean0 = out.mean_count_absent.unwrap();
        let expected = 4.0 * n as f64 * report.photocount.unwrap().n0;
        assert!((mean0 / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let report = fig1_report(5000, 0.01);
        let cfg = TrialConfig::new(77, 3000, 5000, 4, Hypothesis::Both).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_detection(&report, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(1));
    }

    #[test]
    fn single_hypothesis_runs() {
        let report = fig1_report(5000, 0.01);
        let cfg = TrialConfig::new(5, 500, 5000, 4, Hypothesis::Absent).unwrap();
        let out = simulate_detection(&report, &cfg).unwrap();
        assert_eq!(out.misses, 0);
        assert!(out.mean_count_present.is_none());
        assert_eq!(out.decisions(), 500);
        assert!(TrialConfig::new(5, 0, 5000, 4, Hypothesis::Absent).is_err());
    }
}
