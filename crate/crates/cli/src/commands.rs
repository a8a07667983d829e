//! Row computation for every subcommand. Sweep points run on the current
//! rayon pool and come back in input order.

use qillum_core::chernoff::{closed_form_bound, numeric_bound, one_minus_q_closed, q_closed, ChernoffResult, SpectralPair};
use qillum_core::correlations::{correlation_series_oracle, source_correlation_magnitude};
use qillum_core::montecarlo::{simulate_detection, Hypothesis, TrialConfig};
use qillum_core::probe::build_hypotheses;
use qillum_core::receivers::{
    coherent_homodyne, error_probability_gaussian, ffsfg_exponent, ffsfg_report, opa_report, tmsv_qcb, FfSfgVariant,
    OpaVariant,
};
use qillum_core::{ChannelParams, FfSfgParams, ProbeParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    amplifiers, ChernoffConfig, CorrelationsConfig, FfSfgConfig, Figure1Config, HypothesisChoice, McModel, Method,
    MonteCarloConfig, OpaConfig, VariantChoice,
};
use crate::error::{CliError, Result};

/// Probe used by the receiver commands: one temporal mode, polarization and
/// frequency hyperentanglement.
fn receiver_probe(n_s: f64, n: u64) -> Result<ProbeParams> {
    let n = i64::try_from(n).map_err(|_| CliError::Config(format!("N = {n} is too large")))?;
    Ok(ProbeParams::new(1, n_s, 2, n)?)
}

fn par_rows<P: Sync, R: Send>(points: &[P], f: impl Fn(&P) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    points.par_iter().map(f).collect()
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && num.is_finite()).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernoffRow {
    #[serde(rename = "M")]
    pub modes: usize,
    pub d: usize,
    pub kappa: f64,
    #[serde(rename = "N_B")]
    pub n_b: f64,
    pub method: &'static str,
    pub s_star: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "one_minus_Q")]
    pub one_minus_q: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "exponent_N")]
    pub exponent_n: f64,
    #[serde(rename = "bound_N")]
    pub bound_n: f64,
    pub residual: Option<f64>,
    pub gain_over_d1: Option<f64>,
}

fn chernoff_distance(modes: usize, d: usize, kappa: f64, n_b: f64, method: Method, tol: f64) -> Result<(ChernoffResult, Option<f64>)> {
    match method {
        Method::Closed => Ok((closed_form_bound(modes, d, kappa, n_b, tol)?, None)),
        Method::Numeric => {
            let pair = SpectralPair::from_hypotheses(&build_hypotheses(modes, d, kappa, n_b)?)?;
            Ok((numeric_bound(&pair, tol)?, None))
        }
        Method::Both => {
            let closed = closed_form_bound(modes, d, kappa, n_b, tol)?;
            let pair = SpectralPair::from_hypotheses(&build_hypotheses(modes, d, kappa, n_b)?)?;
            let residual = q_closed(modes, d, kappa, n_b, closed.s_star)? - pair.q(closed.s_star);
            Ok((closed, Some(residual)))
        }
    }
}

pub fn chernoff_rows(cfg: &ChernoffConfig) -> Result<Vec<ChernoffRow>> {
    let modes = cfg.modes.counts("M")?;
    let dims = cfg.internal_dims()?;
    let kappas = cfg.kappa.values("kappa")?;
    let noises = cfg.n_b.values("N_B")?;
    let n = cfg.shots()?;
    if !(cfg.tol > 0.0) {
        return Err(CliError::Config("tol must be positive".into()));
    }
    let mut points = Vec::new();
    for &m in &modes {
        for &d in &dims {
            for &kappa in &kappas {
                for &n_b in &noises {
                    points.push((m as usize, d, kappa, n_b));
                }
            }
        }
    }
    par_rows(&points, |&(modes, d, kappa, n_b)| {
        let (res, residual) = chernoff_distance(modes, d, kappa, n_b, cfg.method, cfg.tol)?;
        let base = if d == 1 {
            res.one_minus_q
        } else {
            // the closed form is exact, so it serves as the d = 1 reference
            // unless only the matrix route was requested
            match cfg.method {
                Method::Numeric => chernoff_distance(modes, 1, kappa, n_b, Method::Numeric, cfg.tol)?.0.one_minus_q,
                _ => {
                    let at = |s| one_minus_q_closed(modes, 1, kappa, n_b, s).unwrap_or(f64::NAN);
                    qillum_core::chernoff::maximize_distance(at, cfg.tol)?.one_minus_q
                }
            }
        };
        Ok(ChernoffRow {
            modes,
            d,
            kappa,
            n_b,
            method: cfg.method.name(),
            s_star: res.s_star,
            q: res.q_star,
            one_minus_q: res.one_minus_q,
            n,
            exponent_n: n as f64 * res.one_minus_q,
            bound_n: res.n_shot_bound(n),
            residual,
            gain_over_d1: ratio(res.one_minus_q, base),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Row {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "HyperOpa")]
    pub hyper_opa: f64,
    #[serde(rename = "LoneOpa")]
    pub lone_opa: f64,
    #[serde(rename = "CoherentHomodyne")]
    pub coherent_homodyne: f64,
    #[serde(rename = "TmsvQcb")]
    pub tmsv_qcb: f64,
    #[serde(rename = "LoneFfSfg")]
    pub lone_ffsfg: f64,
    #[serde(rename = "HyperFfSfg")]
    pub hyper_ffsfg: f64,
    pub hyper_opa_exponent: f64,
    pub lone_opa_exponent: f64,
    pub hyper_opa_approx_exponent: f64,
    pub lone_ffsfg_approx_exponent: f64,
}

pub fn figure1_rows(cfg: &Figure1Config) -> Result<Vec<Figure1Row>> {
    let channel = ChannelParams::new(cfg.kappa, cfg.n_b)?;
    let opa = cfg.amplifier()?;
    let ns = cfg.n.counts("N")?;
    receiver_probe(cfg.n_s, 1)?;
    par_rows(&ns, |&n| {
        let probe = receiver_probe(cfg.n_s, n)?;
        let hyper = opa_report(&probe, &channel, &opa, OpaVariant::Hyper)?;
        let lone = opa_report(&probe, &channel, &opa, OpaVariant::Lone)?;
        let lone_ff = ffsfg_report(&probe, &channel, false)?;
        let hyper_ff = ffsfg_report(&probe, &channel, true)?;
        Ok(Figure1Row {
            n,
            hyper_opa: hyper.p_e,
            lone_opa: lone.p_e,
            coherent_homodyne: coherent_homodyne(&probe, &channel).p_e,
            tmsv_qcb: tmsv_qcb(&probe, &channel)?,
            lone_ffsfg: lone_ff.p_e,
            hyper_ffsfg: hyper_ff.p_e,
            hyper_opa_exponent: hyper.exponent,
            lone_opa_exponent: lone.exponent,
            hyper_opa_approx_exponent: hyper.approx_exponent.unwrap_or(f64::NAN),
            lone_ffsfg_approx_exponent: lone_ff.approx_exponent.unwrap_or(f64::NAN),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRow {
    pub model: &'static str,
    #[serde(rename = "N_S")]
    pub n_s: f64,
    pub kappa: f64,
    #[serde(rename = "N_B")]
    pub n_b: f64,
    #[serde(rename = "G")]
    pub gain: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub multiplicity: u32,
    pub seed: u64,
    pub trials: u64,
    pub hypothesis: &'static str,
    pub threshold: f64,
    pub false_alarms: u64,
    pub misses: u64,
    pub empirical_pe: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_count_absent: Option<f64>,
    pub var_count_absent: Option<f64>,
    pub mean_count_present: Option<f64>,
    pub var_count_present: Option<f64>,
    pub analytic_pe: f64,
    pub abs_diff: f64,
    pub within_3_sigma: bool,
    /// `mode_count * N_m >= 50` for both hypotheses.
    pub validity_zone: bool,
}

/// Smallest total mean count for which the Gaussian error formula is
/// compared against simulation.
pub const VALIDITY_MIN_COUNT: f64 = 50.0;

pub fn montecarlo_rows(cfg: &MonteCarloConfig, seed: u64) -> Result<Vec<MonteCarloRow>> {
    let variant = match cfg.model {
        McModel::HyperOpa => OpaVariant::Hyper,
        McModel::LoneOpa => OpaVariant::Lone,
    };
    let (hypothesis, hyp_name) = match cfg.hypothesis {
        HypothesisChoice::Present => (Hypothesis::Present, "present"),
        HypothesisChoice::Absent => (Hypothesis::Absent, "absent"),
        HypothesisChoice::Both => (Hypothesis::Both, "both"),
    };
    let gains = amplifiers(&cfg.gain, &cfg.epsilon_sq)?;
    let ns = cfg.n.counts("N")?;
    let mut rows = Vec::new();
    for &n_s in &cfg.n_s.values("N_S")? {
        for &kappa in &cfg.kappa.values("kappa")? {
            for &n_b in &cfg.n_b.values("N_B")? {
                let channel = ChannelParams::new(kappa, n_b)?;
                for opa in &gains {
                    for &n in &ns {
                        let probe = receiver_probe(n_s, n)?;
                        let report = opa_report(&probe, &channel, opa, variant)?;
                        let trial = TrialConfig::new(seed, cfg.trials, n, variant.multiplicity(), hypothesis)?;
                        let out = simulate_detection(&report, &trial)?;
                        let stats = report.photocount.expect("amplifier reports carry photocounts");
                        let modes = trial.mode_count() as f64;
                        rows.push(MonteCarloRow {
                            model: match cfg.model {
                                McModel::HyperOpa => "HyperOpa",
                                McModel::LoneOpa => "LoneOpa",
                            },
                            n_s,
                            kappa,
                            n_b,
                            gain: opa.gain(),
                            n,
                            multiplicity: out.multiplicity,
                            seed,
                            trials: out.trials,
                            hypothesis: hyp_name,
                            threshold: out.threshold,
                            false_alarms: out.false_alarms,
                            misses: out.misses,
                            empirical_pe: out.empirical_pe,
                            ci_low: out.ci_low,
                            ci_high: out.ci_high,
                            mean_count_absent: out.mean_count_absent,
                            var_count_absent: out.var_count_absent,
                            mean_count_present: out.mean_count_present,
                            var_count_present: out.var_count_present,
                            analytic_pe: out.analytic_pe,
                            abs_diff: (out.empirical_pe - out.analytic_pe).abs(),
                            within_3_sigma: out.agrees_within(3.0),
                            validity_zone: modes * stats.n0.min(stats.n1) >= VALIDITY_MIN_COUNT,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationsRow {
    #[serde(rename = "N_S_prime")]
    pub n_s_prime: f64,
    pub closed_form: f64,
    pub series: f64,
    pub tail_bound: f64,
    pub abs_diff: f64,
}

pub fn correlations_rows(cfg: &CorrelationsConfig) -> Result<Vec<CorrelationsRow>> {
    let points = cfg.n_s_prime.values("N_S_prime")?;
    par_rows(&points, |&x| {
        let closed = source_correlation_magnitude(x)?;
        let series = correlation_series_oracle(x, cfg.n_max)?;
        Ok(CorrelationsRow {
            n_s_prime: x,
            closed_form: closed,
            series: series.value,
            tail_bound: series.tail_bound,
            abs_diff: (closed - series.value).abs(),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpaRow {
    pub variant: &'static str,
    #[serde(rename = "N_S")]
    pub n_s: f64,
    pub kappa: f64,
    #[serde(rename = "N_B")]
    pub n_b: f64,
    #[serde(rename = "G")]
    pub gain: f64,
    pub epsilon_sq: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    #[serde(rename = "R_exact")]
    pub r_exact: f64,
    #[serde(rename = "R_approx")]
    pub r_approx: Option<f64>,
    #[serde(rename = "R_ratio")]
    pub r_ratio: Option<f64>,
    #[serde(rename = "N_th")]
    pub threshold: f64,
    pub exponent: f64,
    pub approx_exponent: Option<f64>,
    pub p_e: f64,
    pub p_e_bound: f64,
}

pub fn opa_rows(cfg: &OpaConfig) -> Result<Vec<OpaRow>> {
    if cfg.variants.is_empty() {
        return Err(CliError::Config("variants: list is empty".into()));
    }
    let gains = amplifiers(&cfg.gain, &cfg.epsilon_sq)?;
    let ns = cfg.n.counts("N")?;
    let mut points = Vec::new();
    for &v in &cfg.variants {
        for &n_s in &cfg.n_s.values("N_S")? {
            for &kappa in &cfg.kappa.values("kappa")? {
                for &n_b in &cfg.n_b.values("N_B")? {
                    for opa in &gains {
                        for &n in &ns {
                            points.push((v, n_s, ChannelParams::new(kappa, n_b)?, *opa, n));
                        }
                    }
                }
            }
        }
    }
    par_rows(&points, |&(v, n_s, channel, opa, n)| {
        let (variant, name) = match v {
            VariantChoice::Hyper => (OpaVariant::Hyper, "hyper"),
            VariantChoice::Lone => (OpaVariant::Lone, "lone"),
        };
        let probe = receiver_probe(n_s, n)?;
        let report = opa_report(&probe, &channel, &opa, variant)?;
        let st = report.photocount.expect("amplifier reports carry photocounts");
        Ok(OpaRow {
            variant: name,
            n_s,
            kappa: channel.kappa(),
            n_b: channel.n_b(),
            gain: opa.gain(),
            epsilon_sq: opa.epsilon_sq(),
            n,
            n0: st.n0,
            n1: st.n1,
            sigma0: st.sigma0,
            sigma1: st.sigma1,
            r_exact: st.r_exact,
            r_approx: st.r_approx,
            r_ratio: st.r_approx.and_then(|a| ratio(st.r_exact, a)),
            threshold: st.threshold,
            exponent: report.exponent,
            approx_exponent: report.approx_exponent,
            p_e: report.p_e,
            p_e_bound: error_probability_gaussian(st.r_exact, n, st.multiplicity).upper_bound,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FfSfgRow {
    #[serde(rename = "N_S")]
    pub n_s: f64,
    pub kappa: f64,
    #[serde(rename = "N_B")]
    pub n_b: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K")]
    pub cycles: u32,
    pub lone_exact: f64,
    pub lone_approx: f64,
    pub hyper_per_receiver_exact: f64,
    pub hyper_per_receiver_approx: f64,
    pub hyper_total_exact: f64,
    pub hyper_total_approx: f64,
    pub lone_p_e: f64,
    pub hyper_p_e: f64,
}

pub fn ffsfg_rows(cfg: &FfSfgConfig) -> Result<Vec<FfSfgRow>> {
    let cycles = FfSfgParams::new(cfg.cycles)?.cycles();
    let ns = cfg.n.counts("N")?;
    let mut points = Vec::new();
    for &n_s in &cfg.n_s.values("N_S")? {
        for &kappa in &cfg.kappa.values("kappa")? {
            for &n_b in &cfg.n_b.values("N_B")? {
                for &n in &ns {
                    points.push((n_s, ChannelParams::new(kappa, n_b)?, n));
                }
            }
        }
    }
    par_rows(&points, |&(n_s, channel, n)| {
        let probe = receiver_probe(n_s, n)?;
        let lone = ffsfg_exponent(&probe, &channel, FfSfgVariant::Lone)?;
        let per = ffsfg_exponent(&probe, &channel, FfSfgVariant::HyperPerReceiver)?;
        let total = ffsfg_exponent(&probe, &channel, FfSfgVariant::HyperTotal)?;
        Ok(FfSfgRow {
            n_s,
            kappa: channel.kappa(),
            n_b: channel.n_b(),
            n,
            cycles,
            lone_exact: lone.exact,
            lone_approx: lone.approx,
            hyper_per_receiver_exact: per.exact,
            hyper_per_receiver_approx: per.approx,
            hyper_total_exact: total.exact,
            hyper_total_approx: total.approx,
            lone_p_e: 0.5 * (-lone.exact).exp(),
            hyper_p_e: 0.5 * (-total.exact).exp(),
        })
    })
}
