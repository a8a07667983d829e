//! Receiver performance in the high-noise regime.
//!
//! Photocounting receivers (parametric amplifier followed by an ideal
//! counter) are analysed through the means and Bose-Einstein spreads of the
//! amplifier output under each hypothesis. The hyperentangled receiver runs
//! four amplifiers per iteration, each seeing half the source photons of one
//! down-converter and a quarter of the thermal background. Sum-frequency
//! receivers are summarised by their aggregate error exponents.

mod erfc;

pub use erfc::erfc;

use serde::Serialize;

use crate::correlations::returned_correlation;
use crate::error::{Error, Result};
use crate::params::{ChannelParams, OpaParams, ProbeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReceiverModel {
    HyperOpa,
    LoneOpa,
    CoherentHomodyne,
    LoneFfSfg,
    HyperFfSfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OpaVariant {
    /// Four amplifiers fed by the hyperentangled mode pairs.
    Hyper,
    /// Single amplifier with a two-mode squeezed vacuum probe.
    Lone,
}

impl OpaVariant {
    /// Independent readings per transmitter iteration.
    pub fn multiplicity(self) -> u32 {
        match self {
            OpaVariant::Hyper => 4,
            OpaVariant::Lone => 1,
        }
    }

    pub fn model(self) -> ReceiverModel {
        match self {
            OpaVariant::Hyper => ReceiverModel::HyperOpa,
            OpaVariant::Lone => ReceiverModel::LoneOpa,
        }
    }
}

/// Mean amplifier output photon numbers `(N0, N1)` without and with the
/// target.
///
/// The lone receiver uses the full loads `N_S`, `N_B` and the two-mode
/// squeezed correlation `sqrt(N_S (N_S + 1))`; the hyperentangled branch uses
/// `N_S'/2`, `N_B/4` and `(1/2) sqrt(N_S' (N_S' + 1))`.
pub fn opa_output_means(
    probe: &ProbeParams,
    channel: &ChannelParams,
    opa: &OpaParams,
    variant: OpaVariant,
) -> Result<(f64, f64)> {
    let g = opa.gain();
    let eps2 = opa.epsilon_sq();
    let kappa = channel.kappa();
    let (signal, background, corr_sq) = match variant {
        OpaVariant::Hyper => {
            let n = probe.n_s_prime();
            (n / 2.0, channel.n_b() / 4.0, n * (n + 1.0))
        }
        OpaVariant::Lone => {
            let n = probe.n_s();
            (n, channel.n_b(), 4.0 * n * (n + 1.0))
        }
    };
    let n0 = g * signal + eps2 * (background + 1.0);
    let n1 = g * signal + eps2 * (background + kappa * signal + 1.0) + (g * eps2 * kappa * corr_sq).sqrt();
    Ok((n0, n1))
}

/// Standard deviation of a thermal count with mean `n`: `sqrt(n (n + 1))`.
pub fn thermal_sigma(n: f64) -> f64 {
    (n * (n + 1.0)).sqrt()
}

/// `R = (N1 - N0)^2 / (2 (sigma1 + sigma0)^2)`.
pub fn snr(n0: f64, n1: f64, sigma0: f64, sigma1: f64) -> Result<f64> {
    let spread = sigma0 + sigma1;
    if !(spread > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok((n1 - n0).powi(2) / (2.0 * spread * spread))
}

/// Asymptotic SNR for `N_S, kappa, epsilon << 1 << N_B`: `kappa N_S / (4 N_B)`
/// for the hyperentangled receiver, twice that for the lone amplifier.
pub fn snr_approx(probe: &ProbeParams, channel: &ChannelParams, variant: OpaVariant) -> Result<f64> {
    let n_b = channel.n_b();
    if n_b == 0.0 {
        return Err(Error::DivisionByZeroNoise);
    }
    let denom = match variant {
        OpaVariant::Hyper => 4.0 * n_b,
        OpaVariant::Lone => 2.0 * n_b,
    };
    Ok(channel.kappa() * probe.n_s() / denom)
}

/// Count threshold `mult * N (sigma0 N1 + sigma1 N0) / (sigma0 + sigma1)`
/// above which the target is declared present.
pub fn decision_threshold(n: u64, n0: f64, n1: f64, sigma0: f64, sigma1: f64, multiplicity: u32) -> Result<f64> {
    let spread = sigma0 + sigma1;
    if !(spread > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok(multiplicity as f64 * n as f64 * (sigma0 * n1 + sigma1 * n0) / spread)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianErrorProbability {
    /// `(1/2) erfc(sqrt(mult R N))`.
    pub p_e: f64,
    /// `exp(-x^2) / (2 sqrt(pi) x)` with `x = sqrt(mult R N)`.
    pub upper_bound: f64,
}

pub fn error_probability_gaussian(r: f64, n: u64, multiplicity: u32) -> GaussianErrorProbability {
    let x2 = multiplicity as f64 * r * n as f64;
    let x = x2.sqrt();
    GaussianErrorProbability {
        p_e: 0.5 * erfc(x),
        upper_bound: (-x2).exp() / (2.0 * std::f64::consts::PI.sqrt() * x),
    }
}

/// Photocount statistics of one amplifier receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotocountStats {
    pub n0: f64,
    pub n1: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub r_exact: f64,
    pub r_approx: Option<f64>,
    pub multiplicity: u32,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReceiverReport {
    pub model: ReceiverModel,
    pub iterations: u64,
    pub photocount: Option<PhotocountStats>,
    /// Error exponent from the exact expressions.
    pub exponent: f64,
    /// Error exponent from the asymptotic expressions, when `N_B > 0`.
    pub approx_exponent: Option<f64>,
    /// Error probability (amplifier and homodyne receivers) or its
    /// `(1/2) exp(-exponent)` bound (sum-frequency receivers).
    pub p_e: f64,
}

/// Full analytic chain for an amplifier receiver at `probe.iterations()`.
pub fn opa_report(
    probe: &ProbeParams,
    channel: &ChannelParams,
    opa: &OpaParams,
    variant: OpaVariant,
) -> Result<ReceiverReport> {
    let (n0, n1) = opa_output_means(probe, channel, opa, variant)?;
    let (sigma0, sigma1) = (thermal_sigma(n0), thermal_sigma(n1));
    let r_exact = snr(n0, n1, sigma0, sigma1)?;
    let r_approx = snr_approx(probe, channel, variant).ok();
    let n = probe.iterations();
    let multiplicity = variant.multiplicity();
    let threshold = decision_threshold(n, n0, n1, sigma0, sigma1, multiplicity)?;
    let mult_n = multiplicity as f64 * n as f64;
    Ok(ReceiverReport {
        model: variant.model(),
        iterations: n,
        photocount: Some(PhotocountStats {
            n0,
            n1,
            sigma0,
            sigma1,
            r_exact,
            r_approx,
            multiplicity,
            threshold,
        }),
        exponent: mult_n * r_exact,
        approx_exponent: r_approx.map(|r| mult_n * r),
        p_e: error_probability_gaussian(r_exact, n, multiplicity).p_e,
    })
}

/// Coherent-state homodyne baseline:
/// `p_e = (1/2) erfc(sqrt(kappa N N_S / (2 (2 N_B + 1))))`.
pub fn coherent_homodyne(probe: &ProbeParams, channel: &ChannelParams) -> ReceiverReport {
    let n = probe.iterations();
    let energy = channel.kappa() * n as f64 * probe.n_s();
    let exponent = energy / (2.0 * (2.0 * channel.n_b() + 1.0));
    let approx_exponent = (channel.n_b() > 0.0).then(|| energy / (4.0 * channel.n_b()));
    ReceiverReport {
        model: ReceiverModel::CoherentHomodyne,
        iterations: n,
        photocount: None,
        exponent,
        approx_exponent,
        p_e: 0.5 * erfc(exponent.sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FfSfgVariant {
    /// One receiver on the two-mode squeezed vacuum return.
    Lone,
    /// One of the four receivers of the hyperentangled setup.
    HyperPerReceiver,
    /// All four hyperentangled receivers together.
    HyperTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FfSfgExponent {
    pub exact: f64,
    pub approx: f64,
}

/// Aggregate sum-frequency output photon number, which is the error
/// exponent: `N |<a_R a_I>|^2 / (1 + N_B_eff)` and its `N_B >> 1` limit.
pub fn ffsfg_exponent(probe: &ProbeParams, channel: &ChannelParams, variant: FfSfgVariant) -> Result<FfSfgExponent> {
    let n_b = channel.n_b();
    if n_b == 0.0 {
        return Err(Error::DivisionByZeroNoise);
    }
    let n = probe.iterations() as f64;
    let kappa = channel.kappa();
    let n_s = probe.n_s();
    // kappa N_S / N_B, shared so that equal approximations compare bitwise
    let normalized = kappa * n_s / n_b;
    let lone = || FfSfgExponent {
        exact: n * kappa * n_s * (n_s + 1.0) / (1.0 + n_b),
        approx: normalized * n,
    };
    let per_receiver = || -> Result<FfSfgExponent> {
        let c = returned_correlation(probe.n_s_prime(), kappa)?.magnitude;
        Ok(FfSfgExponent {
            exact: n * c * c / (1.0 + n_b / 4.0),
            approx: normalized / 2.0 * n,
        })
    };
    match variant {
        FfSfgVariant::Lone => Ok(lone()),
        FfSfgVariant::HyperPerReceiver => per_receiver(),
        FfSfgVariant::HyperTotal => {
            let one = per_receiver()?;
            Ok(FfSfgExponent {
                exact: 4.0 * one.exact,
                approx: 4.0 * one.approx,
            })
        }
    }
}

/// Report for the lone or the four-receiver hyperentangled FF-SFG setup.
pub fn ffsfg_report(probe: &ProbeParams, channel: &ChannelParams, hyper: bool) -> Result<ReceiverReport> {
    let (variant, model) = if hyper {
        (FfSfgVariant::HyperTotal, ReceiverModel::HyperFfSfg)
    } else {
        (FfSfgVariant::Lone, ReceiverModel::LoneFfSfg)
    };
    let e = ffsfg_exponent(probe, channel, variant)?;
    Ok(ReceiverReport {
        model,
        iterations: probe.iterations(),
        photocount: None,
        exponent: e.exact,
        approx_exponent: Some(e.approx),
        p_e: 0.5 * (-e.exact).exp(),
    })
}

/// Chernoff bound of the two-mode squeezed vacuum probe in the high-noise
/// regime, `(1/2) exp(-kappa N N_S / N_B)`.
pub fn tmsv_qcb(probe: &ProbeParams, channel: &ChannelParams) -> Result<f64> {
    if channel.n_b() == 0.0 {
        return Err(Error::DivisionByZeroNoise);
    }
    let exponent = channel.kappa() * probe.n_s() / channel.n_b() * probe.iterations() as f64;
    Ok(0.5 * (-exponent).exp())
}

/// Exact SNR as a function of amplifier gain.
pub fn gain_scan(
    probe: &ProbeParams,
    channel: &ChannelParams,
    variant: OpaVariant,
    gains: &[f64],
) -> Result<Vec<(f64, f64)>> {
    gains
        .iter()
        .map(|&g| {
            let opa = OpaParams::from_gain(g)?;
            let (n0, n1) = opa_output_means(probe, channel, &opa, variant)?;
            Ok((g, snr(n0, n1, thermal_sigma(n0), thermal_sigma(n1))?))
        })
        .collect()
}
