//! Validated parameter bundles and operating-regime classification.
//!
//! Every physical quantity is a dimensionless photon number, a reflectance,
//! a gain, or an integer count. Constructors reject values that make the
//! downstream formulas meaningless; `kappa = 0` and `N_B = 0` are accepted
//! and each consumer documents its own degenerate behavior.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported number of binary hyperentangled degrees of freedom.
pub const MAX_DOF: u32 = 16;

/// Factor used to read "much less than" as one order of magnitude.
pub const MUCH_LESS: f64 = 0.1;
/// Factor used to read "much greater than" as one order of magnitude.
pub const MUCH_GREATER: f64 = 10.0;

fn check_photon_number(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if value < 0.0 {
        return Err(Error::NegativePhotonNumber { name, value });
    }
    Ok(value)
}

/// Transmitter description: temporal modes, signal brightness, number of
/// hyperentangled binary degrees of freedom and number of iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeParams {
    modes: usize,
    n_s: f64,
    n_s_prime: f64,
    dof: u32,
    internal_dim: usize,
    iterations: u64,
}

impl ProbeParams {
    /// Validates raw transmitter fields. Signed integers are accepted so that
    /// zero and negative counts from untyped input produce a typed error.
    pub fn new(modes: i64, n_s: f64, dof: u32, iterations: i64) -> Result<Self> {
        if modes <= 0 {
            return Err(Error::NonPositiveM(modes));
        }
        let n_s = check_photon_number("N_S", n_s)?;
        if dof > MAX_DOF {
            return Err(Error::UnsupportedF(dof));
        }
        if iterations <= 0 {
            return Err(Error::NonPositiveIterations(iterations));
        }
        Ok(Self {
            modes: modes as usize,
            n_s,
            n_s_prime: n_s / 2.0,
            dof,
            internal_dim: 1usize << dof,
            iterations: iterations as u64,
        })
    }

    /// Temporal modes `M` spanned by one transmitter pulse.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Mean signal photon number `N_S` per mode.
    pub fn n_s(&self) -> f64 {
        self.n_s
    }

    /// Mean photon number per down-conversion source, `N_S / 2`.
    pub fn n_s_prime(&self) -> f64 {
        self.n_s_prime
    }

    /// Number of binary hyperentangled degrees of freedom `f`.
    pub fn dof(&self) -> u32 {
        self.dof
    }

    /// Internal dimension `d = 2^f`.
    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    /// Number of transmitter iterations `N`.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Same probe with a different iteration count.
    pub fn with_iterations(&self, iterations: i64) -> Result<Self> {
        Self::new(self.modes as i64, self.n_s, self.dof, iterations)
    }
}

/// Target channel: reflectance and thermal background per temporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    kappa: f64,
    n_b: f64,
}

impl ChannelParams {
    pub fn new(kappa: f64, n_b: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::NonFinite("kappa"));
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::ReflectanceOutOfRange(kappa));
        }
        let n_b = check_photon_number("N_B", n_b)?;
        Ok(Self { kappa, n_b })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_b(&self) -> f64 {
        self.n_b
    }
}

/// Parametric amplifier gain `G = 1 + epsilon^2`. The excess is stored on its
/// own so that `G - 1` never suffers cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpaParams {
    epsilon_sq: f64,
}

impl OpaParams {
    /// Default gain used for the published receiver comparison.
    pub const DEFAULT_GAIN: f64 = 1.005;
    /// `DEFAULT_GAIN - 1`, exact in decimal; the binary value of
    /// `DEFAULT_GAIN` is not.
    pub const DEFAULT_EPSILON_SQ: f64 = 0.005;

    pub fn from_epsilon_sq(epsilon_sq: f64) -> Result<Self> {
        if !epsilon_sq.is_finite() {
            return Err(Error::NonFinite("G"));
        }
        if epsilon_sq <= 0.0 {
            return Err(Error::InvalidGain(epsilon_sq));
        }
        Ok(Self { epsilon_sq })
    }

    pub fn from_gain(gain: f64) -> Result<Self> {
        Self::from_epsilon_sq(gain - 1.0)
    }

    pub fn gain(&self) -> f64 {
        1.0 + self.epsilon_sq
    }

    pub fn epsilon_sq(&self) -> f64 {
        self.epsilon_sq
    }
}

impl Default for OpaParams {
    fn default() -> Self {
        Self::from_epsilon_sq(Self::DEFAULT_EPSILON_SQ).expect("default gain is valid")
    }
}

/// Feed-forward sum-frequency receiver bookkeeping. The analytic exponents
/// assume `K` large; the value is carried for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FfSfgParams {
    cycles: u32,
}

impl FfSfgParams {
    pub fn new(cycles: u32) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::InvalidCycleCount);
        }
        Ok(Self { cycles })
    }

    pub fn cycles(&self) -> u32 {
        self.cycles
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `M N_B << 1` and `kappa << N_B / M`.
    LowNoiseBad,
    /// `N_B >> 1`, `N_S << 1`, `kappa << 1`.
    HighNoise,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Inequalities of the nearest regime that do not hold. Empty when the
    /// point is classified.
    pub violations: Vec<String>,
}

fn low_noise_violations(probe: &ProbeParams, channel: &ChannelParams) -> Vec<String> {
    let m = probe.modes() as f64;
    let mut out = Vec::new();
    let mnb = m * channel.n_b();
    if mnb >= MUCH_LESS {
        out.push(format!("M*N_B = {mnb} is not << 1 (needs < {MUCH_LESS})"));
    }
    let limit = MUCH_LESS * channel.n_b() / m;
    if channel.kappa() >= limit {
        out.push(format!(
            "kappa = {} is not << N_B/M (needs < {limit})",
            channel.kappa()
        ));
    }
    out
}

fn high_noise_violations(probe: &ProbeParams, channel: &ChannelParams) -> Vec<String> {
    let mut out = Vec::new();
    if channel.n_b() <= MUCH_GREATER {
        out.push(format!(
            "N_B = {} is not >> 1 (needs > {MUCH_GREATER})",
            channel.n_b()
        ));
    }
    if probe.n_s() >= MUCH_LESS {
        out.push(format!(
            "N_S = {} is not << 1 (needs < {MUCH_LESS})",
            probe.n_s()
        ));
    }
    if channel.kappa() >= MUCH_LESS {
        out.push(format!(
            "kappa = {} is not << 1 (needs < {MUCH_LESS})",
            channel.kappa()
        ));
    }
    out
}

/// Labels the operating point. Never fails: an unclassified point carries the
/// violated inequalities of whichever regime it is closest to (fewest
/// violations, low-noise on ties).
pub fn classify_regime(probe: &ProbeParams, channel: &ChannelParams) -> RegimeReport {
    let low = low_noise_violations(probe, channel);
    if low.is_empty() {
        return RegimeReport {
            regime: Regime::LowNoiseBad,
            violations: low,
        };
    }
    let high = high_noise_violations(probe, channel);
    if high.is_empty() {
        return RegimeReport {
            regime: Regime::HighNoise,
            violations: high,
        };
    }
    let violations = if high.len() < low.len() { high } else { low };
    RegimeReport {
        regime: Regime::Unclassified,
        violations,
    }
}
