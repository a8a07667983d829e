//! Phase-sensitive cross correlations of the hyperentangled source.
//!
//! Two polarization-entangled down-conversion sources with mean photon
//! number `N_S'` per mode are mixed on a balanced beam splitter. Each of the
//! four paired modes `(3, H, S)-(4, V, I)`, `(3, V, S)-(4, H, I)`,
//! `(3, H, I)-(4, V, S)`, `(3, V, I)-(4, H, S)` then carries
//! `<a b> = (i/2) sqrt(N_S' (N_S' + 1))`, and the two sources are taken to be
//! uncorrelated with each other.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frequency {
    Signal,
    Idler,
}

/// Spatial mode of a labelled field operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Port {
    /// Transmitted / stored beam-splitter output ports.
    Output3,
    Output4,
    /// Returned mode from the target.
    Returned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeLabel {
    pub port: Port,
    pub polarization: Polarization,
    pub frequency: Frequency,
}

impl ModeLabel {
    pub fn new(port: Port, polarization: Polarization, frequency: Frequency) -> Self {
        Self {
            port,
            polarization,
            frequency,
        }
    }

    /// Same port with both internal labels flipped.
    pub fn partner(&self, port: Port) -> Self {
        let polarization = match self.polarization {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        };
        let frequency = match self.frequency {
            Frequency::Signal => Frequency::Idler,
            Frequency::Idler => Frequency::Signal,
        };
        Self::new(port, polarization, frequency)
    }
}

/// A second moment `<a b>` with its magnitude and unit phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCorrelation {
    pub magnitude: f64,
    #[serde(skip)]
    pub phase: Complex64,
    pub mode_pair: (ModeLabel, ModeLabel),
}

impl CrossCorrelation {
    pub fn value(&self) -> Complex64 {
        self.phase * self.magnitude
    }
}

/// The four correlated mode pairs between the given ports.
pub fn paired_modes(first: Port, second: Port) -> [(ModeLabel, ModeLabel); 4] {
    use Frequency::*;
    use Polarization::*;
    [(H, Signal), (V, Signal), (H, Idler), (V, Idler)].map(|(p, f)| {
        let a = ModeLabel::new(first, p, f);
        (a, a.partner(second))
    })
}

fn check_prime(n_s_prime: f64) -> Result<()> {
    if !n_s_prime.is_finite() {
        return Err(Error::NonFinite("N_S'"));
    }
    if n_s_prime < 0.0 {
        return Err(Error::NegativePhotonNumber {
            name: "N_S'",
            value: n_s_prime,
        });
    }
    Ok(())
}

/// `(1/2) sqrt(N_S' (N_S' + 1))`.
pub fn source_correlation_magnitude(n_s_prime: f64) -> Result<f64> {
    check_prime(n_s_prime)?;
    Ok(0.5 * (n_s_prime * (n_s_prime + 1.0)).sqrt())
}

/// Correlation of the first paired mode, `(3, H, S)-(4, V, I)`. All four
/// pairs share this value; see [`phase_sensitive_correlations`].
pub fn phase_sensitive_correlation(n_s_prime: f64) -> Result<CrossCorrelation> {
    Ok(phase_sensitive_correlations(n_s_prime)?[0])
}

pub fn phase_sensitive_correlations(n_s_prime: f64) -> Result<[CrossCorrelation; 4]> {
    let magnitude = source_correlation_magnitude(n_s_prime)?;
    Ok(paired_modes(Port::Output3, Port::Output4).map(|mode_pair| CrossCorrelation {
        magnitude,
        phase: Complex64::i(),
        mode_pair,
    }))
}

/// Correlation between stored mode 3 and the returned mode,
/// `sqrt(kappa)` times the source value.
pub fn returned_correlation(n_s_prime: f64, kappa: f64) -> Result<CrossCorrelation> {
    if !kappa.is_finite() || !(0.0..=1.0).contains(&kappa) {
        return Err(Error::ReflectanceOutOfRange(kappa));
    }
    let source = source_correlation_magnitude(n_s_prime)?;
    Ok(CrossCorrelation {
        magnitude: kappa.sqrt() * source,
        phase: Complex64::i(),
        mode_pair: paired_modes(Port::Output3, Port::Returned)[0],
    })
}

/// Truncated series value together with its exact remaining tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub value: f64,
    pub tail_bound: f64,
}

/// Sums the thermal-distribution series for the correlation magnitude,
/// `2 * (1/4) sum_{n=1}^{n_max} n N'^(n-1/2) / (N'+1)^(n+1/2)`, term by term
/// in log space, smallest terms first.
pub fn correlation_series_oracle(n_s_prime: f64, n_max: u32) -> Result<SeriesEstimate> {
    check_prime(n_s_prime)?;
    if n_s_prime == 0.0 {
        return Ok(SeriesEstimate {
            value: 0.0,
            tail_bound: 0.0,
        });
    }
    let ln_x = n_s_prime.ln();
    let ln_x1 = n_s_prime.ln_1p();
    let log_term = |n: f64| n.ln() + (n - 0.5) * ln_x - (n + 0.5) * ln_x1;
    let value: f64 = (1..=n_max).rev().map(|n| log_term(n as f64).exp()).sum::<f64>() * 0.5;
    // sum_{n>K} n r^n = r^(K+1) ((K+1) - K r) / (1-r)^2 with r = N'/(N'+1)
    let k = n_max as f64;
    let ln_r = ln_x - ln_x1;
    let r = ln_r.exp();
    let ln_tail = (k + 1.0) * ln_r + ((k + 1.0) - k * r).ln() + 2.0 * ln_x1
        - 0.5 * (ln_x + ln_x1);
    Ok(SeriesEstimate {
        value,
        tail_bound: 0.5 * ln_tail.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_source_has_no_correlation() {
        assert_eq!(phase_sensitive_correlation(0.0).unwrap().magnitude, 0.0);
        let s = correlation_series_oracle(0.0, 10).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn closed_form_agrees_with_series() {
        for n_s_prime in [0.005, 0.5] {
            let closed = phase_sensitive_correlation(n_s_prime).unwrap().magnitude;
            let series = correlation_series_oracle(n_s_prime, 500).unwrap();
            assert!((closed - series.value).abs() <= 1e-12);
        }
        let m = phase_sensitive_correlation(0.005).unwrap().magnitude;
        assert!((m - 0.035_443_617_196_894_563).abs() < 1e-15, "{m}");
        let m = phase_sensitive_correlation(0.5).unwrap().magnitude;
        assert!((m - 0.5 * 0.75f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn short_series_is_visibly_truncated() {
        let closed = phase_sensitive_correlation(0.5).unwrap().magnitude;
        let short = correlation_series_oracle(0.5, 10).unwrap();
        assert!((closed - short.value).abs() > 1e-6);
        // the reported tail is the exact remainder
        assert!((closed - short.value - short.tail_bound).abs() < 1e-14);
    }

    #[test]
    fn all_four_pairs_share_the_value() {
        let c = phase_sensitive_correlations(0.2).unwrap();
        assert!(c.iter().all(|x| x.magnitude == c[0].magnitude && x.phase == Complex64::i()));
        let pairs: Vec<_> = c.iter().map(|x| x.mode_pair).collect();
        assert_eq!(
            pairs[0],
            (
                ModeLabel::new(Port::Output3, Polarization::H, Frequency::Signal),
                ModeLabel::new(Port::Output4, Polarization::V, Frequency::Idler)
            )
        );
        assert_eq!(
            pairs[3],
            (
                ModeLabel::new(Port::Output3, Polarization::V, Frequency::Idler),
                ModeLabel::new(Port::Output4, Polarization::H, Frequency::Signal)
            )
        );
        assert_eq!(c[1].value(), Complex64::new(0.0, c[1].magnitude));
    }

    #[test]
    fn returned_correlation_examples() {
        assert_eq!(returned_correlation(0.005, 0.0).unwrap().magnitude, 0.0);
        let src = phase_sensitive_correlation(0.005).unwrap().magnitude;
        assert_eq!(returned_correlation(0.005, 1.0).unwrap().magnitude, src);
        let r = returned_correlation(0.005, 0.01).unwrap().magnitude;
        assert!((r - 0.003_544_361_719_689_456).abs() < 1e-15);
        // equivalent N_S form: sqrt(kappa N_S (N_S/2 + 1)) / (2 sqrt 2)
        let n_s: f64 = 0.01;
        let alt = (0.01 * n_s * (n_s / 2.0 + 1.0)).sqrt() / (2.0 * 2f64.sqrt());
        assert!((r - alt).abs() < 1e-16);
        assert!(returned_correlation(0.005, 1.5).is_err());
        assert!(phase_sensitive_correlation(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn series_converges_to_closed_form(n_s_prime in 1e-4f64..0.9) {
            let s = correlation_series_oracle(n_s_prime, 500).unwrap();
            prop_assume!(s.tail_bound <= 1e-13);
            let c = source_correlation_magnitude(n_s_prime).unwrap();
            prop_assert!((s.value - c).abs() / c <= 1e-12);
        }

        #[test]
        fn returned_scales_with_root_kappa(n_s_prime in 0.0f64..2.0, kappa in 1e-6f64..=1.0) {
            let src = source_correlation_magnitude(n_s_prime).unwrap();
            let ret = returned_correlation(n_s_prime, kappa).unwrap().magnitude;
            prop_assert_eq!(ret, kappa.sqrt() * src);
        }

        #[test]
        fn monotone_in_source_brightness(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(source_correlation_magnitude(lo).unwrap() <= source_correlation_magnitude(hi).unwrap());
        }
    }
}
