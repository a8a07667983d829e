//! Quantum Chernoff bound for the low-noise hyperentangled probe.
//!
//! Two independent routes evaluate `Q(s) = Tr[rho1^s rho0^(1-s)]`:
//!
//! * [`SpectralPair`] diagonalizes the dense hypothesis matrices and sums
//!   over eigenvector overlaps, with no knowledge of their structure.
//! * [`q_closed`] uses the diagonal-plus-rank-one structure of the states:
//!   `Q(s) = (1-k)^s [1 + c ((1 + k/((1-k)c))^s - 1)]` with `c = N_B/(d^2 M)`.
//!
//! In the bad regime `1 - Q` is of order `1e-10`, so both routes compute the
//! Chernoff distance `1 - Q` directly instead of subtracting from one.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, clamp_psd, eigh, HermitianOperator};
use crate::params::{ChannelParams, ProbeParams};
use crate::probe::Hypotheses;

/// Search bracket for the Chernoff exponent `s`.
pub const S_LOWER: f64 = 0.01;
pub const S_UPPER: f64 = 0.99;
/// Default golden-section bracket width at termination.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Minimized Chernoff quantity at `s_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffResult {
    pub s_star: f64,
    pub q_star: f64,
    pub one_minus_q: f64,
}

impl ChernoffResult {
    pub fn from_distance(s_star: f64, one_minus_q: f64) -> Self {
        Self {
            s_star,
            q_star: 1.0 - one_minus_q,
            one_minus_q,
        }
    }

    pub fn from_q(s_star: f64, q_star: f64) -> Self {
        Self {
            s_star,
            q_star,
            one_minus_q: 1.0 - q_star,
        }
    }

    /// `ln Q*`, accurate when `Q*` is close to one.
    pub fn ln_q(&self) -> f64 {
        if self.q_star > 0.5 {
            (-self.one_minus_q).ln_1p()
        } else {
            self.q_star.ln()
        }
    }

    /// Error exponent after `n` shots: `-n ln Q*`.
    pub fn n_shot_exponent(&self, n: u64) -> f64 {
        -(n as f64) * self.ln_q()
    }

    /// `(1/2) Q*^n`, evaluated in log space.
    pub fn n_shot_bound(&self, n: u64) -> f64 {
        0.5 * (-self.n_shot_exponent(n)).exp()
    }
}

/// `s a + (1-s) b - a^s b^(1-s)`, non-negative by weighted AM-GM and
/// evaluated without cancellation when `a ≈ b`.
pub fn chernoff_gap(a: f64, b: f64, s: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return s * a.max(0.0) + (1.0 - s) * b.max(0.0);
    }
    // a - b is exact when a and b are within a factor of two
    let x = ((a - b) / b).ln_1p();
    if x.abs() > 0.5 {
        let gap = s * a + (1.0 - s) * b - (s * a.ln() + (1.0 - s) * b.ln()).exp();
        return gap.max(0.0);
    }
    // b * sum_{k>=2} (s - s^k) x^k / k!
    let mut sum = 0.0;
    let mut xk_over_fact = x; // x^k / k!
    let mut sk = s;
    for k in 2..40 {
        xk_over_fact *= x / k as f64;
        sk *= s;
        let term = (s - sk) * xk_over_fact;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    (b * sum).max(0.0)
}

/// Eigen-decompositions of both hypotheses and their overlap weights
/// `w_ij = |<u_i|v_j>|^2` (`u` from `rho1`, `v` from `rho0`). After the
/// one-off setup, `Q(s)` costs `O(n^2)` per exponent.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    lambda0: Vec<f64>,
    lambda1: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralPair {
    pub fn new(rho0: &HermitianOperator, rho1: &HermitianOperator) -> Result<Self> {
        if rho0.dim() != rho1.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho0.dim(),
                actual: rho1.dim(),
            });
        }
        let e0 = eigh(rho0)?;
        let e1 = eigh(rho1)?;
        let lambda0 = clamp_psd(&e0)?;
        let lambda1 = clamp_psd(&e1)?;
        let overlap: Mat<faer::c64> = e1.vectors.adjoint() * e0.vectors.as_ref();
        let n = lambda0.len();
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                weights.push(overlap[(i, j)].norm_sqr());
            }
        }
        Ok(Self {
            lambda0,
            lambda1,
            weights,
        })
    }

    pub fn from_hypotheses(h: &Hypotheses) -> Result<Self> {
        Self::new(&h.rho0, &h.rho1)
    }

    pub fn dim(&self) -> usize {
        self.lambda0.len()
    }

    pub fn eigenvalues0(&self) -> &[f64] {
        &self.lambda0
    }

    pub fn eigenvalues1(&self) -> &[f64] {
        &self.lambda1
    }

    /// `1 - Tr[rho1^s rho0^(1-s)]` assuming both traces equal one.
    pub fn one_minus_q(&self, s: f64) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for (i, &a) in self.lambda1.iter().enumerate() {
            let row = &self.weights[i * n..(i + 1) * n];
            for (&w, &b) in row.iter().zip(&self.lambda0) {
                if w != 0.0 {
                    acc += w * chernoff_gap(a, b, s);
                }
            }
        }
        acc
    }

    pub fn q(&self, s: f64) -> f64 {
        1.0 - self.one_minus_q(s)
    }

    /// Direct sum `sum_ij w_ij a_i^s b_j^(1-s)`; loses `1 - Q` to rounding
    /// near `Q = 1` but is handy as a cross-check.
    pub fn q_direct(&self, s: f64) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for (i, &a) in self.lambda1.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let pa = a.powf(s);
            let row = &self.weights[i * n..(i + 1) * n];
            for (&w, &b) in row.iter().zip(&self.lambda0) {
                if b > 0.0 {
                    acc += w * pa * b.powf(1.0 - s);
                }
            }
        }
        acc
    }
}

fn check_open_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidExponent(s));
    }
    Ok(())
}

/// `Tr[rho1^s rho0^(1-s)]` from the dense matrices.
pub fn q_numeric(rho0: &HermitianOperator, rho1: &HermitianOperator, s: f64) -> Result<f64> {
    check_open_exponent(s)?;
    Ok(SpectralPair::new(rho0, rho1)?.q(s))
}

/// The literal definition: fractional powers, then the trace of their
/// product. Cubic per exponent, so only for small operators.
pub fn q_numeric_by_powers(rho0: &HermitianOperator, rho1: &HermitianOperator, s: f64) -> Result<f64> {
    check_open_exponent(s)?;
    let a = fock::frac_power(rho1, s)?;
    let b = fock::frac_power(rho0, 1.0 - s)?;
    fock::trace_product(&a, &b)
}

fn ln_q_closed(modes: usize, internal_dim: usize, kappa: f64, n_b: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidExponent(s));
    }
    if !kappa.is_finite() || !(0.0..=1.0).contains(&kappa) {
        return Err(Error::ReflectanceOutOfRange(kappa));
    }
    if !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::NegativePhotonNumber {
            name: "N_B",
            value: n_b,
        });
    }
    if modes == 0 {
        return Err(Error::NonPositiveM(0));
    }
    let m = modes as f64;
    if m * n_b >= 1.0 {
        return Err(Error::InvalidRegime(m * n_b));
    }
    if n_b == 0.0 {
        return Err(Error::ZeroNoiseDegenerate);
    }
    if kappa == 0.0 || s == 0.0 {
        return Ok(0.0);
    }
    let d = internal_dim as f64;
    let c = n_b / (d * d * m);
    if kappa == 1.0 {
        // rho1 = |Psi><Psi|, Q = <Psi| rho0^(1-s) |Psi>
        return Ok((1.0 - s) * c.ln());
    }
    let a = kappa / ((1.0 - kappa) * c);
    Ok(s * (-kappa).ln_1p() + (c * (s * a.ln_1p()).exp_m1()).ln_1p())
}

/// Closed-form `Q(s)` for `M` temporal modes and internal dimension `d`.
pub fn q_closed(modes: usize, internal_dim: usize, kappa: f64, n_b: f64, s: f64) -> Result<f64> {
    Ok(ln_q_closed(modes, internal_dim, kappa, n_b, s)?.exp())
}

/// Closed-form `1 - Q(s)`.
pub fn one_minus_q_closed(modes: usize, internal_dim: usize, kappa: f64, n_b: f64, s: f64) -> Result<f64> {
    Ok(-ln_q_closed(modes, internal_dim, kappa, n_b, s)?.exp_m1())
}

/// Golden-section search for the minimum of a unimodal function on
/// `[lo, hi]`. Returns the best sampled point.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |f: &mut F, x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteObjective(x))
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(&mut f, x1)?;
    let mut f2 = eval(&mut f, x2)?;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(&mut f, x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(&mut f, x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Minimizes `q_fn` over `s` in `[0.01, 0.99]`.
pub fn minimize_q<F: Fn(f64) -> f64>(q_fn: F, tol: f64) -> Result<ChernoffResult> {
    let (s, q) = golden_section_min(q_fn, S_LOWER, S_UPPER, tol)?;
    Ok(ChernoffResult::from_q(s, q))
}

/// Maximizes a Chernoff distance `s -> 1 - Q(s)`; equivalent to
/// [`minimize_q`] but keeps full relative precision on `1 - Q*`.
pub fn maximize_distance<F: Fn(f64) -> f64>(distance_fn: F, tol: f64) -> Result<ChernoffResult> {
    let (s, neg) = golden_section_min(|s| -distance_fn(s), S_LOWER, S_UPPER, tol)?;
    Ok(ChernoffResult::from_distance(s, -neg))
}

/// Minimized closed-form bound.
pub fn closed_form_bound(modes: usize, internal_dim: usize, kappa: f64, n_b: f64, tol: f64) -> Result<ChernoffResult> {
    // surface parameter errors before the search swallows them
    one_minus_q_closed(modes, internal_dim, kappa, n_b, 0.5)?;
    maximize_distance(
        |s| one_minus_q_closed(modes, internal_dim, kappa, n_b, s).unwrap_or(f64::NAN),
        tol,
    )
}

/// Minimized bound from the dense matrices.
pub fn numeric_bound(pair: &SpectralPair, tol: f64) -> Result<ChernoffResult> {
    maximize_distance(|s| pair.one_minus_q(s), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Protocol {
    /// Coherent-state probe; exponent is per total signal energy.
    CoherentState,
    SinglePhoton,
    TmsvLowNoise,
    TmsvHighNoise,
    HyperLowNoise,
    HyperGeneralF,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentCatalogEntry {
    pub protocol: Protocol,
    pub exponent: f64,
    pub prefactor: f64,
}

impl ExponentCatalogEntry {
    /// `prefactor * exp(-exponent)`.
    pub fn bound(&self) -> f64 {
        self.prefactor * (-self.exponent).exp()
    }
}

/// Analytic error exponents of every protocol in the comparison, all with
/// prefactor one half. The coherent-state entry is `kappa N_S` with no
/// iteration factor, as that bound is quoted per total energy.
pub fn exponent_catalog(probe: &ProbeParams, channel: &ChannelParams) -> Result<Vec<ExponentCatalogEntry>> {
    let n_b = channel.n_b();
    if n_b == 0.0 {
        return Err(Error::DivisionByZeroNoise);
    }
    let kappa = channel.kappa();
    let n = probe.iterations() as f64;
    let m = probe.modes() as f64;
    let n_s = probe.n_s();
    let tmsv_low = n * m * kappa * kappa / (8.0 * n_b);
    let gain = 4f64.powi(probe.dof() as i32);
    let entry = |protocol, exponent| ExponentCatalogEntry {
        protocol,
        exponent,
        prefactor: 0.5,
    };
    Ok(vec![
        entry(Protocol::CoherentState, kappa * n_s),
        entry(Protocol::SinglePhoton, n * kappa * kappa / (8.0 * n_b)),
        entry(Protocol::TmsvLowNoise, tmsv_low),
        entry(Protocol::TmsvHighNoise, kappa * n * n_s / n_b),
        entry(Protocol::HyperLowNoise, 2.0 * n * m * kappa * kappa / n_b),
        entry(Protocol::HyperGeneralF, gain * tmsv_low),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::build_hypotheses;
    use faer::c64;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gap_is_accurate_near_equal_arguments() {
        // s(1-s)x^2/2 leading term, x = ln(1 + 1e-7)
        let b = 6.25e-6;
        let a = b * (1.0 + 1e-7);
        let s = 0.5;
        let x = (1e-7f64).ln_1p();
        let expected = b * (s * (1.0 - s) * x * x / 2.0 + s * (1.0 - s * s) * x * x * x / 6.0);
        assert!(rel(chernoff_gap(a, b, s), expected) < 1e-9);
        assert_eq!(chernoff_gap(b, b, 0.3), 0.0);
        assert_eq!(chernoff_gap(0.0, 0.2, 0.25), 0.75 * 0.2);
        // direct branch
        let g = chernoff_gap(1.0, 0.1, 0.5);
        assert!((g - (0.55 - 0.1f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn identical_hypotheses_give_unity() {
        let h = build_hypotheses(2, 2, 0.0, 1e-2).unwrap();
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(q_numeric(&h.rho0, &h.rho1, s).unwrap(), 1.0);
        }
    }

    #[test]
    fn orthogonal_pure_states_give_zero() {
        let e0 = [c64::new(1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.0)];
        let e1 = [c64::new(0.0, 0.0), c64::new(0.6, 0.0), c64::new(0.0, 0.8)];
        let r0 = HermitianOperator::projector(&e0);
        let r1 = HermitianOperator::projector(&e1);
        assert!(q_numeric(&r0, &r1, 0.5).unwrap().abs() < 1e-14);
        assert!(q_numeric_by_powers(&r0, &r1, 0.3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn spectral_route_matches_literal_definition() {
        let h = build_hypotheses(3, 2, 1e-2, 5e-2).unwrap();
        let pair = SpectralPair::from_hypotheses(&h).unwrap();
        for s in [0.1, 0.5, 0.8] {
            let lit = q_numeric_by_powers(&h.rho0, &h.rho1, s).unwrap();
            assert!(rel(pair.q(s), lit) < 1e-13);
            assert!(rel(pair.q_direct(s), lit) < 1e-13);
        }
    }

    #[test]
    fn numeric_matches_closed_form_at_reference_point() {
        let (m, d, n_b, kappa) = (8, 4, 1e-3, 1e-5);
        let h = build_hypotheses(m, d, kappa, n_b).unwrap();
        let pair = SpectralPair::from_hypotheses(&h).unwrap();
        let closed = q_closed(m, d, kappa, n_b, 0.5).unwrap();
        assert!(rel(pair.q(0.5), closed) <= 1e-12);
        let dist = one_minus_q_closed(m, d, kappa, n_b, 0.5).unwrap();
        assert!(rel(pair.one_minus_q(0.5), dist) < 1e-6);
    }

    #[test]
    fn closed_form_trivial_and_error_cases() {
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(q_closed(4, 4, 0.0, 1e-3, s).unwrap(), 1.0);
        }
        assert_eq!(q_closed(4, 4, 1e-6, 0.0, 0.5), Err(Error::ZeroNoiseDegenerate));
        assert_eq!(q_closed(10, 4, 1e-6, 0.2, 0.5), Err(Error::InvalidRegime(2.0)));
        // kappa = 1: <Psi|rho0^(1-s)|Psi> = (N_B/(d^2 M))^(1-s)
        let q = q_closed(2, 2, 1.0, 1e-2, 0.25).unwrap();
        assert!(rel(q, (1e-2f64 / 8.0).powf(0.75)) < 1e-14);
        let h = build_hypotheses(2, 2, 1.0, 1e-2).unwrap();
        assert!(rel(q_numeric(&h.rho0, &h.rho1, 0.25).unwrap(), q) < 1e-12);
    }

    #[test]
    fn bad_regime_distance_matches_second_order_expansion() {
        let d = one_minus_q_closed(10, 4, 1e-7, 1e-3, 0.5).unwrap();
        let approx = 2.0 * 1e-14 * 10.0 / 1e-3;
        assert!(rel(d, approx) < 0.02, "{d:e}");
    }

    #[test]
    fn minimizer_sits_at_one_half_in_bad_regime() {
        let r = closed_form_bound(10, 4, 1e-7, 1e-3, DEFAULT_TOL).unwrap();
        assert!((r.s_star - 0.5).abs() < 0.02, "{}", r.s_star);
        assert!((r.one_minus_q + r.q_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn toy_minimizer() {
        let r = minimize_q(|s| ((s - 0.3) * (s - 0.3)).exp(), 1e-8).unwrap();
        assert!((r.s_star - 0.3).abs() < 1e-7);
        assert!((r.q_star - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let err = minimize_q(|s| if s > 0.5 { f64::NAN } else { s }, 1e-6).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective(_)));
    }

    #[test]
    fn brute_force_minimum_matches_closed_form() {
        let (m, d, kappa, n_b) = (4, 2, 1e-4, 1e-2);
        let pair = SpectralPair::from_hypotheses(&build_hypotheses(m, d, kappa, n_b).unwrap()).unwrap();
        let numeric = numeric_bound(&pair, DEFAULT_TOL).unwrap();
        let closed = closed_form_bound(m, d, kappa, n_b, DEFAULT_TOL).unwrap();
        assert!((numeric.s_star - closed.s_star).abs() < 1e-5);
        assert!((numeric.q_star - closed.q_star).abs() < 1e-8);
        assert!(rel(numeric.one_minus_q, closed.one_minus_q) < 1e-6);
    }

    #[test]
    fn n_shot_bound_in_log_space() {
        let r = ChernoffResult::from_q(0.5, 0.93);
        for n in [1u64, 10, 100, 1000, 9000] {
            let direct = 0.5 * 0.93f64.powi(n as i32);
            assert!(rel(r.n_shot_bound(n), direct) < 1e-12);
        }
        let tiny = ChernoffResult::from_distance(0.5, 2e-10);
        let b = tiny.n_shot_bound(1_000_000_000);
        assert!(rel(b, 0.5 * (-0.2f64).exp()) < 1e-9);
    }

    #[test]
    fn catalog_ratios() {
        let c = ChannelParams::new(1e-7, 1e-3).unwrap();
        for f in 0..4 {
            let p = ProbeParams::new(10, 0.01, f, 1000).unwrap();
            let cat = exponent_catalog(&p, &c).unwrap();
            let get = |proto| cat.iter().find(|e| e.protocol == proto).unwrap().exponent;
            assert!(rel(get(Protocol::HyperLowNoise) / get(Protocol::TmsvLowNoise), 16.0) < 1e-14);
            let gen = get(Protocol::HyperGeneralF) / get(Protocol::TmsvLowNoise);
            assert!(rel(gen, 4f64.powi(f as i32)) < 1e-14);
            assert!(cat.iter().all(|e| e.exponent >= 0.0 && e.prefactor == 0.5));
        }
        let p = ProbeParams::new(10, 0.01, 0, 1).unwrap();
        assert_eq!(
            exponent_catalog(&p, &ChannelParams::new(0.1, 0.0).unwrap()),
            Err(Error::DivisionByZeroNoise)
        );
    }

    #[test]
    fn log_q_is_convex_in_s() {
        for &(m, d, kappa, n_b) in &[(10, 4, 1e-7, 1e-3), (4, 2, 1e-3, 1e-2), (1, 1, 0.3, 0.5)] {
            let lq: Vec<f64> = (1..=99)
                .map(|i| ln_q_closed(m, d, kappa, n_b, i as f64 / 100.0).unwrap())
                .collect();
            for w in lq.windows(3) {
                assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-12);
            }
        }
    }

    #[test]
    fn distance_is_monotone_in_parameters() {
        let best = |m, kappa, n_b| closed_form_bound(m, 4, kappa, n_b, DEFAULT_TOL).unwrap().one_minus_q;
        let kappas = [1e-8, 3e-8, 1e-7, 3e-7];
        for w in kappas.windows(2) {
            assert!(best(10, w[0], 1e-3) <= best(10, w[1], 1e-3));
        }
        for w in [1usize, 2, 5, 10, 20].windows(2) {
            assert!(best(w[0], 1e-7, 1e-3) <= best(w[1], 1e-7, 1e-3));
        }
        for w in [1e-4, 3e-4, 1e-3, 3e-3].windows(2) {
            assert!(best(10, 1e-7, w[0]) >= best(10, 1e-7, w[1]));
        }
    }
}
