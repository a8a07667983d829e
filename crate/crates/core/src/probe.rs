//! Low-noise hyperentangled biphoton state and the two hypothesis density
//! operators on the truncated (vacuum plus single photon) basis.
//!
//! Internal states `j` in `0..d` encode `f = log2(d)` binary degrees of
//! freedom as bits. The stored partner of a returned photon in state `j` is
//! `j ^ (d - 1)`: every degree of freedom flipped (H paired with V, signal
//! frequency paired with idler).

use faer::c64;

use crate::error::{Error, Result};
use crate::fock::{self, HermitianOperator, DEFAULT_DIM_CAP};

/// Index bookkeeping for the returned mode (vacuum first, then one photon in
/// temporal mode `k` with internal state `j`, `k` outer) and the stored mode
/// (always exactly one photon, same `(k, j)` ordering).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisLayout {
    modes: usize,
    internal_dim: usize,
}

impl BasisLayout {
    pub fn new(modes: usize, internal_dim: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NonPositiveM(0));
        }
        if !internal_dim.is_power_of_two() {
            return Err(Error::InvalidInternalDimension(internal_dim));
        }
        Ok(Self {
            modes,
            internal_dim,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    /// `1 + d M`.
    pub fn return_dim(&self) -> usize {
        1 + self.stored_dim()
    }

    /// `d M`.
    pub fn stored_dim(&self) -> usize {
        self.internal_dim * self.modes
    }

    pub fn joint_dim(&self) -> usize {
        self.return_dim() * self.stored_dim()
    }

    pub const VACUUM: usize = 0;

    /// Return-side index of one photon in temporal mode `k`, internal `j`.
    pub fn return_index(&self, k: usize, j: usize) -> usize {
        1 + self.stored_index(k, j)
    }

    pub fn stored_index(&self, k: usize, j: usize) -> usize {
        debug_assert!(k < self.modes && j < self.internal_dim);
        k * self.internal_dim + j
    }

    /// Inverse of [`Self::return_index`]; `None` for the vacuum.
    pub fn return_label(&self, index: usize) -> Option<(usize, usize)> {
        if index == Self::VACUUM {
            None
        } else {
            Some(self.stored_label(index - 1))
        }
    }

    pub fn stored_label(&self, index: usize) -> (usize, usize) {
        (index / self.internal_dim, index % self.internal_dim)
    }

    /// Internal state of the stored photon paired with returned state `j`.
    pub fn partner(&self, j: usize) -> usize {
        j ^ (self.internal_dim - 1)
    }

    pub fn joint_index(&self, return_index: usize, stored_index: usize) -> usize {
        return_index * self.stored_dim() + stored_index
    }
}

/// Normalized pure state on the joint return ⊗ stored space.
#[derive(Debug, Clone)]
pub struct PureState {
    pub layout: BasisLayout,
    pub amplitudes: Vec<c64>,
}

impl PureState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::projector(&self.amplitudes)
    }
}

fn check_cap(layout: &BasisLayout) -> Result<()> {
    let dim = layout.joint_dim();
    if dim > DEFAULT_DIM_CAP {
        return Err(Error::DimensionOverflow {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    Ok(())
}

/// The biphoton state: equal amplitude `1/sqrt(d M)` on every matched pair
/// (returned `(k, j)`, stored `(k, partner(j))`).
pub fn build_psi(modes: usize, internal_dim: usize) -> Result<PureState> {
    let layout = BasisLayout::new(modes, internal_dim)?;
    check_cap(&layout)?;
    let amp = c64::new(1.0 / (layout.stored_dim() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![c64::new(0.0, 0.0); layout.joint_dim()];
    for k in 0..modes {
        for j in 0..internal_dim {
            let r = layout.return_index(k, j);
            let t = layout.stored_index(k, layout.partner(j));
            amplitudes[layout.joint_index(r, t)] = amp;
        }
    }
    Ok(PureState { layout, amplitudes })
}

/// Thermal return truncated at one photon: vacuum weight `1 - M N_B` and
/// weight `N_B / d` on each of the `d M` single-photon states.
pub fn build_rho_thermal(modes: usize, internal_dim: usize, n_b: f64) -> Result<HermitianOperator> {
    let layout = BasisLayout::new(modes, internal_dim)?;
    if !n_b.is_finite() {
        return Err(Error::NonFinite("N_B"));
    }
    if n_b < 0.0 {
        return Err(Error::NegativePhotonNumber {
            name: "N_B",
            value: n_b,
        });
    }
    let mnb = modes as f64 * n_b;
    if mnb >= 1.0 {
        return Err(Error::InvalidRegime(mnb));
    }
    let mut diag = vec![n_b / internal_dim as f64; layout.return_dim()];
    diag[BasisLayout::VACUUM] = 1.0 - mnb;
    Ok(HermitianOperator::from_real_diagonal(&diag))
}

/// `rho_0 = rho_thermal ⊗ I / (d M)`.
pub fn build_rho0(modes: usize, internal_dim: usize, n_b: f64) -> Result<HermitianOperator> {
    let layout = BasisLayout::new(modes, internal_dim)?;
    check_cap(&layout)?;
    let thermal = build_rho_thermal(modes, internal_dim, n_b)?;
    let stored = HermitianOperator::maximally_mixed(layout.stored_dim());
    fock::tensor(&thermal, &stored)
}

/// `rho_1 = (1 - kappa) rho_0 + kappa |Psi><Psi|`.
pub fn build_rho1(rho0: &HermitianOperator, psi: &PureState, kappa: f64) -> Result<HermitianOperator> {
    if !kappa.is_finite() {
        return Err(Error::NonFinite("kappa"));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::ReflectanceOutOfRange(kappa));
    }
    rho0.combine(1.0 - kappa, &psi.projector(), kappa)
}

/// Both hypotheses for one operating point.
#[derive(Debug, Clone)]
pub struct Hypotheses {
    pub layout: BasisLayout,
    pub psi: PureState,
    pub rho0: HermitianOperator,
    pub rho1: HermitianOperator,
}

pub fn build_hypotheses(modes: usize, internal_dim: usize, kappa: f64, n_b: f64) -> Result<Hypotheses> {
    let psi = build_psi(modes, internal_dim)?;
    let rho0 = build_rho0(modes, internal_dim, n_b)?;
    let rho1 = build_rho1(&rho0, &psi, kappa)?;
    Ok(Hypotheses {
        layout: psi.layout,
        psi,
        rho0,
        rho1,
    })
}
