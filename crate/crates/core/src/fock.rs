//! Dense Hermitian operators on small structured Fock bases.
//!
//! Storage is a plain dense complex matrix even where the physical operator
//! is diagonal plus rank one, so that the numeric Chernoff evaluation shares
//! no structure with the closed form it is checked against.

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Largest operator dimension produced by [`tensor`] unless a cap is given.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Default bound on `max |A - A^H|` accepted at construction.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-12;
/// Relative floor below which eigenvalues of a PSD input are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-12;
/// Largest imaginary part tolerated in [`trace_product`].
pub const TRACE_IMAG_TOL: f64 = 1e-10;

/// A Hermitian matrix together with the tolerance it was validated against.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: Mat<c64>,
    hermitian_tol: f64,
}

impl HermitianOperator {
    pub fn from_matrix(entries: Mat<c64>) -> Result<Self> {
        Self::from_matrix_with_tol(entries, DEFAULT_HERMITIAN_TOL)
    }

    pub fn from_matrix_with_tol(entries: Mat<c64>, hermitian_tol: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        let n = entries.nrows();
        let mut dev = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        if !(dev <= hermitian_tol) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            entries,
            hermitian_tol,
        })
    }

    /// Averages `A` with `A^H`; used for results of products that are
    /// Hermitian in exact arithmetic.
    fn from_matrix_symmetrized(mut entries: Mat<c64>) -> Self {
        let n = entries.nrows();
        for j in 0..n {
            for i in 0..j {
                let avg = (entries[(i, j)] + entries[(j, i)].conj()) * 0.5;
                entries[(i, j)] = avg;
                entries[(j, i)] = avg.conj();
            }
            entries[(j, j)] = c64::new(entries[(j, j)].re, 0.0);
        }
        Self {
            entries,
            hermitian_tol: DEFAULT_HERMITIAN_TOL,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: Mat::zeros(n, n),
            hermitian_tol: DEFAULT_HERMITIAN_TOL,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; n])
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0 / n as f64; n])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let entries = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(diag[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        Self {
            entries,
            hermitian_tol: DEFAULT_HERMITIAN_TOL,
        }
    }

    /// Rank-one projector `|v><v|` (not normalized).
    pub fn projector(v: &[c64]) -> Self {
        let n = v.len();
        let entries = Mat::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self {
            entries,
            hermitian_tol: DEFAULT_HERMITIAN_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hermitian_tol(&self) -> f64 {
        self.hermitian_tol
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let n = self.dim();
        Self {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(i, j)] * factor),
            hermitian_tol: self.hermitian_tol,
        }
    }

    /// `a * self + b * other` with real coefficients.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same_dim(self, other)?;
        let n = self.dim();
        Ok(Self {
            entries: Mat::from_fn(n, n, |i, j| {
                self.entries[(i, j)] * a + other.entries[(i, j)] * b
            }),
            hermitian_tol: self.hermitian_tol.max(other.hermitian_tol),
        })
    }

    /// Trace one within `tol` and no eigenvalue below `-tol`.
    pub fn is_density_operator(&self, tol: f64) -> Result<bool> {
        if (self.trace() - 1.0).abs() > tol {
            return Ok(false);
        }
        let spectrum = eigh(self)?;
        Ok(spectrum.values.first().map_or(true, |&v| v >= -tol))
    }

    /// `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_dim(self, other)?;
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        Ok(m)
    }

    /// Matrix product; the result is Hermitian only when the factors commute.
    pub fn product_matrix(&self, other: &Self) -> Result<Mat<c64>> {
        check_same_dim(self, other)?;
        Ok(self.entries.as_ref() * other.entries.as_ref())
    }
}

fn check_same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// Kronecker product `A ⊗ B` with the default dimension cap.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(
    a: &HermitianOperator,
    b: &HermitianOperator,
    cap: usize,
) -> Result<HermitianOperator> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let entries = Mat::from_fn(dim, dim, |r, c| {
        a.entries[(r / db, c / db)] * b.entries[(r % db, c % db)]
    });
    Ok(HermitianOperator {
        entries,
        hermitian_tol: a.hermitian_tol.max(b.hermitian_tol),
    })
}

/// Which factor of a bipartite space survives [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of an operator on a `d1 x d2` bipartite space, with the
/// first factor as the slow index.
pub fn partial_trace(
    a: &HermitianOperator,
    dims: (usize, usize),
    keep: Keep,
) -> Result<HermitianOperator> {
    let (d1, d2) = dims;
    if d1 * d2 != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: d1 * d2,
            actual: a.dim(),
        });
    }
    let entries = match keep {
        Keep::First => Mat::from_fn(d1, d1, |i, j| {
            (0..d2)
                .map(|k| a.entries[(i * d2 + k, j * d2 + k)])
                .sum::<c64>()
        }),
        Keep::Second => Mat::from_fn(d2, d2, |k, l| {
            (0..d1)
                .map(|i| a.entries[(i * d2 + k, i * d2 + l)])
                .sum::<c64>()
        }),
    };
    Ok(HermitianOperator {
        entries,
        hermitian_tol: a.hermitian_tol,
    })
}

/// Eigendecomposition `A = V diag(values) V^H` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl Eigh {
    /// Rebuilds `V diag(f(values)) V^H`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianOperator {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * mapped[j]);
        let product = scaled.as_ref() * self.vectors.adjoint();
        HermitianOperator::from_matrix_symmetrized(product)
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.map(|v| v)
    }

    /// Spectral norm `max |lambda|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Runs all dense linear algebra on the calling thread. Callers that
/// parallelize over sweep points use this to keep results independent of
/// the thread count.
pub fn use_sequential_linalg() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Hermitian eigendecomposition (backed by `faer`).
pub fn eigh(a: &HermitianOperator) -> Result<Eigh> {
    let n = a.dim();
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let evd = a
        .entries
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::ConvergenceFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues of a PSD operator with rounding noise of either sign,
/// `|v| <= PSD_CLAMP * ||A||`, set to zero so that fractional powers of
/// singular operators stay exact. Fails when an eigenvalue lies below
/// `-PSD_CLAMP * ||A||`.
pub fn clamp_psd(spectrum: &Eigh) -> Result<Vec<f64>> {
    let tol = PSD_CLAMP * spectrum.norm();
    let floor = -tol;
    spectrum
        .values
        .iter()
        .map(|&v| {
            if v < floor {
                Err(Error::NotPositiveSemidefinite(v))
            } else {
                Ok(if v <= tol { 0.0 } else { v })
            }
        })
        .collect()
}

/// `A^s` for positive semidefinite `A` and `s` in `(0, 1]`, with `0^s = 0`.
pub fn frac_power(a: &HermitianOperator, s: f64) -> Result<HermitianOperator> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidExponent(s));
    }
    let spectrum = eigh(a)?;
    frac_power_of(&spectrum, s)
}

/// [`frac_power`] on an existing decomposition.
pub fn frac_power_of(spectrum: &Eigh, s: f64) -> Result<HermitianOperator> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidExponent(s));
    }
    let clamped = clamp_psd(spectrum)?;
    let n = clamped.len();
    let powered: Vec<f64> = clamped
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { v.powf(s) })
        .collect();
    let scaled = Mat::from_fn(n, n, |i, j| spectrum.vectors[(i, j)] * powered[j]);
    let product = scaled.as_ref() * spectrum.vectors.adjoint();
    Ok(HermitianOperator::from_matrix_symmetrized(product))
}

/// `Re Tr(A B)`; the imaginary part must vanish to within
/// [`TRACE_IMAG_TOL`].
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_same_dim(a, b)?;
    let n = a.dim();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a.entries[(i, j)] * b.entries[(j, i)];
        }
    }
    if acc.im.abs() > TRACE_IMAG_TOL {
        return Err(Error::NonRealTrace(acc.im));
    }
    Ok(acc.re)
}
