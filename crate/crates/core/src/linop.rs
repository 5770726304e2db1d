//! Dense complex linear-algebra kernel.
//!
//! Hermitian spectral decompositions, operator functions on the spectrum
//! (square root, support-restricted logarithm), partial traces, Kronecker
//! products, and tolerance-aware positivity checks. Everything downstream
//! (states, effects, channels, entropies) is built on the two types defined
//! here: a plain dense complex matrix and a validated Hermitian matrix.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::Error;
use crate::tol;
use crate::Result;

/// Dense complex matrix, row-major semantics at the API boundary.
pub type CMatrix = DMatrix<Complex<f64>>;

/// Dense complex vector.
pub type CVector = DVector<Complex<f64>>;

/// Which tensor factor of a bipartite operator to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// The first (left) factor, of dimension `dims.0`.
    First,
    /// The second (right) factor, of dimension `dims.1`.
    Second,
}

/// `d x d` identity.
pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// The matrix unit `|i><j|` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = Complex::new(1.0, 0.0);
    m
}

/// Max entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max entrywise modulus of the difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// True when every entry is finite.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian part `(m + m^dagger)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Real part of the trace.
pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Kronecker product; `(a ⊗ b)(i·dB+k, j·dB+l) = a(i,j)·b(k,l)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of a `(dA·dB) x (dA·dB)` operator over one factor.
///
/// Trace-preserving and linear; errors on a shape mismatch.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    let d = da * db;
    if da == 0 || db == 0 || m.nrows() != d || m.ncols() != d {
        return Err(Error::InvalidInput(format!(
            "partial trace expects a {d}x{d} operator for dims ({da},{db}), got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    match keep {
        Subsystem::First => {
            let mut out = CMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut s = Complex::new(0.0, 0.0);
                    for k in 0..db {
                        s += m[(i * db + k, j * db + k)];
                    }
                    out[(i, j)] = s;
                }
            }
            Ok(out)
        }
        Subsystem::Second => {
            let mut out = CMatrix::zeros(db, db);
            for k in 0..db {
                for l in 0..db {
                    let mut s = Complex::new(0.0, 0.0);
                    for i in 0..da {
                        s += m[(i * db + k, i * db + l)];
                    }
                    out[(k, l)] = s;
                }
            }
            Ok(out)
        }
    }
}

/// Square complex matrix validated to be Hermitian at construction.
///
/// The stored matrix is the exact Hermitian part of the input, so repeated
/// compositions cannot drift away from `M = M^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Validate and symmetrize. The Hermiticity residual
    /// `max |M - M^dagger|` must not exceed [`tol::TOL_HERM`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() == 0 || mat.nrows() != mat.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !all_finite(&mat) {
            return Err(Error::InvalidInput(
                "Hermitian matrix has non-finite entries".into(),
            ));
        }
        let residual = max_abs_diff(&mat, &mat.adjoint());
        if residual > tol::TOL_HERM {
            return Err(Error::InvalidInput(format!(
                "Hermiticity residual {residual:.3e} exceeds {:.1e}",
                tol::TOL_HERM
            )));
        }
        Ok(Self {
            mat: hermitian_part(&mat),
        })
    }

    /// Symmetrize without the residual gate. For outputs of operations that
    /// are Hermitian by construction, where only roundoff drift is possible.
    pub fn from_nearly_hermitian(mat: &CMatrix) -> Result<Self> {
        if mat.nrows() == 0 || mat.nrows() != mat.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !all_finite(mat) {
            return Err(Error::InvalidInput(
                "Hermitian matrix has non-finite entries".into(),
            ));
        }
        Ok(Self {
            mat: hermitian_part(mat),
        })
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        let mut m = CMatrix::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(v, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Full spectral decomposition with eigenvalues in ascending order.
    pub fn eig(&self) -> SpectralDecomposition {
        let se = self.mat.clone().symmetric_eigen();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(k));
        }
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    /// Smallest eigenvalue; callers apply their own positivity thresholds.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eig()
            .eigenvalues
            .first()
            .copied()
            .expect("nonempty spectrum")
    }

    /// Positive-semidefinite square root.
    ///
    /// Eigenvalues in `[-tol, 0)` are clipped to zero; anything below `-tol`
    /// is rejected as not positive semidefinite.
    pub fn sqrt_psd(&self, tol: f64) -> Result<HermitianMatrix> {
        self.spectral_map_psd(tol, f64::sqrt)
    }

    /// Logarithm restricted to the support: eigenvalues at or below `tol`
    /// map to 0, the rest to `ln`.
    pub fn log_on_support(&self, tol: f64) -> Result<HermitianMatrix> {
        let eig = self.eig();
        let min = eig.eigenvalues[0];
        if min < -tol {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance: tol,
            });
        }
        let mapped: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| if l <= tol { 0.0 } else { l.ln() })
            .collect();
        Ok(eig.assemble(&mapped))
    }

    /// Spectral inverse square root on the support; requires a strictly
    /// positive spectrum.
    pub fn inv_sqrt_strict(&self, tol: f64) -> Result<HermitianMatrix> {
        let eig = self.eig();
        let min = eig.eigenvalues[0];
        if min <= tol {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance: tol,
            });
        }
        let mapped: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / l.sqrt()).collect();
        Ok(eig.assemble(&mapped))
    }

    fn spectral_map_psd(&self, tol: f64, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let eig = self.eig();
        let min = eig.eigenvalues[0];
        if min < -tol {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance: tol,
            });
        }
        let mapped: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| if l < 0.0 { 0.0 } else { f(l) })
            .collect();
        Ok(eig.assemble(&mapped))
    }
}

/// Eigendecomposition `M = V diag(λ) V^dagger` with ascending eigenvalues and
/// unitary `V` (columns are eigenvectors).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Rebuild `V diag(f(λ)) V^dagger` for mapped eigenvalues.
    pub fn assemble(&self, mapped: &[f64]) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        debug_assert_eq!(mapped.len(), n);
        let mut scaled = self.eigenvectors.clone();
        for (col, &l) in mapped.iter().enumerate() {
            let mut c = scaled.column_mut(col);
            c *= Complex::new(l, 0.0);
        }
        let m = &scaled * self.eigenvectors.adjoint();
        HermitianMatrix {
            mat: hermitian_part(&m),
        }
    }

    /// Reconstruction `V diag(λ) V^dagger` of the original matrix.
    pub fn reconstruct(&self) -> CMatrix {
        self.assemble(&self.eigenvalues).into_matrix()
    }

    /// Unitarity residual `max |V^dagger V - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.eigenvalues.len();
        max_abs_diff(
            &(self.eigenvectors.adjoint() * &self.eigenvectors),
            &identity(n),
        )
    }
}
