//! Quantum operations and channels in Kraus form.
//!
//! Conversion to and from the Choi matrix, duals, sequential and parallel
//! composition, and the classification predicates used by the audits:
//! trace behavior, unitality/bistochasticity, strict positivity, and
//! purity preservation (single-Kraus vs trash-and-prepare vs neither).

use nalgebra::Complex;

use crate::error::Error;
use crate::linop::{self, CMatrix, CVector, HermitianMatrix};
use crate::qobjects::{random, Effect};
use crate::sweep::subseed;
use crate::tol;
use crate::Result;

/// Completely positive, trace-non-increasing map in Kraus form.
///
/// Kraus operators are `out_dim x in_dim`; the sum `sum K^dagger K` may not
/// exceed the identity beyond the psd tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperation {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumOperation {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidInput(
                "operation needs at least one Kraus operator".into(),
            ));
        };
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidInput(
                "Kraus operators must be nonempty".into(),
            ));
        }
        let mut effect = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.shape() != (out_dim, in_dim) {
                return Err(Error::InvalidInput(
                    "all Kraus operators must share one shape".into(),
                ));
            }
            if !linop::all_finite(k) {
                return Err(Error::InvalidInput(
                    "Kraus operator has non-finite entries".into(),
                ));
            }
            effect += k.adjoint() * k;
        }
        let max_eig = HermitianMatrix::from_nearly_hermitian(&effect)?
            .eig()
            .eigenvalues
            .last()
            .copied()
            .expect("nonempty spectrum");
        if max_eig > 1.0 + tol::tol_psd() {
            return Err(Error::InvalidInput(format!(
                "operation increases trace: max eigenvalue of sum K^dagger K is {max_eig}"
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
        })
    }

    /// The identity channel on dimension `d`.
    pub fn identity(d: usize) -> Result<Self> {
        Self::new(vec![linop::identity(d)])
    }

    /// Unitary conjugation `U . U^dagger`; `U` must be unitary to 1e-9.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let d = u.nrows();
        if d == 0 || u.ncols() != d {
            return Err(Error::InvalidInput("unitary must be square".into()));
        }
        let residual = linop::max_abs_diff(&(u.adjoint() * u), &linop::identity(d));
        if residual > tol::TOL_EQ {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary: residual {residual:.3e}"
            )));
        }
        Self::new(vec![u.clone()])
    }

    /// Completely depolarizing channel `tr[.] 1/d`.
    pub fn completely_depolarizing(d: usize) -> Result<Self> {
        let scale = Complex::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for m in 0..d {
            for i in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(m, i)] = scale;
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `sum_i K_i m K_i^dagger`.
    pub fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.in_dim || m.ncols() != self.in_dim {
            return Err(Error::InvalidInput(format!(
                "apply expects a {0}x{0} operator, got {1}x{2}",
                self.in_dim,
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    /// Dual (Heisenberg picture) action `sum_i K_i^dagger m K_i`.
    pub fn dual_apply(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.out_dim || m.ncols() != self.out_dim {
            return Err(Error::InvalidInput(format!(
                "dual_apply expects a {0}x{0} operator, got {1}x{2}",
                self.out_dim,
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            out += k.adjoint() * m * k;
        }
        Ok(out)
    }

    /// The compatible effect `sum K^dagger K` (the dual applied to the unit).
    pub fn compatible_effect(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::from_nearly_hermitian(&self.dual_apply(&linop::identity(self.out_dim))?)
    }

    /// Sequential composition `after o before`.
    pub fn compose(after: &QuantumOperation, before: &QuantumOperation) -> Result<Self> {
        if after.in_dim != before.out_dim {
            return Err(Error::InvalidInput(format!(
                "composition dimension mismatch: {} vs {}",
                after.in_dim, before.out_dim
            )));
        }
        let mut kraus = Vec::with_capacity(after.kraus.len() * before.kraus.len());
        for a in &after.kraus {
            for b in &before.kraus {
                kraus.push(a * b);
            }
        }
        Self::new(kraus)
    }

    /// Parallel composition with Kraus set `{A_i ⊗ B_j}`.
    pub fn tensor(a: &QuantumOperation, b: &QuantumOperation) -> Result<Self> {
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(linop::kron(ka, kb));
            }
        }
        Self::new(kraus)
    }

    /// Choi matrix of the map: blocks `Phi(|i><j|)` on the unnormalized
    /// maximally entangled input, so that trace preservation is equivalent
    /// to the output-side partial trace being the identity.
    pub fn to_choi(&self) -> ChoiMatrix {
        let d_in = self.in_dim;
        let d_out = self.out_dim;
        let n = d_in * d_out;
        let mut choi = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let v = vectorize(k);
            choi += &v * v.adjoint();
        }
        ChoiMatrix {
            in_dim: d_in,
            out_dim: d_out,
            matrix: HermitianMatrix::from_nearly_hermitian(&choi)
                .expect("Choi of finite Kraus set is Hermitian"),
        }
    }

    /// Minimal number of Kraus operators (Choi rank).
    ///
    /// Computed from the Gram matrix `G_ij = tr[K_i^dagger K_j]`, which has
    /// the same nonzero spectrum as the Choi matrix, so the rank threshold
    /// (relative to the largest eigenvalue) is identical while the
    /// decomposition stays cheap for high-dimensional joint-space channels.
    pub fn min_kraus_count(&self, tol_rank: f64) -> usize {
        let m = self.kraus.len();
        let mut gram = CMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                gram[(i, j)] = (self.kraus[i].adjoint() * &self.kraus[j]).trace();
            }
        }
        let eig = HermitianMatrix::from_nearly_hermitian(&gram)
            .expect("Gram matrix is Hermitian")
            .eig();
        rank_from_spectrum(&eig.eigenvalues, tol_rank)
    }
}

fn rank_from_spectrum(ascending: &[f64], tol_rank: f64) -> usize {
    let max = ascending.last().copied().unwrap_or(0.0).max(0.0);
    if max <= 0.0 {
        return 0;
    }
    ascending.iter().filter(|&&l| l > tol_rank * max).count()
}

/// Column-major vectorization matching the Choi convention used here:
/// `v[i * out_dim + k] = K[k, i]`.
fn vectorize(k: &CMatrix) -> CVector {
    let (out_dim, in_dim) = k.shape();
    let mut v = CVector::zeros(in_dim * out_dim);
    for i in 0..in_dim {
        for r in 0..out_dim {
            v[i * out_dim + r] = k[(r, i)];
        }
    }
    v
}

/// Choi matrix `(id ⊗ Phi)` applied to the unnormalized maximally entangled
/// matrix; positive semidefinite exactly when the map is completely positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    in_dim: usize,
    out_dim: usize,
    matrix: HermitianMatrix,
}

impl ChoiMatrix {
    pub fn new(in_dim: usize, out_dim: usize, matrix: HermitianMatrix) -> Result<Self> {
        if matrix.dim() != in_dim * out_dim {
            return Err(Error::InvalidInput(format!(
                "Choi matrix must have dimension {}, got {}",
                in_dim * out_dim,
                matrix.dim()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            matrix,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// Numerical rank at `tol_rank` relative to the largest eigenvalue.
    pub fn rank(&self, tol_rank: f64) -> usize {
        rank_from_spectrum(&self.matrix.eig().eigenvalues, tol_rank)
    }

    /// Output-side reduced matrix `sum_i block(i, i)` (partial trace over
    /// the input index).
    pub fn output_reduction(&self) -> Result<CMatrix> {
        linop::partial_trace(
            self.matrix.matrix(),
            (self.in_dim, self.out_dim),
            linop::Subsystem::Second,
        )
    }
}

/// Max-norm distance between the Choi matrices of two operations; the
/// equality metric used throughout the crate.
pub fn choi_distance(a: &QuantumOperation, b: &QuantumOperation) -> f64 {
    linop::max_abs_diff(a.to_choi().matrix(), b.to_choi().matrix())
}

/// Extract a Kraus decomposition from a Choi matrix by spectral
/// decomposition; returns exactly `rank(c, tol_rank)` Kraus operators.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol_rank: f64) -> Result<QuantumOperation> {
    let eig = choi.matrix.eig();
    let min = eig.eigenvalues[0];
    if min < -tol::tol_psd() {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: min,
        });
    }
    let max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let (d_in, d_out) = (choi.in_dim, choi.out_dim);
    let mut kraus = Vec::new();
    for (idx, &l) in eig.eigenvalues.iter().enumerate() {
        if max > 0.0 && l > tol_rank * max {
            let col = eig.eigenvectors.column(idx);
            let mut k = CMatrix::zeros(d_out, d_in);
            let s = Complex::new(l.sqrt(), 0.0);
            for i in 0..d_in {
                for r in 0..d_out {
                    k[(r, i)] = s * col[i * d_out + r];
                }
            }
            kraus.push(k);
        }
    }
    if kraus.is_empty() {
        // Zero map: keep a single zero Kraus operator so the type stays valid.
        kraus.push(CMatrix::zeros(d_out, d_in));
    }
    QuantumOperation::new(kraus)
}

/// Build an operation from its action on the matrix units. The action must
/// be completely positive; the resulting Choi matrix is checked for
/// positivity during Kraus extraction.
pub fn operation_from_action<F>(
    in_dim: usize,
    out_dim: usize,
    action: F,
) -> Result<QuantumOperation>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let n = in_dim * out_dim;
    let mut choi = CMatrix::zeros(n, n);
    for i in 0..in_dim {
        for j in 0..in_dim {
            let block = action(&linop::matrix_unit(in_dim, i, j))?;
            if block.shape() != (out_dim, out_dim) {
                return Err(Error::InvalidInput(
                    "action output dimension mismatch".into(),
                ));
            }
            for r in 0..out_dim {
                for c in 0..out_dim {
                    choi[(i * out_dim + r, j * out_dim + c)] = block[(r, c)];
                }
            }
        }
    }
    let choi = ChoiMatrix::new(
        in_dim,
        out_dim,
        HermitianMatrix::from_nearly_hermitian(&choi)?,
    )?;
    kraus_from_choi(&choi, tol::tol_rank())
}

/// Classification flags for a quantum operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ChannelClassification {
    pub trace_preserving: bool,
    pub trace_nonincreasing: bool,
    /// Maps the unit to the unit.
    pub unital: bool,
    /// Trace preserving and unital (square maps only).
    pub bistochastic: bool,
    /// Maps strictly positive operators to strictly positive operators,
    /// decided through the action on the unit.
    pub strictly_positive: bool,
    /// Choi rank: the minimal number of Kraus operators.
    pub min_kraus_count: usize,
}

pub fn classify_channel(op: &QuantumOperation) -> ChannelClassification {
    let d_in = op.in_dim();
    let d_out = op.out_dim();
    let effect = op
        .dual_apply(&linop::identity(d_out))
        .expect("identity has the right shape");
    let tp_residual = linop::max_abs_diff(&effect, &linop::identity(d_in));
    let trace_preserving = tp_residual <= tol::TOL_TP;
    let max_effect_eig = HermitianMatrix::from_nearly_hermitian(&effect)
        .expect("effect is Hermitian")
        .eig()
        .eigenvalues
        .last()
        .copied()
        .expect("nonempty spectrum");
    let trace_nonincreasing = max_effect_eig <= 1.0 + tol::tol_psd();

    let image_of_unit = op
        .apply(&linop::identity(d_in))
        .expect("identity has the right shape");
    let unital = linop::max_abs_diff(&image_of_unit, &linop::identity(d_out)) <= tol::TOL_TP;
    let bistochastic = trace_preserving && unital && d_in == d_out;
    let strictly_positive = HermitianMatrix::from_nearly_hermitian(&image_of_unit)
        .expect("image of unit is Hermitian")
        .min_eigenvalue()
        > tol::tol_strict();

    ChannelClassification {
        trace_preserving,
        trace_nonincreasing,
        unital,
        bistochastic,
        strictly_positive,
        min_kraus_count: op.min_kraus_count(tol::tol_rank()),
    }
}

/// Which of the two purity-preserving normal forms an operation has, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum PurityTag {
    /// `K . K^dagger` for a single Kraus operator (completely
    /// purity-preserving); the witness is `K`.
    SingleKraus { witness: CMatrix },
    /// `tr[E .] |phi><phi|`; the witness is the pair `(E, phi)`.
    PurePrepare {
        effect: Effect,
        preparation: CVector,
    },
    /// Outputs of pure inputs are mixed.
    NotPurityPreserving,
}

/// Purity classification with the margin diagnostic for near-boundary maps.
#[derive(Debug, Clone, PartialEq)]
pub struct PurityClass {
    pub tag: PurityTag,
    /// Ratio of the second to the largest Choi eigenvalue; zero margin means
    /// unambiguously rank one, values near the rank tolerance flag a
    /// borderline call.
    pub rank_margin: f64,
}

impl PurityClass {
    pub fn is_purity_preserving(&self) -> bool {
        !matches!(self.tag, PurityTag::NotPurityPreserving)
    }

    pub fn is_single_kraus(&self) -> bool {
        matches!(self.tag, PurityTag::SingleKraus { .. })
    }
}

/// Number of seeded pure inputs sampled by the purity cross-check.
const PURITY_SAMPLES: usize = 25;
/// Seed namespace for the purity cross-check sampling.
const PURITY_SAMPLING_SEED: u64 = 0x5054_4553; // "PTES"
/// Relative second-eigenvalue bound certifying a pure output.
const PURITY_OUTPUT_TOL: f64 = 1e-8;

/// Classify an operation by the structure of its Choi matrix, cross-checked
/// against direct sampling of pure inputs. The two tests must agree; a
/// disagreement (possible only for borderline spectra) is reported as
/// [`Error::AmbiguousClassification`] instead of a guess.
pub fn purity_class(op: &QuantumOperation) -> Result<PurityClass> {
    let choi = op.to_choi();
    let eig = choi.hermitian().eig();
    let n = eig.eigenvalues.len();
    let largest = eig.eigenvalues[n - 1].max(0.0);
    let second = if n >= 2 {
        eig.eigenvalues[n - 2].max(0.0)
    } else {
        0.0
    };
    let rank_margin = if largest > 0.0 { second / largest } else { 0.0 };

    let sampled_pure = sampling_says_pure(op);

    // Rank-one Choi: single Kraus operator.
    if largest <= 0.0 || second <= tol::tol_rank() * largest {
        if !sampled_pure {
            return Err(Error::AmbiguousClassification(format!(
                "Choi spectrum is rank one (margin {rank_margin:.3e}) but sampled outputs are mixed"
            )));
        }
        let col = eig.eigenvectors.column(n - 1);
        let s = Complex::new(largest.sqrt(), 0.0);
        let mut k = CMatrix::zeros(op.out_dim(), op.in_dim());
        for i in 0..op.in_dim() {
            for r in 0..op.out_dim() {
                k[(r, i)] = s * col[i * op.out_dim() + r];
            }
        }
        return Ok(PurityClass {
            tag: PurityTag::SingleKraus { witness: k },
            rank_margin,
        });
    }

    // Trash-and-prepare form: Choi factorizes as E^T ⊗ |phi><phi|.
    if let Some((effect, preparation)) = pure_prepare_witness(op, &choi)? {
        if !sampled_pure {
            return Err(Error::AmbiguousClassification(
                "Choi factorizes as prepare-form but sampled outputs are mixed".into(),
            ));
        }
        return Ok(PurityClass {
            tag: PurityTag::PurePrepare {
                effect,
                preparation,
            },
            rank_margin,
        });
    }

    if sampled_pure {
        return Err(Error::AmbiguousClassification(format!(
            "sampled outputs are pure but the Choi matrix matches neither normal form (margin {rank_margin:.3e})"
        )));
    }
    Ok(PurityClass {
        tag: PurityTag::NotPurityPreserving,
        rank_margin,
    })
}

fn sampling_says_pure(op: &QuantumOperation) -> bool {
    for trial in 0..PURITY_SAMPLES {
        let rho = random::pure_state(op.in_dim(), subseed(PURITY_SAMPLING_SEED, trial as u64))
            .expect("in_dim >= 1");
        let out = op.apply(rho.matrix()).expect("dimensions match");
        let eig = HermitianMatrix::from_nearly_hermitian(&out)
            .expect("output of CP map on Hermitian input is Hermitian")
            .eig();
        let n = eig.eigenvalues.len();
        let trace: f64 = eig.eigenvalues.iter().sum();
        let second = if n >= 2 {
            eig.eigenvalues[n - 2].max(0.0)
        } else {
            0.0
        };
        // Absolute slack keeps near-zero-probability outputs from tripping
        // the relative test on eigensolver noise.
        if second > PURITY_OUTPUT_TOL * trace.max(0.0) + 1e-12 {
            return false;
        }
    }
    true
}

fn pure_prepare_witness(
    op: &QuantumOperation,
    choi: &ChoiMatrix,
) -> Result<Option<(Effect, CVector)>> {
    let reduced = choi.output_reduction()?;
    let red = HermitianMatrix::from_nearly_hermitian(&reduced)?;
    let eig = red.eig();
    let n = eig.eigenvalues.len();
    let largest = eig.eigenvalues[n - 1].max(0.0);
    let second = if n >= 2 {
        eig.eigenvalues[n - 2].max(0.0)
    } else {
        0.0
    };
    if largest <= 0.0 || second > tol::tol_rank() * largest {
        return Ok(None);
    }
    let phi = eig.eigenvectors.column(n - 1).into_owned();
    // Candidate effect from the overlap of each Choi block with |phi><phi|.
    let d_in = op.in_dim();
    let d_out = op.out_dim();
    let mut effect_t = CMatrix::zeros(d_in, d_in);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut s = Complex::new(0.0, 0.0);
            for r in 0..d_out {
                for c in 0..d_out {
                    s += phi[r].conj() * choi.matrix()[(i * d_out + r, j * d_out + c)] * phi[c];
                }
            }
            effect_t[(i, j)] = s;
        }
    }
    // Residual of the factorization Choi = E^T ⊗ |phi><phi|.
    let phi_proj = &phi * phi.adjoint();
    let candidate = linop::kron(&effect_t, &phi_proj);
    let residual = linop::max_abs_diff(&candidate, choi.matrix());
    if residual > PURITY_OUTPUT_TOL {
        return Ok(None);
    }
    let effect = Effect::new(HermitianMatrix::from_nearly_hermitian(
        &effect_t.transpose(),
    )?)?;
    Ok(Some((effect, phi)))
}
