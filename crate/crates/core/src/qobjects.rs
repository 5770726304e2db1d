//! States, effects, observables (POVMs), and seeded random generators.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::linop::{self, CMatrix, CVector, HermitianMatrix};
use crate::sweep::subseed;
use crate::tol;
use crate::Result;

/// Density matrix: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    mat: HermitianMatrix,
}

impl State {
    pub fn new(mat: HermitianMatrix) -> Result<Self> {
        let min = mat.min_eigenvalue();
        if min < -tol::tol_psd() {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance: tol::tol_psd(),
            });
        }
        let tr = linop::trace_re(mat.matrix());
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "state trace {tr} deviates from 1 beyond 1e-10"
            )));
        }
        Ok(Self { mat })
    }

    /// `1/d` on a `d`-dimensional space.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("state dimension must be >= 1".into()));
        }
        let m = linop::identity(dim) * Complex::new(1.0 / dim as f64, 0.0);
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Rank-1 projector onto a unit vector (the vector is normalized here).
    pub fn pure(vector: &CVector) -> Result<Self> {
        let norm = vector.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(
                "pure state vector must be nonzero".into(),
            ));
        }
        let v = vector / Complex::new(norm, 0.0);
        let proj = &v * v.adjoint();
        Self::new(HermitianMatrix::from_nearly_hermitian(&proj)?)
    }

    /// Basis state `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        Self::new(HermitianMatrix::new(linop::matrix_unit(dim, k, k))?)
    }

    /// Convex mixture `sum_i w_i rho_i`; weights must sum to 1.
    pub fn mix(parts: &[(f64, &State)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("empty mixture".into()));
        }
        let dim = parts[0].1.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, s) in parts {
            if s.dim() != dim {
                return Err(Error::InvalidInput("mixture dimension mismatch".into()));
            }
            acc += s.matrix() * Complex::new(*w, 0.0);
        }
        Self::new(HermitianMatrix::from_nearly_hermitian(&acc)?)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.mat.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.min_eigenvalue()
    }

    /// Strictly positive (full rank) at the strictness tolerance.
    pub fn is_strictly_positive(&self) -> bool {
        self.min_eigenvalue() > tol::tol_strict()
    }
}

/// POVM element: `0 <= E <= 1` within the psd tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    mat: HermitianMatrix,
}

impl Effect {
    pub fn new(mat: HermitianMatrix) -> Result<Self> {
        let eig = mat.eig();
        let min = eig.eigenvalues[0];
        let max = *eig.eigenvalues.last().expect("nonempty spectrum");
        if min < -tol::tol_psd() || max > 1.0 + tol::tol_psd() {
            return Err(Error::InvalidInput(format!(
                "effect spectrum [{min:.3e}, {max:.3e}] escapes [0, 1]"
            )));
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(HermitianMatrix::new(linop::identity(dim))?)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.mat.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.min_eigenvalue()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.min_eigenvalue() > tol::tol_strict()
    }
}

/// `Some(alpha)` when the effect is `alpha * 1` within `tol` (max norm),
/// with `alpha = tr E / d`.
pub fn is_trivial_effect(effect: &Effect, tol: f64) -> Option<f64> {
    let d = effect.dim();
    let alpha = linop::trace_re(effect.matrix()) / d as f64;
    let scaled_id = linop::identity(d) * Complex::new(alpha, 0.0);
    if linop::max_abs_diff(effect.matrix(), &scaled_id) <= tol {
        Some(alpha)
    } else {
        None
    }
}

/// Discrete observable: labeled effects summing to the identity.
///
/// Zero effects are rejected at construction (the label set is required to
/// carry only outcomes that can actually occur), so labels stay stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    labels: Vec<String>,
    effects: Vec<Effect>,
}

impl Observable {
    pub fn new(labels: Vec<String>, effects: Vec<Effect>) -> Result<Self> {
        if effects.is_empty() || labels.len() != effects.len() {
            return Err(Error::InvalidInput(
                "observable needs one label per effect and at least one outcome".into(),
            ));
        }
        let dim = effects[0].dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::InvalidInput(
                    "all effects of an observable must share one dimension".into(),
                ));
            }
            if linop::max_abs(e.matrix()) <= tol::tol_strict() {
                return Err(Error::InvalidInput(
                    "zero effect in observable; drop the outcome label instead".into(),
                ));
            }
            sum += e.matrix();
        }
        let residual = linop::max_abs_diff(&sum, &linop::identity(dim));
        if residual > tol::TOL_TP {
            return Err(Error::InvalidInput(format!(
                "effects sum to identity with residual {residual:.3e} > {:.1e}",
                tol::TOL_TP
            )));
        }
        Ok(Self { labels, effects })
    }

    /// Labels `"0", "1", ...` in order.
    pub fn with_default_labels(effects: Vec<Effect>) -> Result<Self> {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Self::new(labels, effects)
    }

    /// Projective observable from the computational basis of dimension `d`.
    pub fn computational_basis(dim: usize) -> Result<Self> {
        let effects = (0..dim)
            .map(|k| Effect::new(HermitianMatrix::new(linop::matrix_unit(dim, k, k))?))
            .collect::<Result<Vec<_>>>()?;
        Self::with_default_labels(effects)
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect(&self, index: usize) -> &Effect {
        &self.effects[index]
    }
}

/// Structural classification of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ObservableClass {
    /// Some effect is not proportional to the identity.
    pub nontrivial: bool,
    /// Effects are mutually orthogonal projections.
    pub projective: bool,
    /// Every effect has a strictly positive spectrum.
    pub strictly_positive: bool,
}

pub fn classify_observable(obs: &Observable) -> ObservableClass {
    let nontrivial = obs
        .effects()
        .iter()
        .any(|e| is_trivial_effect(e, tol::TOL_EQ).is_none());
    let mut projective = true;
    'outer: for (i, ei) in obs.effects().iter().enumerate() {
        for (j, ej) in obs.effects().iter().enumerate() {
            let prod = ei.matrix() * ej.matrix();
            let target = if i == j {
                ei.matrix().clone()
            } else {
                CMatrix::zeros(obs.dim(), obs.dim())
            };
            if linop::max_abs_diff(&prod, &target) > tol::TOL_EQ {
                projective = false;
                break 'outer;
            }
        }
    }
    let strictly_positive = obs.effects().iter().all(Effect::is_strictly_positive);
    ObservableClass {
        nontrivial,
        projective,
        strictly_positive,
    }
}

/// Outcome probabilities; entries live in `[0, 1]` and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidInput("empty distribution".into()));
        }
        for &p in &probabilities {
            if !(-1e-10..=1.0 + 1e-10).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Born rule `p(x) = tr[E_x rho]`, clipped to `[0, 1]`.
pub fn born_probability(obs: &Observable, rho: &State) -> Result<OutcomeDistribution> {
    if obs.dim() != rho.dim() {
        return Err(Error::InvalidInput(format!(
            "observable dimension {} does not match state dimension {}",
            obs.dim(),
            rho.dim()
        )));
    }
    let probabilities = obs
        .effects()
        .iter()
        .map(|e| linop::trace_re(&(e.matrix() * rho.matrix())).clamp(0.0, 1.0))
        .collect();
    OutcomeDistribution::new(probabilities)
}

/// Seeded random generators for the object zoo.
///
/// Gaussian-ensemble constructions throughout: they give full support almost
/// surely and are reproducible from `(kind, dims, seed)` alone.
pub mod random {
    use super::*;

    fn rng_for(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                m[(i, j)] =
                    Complex::new(re, im) * Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            }
        }
        m
    }

    fn check_dim(dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        Ok(())
    }

    /// Wishart-style state `G G^dagger / tr`.
    pub fn state(dim: usize, seed: u64) -> Result<State> {
        check_dim(dim)?;
        let mut rng = rng_for(seed);
        let g = gaussian_matrix(&mut rng, dim, dim);
        let w = &g * g.adjoint();
        let tr = linop::trace_re(&w);
        let rho = w * Complex::new(1.0 / tr, 0.0);
        State::new(HermitianMatrix::from_nearly_hermitian(&rho)?)
    }

    /// Projector onto a normalized Gaussian vector.
    pub fn pure_state(dim: usize, seed: u64) -> Result<State> {
        check_dim(dim)?;
        let mut rng = rng_for(seed);
        let v = gaussian_matrix(&mut rng, dim, 1).column(0).into_owned();
        State::pure(&v)
    }

    /// `(1 - eps) * state + eps * 1/d` with `eps = 0.05`, resampled until the
    /// spectrum is strictly positive.
    pub fn full_rank_state(dim: usize, seed: u64) -> Result<State> {
        check_dim(dim)?;
        const EPS: f64 = 0.05;
        for attempt in 0..64 {
            let base = state(dim, subseed(seed, attempt))?;
            let mm = State::maximally_mixed(dim)?;
            let mixed = State::mix(&[(1.0 - EPS, &base), (EPS, &mm)])?;
            if mixed.is_strictly_positive() {
                return Ok(mixed);
            }
        }
        Err(Error::InternalInconsistency(
            "full-rank state sampling failed to produce a strictly positive spectrum".into(),
        ))
    }

    /// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
    /// the R diagonal folded into Q.
    pub fn unitary(dim: usize, seed: u64) -> Result<CMatrix> {
        check_dim(dim)?;
        let mut rng = rng_for(seed);
        let g = gaussian_matrix(&mut rng, dim, dim);
        let qr = g.qr();
        let q = qr.q();
        let r = qr.r();
        let mut u = q;
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / Complex::new(d.norm(), 0.0)
            } else {
                Complex::new(1.0, 0.0)
            };
            let mut col = u.column_mut(j);
            col *= phase;
        }
        Ok(u)
    }

    /// POVM from `n` Gram blocks `M_i^dagger M_i` normalized by the inverse
    /// square root of their sum. Effects are strictly positive almost surely.
    pub fn povm(dim: usize, n_outcomes: usize, seed: u64) -> Result<Observable> {
        check_dim(dim)?;
        if n_outcomes == 0 {
            return Err(Error::InvalidInput(
                "POVM needs at least one outcome".into(),
            ));
        }
        for attempt in 0..64 {
            let mut rng = rng_for(subseed(seed, attempt));
            let blocks: Vec<CMatrix> = (0..n_outcomes)
                .map(|_| {
                    let m = gaussian_matrix(&mut rng, dim, dim);
                    m.adjoint() * m
                })
                .collect();
            let mut total = CMatrix::zeros(dim, dim);
            for b in &blocks {
                total += b;
            }
            let total_h = HermitianMatrix::from_nearly_hermitian(&total)?;
            let inv_sqrt = match total_h.inv_sqrt_strict(tol::tol_strict()) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let effects: Result<Vec<Effect>> = blocks
                .iter()
                .map(|b| {
                    let e = inv_sqrt.matrix() * b * inv_sqrt.matrix();
                    Effect::new(HermitianMatrix::from_nearly_hermitian(&e)?)
                })
                .collect();
            let Ok(effects) = effects else { continue };
            if let Ok(obs) = Observable::with_default_labels(effects) {
                return Ok(obs);
            }
        }
        Err(Error::InternalInconsistency(
            "POVM sampling failed to produce a valid observable".into(),
        ))
    }
}
