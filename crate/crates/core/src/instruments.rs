//! Outcome-indexed families of operations.
//!
//! An instrument pairs each outcome label with a quantum operation; the sum
//! over outcomes must be a channel. This module derives the induced
//! observable, classifies instruments (quasicomplete / efficient / strictly
//! positive), and provides the square-root and outcome-unitary constructors.

use crate::channels::{classify_channel, purity_class, PurityClass, QuantumOperation};
use crate::error::Error;
use crate::linop::{self, CMatrix, HermitianMatrix};
use crate::qobjects::{is_trivial_effect, random, Effect, Observable};
use crate::sweep::subseed;
use crate::tol;
use crate::Result;

/// Outcome-labeled family of operations summing to a channel.
///
/// Operations are stored independently per outcome (no shared Kraus pool),
/// so per-outcome Choi ranks are well-defined.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    labels: Vec<String>,
    operations: Vec<QuantumOperation>,
}

impl Instrument {
    pub fn new(labels: Vec<String>, operations: Vec<QuantumOperation>) -> Result<Self> {
        if operations.is_empty() || labels.len() != operations.len() {
            return Err(Error::MalformedInstrument(
                "instrument needs one label per operation and at least one outcome".into(),
            ));
        }
        let in_dim = operations[0].in_dim();
        let out_dim = operations[0].out_dim();
        let mut total_effect = CMatrix::zeros(in_dim, in_dim);
        for op in &operations {
            if op.in_dim() != in_dim || op.out_dim() != out_dim {
                return Err(Error::MalformedInstrument(
                    "all operations of an instrument must share their dimensions".into(),
                ));
            }
            total_effect += op.dual_apply(&linop::identity(out_dim))?;
        }
        let residual = linop::max_abs_diff(&total_effect, &linop::identity(in_dim));
        if residual > tol::TOL_TP {
            return Err(Error::MalformedInstrument(format!(
                "total channel is not trace preserving: residual {residual:.3e} > {:.1e}",
                tol::TOL_TP
            )));
        }
        Ok(Self { labels, operations })
    }

    pub fn with_default_labels(operations: Vec<QuantumOperation>) -> Result<Self> {
        let labels = (0..operations.len()).map(|i| i.to_string()).collect();
        Self::new(labels, operations)
    }

    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn in_dim(&self) -> usize {
        self.operations[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.operations[0].out_dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operations(&self) -> &[QuantumOperation] {
        &self.operations
    }

    pub fn operation(&self, index: usize) -> &QuantumOperation {
        &self.operations[index]
    }

    /// Total Kraus count across all outcomes.
    pub fn total_kraus_count(&self) -> usize {
        self.operations.iter().map(|op| op.kraus().len()).sum()
    }
}

/// The observable induced through `E_x = I_x^*(1)`.
pub fn induced_observable(inst: &Instrument) -> Result<Observable> {
    let effects = inst
        .operations()
        .iter()
        .map(|op| Effect::new(op.compatible_effect()?))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::MalformedInstrument(format!("induced effects invalid: {e}")))?;
    Observable::new(inst.labels().to_vec(), effects)
        .map_err(|e| Error::MalformedInstrument(format!("induced observable invalid: {e}")))
}

/// The non-selective channel `sum_x I_x`, as the union of all Kraus sets.
pub fn total_channel(inst: &Instrument) -> QuantumOperation {
    let kraus: Vec<CMatrix> = inst
        .operations()
        .iter()
        .flat_map(|op| op.kraus().iter().cloned())
        .collect();
    QuantumOperation::new(kraus).expect("instrument normalization was validated at construction")
}

/// Per-outcome purity data with the trivial-effect annotation: an outcome
/// whose effect is `alpha * 1` can be purity-preserving as a scaled unitary,
/// which is still tagged single-Kraus here but carries `trivial_effect`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePurity {
    pub label: String,
    pub purity: PurityClass,
    pub trivial_effect: Option<f64>,
}

/// Classification flags for an instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentClassification {
    /// Every operation is purity-preserving.
    pub quasicomplete: bool,
    /// Every operation has a single Kraus operator.
    pub efficient: bool,
    /// Every operation is strictly positive.
    pub strictly_positive: bool,
    pub per_outcome: Vec<OutcomePurity>,
}

/// Classify each outcome operation; ambiguous purity calls propagate as
/// errors rather than being guessed.
pub fn classify_instrument(inst: &Instrument) -> Result<InstrumentClassification> {
    let mut per_outcome = Vec::with_capacity(inst.len());
    for (label, op) in inst.labels().iter().zip(inst.operations()) {
        let purity = purity_class(op)?;
        let trivial_effect = is_trivial_effect(&Effect::new(op.compatible_effect()?)?, tol::TOL_EQ);
        per_outcome.push(OutcomePurity {
            label: label.clone(),
            purity,
            trivial_effect,
        });
    }
    let quasicomplete = per_outcome.iter().all(|o| o.purity.is_purity_preserving());
    let efficient = per_outcome.iter().all(|o| o.purity.is_single_kraus());
    let strictly_positive = inst
        .operations()
        .iter()
        .all(|op| classify_channel(op).strictly_positive);
    Ok(InstrumentClassification {
        quasicomplete,
        efficient,
        strictly_positive,
        per_outcome,
    })
}

/// Square-root instrument `I_x(.) = sqrt(E_x) . sqrt(E_x)`.
pub fn luders_instrument(obs: &Observable) -> Result<Instrument> {
    let operations = obs
        .effects()
        .iter()
        .map(|e| {
            let k = e.hermitian().sqrt_psd(tol::tol_psd())?.into_matrix();
            QuantumOperation::new(vec![k])
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(obs.labels().to_vec(), operations)
}

/// Outcome-unitary instrument `I_x(.) = U_x sqrt(E_x) . sqrt(E_x) U_x^*`.
pub fn efficient_instrument(obs: &Observable, unitaries: &[CMatrix]) -> Result<Instrument> {
    if unitaries.len() != obs.len() {
        return Err(Error::InvalidInput(format!(
            "need one unitary per outcome: {} outcomes, {} unitaries",
            obs.len(),
            unitaries.len()
        )));
    }
    let d = obs.dim();
    let operations = obs
        .effects()
        .iter()
        .zip(unitaries)
        .map(|(e, u)| {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::InvalidInput(
                    "unitary dimension does not match the observable".into(),
                ));
            }
            let residual = linop::max_abs_diff(&(u.adjoint() * u), &linop::identity(d));
            if residual > tol::TOL_EQ {
                return Err(Error::InvalidInput(format!(
                    "matrix is not unitary: residual {residual:.3e}"
                )));
            }
            let k = u * e.hermitian().sqrt_psd(tol::tol_psd())?.matrix();
            QuantumOperation::new(vec![k])
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(obs.labels().to_vec(), operations)
}

/// Seeded random instrument: a random POVM measured with `kraus_per_outcome`
/// Kraus operators per outcome (1 gives an efficient instrument with random
/// outcome unitaries; more gives genuinely non-purity-preserving outcomes).
pub fn random_instrument(
    dim: usize,
    n_outcomes: usize,
    kraus_per_outcome: usize,
    seed: u64,
) -> Result<Instrument> {
    if kraus_per_outcome == 0 {
        return Err(Error::InvalidInput(
            "need at least one Kraus operator per outcome".into(),
        ));
    }
    let obs = random::povm(dim, n_outcomes, subseed(seed, 0))?;
    let operations = obs
        .effects()
        .iter()
        .enumerate()
        .map(|(x, e)| {
            let sqrt_e = e.hermitian().sqrt_psd(tol::tol_psd())?;
            if kraus_per_outcome == 1 {
                let u = random::unitary(dim, subseed(seed, 1 + x as u64))?;
                return QuantumOperation::new(vec![&u * sqrt_e.matrix()]);
            }
            // Mixing maps W_i with sum W_i^dagger W_i = 1, so the Kraus set
            // {W_i sqrt(E_x)} keeps the outcome's effect equal to E_x.
            let mut blocks: Vec<CMatrix> = (0..kraus_per_outcome)
                .map(|i| {
                    let mut rng_seed = subseed(seed, 1000 + (x * kraus_per_outcome + i) as u64);
                    // Occasionally a Gaussian block can be near-singular;
                    // nudging the subseed keeps the Gram sum invertible.
                    loop {
                        let g = random::unitary(dim, rng_seed)?;
                        let s = random::state(dim, rng_seed.wrapping_add(1))?;
                        let block = &g * s.matrix();
                        if linop::max_abs(&block) > 1e-6 {
                            return Ok(block);
                        }
                        rng_seed = rng_seed.wrapping_add(7);
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mut gram = CMatrix::zeros(dim, dim);
            for b in &blocks {
                gram += b.adjoint() * b;
            }
            let inv_sqrt =
                HermitianMatrix::from_nearly_hermitian(&gram)?.inv_sqrt_strict(tol::tol_strict())?;
            for b in &mut blocks {
                *b = (b as &CMatrix) * inv_sqrt.matrix();
            }
            let kraus: Vec<CMatrix> = blocks.iter().map(|w| w * sqrt_e.matrix()).collect();
            QuantumOperation::new(kraus)
        })
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(obs.labels().to_vec(), operations)
}
