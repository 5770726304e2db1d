//! Entropic quantities and thermodynamic-law audits.
//!
//! Shannon and von Neumann entropies, relative entropy, GLO information
//! gain, mutual information, Holevo chi; the second-law entropy balance for
//! a measured process (with its exact two-path identity check), third-law
//! compatibility, work-cycle accounting, a seeded search for negative
//! information gain, and the trilemma classifier.
//!
//! All entropies are in nats.

use nalgebra::Complex;
use serde::Serialize;

use crate::channels::classify_channel;
use crate::error::Error;
use crate::instruments::{classify_instrument, Instrument};
use crate::linop::{self, CMatrix, HermitianMatrix, Subsystem};
use crate::measproc::{
    induced_instrument, posterior_bundle, MeasurementProcess, PosteriorBundle, P_FLOOR,
};
use crate::qobjects::{is_trivial_effect, random, Effect, OutcomeDistribution, State};
use crate::sweep::{map_indexed, subseed};
use crate::tol;
use crate::Result;

/// Slack allowed on the second-law balance: the process passes when the
/// total entropy change is at least `-SECOND_LAW_SLACK`.
pub const SECOND_LAW_SLACK: f64 = 1e-8;

/// Tolerance on the agreement of the two independent routes to the total
/// entropy change; a breach signals an implementation bug.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Which marginal of the posterior bundle an information gain refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    System,
    Apparatus,
}

fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > tol::ENTROPY_EIG_FLOOR)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Shannon entropy `-sum p ln p` with the 0 ln 0 = 0 convention.
pub fn shannon_entropy(p: &OutcomeDistribution) -> f64 {
    p.probabilities()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Von Neumann entropy `-tr[rho ln rho]` through the spectrum.
pub fn von_neumann_entropy(rho: &State) -> f64 {
    entropy_from_eigenvalues(&rho.hermitian().eig().eigenvalues)
}

/// Entropy of an unnormalized positive block: `-sum lambda ln lambda` over
/// its spectrum. For a block `p * sigma` this equals `p S(sigma) - p ln p`,
/// which is what the block-diagonal registered state contributes.
fn entropy_of_unnormalized(block: &CMatrix) -> Result<f64> {
    let eig = HermitianMatrix::from_nearly_hermitian(block)?.eig();
    Ok(entropy_from_eigenvalues(&eig.eigenvalues))
}

/// Eigenvalues of sigma at or below this are treated as outside its support
/// when deciding the relative-entropy sentinel.
const SUPPORT_CUT: f64 = 1e-12;
/// Probability mass of rho allowed outside the support of sigma before the
/// relative entropy is reported as infinite.
const SUPPORT_MASS_TOL: f64 = 1e-9;

/// Umegaki relative entropy `D(rho || sigma)` for a state `rho` and a
/// positive semidefinite `sigma`.
///
/// Returns `f64::INFINITY` when the support of `rho` leaks outside the
/// support of `sigma`; that sentinel is part of the contract, not an error.
pub fn relative_entropy(rho: &State, sigma: &HermitianMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::InvalidInput(
            "relative entropy needs operators of equal dimension".into(),
        ));
    }
    let sig_eig = sigma.eig();
    if sig_eig.eigenvalues[0] < -tol::tol_psd() {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: sig_eig.eigenvalues[0],
            tolerance: tol::tol_psd(),
        });
    }
    let rho_eig = rho.hermitian().eig();
    let d = rho.dim();

    let mut total = rho_eig
        .eigenvalues
        .iter()
        .filter(|&&r| r > tol::ENTROPY_EIG_FLOOR)
        .map(|&r| r * r.ln())
        .sum::<f64>();

    for j in 0..d {
        let s = sig_eig.eigenvalues[j];
        let w = sig_eig.eigenvectors.column(j);
        // <w_j| rho |w_j>
        let mass = (w.adjoint() * rho.matrix() * w)[(0, 0)].re;
        if s <= SUPPORT_CUT {
            if mass > SUPPORT_MASS_TOL {
                return Ok(f64::INFINITY);
            }
        } else {
            total -= mass * s.ln();
        }
    }
    Ok(total)
}

/// GLO information gain `S(prior) - sum_x p(x) S(posterior_x)` on the chosen
/// side of a posterior bundle. May be negative.
pub fn glo_info_gain(bundle: &PosteriorBundle, side: Side) -> f64 {
    let prior = match side {
        Side::System => von_neumann_entropy(bundle.prior_system()),
        Side::Apparatus => von_neumann_entropy(bundle.prior_apparatus()),
    };
    let mut average = 0.0;
    for x in 0..bundle.outcomes() {
        let p = bundle.probabilities()[x];
        if p <= P_FLOOR || bundle.is_degenerate(x) {
            continue;
        }
        let marginal = match side {
            Side::System => bundle.sys_marginal(x),
            Side::Apparatus => bundle.app_marginal(x),
        };
        average += p * von_neumann_entropy(marginal);
    }
    prior - average
}

/// GLO information gain of a bare instrument measured in `rho`.
pub fn glo_of_instrument(inst: &Instrument, rho: &State) -> Result<f64> {
    if inst.in_dim() != rho.dim() {
        return Err(Error::InvalidInput(
            "state dimension does not match the instrument".into(),
        ));
    }
    let prior = von_neumann_entropy(rho);
    let mut average = 0.0;
    for op in inst.operations() {
        let out = op.apply(rho.matrix())?;
        let p = linop::trace_re(&out).max(0.0);
        if p <= P_FLOOR {
            continue;
        }
        let eig =
            HermitianMatrix::from_nearly_hermitian(&(&out * Complex::new(1.0 / p, 0.0)))?.eig();
        average += p * entropy_from_eigenvalues(&eig.eigenvalues);
    }
    Ok(prior - average)
}

/// Mutual information `S(A) + S(B) - S(AB)` of a bipartite state.
pub fn mutual_information(joint: &State, dims: (usize, usize)) -> Result<f64> {
    let (da, db) = dims;
    if da * db != joint.dim() {
        return Err(Error::InvalidInput(
            "dims do not factor the joint dimension".into(),
        ));
    }
    let a = HermitianMatrix::from_nearly_hermitian(&linop::partial_trace(
        joint.matrix(),
        dims,
        Subsystem::First,
    )?)?;
    let b = HermitianMatrix::from_nearly_hermitian(&linop::partial_trace(
        joint.matrix(),
        dims,
        Subsystem::Second,
    )?)?;
    Ok(entropy_from_eigenvalues(&a.eig().eigenvalues)
        + entropy_from_eigenvalues(&b.eig().eigenvalues)
        - von_neumann_entropy(joint))
}

/// Mutual information through the relative-entropy route
/// `D(sigma_AB || sigma_A ⊗ sigma_B)`; used to cross-check the entropy-sum
/// form.
pub fn mutual_information_via_relative_entropy(joint: &State, dims: (usize, usize)) -> Result<f64> {
    let (da, db) = dims;
    if da * db != joint.dim() {
        return Err(Error::InvalidInput(
            "dims do not factor the joint dimension".into(),
        ));
    }
    let a = linop::partial_trace(joint.matrix(), dims, Subsystem::First)?;
    let b = linop::partial_trace(joint.matrix(), dims, Subsystem::Second)?;
    let product = HermitianMatrix::from_nearly_hermitian(&linop::kron(&a, &b))?;
    relative_entropy(joint, &product)
}

/// Holevo chi `S(sum p rho) - sum p S(rho)` of a labeled ensemble.
pub fn holevo_chi(weights: &OutcomeDistribution, states: &[State]) -> Result<f64> {
    if weights.len() != states.len() {
        return Err(Error::InvalidInput(
            "one state per ensemble weight required".into(),
        ));
    }
    if states.is_empty() {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    let dim = states[0].dim();
    let mut avg = CMatrix::zeros(dim, dim);
    let mut avg_entropy = 0.0;
    for (p, s) in weights.probabilities().iter().zip(states) {
        if s.dim() != dim {
            return Err(Error::InvalidInput("ensemble dimension mismatch".into()));
        }
        avg += s.matrix() * Complex::new(*p, 0.0);
        if *p > 0.0 {
            avg_entropy += p * von_neumann_entropy(s);
        }
    }
    let mixed = State::new(HermitianMatrix::from_nearly_hermitian(&avg)?)?;
    Ok(von_neumann_entropy(&mixed) - avg_entropy)
}

/// Internal energy `tr[H rho]` and non-equilibrium free energy
/// `tr[H rho] - S(rho)/beta`.
pub fn energy_accounting(
    rho: &State,
    hamiltonian: &HermitianMatrix,
    beta: f64,
) -> Result<(f64, f64)> {
    if beta <= 0.0 {
        return Err(Error::InvalidInput(
            "inverse temperature must be positive".into(),
        ));
    }
    if hamiltonian.dim() != rho.dim() {
        return Err(Error::InvalidInput(
            "Hamiltonian dimension does not match the state".into(),
        ));
    }
    let internal = linop::trace_re(&(hamiltonian.matrix() * rho.matrix()));
    let free = internal - von_neumann_entropy(rho) / beta;
    Ok((internal, free))
}

/// Net work extracted over the adiabatic-then-isothermal cycle:
/// `-delta_S / beta`. Positive output with a negative entropy change is the
/// signature of a second-law violation.
pub fn net_cycle_work(delta_s: f64, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::InvalidInput(
            "inverse temperature must be positive".into(),
        ));
    }
    Ok(-delta_s / beta)
}

/// Full entropy accounting of one measured prior.
#[derive(Debug, Clone, Serialize)]
pub struct ThermoReport {
    /// Outcome (Shannon) entropy of the measurement statistics, in nats.
    pub shannon: f64,
    pub glo_system: f64,
    pub glo_apparatus: f64,
    pub per_outcome_mutual_info: Vec<f64>,
    pub avg_mutual_info: f64,
    /// Left side of the second-law balance (the outcome entropy).
    pub second_law_lhs: f64,
    /// Right side: system gain + apparatus gain + average mutual information.
    pub second_law_rhs: f64,
    /// Total entropy change of system + apparatus + register, computed
    /// independently from the block-diagonal registered state.
    pub delta_s_total: f64,
    /// Disagreement between the two routes to the entropy change; bounded by
    /// [`IDENTITY_TOL`] or the audit would have failed.
    pub identity_residual: f64,
    pub second_law_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net_cycle_work: Option<f64>,
}

/// Audit one `(process, prior)` pair against the second law.
///
/// All entropic quantities come from the posterior bundle; the total entropy
/// change is additionally computed through the unnormalized posterior blocks
/// (the block-diagonal structure of the registered state makes that exact),
/// and the two routes must agree to [`IDENTITY_TOL`] — a breach is reported
/// as an internal inconsistency, never as a property of the process.
pub fn second_law_audit(
    proc: &MeasurementProcess,
    rho: &State,
    beta: Option<f64>,
) -> Result<ThermoReport> {
    let bundle = posterior_bundle(proc, rho)?;
    second_law_audit_from_bundle(&bundle, beta)
}

fn second_law_audit_from_bundle(
    bundle: &PosteriorBundle,
    beta: Option<f64>,
) -> Result<ThermoReport> {
    if let Some(b) = beta {
        if b <= 0.0 {
            return Err(Error::InvalidInput(
                "inverse temperature must be positive".into(),
            ));
        }
    }
    let dims = (bundle.sys_dim(), bundle.app_dim());
    let s_prior_sys = von_neumann_entropy(bundle.prior_system());
    let s_prior_app = von_neumann_entropy(bundle.prior_apparatus());

    let mut shannon = 0.0;
    let mut avg_sys = 0.0;
    let mut avg_app = 0.0;
    let mut avg_mi = 0.0;
    let mut per_outcome_mutual_info = Vec::with_capacity(bundle.outcomes());
    let mut registered_entropy = 0.0;

    for x in 0..bundle.outcomes() {
        let p = bundle.probabilities()[x];
        if p <= P_FLOOR || bundle.is_degenerate(x) {
            per_outcome_mutual_info.push(0.0);
            continue;
        }
        shannon -= p * p.ln();
        let s_sys = von_neumann_entropy(bundle.sys_marginal(x));
        let s_app = von_neumann_entropy(bundle.app_marginal(x));
        let s_joint = von_neumann_entropy(bundle.joint(x));
        let mi = s_sys + s_app - s_joint;
        per_outcome_mutual_info.push(mi);
        avg_sys += p * s_sys;
        avg_app += p * s_app;
        avg_mi += p * mi;

        // Independent route: entropy of the unnormalized block p * sigma^x.
        let block = bundle.joint(x).matrix() * Complex::new(p, 0.0);
        registered_entropy += entropy_of_unnormalized(&block)?;
    }

    let glo_system = s_prior_sys - avg_sys;
    let glo_apparatus = s_prior_app - avg_app;
    let second_law_lhs = shannon;
    let second_law_rhs = glo_system + glo_apparatus + avg_mi;
    let delta_s_total = registered_entropy - s_prior_sys - s_prior_app;

    let identity_residual = (delta_s_total - (second_law_lhs - second_law_rhs)).abs();
    if identity_residual > IDENTITY_TOL {
        return Err(Error::InternalInconsistency(format!(
            "entropy-balance identity residual {identity_residual:.3e} exceeds {IDENTITY_TOL:.1e} \
             (block route {delta_s_total:.6e}, balance route {:.6e})",
            second_law_lhs - second_law_rhs
        )));
    }

    // Register classicality: the registered state cannot carry less entropy
    // than the averaged joint state.
    let mut averaged = CMatrix::zeros(dims.0 * dims.1, dims.0 * dims.1);
    for x in 0..bundle.outcomes() {
        let p = bundle.probabilities()[x];
        if p <= P_FLOOR || bundle.is_degenerate(x) {
            continue;
        }
        averaged += bundle.joint(x).matrix() * Complex::new(p, 0.0);
    }
    let averaged_entropy = entropy_of_unnormalized(&averaged)?;
    if registered_entropy < averaged_entropy - 1e-9 {
        return Err(Error::InternalInconsistency(format!(
            "registered entropy {registered_entropy:.6e} fell below the averaged joint entropy \
             {averaged_entropy:.6e}"
        )));
    }

    let net = match beta {
        Some(b) => Some(net_cycle_work(delta_s_total, b)?),
        None => None,
    };

    Ok(ThermoReport {
        shannon,
        glo_system,
        glo_apparatus,
        per_outcome_mutual_info,
        avg_mutual_info: avg_mi,
        second_law_lhs,
        second_law_rhs,
        delta_s_total,
        identity_residual,
        second_law_pass: delta_s_total >= -SECOND_LAW_SLACK,
        beta,
        net_cycle_work: net,
    })
}

/// Third-law compatibility and its two ingredient diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ThirdLawReport {
    pub compatible: bool,
    pub xi_strictly_positive: bool,
    pub xi_min_eigenvalue: f64,
    pub premeasurement_strictly_positive: bool,
    pub premeasurement_unit_image_min_eigenvalue: f64,
}

/// A process is third-law compatible when the apparatus preparation is
/// strictly positive and the premeasurement channel is strictly positive.
pub fn third_law_audit(proc: &MeasurementProcess) -> ThirdLawReport {
    let xi_min = proc.xi().min_eigenvalue();
    let xi_ok = xi_min > tol::tol_strict();
    let image = proc
        .premeasurement()
        .apply(&linop::identity(proc.joint_dim()))
        .expect("identity fits the joint space");
    let image_min = HermitianMatrix::from_nearly_hermitian(&image)
        .expect("channel image of the unit is Hermitian")
        .min_eigenvalue();
    let chan_ok = image_min > tol::tol_strict();
    ThirdLawReport {
        compatible: xi_ok && chan_ok,
        xi_strictly_positive: xi_ok,
        xi_min_eigenvalue: xi_min,
        premeasurement_strictly_positive: chan_ok,
        premeasurement_unit_image_min_eigenvalue: image_min,
    }
}

/// A state from the standard audit panel: the complete mixture first, then
/// alternating seeded pure and full-rank states.
pub fn panel_state(dim: usize, trial: usize, seed: u64) -> Result<State> {
    if trial == 0 {
        State::maximally_mixed(dim)
    } else if trial % 2 == 1 {
        random::pure_state(dim, subseed(seed, trial as u64))
    } else {
        random::full_rank_state(dim, subseed(seed, trial as u64))
    }
}

/// Result of sweeping the second-law balance over a panel of seeded states.
#[derive(Debug, Clone, Serialize)]
pub struct SecondLawPanel {
    pub states: usize,
    pub min_slack: f64,
    pub worst_state_index: usize,
    pub all_pass: bool,
    pub slacks: Vec<f64>,
}

/// Evaluate the second-law balance on `states` seeded priors (in parallel
/// when the `parallel` feature is on; results are index-ordered and
/// identical either way).
pub fn second_law_panel(
    proc: &MeasurementProcess,
    states: usize,
    seed: u64,
) -> Result<SecondLawPanel> {
    if states == 0 {
        return Err(Error::InvalidInput("panel needs at least one state".into()));
    }
    let slacks: Vec<Result<f64>> = map_indexed(states, |trial| {
        let rho = panel_state(proc.sys_dim(), trial, seed)?;
        Ok(second_law_audit(proc, &rho, None)?.delta_s_total)
    });
    let mut min_slack = f64::INFINITY;
    let mut worst = 0;
    let mut values = Vec::with_capacity(states);
    for (i, r) in slacks.into_iter().enumerate() {
        let v = r?;
        if v < min_slack {
            min_slack = v;
            worst = i;
        }
        values.push(v);
    }
    Ok(SecondLawPanel {
        states,
        min_slack,
        worst_state_index: worst,
        all_pass: min_slack >= -SECOND_LAW_SLACK,
        slacks: values,
    })
}

/// Outcome of the seeded search for negative information gain.
#[derive(Debug, Clone)]
pub struct GloSearch {
    pub best_value: f64,
    pub best_trial: usize,
    pub best_state: State,
}

/// Evaluate the information gain of an instrument over the complete mixture
/// plus seeded random pure and full-rank states, and return the minimizer.
/// Random restarts only; deterministic in the seed.
pub fn search_negative_glo(inst: &Instrument, trials: usize, seed: u64) -> Result<GloSearch> {
    if trials == 0 {
        return Err(Error::InvalidInput(
            "search needs at least one trial".into(),
        ));
    }
    let dim = inst.in_dim();
    let values: Vec<Result<f64>> = map_indexed(trials, |trial| {
        let rho = panel_state(dim, trial, seed)?;
        glo_of_instrument(inst, &rho)
    });
    let mut best_value = f64::INFINITY;
    let mut best_trial = 0;
    for (i, r) in values.into_iter().enumerate() {
        let v = r?;
        if v < best_value {
            best_value = v;
            best_trial = i;
        }
    }
    let best_state = panel_state(dim, best_trial, seed)?;
    Ok(GloSearch {
        best_value,
        best_trial,
        best_state,
    })
}

/// How the second-law side of arm (i) was established.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum SecondLawEvidence {
    /// The composed channel `(id ⊗ J_X) o E` is bistochastic, which covers
    /// every prior state at once.
    BistochasticCertificate,
    /// The balance was verified on a finite seeded panel; nothing beyond the
    /// panel is claimed.
    PanelEvidence { states: usize, min_slack: f64 },
    /// A panel state violated the balance.
    PanelViolation { state_index: usize, slack: f64 },
}

/// Which of the three trilemma arms a verdict refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrilemmaArm {
    /// (i) compatibility with the second and third laws.
    LawCompatibility,
    /// (ii) the premeasurement is an autonomous bistochastic process.
    AutonomousPremeasurement,
    /// (iii) the induced instrument is quasicomplete.
    Quasicompleteness,
}

/// Trilemma classification of a measurement process.
///
/// Arm (ii) is operationalized as bistochasticity of the premeasurement
/// channel alone; the bistochasticity of the full composed channel is
/// reported separately so the stricter reading stays recoverable.
#[derive(Debug, Clone, Serialize)]
pub struct TrilemmaVerdict {
    /// False makes the verdict vacuous: a trivial observable pins no arm.
    pub nontrivial_observable: bool,
    /// Arm (i): third-law compatible and second-law evidence holds.
    pub law_compatible: bool,
    /// Arm (ii): the premeasurement channel is bistochastic.
    pub premeasurement_autonomous_ok: bool,
    /// Arm (iii): the induced instrument is quasicomplete.
    pub quasicomplete: bool,
    pub third_law_compatible: bool,
    pub composed_channel_bistochastic: bool,
    pub second_law_evidence: SecondLawEvidence,
    pub failed_arms: Vec<TrilemmaArm>,
}

/// Classify a process against the three mutually exclusive assumptions.
///
/// When the composed channel is bistochastic the second-law side of arm (i)
/// is certified for all priors; otherwise the balance is checked on a panel
/// of `panel_states` seeded states (at least 50) and the verdict records
/// that only panel evidence was obtained.
pub fn trilemma_classify(
    proc: &MeasurementProcess,
    panel_states: usize,
    seed: u64,
) -> Result<TrilemmaVerdict> {
    let panel_states = panel_states.max(50);
    let induced = induced_instrument(proc)?;

    let nontrivial_observable = induced
        .operations()
        .iter()
        .map(|op| Effect::new(op.compatible_effect()?))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .any(|e| is_trivial_effect(e, tol::TOL_EQ).is_none());

    let third = third_law_audit(proc);
    let composed = proc.composed_channel()?;
    let composed_class = classify_channel(&composed);

    let second_law_evidence = if composed_class.bistochastic {
        SecondLawEvidence::BistochasticCertificate
    } else {
        let panel = second_law_panel(proc, panel_states, seed)?;
        if panel.all_pass {
            SecondLawEvidence::PanelEvidence {
                states: panel.states,
                min_slack: panel.min_slack,
            }
        } else {
            SecondLawEvidence::PanelViolation {
                state_index: panel.worst_state_index,
                slack: panel.min_slack,
            }
        }
    };
    let second_ok = !matches!(
        second_law_evidence,
        SecondLawEvidence::PanelViolation { .. }
    );
    let law_compatible = third.compatible && second_ok;

    let premeasurement_autonomous_ok = classify_channel(proc.premeasurement()).bistochastic;
    let quasicomplete = classify_instrument(&induced)?.quasicomplete;

    let mut failed_arms = Vec::new();
    if !law_compatible {
        failed_arms.push(TrilemmaArm::LawCompatibility);
    }
    if !premeasurement_autonomous_ok {
        failed_arms.push(TrilemmaArm::AutonomousPremeasurement);
    }
    if !quasicomplete {
        failed_arms.push(TrilemmaArm::Quasicompleteness);
    }

    if nontrivial_observable && failed_arms.is_empty() {
        return Err(Error::InternalInconsistency(
            "all three trilemma arms reported true for a nontrivial observable".into(),
        ));
    }

    Ok(TrilemmaVerdict {
        nontrivial_observable,
        law_compatible,
        premeasurement_autonomous_ok,
        quasicomplete,
        third_law_compatible: third.compatible,
        composed_channel_bistochastic: composed_class.bistochastic,
        second_law_evidence,
        failed_arms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::QuantumOperation;
    use crate::instruments::luders_instrument;
    use crate::linop::CVector;
    use crate::measproc::{ozawa_dilation, thermo_construction};
    use crate::qobjects::tests::fixture_observable;
    use crate::qobjects::{born_probability, Observable};

    fn fixture_luders() -> Instrument {
        luders_instrument(&fixture_observable()).unwrap()
    }

    fn thermo_fixture_process() -> MeasurementProcess {
        let obs = fixture_observable();
        let us = vec![linop::identity(2), linop::identity(2)];
        let xi = State::maximally_mixed(2).unwrap();
        thermo_construction(&obs, &us, &xi).unwrap()
    }

    fn smoothed_dilation_process() -> MeasurementProcess {
        let proc = ozawa_dilation(&fixture_luders()).unwrap();
        let mm = State::maximally_mixed(proc.app_dim()).unwrap();
        let xi = State::mix(&[(0.95, proc.xi()), (0.05, &mm)]).unwrap();
        MeasurementProcess::new(
            proc.sys_dim(),
            xi,
            proc.premeasurement().clone(),
            proc.objectification().clone(),
        )
        .unwrap()
    }

    #[test]
    fn shannon_entropy_cases() {
        let sure = OutcomeDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&sure), 0.0);

        let fair = OutcomeDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!((shannon_entropy(&fair) - std::f64::consts::LN_2).abs() < 1e-12);

        let skew = OutcomeDistribution::new(vec![0.7, 0.3]).unwrap();
        let expected = -0.7f64 * 0.7f64.ln() - 0.3 * 0.3f64.ln();
        assert!((shannon_entropy(&skew) - expected).abs() < 1e-12);
    }

    #[test]
    fn von_neumann_entropy_cases() {
        let pure = random::pure_state(3, 1).unwrap();
        assert!(von_neumann_entropy(&pure).abs() <= 1e-10);

        let mm = State::maximally_mixed(4).unwrap();
        assert!((von_neumann_entropy(&mm) - 4.0f64.ln()).abs() <= 1e-10);
    }

    #[test]
    fn relative_entropy_of_state_with_itself_vanishes() {
        let rho = random::state(3, 23).unwrap();
        let d = relative_entropy(&rho, rho.hermitian()).unwrap();
        assert!(d.abs() <= 1e-9);
    }

    #[test]
    fn relative_entropy_support_sentinel() {
        let rho = State::basis(2, 1).unwrap();
        let sigma = State::basis(2, 0).unwrap();
        let d = relative_entropy(&rho, sigma.hermitian()).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn relative_entropy_nonnegative_on_seeded_pairs() {
        for seed in 0..20 {
            let rho = random::state(3, 900 + seed).unwrap();
            let sigma = random::full_rank_state(3, 950 + seed).unwrap();
            let d = relative_entropy(&rho, sigma.hermitian()).unwrap();
            assert!(d >= -1e-9, "seed {seed}: D = {d:.3e}");
        }
    }

    #[test]
    fn mutual_information_cases() {
        let a = random::state(2, 61).unwrap();
        let b = random::state(2, 62).unwrap();
        let product = State::new(
            HermitianMatrix::from_nearly_hermitian(&linop::kron(a.matrix(), b.matrix())).unwrap(),
        )
        .unwrap();
        assert!(mutual_information(&product, (2, 2)).unwrap().abs() <= 1e-10);

        let mut v = CVector::zeros(4);
        v[0] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = State::pure(&v).unwrap();
        let mi = mutual_information(&bell, (2, 2)).unwrap();
        assert!((mi - 2.0 * std::f64::consts::LN_2).abs() <= 1e-10);
    }

    #[test]
    fn mutual_information_two_routes_agree() {
        for seed in 0..10 {
            let joint = random::state(4, 700 + seed).unwrap();
            let a = mutual_information(&joint, (2, 2)).unwrap();
            let b = mutual_information_via_relative_entropy(&joint, (2, 2)).unwrap();
            assert!((a - b).abs() <= 1e-8, "seed {seed}: {a} vs {b}");
            assert!(a >= -1e-9);
        }
    }

    #[test]
    fn glo_of_identity_instrument_is_zero() {
        let inst =
            Instrument::with_default_labels(vec![QuantumOperation::identity(2).unwrap()]).unwrap();
        let rho = random::state(2, 5).unwrap();
        assert!(glo_of_instrument(&inst, &rho).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn glo_nonnegative_for_efficient_fixture() {
        let inst = fixture_luders();
        for trial in 0..50 {
            let rho = panel_state(2, trial, 777).unwrap();
            let g = glo_of_instrument(&inst, &rho).unwrap();
            assert!(g >= -1e-9, "trial {trial}: I_GLO = {g:.3e}");
        }
    }

    #[test]
    fn thermo_process_apparatus_gain_is_nonpositive_and_mi_vanishes() {
        let proc = thermo_fixture_process();
        for trial in 0..20 {
            let rho = panel_state(2, trial, 888).unwrap();
            let bundle = posterior_bundle(&proc, &rho).unwrap();
            let gain = glo_info_gain(&bundle, Side::Apparatus);
            assert!(gain <= 1e-9, "trial {trial}: apparatus gain {gain:.3e}");
            for x in 0..bundle.outcomes() {
                if bundle.is_degenerate(x) {
                    continue;
                }
                let mi = mutual_information(bundle.joint(x), (2, 2)).unwrap();
                assert!(mi.abs() <= 1e-9, "trial {trial}, outcome {x}: MI {mi:.3e}");
            }
        }
    }

    #[test]
    fn second_law_passes_for_bistochastic_composition() {
        let proc = ozawa_dilation(&fixture_luders()).unwrap();
        assert!(classify_channel(&proc.composed_channel().unwrap()).bistochastic);
        for trial in 0..20 {
            let rho = panel_state(2, trial, 999).unwrap();
            let report = second_law_audit(&proc, &rho, None).unwrap();
            assert!(report.second_law_pass, "trial {trial}: {report:?}");
        }
    }

    #[test]
    fn second_law_passes_for_thermo_fixture() {
        let proc = thermo_fixture_process();
        for trial in 0..20 {
            let rho = panel_state(2, trial, 1010).unwrap();
            let report = second_law_audit(&proc, &rho, None).unwrap();
            assert!(report.second_law_pass, "trial {trial}: {report:?}");
        }
    }

    #[test]
    fn single_outcome_identity_process_has_zero_entropy_change() {
        let xi = random::full_rank_state(2, 11).unwrap();
        let trivial_pointer =
            Observable::with_default_labels(vec![Effect::identity(2).unwrap()]).unwrap();
        let objectification = luders_instrument(&trivial_pointer).unwrap();
        let proc = MeasurementProcess::new(
            2,
            xi,
            QuantumOperation::identity(4).unwrap(),
            objectification,
        )
        .unwrap();
        let rho = random::state(2, 12).unwrap();
        let report = second_law_audit(&proc, &rho, None).unwrap();
        assert!(report.delta_s_total.abs() <= 1e-12, "{report:?}");
        assert!(report.shannon.abs() <= 1e-12);
    }

    #[test]
    fn audit_with_beta_reports_cycle_work() {
        let proc = thermo_fixture_process();
        let rho = random::state(2, 13).unwrap();
        let report = second_law_audit(&proc, &rho, Some(2.0)).unwrap();
        let w = report.net_cycle_work.unwrap();
        assert!((w + report.delta_s_total / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn third_law_verdicts() {
        let dilated = ozawa_dilation(&fixture_luders()).unwrap();
        let report = third_law_audit(&dilated);
        assert!(!report.compatible);
        assert!(!report.xi_strictly_positive);
        assert!(report.premeasurement_strictly_positive);

        let thermo = thermo_fixture_process();
        assert!(third_law_audit(&thermo).compatible);

        let smoothed = smoothed_dilation_process();
        let report = third_law_audit(&smoothed);
        assert!(report.compatible);
    }

    #[test]
    fn energy_accounting_cases() {
        let rho = State::maximally_mixed(2).unwrap();
        let zero_h = HermitianMatrix::new(CMatrix::zeros(2, 2)).unwrap();
        let (e, f) = energy_accounting(&rho, &zero_h, 2.0).unwrap();
        assert_eq!(e, 0.0);
        assert!((f + std::f64::consts::LN_2 / 2.0).abs() <= 1e-12);

        assert_eq!(net_cycle_work(0.0, 1.0).unwrap(), 0.0);
        let w = net_cycle_work(-std::f64::consts::LN_2, 1.0).unwrap();
        assert!((w - std::f64::consts::LN_2).abs() <= 1e-15);
        assert!(matches!(
            net_cycle_work(0.1, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn holevo_chi_cases() {
        let w = OutcomeDistribution::new(vec![0.4, 0.6]).unwrap();
        let rho = random::state(2, 14).unwrap();
        assert!(holevo_chi(&w, &[rho.clone(), rho]).unwrap().abs() <= 1e-12);

        let e0 = State::basis(2, 0).unwrap();
        let e1 = State::basis(2, 1).unwrap();
        let chi = holevo_chi(&w, &[e0, e1]).unwrap();
        assert!((chi - shannon_entropy(&w)).abs() <= 1e-10);
    }

    #[test]
    fn holevo_chi_matches_luders_information_gain() {
        // Ensemble {p(x), sqrt(rho) E_x sqrt(rho) / p(x)} has the same chi as
        // the square-root instrument's gain.
        let obs = fixture_observable();
        let inst = fixture_luders();
        let rho = random::full_rank_state(2, 15).unwrap();
        let p = born_probability(&obs, &rho).unwrap();
        let sqrt_rho = rho.hermitian().sqrt_psd(tol::tol_psd()).unwrap();
        let members: Vec<State> = obs
            .effects()
            .iter()
            .zip(p.probabilities())
            .map(|(e, &px)| {
                let m = sqrt_rho.matrix()
                    * e.matrix()
                    * sqrt_rho.matrix()
                    * Complex::new(1.0 / px, 0.0);
                State::new(HermitianMatrix::from_nearly_hermitian(&m).unwrap()).unwrap()
            })
            .collect();
        let chi = holevo_chi(&p, &members).unwrap();
        let gain = glo_of_instrument(&inst, &rho).unwrap();
        assert!((chi - gain).abs() <= 1e-8, "chi {chi} vs gain {gain}");
        assert!(chi <= shannon_entropy(&p) + 1e-8);
    }

    #[test]
    fn search_on_quasicomplete_instrument_stays_nonnegative() {
        let inst = fixture_luders();
        let found = search_negative_glo(&inst, 100, 42).unwrap();
        assert!(found.best_value >= -1e-9, "found {:.3e}", found.best_value);

        let id =
            Instrument::with_default_labels(vec![QuantumOperation::identity(2).unwrap()]).unwrap();
        let found = search_negative_glo(&id, 10, 42).unwrap();
        assert!(found.best_value.abs() <= 1e-10);
    }

    #[test]
    fn search_finds_negative_gain_for_two_kraus_mixtures() {
        // Deliberately non-quasicomplete: each outcome mixes two
        // non-proportional Kraus operators.
        let obs = fixture_observable();
        let u = random::unitary(2, 44).unwrap();
        let half = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ops = obs
            .effects()
            .iter()
            .map(|e| {
                let sqrt_e = e
                    .hermitian()
                    .sqrt_psd(tol::tol_psd())
                    .unwrap()
                    .into_matrix();
                QuantumOperation::new(vec![&sqrt_e * half, (&u * &sqrt_e) * half]).unwrap()
            })
            .collect();
        let inst = Instrument::with_default_labels(ops).unwrap();
        let found = search_negative_glo(&inst, 200, 4242).unwrap();
        assert!(
            found.best_value < -1e-6,
            "expected a negative gain, found {:.3e}",
            found.best_value
        );
    }

    #[test]
    fn trilemma_is_vacuous_for_trivial_observables() {
        // Identity premeasurement with a single trivial-pointer outcome:
        // all arms hold, which is fine because the observable is trivial.
        let xi = random::full_rank_state(2, 404).unwrap();
        let pointer = Observable::with_default_labels(vec![Effect::identity(2).unwrap()]).unwrap();
        let proc = MeasurementProcess::new(
            2,
            xi,
            QuantumOperation::identity(4).unwrap(),
            luders_instrument(&pointer).unwrap(),
        )
        .unwrap();
        let v = trilemma_classify(&proc, 50, 404).unwrap();
        assert!(!v.nontrivial_observable);
        assert!(v.failed_arms.is_empty());
        assert!(v.law_compatible && v.premeasurement_autonomous_ok && v.quasicomplete);
    }

    #[test]
    fn trilemma_on_pure_xi_dilation() {
        let proc = ozawa_dilation(&fixture_luders()).unwrap();
        let v = trilemma_classify(&proc, 50, 7).unwrap();
        assert!(v.nontrivial_observable);
        assert!(!v.law_compatible);
        assert!(v.premeasurement_autonomous_ok);
        assert!(v.quasicomplete);
        assert_eq!(v.failed_arms, vec![TrilemmaArm::LawCompatibility]);
        assert_eq!(
            v.second_law_evidence,
            SecondLawEvidence::BistochasticCertificate
        );
    }

    #[test]
    fn trilemma_on_smoothed_dilation() {
        let proc = smoothed_dilation_process();
        let v = trilemma_classify(&proc, 50, 7).unwrap();
        assert!(v.law_compatible);
        assert!(v.premeasurement_autonomous_ok);
        assert!(!v.quasicomplete);
        assert_eq!(v.failed_arms, vec![TrilemmaArm::Quasicompleteness]);
    }

    #[test]
    fn trilemma_on_thermo_construction() {
        let proc = thermo_fixture_process();
        let v = trilemma_classify(&proc, 50, 7).unwrap();
        assert!(v.law_compatible);
        assert!(!v.premeasurement_autonomous_ok);
        assert!(v.quasicomplete);
        assert_eq!(v.failed_arms, vec![TrilemmaArm::AutonomousPremeasurement]);
        assert!(v.composed_channel_bistochastic);
    }
}
