//! Measurement processes: apparatus, premeasurement channel, objectification.
//!
//! A process is the tuple (apparatus space, apparatus state, premeasurement
//! channel on the joint space, objectification instrument on the apparatus
//! with its pointer observable). From it we derive the induced system
//! instrument, posterior states, the effective apparatus instrument, and the
//! prior-dependent apparatus observable. Two synthesis routes are provided:
//! the unitary dilation (pure apparatus state, unitary interaction,
//! projective pointer) and the strictly positive non-unitary construction
//! that realizes outcome-unitary square-root instruments while keeping the
//! apparatus preparation full rank.

use nalgebra::Complex;

use crate::channels::{choi_distance, operation_from_action, QuantumOperation};
use crate::error::Error;
use crate::instruments::{induced_observable, luders_instrument, Instrument};
use crate::linop::{self, CMatrix, CVector, HermitianMatrix, Subsystem};
use crate::qobjects::{classify_observable, Effect, Observable, State};
use crate::tol;
use crate::Result;

/// Probabilities at or below this floor mark an outcome as degenerate; its
/// posterior is replaced by the maximally mixed state and flagged, never
/// silently renormalized.
pub const P_FLOOR: f64 = tol::P_FLOOR;

/// A measurement process `(apparatus, xi, premeasurement, objectification)`.
#[derive(Debug, Clone)]
pub struct MeasurementProcess {
    sys_dim: usize,
    app_dim: usize,
    xi: State,
    premeasurement: QuantumOperation,
    objectification: Instrument,
    pointer: Observable,
    /// User-declared annotation: the process is presented as an indivisible
    /// whole rather than as autonomous premeasurement + objectification
    /// stages. Purely descriptive; no operational test can infer it.
    indecomposable: bool,
}

impl MeasurementProcess {
    pub fn new(
        sys_dim: usize,
        xi: State,
        premeasurement: QuantumOperation,
        objectification: Instrument,
    ) -> Result<Self> {
        let app_dim = xi.dim();
        if sys_dim == 0 {
            return Err(Error::MalformedProcess(
                "system dimension must be >= 1".into(),
            ));
        }
        let joint = sys_dim * app_dim;
        if premeasurement.in_dim() != joint || premeasurement.out_dim() != joint {
            return Err(Error::MalformedProcess(format!(
                "premeasurement must act on the {joint}-dimensional joint space, got {}x{}",
                premeasurement.out_dim(),
                premeasurement.in_dim()
            )));
        }
        let effect = premeasurement.dual_apply(&linop::identity(joint))?;
        let tp_residual = linop::max_abs_diff(&effect, &linop::identity(joint));
        if tp_residual > tol::TOL_TP {
            return Err(Error::MalformedProcess(format!(
                "premeasurement is not trace preserving: residual {tp_residual:.3e}"
            )));
        }
        if objectification.in_dim() != app_dim || objectification.out_dim() != app_dim {
            return Err(Error::MalformedProcess(
                "objectification must act in the apparatus space".into(),
            ));
        }
        let pointer = induced_observable(&objectification)
            .map_err(|e| Error::MalformedProcess(format!("pointer observable invalid: {e}")))?;
        Ok(Self {
            sys_dim,
            app_dim,
            xi,
            premeasurement,
            objectification,
            pointer,
            indecomposable: false,
        })
    }

    pub fn with_indecomposable(mut self, flag: bool) -> Self {
        self.indecomposable = flag;
        self
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn app_dim(&self) -> usize {
        self.app_dim
    }

    pub fn joint_dim(&self) -> usize {
        self.sys_dim * self.app_dim
    }

    pub fn xi(&self) -> &State {
        &self.xi
    }

    pub fn premeasurement(&self) -> &QuantumOperation {
        &self.premeasurement
    }

    pub fn objectification(&self) -> &Instrument {
        &self.objectification
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn outcomes(&self) -> usize {
        self.objectification.len()
    }

    pub fn labels(&self) -> &[String] {
        self.objectification.labels()
    }

    pub fn indecomposable(&self) -> bool {
        self.indecomposable
    }

    /// The selective joint-space operation `(id ⊗ J_x) o E` for one outcome.
    pub fn selective_joint_operation(&self, outcome: usize) -> Result<QuantumOperation> {
        let id_sys = QuantumOperation::identity(self.sys_dim)?;
        let lifted = QuantumOperation::tensor(&id_sys, self.objectification.operation(outcome))?;
        QuantumOperation::compose(&lifted, &self.premeasurement)
    }

    /// The full channel `(id ⊗ J_X) o E` on the joint space.
    pub fn composed_channel(&self) -> Result<QuantumOperation> {
        let id_sys = QuantumOperation::identity(self.sys_dim)?;
        let total = crate::instruments::total_channel(&self.objectification);
        let lifted = QuantumOperation::tensor(&id_sys, &total)?;
        QuantumOperation::compose(&lifted, &self.premeasurement)
    }
}

/// Restriction map (conditional expectation) with respect to an anchor state
/// on the traced-out side.
///
/// With `keep = First` this is `M -> tr_A[M (1 ⊗ anchor)]` (anchor on the
/// second factor); with `keep = Second` it is `M -> tr_S[M (anchor ⊗ 1)]`.
/// Either way `tr[restrict(M) sigma] = tr[M (sigma ⊗ anchor)]` (respectively
/// the mirrored pairing) holds by construction.
pub fn restriction_map(
    joint: &CMatrix,
    dims: (usize, usize),
    anchor: &State,
    keep: Subsystem,
) -> Result<CMatrix> {
    let (da, db) = dims;
    let expected_anchor = match keep {
        Subsystem::First => db,
        Subsystem::Second => da,
    };
    if anchor.dim() != expected_anchor {
        return Err(Error::InvalidInput(format!(
            "anchor dimension {} does not match the traced-out factor {expected_anchor}",
            anchor.dim()
        )));
    }
    let weighted = match keep {
        Subsystem::First => joint * linop::kron(&linop::identity(da), anchor.matrix()),
        Subsystem::Second => joint * linop::kron(anchor.matrix(), &linop::identity(db)),
    };
    linop::partial_trace(&weighted, dims, keep)
}

/// The instrument induced on the system by a process, via its action on the
/// matrix units of the system space, reassembled in Kraus form through the
/// Choi matrix.
///
/// Cross-checked against the dual form: the induced effects must match
/// `Gamma_xi(E^*(1 ⊗ Z_x))` to within the equality tolerance, else the
/// process is reported as malformed.
pub fn induced_instrument(proc: &MeasurementProcess) -> Result<Instrument> {
    let d = proc.sys_dim();
    let dims = (proc.sys_dim(), proc.app_dim());
    let mut operations = Vec::with_capacity(proc.outcomes());
    for x in 0..proc.outcomes() {
        let selective = proc.selective_joint_operation(x)?;
        let op = operation_from_action(d, d, |unit| {
            let joint_in = linop::kron(unit, proc.xi().matrix());
            let moved = selective.apply(&joint_in)?;
            linop::partial_trace(&moved, dims, Subsystem::First)
        })?;

        // Dual-form consistency: E_x = Gamma_xi(E^*(1 ⊗ Z_x)).
        let z = proc.pointer().effect(x).matrix();
        let lifted = linop::kron(&linop::identity(d), z);
        let dualled = proc.premeasurement().dual_apply(&lifted)?;
        let effect_dual = restriction_map(&dualled, dims, proc.xi(), Subsystem::First)?;
        let effect_primary = op.dual_apply(&linop::identity(d))?;
        let residual = linop::max_abs_diff(&effect_primary, &effect_dual);
        if residual > tol::TOL_EQ {
            return Err(Error::MalformedProcess(format!(
                "induced effect for outcome {x} disagrees between primary and dual forms \
                 (residual {residual:.3e})"
            )));
        }
        operations.push(op);
    }
    Instrument::new(proc.labels().to_vec(), operations)
        .map_err(|e| Error::MalformedProcess(format!("induced instrument invalid: {e}")))
}

/// Posterior data for one measured prior: outcome probabilities, joint
/// posterior states, and their marginals.
#[derive(Debug, Clone)]
pub struct PosteriorBundle {
    sys_dim: usize,
    app_dim: usize,
    probabilities: Vec<f64>,
    joints: Vec<State>,
    sys_marginals: Vec<State>,
    app_marginals: Vec<State>,
    degenerate: Vec<bool>,
    prior_system: State,
    prior_apparatus: State,
}

impl PosteriorBundle {
    pub fn outcomes(&self) -> usize {
        self.probabilities.len()
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn app_dim(&self) -> usize {
        self.app_dim
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn joint(&self, x: usize) -> &State {
        &self.joints[x]
    }

    pub fn sys_marginal(&self, x: usize) -> &State {
        &self.sys_marginals[x]
    }

    pub fn app_marginal(&self, x: usize) -> &State {
        &self.app_marginals[x]
    }

    /// True when the outcome probability fell at or below the floor and the
    /// posterior was replaced by the maximally mixed placeholder.
    pub fn is_degenerate(&self, x: usize) -> bool {
        self.degenerate[x]
    }

    pub fn prior_system(&self) -> &State {
        &self.prior_system
    }

    pub fn prior_apparatus(&self) -> &State {
        &self.prior_apparatus
    }
}

/// Compute the posterior bundle of a process measured in `rho`.
pub fn posterior_bundle(proc: &MeasurementProcess, rho: &State) -> Result<PosteriorBundle> {
    if rho.dim() != proc.sys_dim() {
        return Err(Error::InvalidInput(format!(
            "prior state dimension {} does not match the system dimension {}",
            rho.dim(),
            proc.sys_dim()
        )));
    }
    let dims = (proc.sys_dim(), proc.app_dim());
    let joint_dim = proc.joint_dim();
    let joint_in = linop::kron(rho.matrix(), proc.xi().matrix());
    let mut probabilities = Vec::with_capacity(proc.outcomes());
    let mut joints = Vec::with_capacity(proc.outcomes());
    let mut sys_marginals = Vec::with_capacity(proc.outcomes());
    let mut app_marginals = Vec::with_capacity(proc.outcomes());
    let mut degenerate = Vec::with_capacity(proc.outcomes());
    for x in 0..proc.outcomes() {
        let selective = proc.selective_joint_operation(x)?;
        let raw = selective.apply(&joint_in)?;
        let p = linop::trace_re(&raw).max(0.0);
        probabilities.push(p);
        if p <= P_FLOOR {
            degenerate.push(true);
            joints.push(State::maximally_mixed(joint_dim)?);
            sys_marginals.push(State::maximally_mixed(proc.sys_dim())?);
            app_marginals.push(State::maximally_mixed(proc.app_dim())?);
            continue;
        }
        degenerate.push(false);
        let normalized = &raw * Complex::new(1.0 / p, 0.0);
        let joint = State::new(HermitianMatrix::from_nearly_hermitian(&normalized)?)?;
        let sys = State::new(HermitianMatrix::from_nearly_hermitian(
            &linop::partial_trace(joint.matrix(), dims, Subsystem::First)?,
        )?)?;
        let app = State::new(HermitianMatrix::from_nearly_hermitian(
            &linop::partial_trace(joint.matrix(), dims, Subsystem::Second)?,
        )?)?;
        joints.push(joint);
        sys_marginals.push(sys);
        app_marginals.push(app);
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > tol::TOL_TP {
        return Err(Error::MalformedProcess(format!(
            "outcome probabilities sum to {total}, not 1"
        )));
    }
    Ok(PosteriorBundle {
        sys_dim: proc.sys_dim(),
        app_dim: proc.app_dim(),
        probabilities,
        joints,
        sys_marginals,
        app_marginals,
        degenerate,
        prior_system: rho.clone(),
        prior_apparatus: proc.xi().clone(),
    })
}

/// The effective instrument on the apparatus for a fixed system prior:
/// `Phi_x^rho(.) = J_x(tr_S[E(rho ⊗ .)])`.
pub fn effective_apparatus_instrument(
    proc: &MeasurementProcess,
    rho: &State,
) -> Result<Instrument> {
    if rho.dim() != proc.sys_dim() {
        return Err(Error::InvalidInput(
            "prior state dimension does not match the system".into(),
        ));
    }
    let da = proc.app_dim();
    let dims = (proc.sys_dim(), proc.app_dim());
    let mut operations = Vec::with_capacity(proc.outcomes());
    for x in 0..proc.outcomes() {
        let j_x = proc.objectification().operation(x);
        let op = operation_from_action(da, da, |unit| {
            let joint_in = linop::kron(rho.matrix(), unit);
            let moved = proc.premeasurement().apply(&joint_in)?;
            let reduced = linop::partial_trace(&moved, dims, Subsystem::Second)?;
            j_x.apply(&reduced)
        })?;
        operations.push(op);
    }
    Instrument::new(proc.labels().to_vec(), operations)
        .map_err(|e| Error::MalformedProcess(format!("effective instrument invalid: {e}")))
}

/// The apparatus observable measured by the effective instrument:
/// `G_x^rho = Gamma_rho(E^*(1 ⊗ Z_x))`. Satisfies `tr[G_x^rho xi] = p(x)`.
pub fn apparatus_observable(proc: &MeasurementProcess, rho: &State) -> Result<Observable> {
    if rho.dim() != proc.sys_dim() {
        return Err(Error::InvalidInput(
            "prior state dimension does not match the system".into(),
        ));
    }
    let dims = (proc.sys_dim(), proc.app_dim());
    let effects = (0..proc.outcomes())
        .map(|x| {
            let z = proc.pointer().effect(x).matrix();
            let lifted = linop::kron(&linop::identity(proc.sys_dim()), z);
            let dualled = proc.premeasurement().dual_apply(&lifted)?;
            let g = restriction_map(&dualled, dims, rho, Subsystem::Second)?;
            Effect::new(HermitianMatrix::from_nearly_hermitian(&g)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::new(proc.labels().to_vec(), effects)
}

/// Unitary dilation of an instrument: pure apparatus state, unitary
/// premeasurement, projective pointer measured by its square-root
/// instrument.
///
/// The apparatus dimension is the total Kraus count of the instrument (the
/// minimum that indexes every Kraus operator); the isometry
/// `V|psi> = sum_{x,i} K_{x,i}|psi> ⊗ |x,i>` is column-completed to a
/// unitary on the joint space by orthonormalizing standard basis vectors
/// against it, deterministically.
pub fn ozawa_dilation(inst: &Instrument) -> Result<MeasurementProcess> {
    if inst.in_dim() != inst.out_dim() {
        return Err(Error::InvalidInput(
            "dilation expects an instrument acting in one space".into(),
        ));
    }
    let d = inst.in_dim();
    let flat: Vec<(usize, &CMatrix)> = inst
        .operations()
        .iter()
        .enumerate()
        .flat_map(|(x, op)| op.kraus().iter().map(move |k| (x, k)))
        .collect();
    let m = flat.len();
    let joint = d * m;

    // Isometry columns in the joint space, index (s, a) -> s*m + a.
    let mut columns: Vec<CVector> = Vec::with_capacity(joint);
    for psi in 0..d {
        let mut col = CVector::zeros(joint);
        for (a, (_, k)) in flat.iter().enumerate() {
            for s in 0..d {
                col[s * m + a] = k[(s, psi)];
            }
        }
        columns.push(col);
    }
    orthonormalize_in_place(&mut columns)?;

    // Deterministic completion from the standard basis.
    for cand in 0..joint {
        if columns.len() == joint {
            break;
        }
        let mut v = CVector::zeros(joint);
        v[cand] = Complex::new(1.0, 0.0);
        project_out(&columns, &mut v);
        project_out(&columns, &mut v);
        let norm = v.norm();
        if norm > 1e-6 {
            columns.push(v / Complex::new(norm, 0.0));
        }
    }
    if columns.len() != joint {
        return Err(Error::InternalInconsistency(
            "unitary completion did not span the joint space".into(),
        ));
    }

    // Column psi of the isometry must sit at joint index psi*m (so that
    // U(|psi> ⊗ |0>) = V|psi>); completions fill the remaining slots in
    // index order.
    let mut u = CMatrix::zeros(joint, joint);
    let mut completion = columns.split_off(d);
    let mut completion_iter = completion.drain(..);
    for col in 0..joint {
        let vec = if col % m == 0 {
            columns[col / m].clone()
        } else {
            completion_iter.next().expect("enough completion columns")
        };
        u.set_column(col, &vec);
    }

    let premeasurement = QuantumOperation::from_unitary(&u)?;
    let xi = State::basis(m, 0)?;

    // Pointer projectors collect the Kraus indices of each outcome.
    let pointer_effects = (0..inst.len())
        .map(|x| {
            let mut z = CMatrix::zeros(m, m);
            for (a, (ox, _)) in flat.iter().enumerate() {
                if *ox == x {
                    z[(a, a)] = Complex::new(1.0, 0.0);
                }
            }
            Effect::new(HermitianMatrix::from_nearly_hermitian(&z)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let pointer = Observable::new(inst.labels().to_vec(), pointer_effects)?;
    let objectification = luders_instrument(&pointer)?;

    MeasurementProcess::new(d, xi, premeasurement, objectification)
}

fn project_out(basis: &[CVector], v: &mut CVector) {
    for b in basis {
        let overlap = b.dotc(v);
        *v -= b * overlap;
    }
}

fn orthonormalize_in_place(columns: &mut [CVector]) -> Result<()> {
    for i in 0..columns.len() {
        let (done, rest) = columns.split_at_mut(i);
        let v = &mut rest[0];
        project_out(done, v);
        project_out(done, v);
        let norm = v.norm();
        if norm < 1e-9 {
            return Err(Error::InvalidInput(
                "isometry columns are linearly dependent".into(),
            ));
        }
        *v /= Complex::new(norm, 0.0);
    }
    Ok(())
}

/// Strictly positive, non-unitary realization of the outcome-unitary
/// square-root instrument of a strictly positive observable.
///
/// The apparatus has one dimension per outcome. The premeasurement channel
/// is the composition of a correlating channel with Kraus family
/// `K_x = sum_a sqrt(E_{x(+)a}) ⊗ |x(+)a><a|` (addition modulo the outcome
/// count) and the outcome-controlled unitary-plus-dephasing channel with
/// Kraus family `{U_x ⊗ |x><x|}`. The objectification instrument reads the
/// pointer basis and prepares the apparatus in the complete mixture:
/// `J_x(.) = <x|.|x> 1/N`.
pub fn thermo_construction(
    obs: &Observable,
    unitaries: &[CMatrix],
    xi: &State,
) -> Result<MeasurementProcess> {
    let class = classify_observable(obs);
    if !class.strictly_positive {
        return Err(Error::ThirdLawObstruction(
            "the observable must be strictly positive (every effect full rank)".into(),
        ));
    }
    if !xi.is_strictly_positive() {
        return Err(Error::ThirdLawObstruction(
            "the apparatus preparation must be strictly positive".into(),
        ));
    }
    let n = obs.len();
    let d = obs.dim();
    if xi.dim() != n {
        return Err(Error::InvalidInput(format!(
            "apparatus preparation must have one dimension per outcome ({n}), got {}",
            xi.dim()
        )));
    }
    if unitaries.len() != n {
        return Err(Error::InvalidInput(format!(
            "need one unitary per outcome: {n} outcomes, {} unitaries",
            unitaries.len()
        )));
    }
    for u in unitaries {
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
    }

    let sqrt_effects: Vec<CMatrix> = obs
        .effects()
        .iter()
        .map(|e| Ok(e.hermitian().sqrt_psd(tol::tol_psd())?.into_matrix()))
        .collect::<Result<Vec<_>>>()?;

    // Correlating channel: K_x = sum_a sqrt(E_{x(+)a}) ⊗ |x(+)a><a|.
    let correlate_kraus: Vec<CMatrix> = (0..n)
        .map(|x| {
            let mut k = CMatrix::zeros(d * n, d * n);
            for a in 0..n {
                let y = (x + a) % n;
                let block = linop::kron(&sqrt_effects[y], &linop::matrix_unit(n, y, a));
                k += block;
            }
            k
        })
        .collect();
    let correlate = QuantumOperation::new(correlate_kraus)?;

    // Outcome-controlled unitaries with dephasing: {U_x ⊗ |x><x|}.
    let control_kraus: Vec<CMatrix> = (0..n)
        .map(|x| linop::kron(&unitaries[x], &linop::matrix_unit(n, x, x)))
        .collect();
    let control = QuantumOperation::new(control_kraus)?;

    let premeasurement = QuantumOperation::compose(&control, &correlate)?;

    // Objectification J_x(.) = <x|.|x> 1/N, Kraus set {|m><x|/sqrt(N)}.
    let scale = Complex::new(1.0 / (n as f64).sqrt(), 0.0);
    let objectification_ops = (0..n)
        .map(|x| {
            let kraus: Vec<CMatrix> = (0..n)
                .map(|m| {
                    let mut k = CMatrix::zeros(n, n);
                    k[(m, x)] = scale;
                    k
                })
                .collect();
            QuantumOperation::new(kraus)
        })
        .collect::<Result<Vec<_>>>()?;
    let objectification = Instrument::new(obs.labels().to_vec(), objectification_ops)?;

    MeasurementProcess::new(d, xi.clone(), premeasurement, objectification)
}

/// Convenience check used by the synthesis tests: the induced instrument of
/// a process matches a target, outcome by outcome, in Choi distance.
pub fn max_induced_choi_distance(proc: &MeasurementProcess, target: &Instrument) -> Result<f64> {
    let induced = induced_instrument(proc)?;
    if induced.len() != target.len() {
        return Err(Error::InvalidInput("outcome count mismatch".into()));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in induced.operations().iter().zip(target.operations()) {
        worst = worst.max(choi_distance(a, b));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::classify_channel;
    use crate::instruments::efficient_instrument;
    use crate::qobjects::tests::fixture_observable;
    use crate::qobjects::{born_probability, random};

    fn fixture_luders() -> Instrument {
        luders_instrument(&fixture_observable()).unwrap()
    }

    fn thermo_fixture_process() -> MeasurementProcess {
        let obs = fixture_observable();
        let us = vec![linop::identity(2), linop::identity(2)];
        let xi = State::maximally_mixed(2).unwrap();
        thermo_construction(&obs, &us, &xi).unwrap()
    }

    #[test]
    fn restriction_factorizes_on_products() {
        let a = random::state(2, 60).unwrap();
        let b = random::state(3, 61).unwrap();
        let xi = random::state(3, 62).unwrap();
        let joint = linop::kron(a.matrix(), b.matrix());
        let restricted = restriction_map(&joint, (2, 3), &xi, Subsystem::First).unwrap();
        let weight = linop::trace_re(&(b.matrix() * xi.matrix()));
        let expected = a.matrix() * Complex::new(weight, 0.0);
        assert!(linop::max_abs_diff(&restricted, &expected) <= 1e-12);
    }

    #[test]
    fn restriction_is_unital() {
        let xi = random::state(3, 63).unwrap();
        let restricted =
            restriction_map(&linop::identity(6), (2, 3), &xi, Subsystem::First).unwrap();
        assert!(linop::max_abs_diff(&restricted, &linop::identity(2)) <= 1e-12);
    }

    #[test]
    fn restriction_duality_on_seeded_inputs() {
        // tr[Gamma_xi(M) rho] = tr[M (rho ⊗ xi)], both sides independent.
        let xi = random::state(2, 17).unwrap();
        let rho = random::state(3, 18).unwrap();
        let m = {
            let s = random::state(6, 19).unwrap();
            s.matrix() * Complex::new(6.0, 0.0)
        };
        let lhs =
            (restriction_map(&m, (3, 2), &xi, Subsystem::First).unwrap() * rho.matrix()).trace();
        let rhs = (&m * linop::kron(rho.matrix(), xi.matrix())).trace();
        assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn dilation_of_unitary_channel_is_degenerate() {
        let u = random::unitary(2, 70).unwrap();
        let inst =
            Instrument::with_default_labels(vec![QuantumOperation::from_unitary(&u).unwrap()])
                .unwrap();
        let proc = ozawa_dilation(&inst).unwrap();
        assert_eq!(proc.app_dim(), 1);
        // Premeasurement acts as U ⊗ 1 on the joint (here 1-dimensional
        // apparatus), so its single Kraus operator equals U up to phase.
        let dist = max_induced_choi_distance(&proc, &inst).unwrap();
        assert!(dist <= 1e-9, "distance {dist:.3e}");
    }

    #[test]
    fn dilation_round_trip_on_fixture_luders() {
        let inst = fixture_luders();
        let proc = ozawa_dilation(&inst).unwrap();
        assert_eq!(proc.app_dim(), 2);
        let dist = max_induced_choi_distance(&proc, &inst).unwrap();
        assert!(dist <= 1e-9, "distance {dist:.3e}");
    }

    #[test]
    fn dilation_premeasurement_is_bistochastic_and_xi_pure() {
        let proc = ozawa_dilation(&fixture_luders()).unwrap();
        let class = classify_channel(proc.premeasurement());
        assert!(class.bistochastic);
        assert!(!proc.xi().is_strictly_positive());
    }

    #[test]
    fn dilation_round_trip_on_seeded_instruments() {
        for seed in 0..6 {
            let inst = crate::instruments::random_instrument(2, 2, 2, 800 + seed).unwrap();
            let proc = ozawa_dilation(&inst).unwrap();
            let dist = max_induced_choi_distance(&proc, &inst).unwrap();
            assert!(dist <= 1e-9, "seed {seed}: distance {dist:.3e}");
        }
    }

    #[test]
    fn thermo_construction_recovers_fixture_luders() {
        let proc = thermo_fixture_process();
        let dist = max_induced_choi_distance(&proc, &fixture_luders()).unwrap();
        assert!(dist <= 1e-9, "distance {dist:.3e}");
    }

    #[test]
    fn thermo_construction_with_unitaries_recovers_target() {
        let obs = random::povm(2, 3, 90).unwrap();
        let us: Vec<CMatrix> = (0..3)
            .map(|i| random::unitary(2, 91 + i).unwrap())
            .collect();
        let xi = random::full_rank_state(3, 95).unwrap();
        let proc = thermo_construction(&obs, &us, &xi).unwrap();
        let target = efficient_instrument(&obs, &us).unwrap();
        let dist = max_induced_choi_distance(&proc, &target).unwrap();
        assert!(dist <= 1e-9, "distance {dist:.3e}");
    }

    #[test]
    fn thermo_premeasurement_image_of_unit_matches_closed_form() {
        let obs = fixture_observable();
        let us = vec![linop::identity(2), linop::identity(2)];
        let xi = State::maximally_mixed(2).unwrap();
        let proc = thermo_construction(&obs, &us, &xi).unwrap();
        let image = proc.premeasurement().apply(&linop::identity(4)).unwrap();
        // N sum_x U_x E_x U_x^dagger ⊗ |x><x|.
        let mut expected = CMatrix::zeros(4, 4);
        for (x, e) in obs.effects().iter().enumerate() {
            expected +=
                linop::kron(e.matrix(), &linop::matrix_unit(2, x, x)) * Complex::new(2.0, 0.0);
        }
        assert!(linop::max_abs_diff(&image, &expected) <= 1e-9);
        assert!(linop::max_abs_diff(&image, &linop::identity(4)) > 1e-3);
        let class = classify_channel(proc.premeasurement());
        assert!(class.strictly_positive);
        assert!(!class.bistochastic);
    }

    #[test]
    fn thermo_premeasurement_closed_form_on_product_inputs() {
        // E(A ⊗ B) = sum_x U_x sqrt(E_x) A sqrt(E_x) U_x^dagger ⊗ tr[B] |x><x|.
        let obs = random::povm(2, 2, 140).unwrap();
        let us: Vec<CMatrix> = (0..2)
            .map(|i| random::unitary(2, 141 + i).unwrap())
            .collect();
        let xi = random::full_rank_state(2, 143).unwrap();
        let proc = thermo_construction(&obs, &us, &xi).unwrap();

        let a = random::state(2, 144).unwrap().matrix().clone();
        let b = random::state(2, 145).unwrap().matrix().clone();
        let moved = proc.premeasurement().apply(&linop::kron(&a, &b)).unwrap();

        let mut expected = CMatrix::zeros(4, 4);
        for (x, (u, e)) in us.iter().zip(obs.effects()).enumerate() {
            let sqrt_e = e
                .hermitian()
                .sqrt_psd(tol::tol_psd())
                .unwrap()
                .into_matrix();
            let sys = u * &sqrt_e * &a * &sqrt_e * u.adjoint();
            expected += linop::kron(&(sys * b.trace()), &linop::matrix_unit(2, x, x));
        }
        assert!(linop::max_abs_diff(&moved, &expected) <= 1e-10);
    }

    #[test]
    fn thermo_rejects_projective_observable() {
        let obs = Observable::computational_basis(2).unwrap();
        let us = vec![linop::identity(2), linop::identity(2)];
        let xi = State::maximally_mixed(2).unwrap();
        assert!(matches!(
            thermo_construction(&obs, &us, &xi),
            Err(Error::ThirdLawObstruction(_))
        ));
    }

    #[test]
    fn thermo_rejects_pure_xi() {
        let obs = fixture_observable();
        let us = vec![linop::identity(2), linop::identity(2)];
        let xi = State::basis(2, 0).unwrap();
        assert!(matches!(
            thermo_construction(&obs, &us, &xi),
            Err(Error::ThirdLawObstruction(_))
        ));
    }

    #[test]
    fn thermo_composed_channel_is_bistochastic_with_equal_unitaries() {
        let proc = thermo_fixture_process();
        let class = classify_channel(&proc.composed_channel().unwrap());
        assert!(class.bistochastic);
    }

    #[test]
    fn posterior_probabilities_match_born_rule() {
        let proc = thermo_fixture_process();
        let rho = random::state(2, 96).unwrap();
        let bundle = posterior_bundle(&proc, &rho).unwrap();
        let induced = induced_instrument(&proc).unwrap();
        let obs = induced_observable(&induced).unwrap();
        let p = born_probability(&obs, &rho).unwrap();
        for (a, b) in bundle.probabilities().iter().zip(p.probabilities()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn posterior_joints_factorize_for_thermo_processes() {
        let proc = thermo_fixture_process();
        let rho = random::state(2, 97).unwrap();
        let bundle = posterior_bundle(&proc, &rho).unwrap();
        for x in 0..bundle.outcomes() {
            let product = linop::kron(
                bundle.sys_marginal(x).matrix(),
                bundle.app_marginal(x).matrix(),
            );
            assert!(linop::max_abs_diff(bundle.joint(x).matrix(), &product) <= 1e-9);
            // Apparatus marginal is the complete mixture.
            assert!(
                linop::max_abs_diff(
                    bundle.app_marginal(x).matrix(),
                    State::maximally_mixed(2).unwrap().matrix()
                ) <= 1e-9
            );
        }
    }

    #[test]
    fn posterior_on_dilated_luders_with_maximally_mixed_prior() {
        let proc = ozawa_dilation(&fixture_luders()).unwrap();
        let rho = State::maximally_mixed(2).unwrap();
        let bundle = posterior_bundle(&proc, &rho).unwrap();
        assert!((bundle.probabilities()[0] - 0.5).abs() <= 1e-10);
        assert!((bundle.probabilities()[1] - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn effective_apparatus_instrument_on_thermo_is_trash_and_prepare() {
        let proc = thermo_fixture_process();
        let rho = random::state(2, 98).unwrap();
        let eff = effective_apparatus_instrument(&proc, &rho).unwrap();
        let induced = induced_instrument(&proc).unwrap();
        let obs = induced_observable(&induced).unwrap();
        let p = born_probability(&obs, &rho).unwrap();
        // Phi_x^rho(.) = p(x) tr[.] 1/N.
        for x in 0..2 {
            let out = eff.operation(x).apply(&linop::identity(2)).unwrap();
            let expected = linop::identity(2) * Complex::new(p.probabilities()[x], 0.0);
            assert!(linop::max_abs_diff(&out, &expected) <= 1e-9);
        }
    }

    #[test]
    fn effective_apparatus_marginals_agree_with_bundle() {
        // Two computation paths for sigma_A^x on a seeded process.
        let inst = crate::instruments::random_instrument(2, 2, 1, 19).unwrap();
        let proc = ozawa_dilation(&inst).unwrap();
        let rho = random::state(2, 119).unwrap();
        let bundle = posterior_bundle(&proc, &rho).unwrap();
        let eff = effective_apparatus_instrument(&proc, &rho).unwrap();
        for x in 0..bundle.outcomes() {
            if bundle.is_degenerate(x) {
                continue;
            }
            let out = eff.operation(x).apply(proc.xi().matrix()).unwrap();
            let p = bundle.probabilities()[x];
            let normalized = &out * Complex::new(1.0 / p, 0.0);
            assert!(linop::max_abs_diff(&normalized, bundle.app_marginal(x).matrix()) <= 1e-9);
        }
    }

    #[test]
    fn trivial_premeasurement_yields_scaled_identity_instrument() {
        // E = id ⊗ id with a mixed apparatus state and the basis pointer.
        let xi = random::full_rank_state(2, 77).unwrap();
        let pointer = Observable::computational_basis(2).unwrap();
        let objectification = luders_instrument(&pointer).unwrap();
        let premeasurement = QuantumOperation::identity(4).unwrap();
        let proc = MeasurementProcess::new(2, xi.clone(), premeasurement, objectification).unwrap();

        let induced = induced_instrument(&proc).unwrap();
        for (x, op) in induced.operations().iter().enumerate() {
            let weight = linop::trace_re(&(pointer.effect(x).matrix() * xi.matrix()));
            let rho = random::state(2, 78).unwrap();
            let out = op.apply(rho.matrix()).unwrap();
            let expected = rho.matrix() * Complex::new(weight, 0.0);
            assert!(linop::max_abs_diff(&out, &expected) <= 1e-9);
        }

        // The effective apparatus instrument reduces to the objectification.
        let rho = random::state(2, 79).unwrap();
        let eff = effective_apparatus_instrument(&proc, &rho).unwrap();
        for x in 0..2 {
            let dist = choi_distance(eff.operation(x), proc.objectification().operation(x));
            assert!(dist <= 1e-9);
        }

        // And the apparatus observable reduces to the pointer.
        let g = apparatus_observable(&proc, &rho).unwrap();
        for (a, b) in g.effects().iter().zip(pointer.effects()) {
            assert!(linop::max_abs_diff(a.matrix(), b.matrix()) <= 1e-9);
        }
    }

    #[test]
    fn apparatus_observable_weights_match_born_probabilities() {
        let proc = thermo_fixture_process();
        let rho = State::basis(2, 0).unwrap();
        let g = apparatus_observable(&proc, &rho).unwrap();
        let expected = [0.7, 0.3];
        for (x, e) in g.effects().iter().enumerate() {
            let w = linop::trace_re(&(e.matrix() * proc.xi().matrix()));
            assert!((w - expected[x]).abs() <= 1e-9);
        }
    }

    #[test]
    fn apparatus_observable_normalizes_on_seeded_process() {
        let inst = crate::instruments::random_instrument(2, 3, 1, 21).unwrap();
        let proc = ozawa_dilation(&inst).unwrap();
        let rho = random::state(2, 121).unwrap();
        let g = apparatus_observable(&proc, &rho).unwrap();
        let mut sum = CMatrix::zeros(proc.app_dim(), proc.app_dim());
        for e in g.effects() {
            sum += e.matrix();
        }
        assert!(linop::max_abs_diff(&sum, &linop::identity(proc.app_dim())) <= 1e-9);
    }

    #[test]
    fn pointer_instrument_choice_is_irrelevant_to_induced_instrument() {
        // Replace the square-root objectification of the dilation pointer by
        // a trash-and-prepare instrument compatible with the same pointer.
        let inst = fixture_luders();
        let proc = ozawa_dilation(&inst).unwrap();
        let m = proc.app_dim();
        let scale = Complex::new(1.0 / (m as f64).sqrt(), 0.0);
        let alt_ops = (0..proc.outcomes())
            .map(|x| {
                // J'_x(.) = tr[Z_x .] 1/m, Kraus set {|r><a|/sqrt(m)} over the
                // basis vectors a in the support of the pointer projector.
                let z = proc.pointer().effect(x).matrix();
                let mut kraus = Vec::new();
                for a in 0..m {
                    if z[(a, a)].re > 0.5 {
                        for r in 0..m {
                            let mut k = CMatrix::zeros(m, m);
                            k[(r, a)] = scale;
                            kraus.push(k);
                        }
                    }
                }
                QuantumOperation::new(kraus).unwrap()
            })
            .collect::<Vec<_>>();
        let alt = Instrument::new(inst.labels().to_vec(), alt_ops).unwrap();
        let alt_proc = MeasurementProcess::new(
            proc.sys_dim(),
            proc.xi().clone(),
            proc.premeasurement().clone(),
            alt,
        )
        .unwrap();
        let a = induced_instrument(&proc).unwrap();
        let b = induced_instrument(&alt_proc).unwrap();
        for (x, (op_a, op_b)) in a.operations().iter().zip(b.operations()).enumerate() {
            let dist = choi_distance(op_a, op_b);
            assert!(dist <= 1e-9, "outcome {x}: distance {dist:.3e}");
        }
    }

    #[test]
    fn lemma3_identity_on_thermo_processes() {
        // E^*(B ⊗ Z_x) = I_x^*(B) ⊗ 1 over an operator basis of B.
        let obs = random::povm(2, 2, 30).unwrap();
        let us: Vec<CMatrix> = (0..2)
            .map(|i| random::unitary(2, 31 + i).unwrap())
            .collect();
        let xi = random::full_rank_state(2, 33).unwrap();
        let proc = thermo_construction(&obs, &us, &xi).unwrap();
        let target = efficient_instrument(&obs, &us).unwrap();
        for x in 0..2 {
            let z = proc.pointer().effect(x).matrix();
            for i in 0..2 {
                for j in 0..2 {
                    let b = linop::matrix_unit(2, i, j);
                    let lhs = proc
                        .premeasurement()
                        .dual_apply(&linop::kron(&b, z))
                        .unwrap();
                    let rhs = linop::kron(
                        &target.operation(x).dual_apply(&b).unwrap(),
                        &linop::identity(2),
                    );
                    assert!(linop::max_abs_diff(&lhs, &rhs) <= 1e-9);
                }
            }
        }
    }

    use crate::channels::choi_distance;
}
