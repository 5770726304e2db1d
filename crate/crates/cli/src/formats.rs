//! On-disk JSON formats and their conversions to core types.
//!
//! Complex scalars are two-element arrays `[re, im]`; matrices are row-major
//! nested arrays; a state file is a bare matrix. Serialization uses the
//! shortest decimal representation that round-trips the exact binary value,
//! so save -> load -> save is byte-identical.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qmt_core::channels::QuantumOperation;
use qmt_core::instruments::Instrument;
use qmt_core::linop::CMatrix;
use qmt_core::linop::HermitianMatrix;
use qmt_core::measproc::MeasurementProcess;
use qmt_core::qobjects::{Effect, Observable, State};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

#[derive(Debug, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub label: String,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObservableFile {
    pub effects: Vec<LabeledMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OperationFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<JsonMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabeledKraus {
    pub label: String,
    pub kraus: Vec<JsonMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProcessFile {
    pub sys_dim: usize,
    pub app_dim: usize,
    pub xi: JsonMatrix,
    pub premeasurement: OperationFile,
    pub objectification: Vec<LabeledKraus>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub indecomposable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UnitariesFile {
    pub unitaries: Vec<JsonMatrix>,
}

fn is_false(b: &bool) -> bool {
    !b
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix, context: &str) -> Result<CMatrix, String> {
    let rows = m.len();
    if rows == 0 {
        return Err(format!("{context}: matrix has no rows"));
    }
    let cols = m[0].len();
    if cols == 0 {
        return Err(format!("{context}: matrix has no columns"));
    }
    let mut out = CMatrix::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "{context}: row {i} has {} entries, expected {cols}",
                row.len()
            ));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !(re.is_finite() && im.is_finite()) {
                return Err(format!("{context}: entry ({i},{j}) is not finite"));
            }
            out[(i, j)] = Complex::new(re, im);
        }
    }
    Ok(out)
}

pub fn state_from_json(m: &JsonMatrix, context: &str) -> Result<State, String> {
    let mat = matrix_from_json(m, context)?;
    let herm = HermitianMatrix::new(mat).map_err(|e| format!("{context}: {e}"))?;
    State::new(herm).map_err(|e| format!("{context}: {e}"))
}

pub fn observable_from_file(f: &ObservableFile, context: &str) -> Result<Observable, String> {
    let mut labels = Vec::with_capacity(f.effects.len());
    let mut effects = Vec::with_capacity(f.effects.len());
    for (i, item) in f.effects.iter().enumerate() {
        let ctx = format!("{context}.effects[{i}]");
        let mat = matrix_from_json(&item.matrix, &ctx)?;
        let herm = HermitianMatrix::new(mat).map_err(|e| format!("{ctx}: {e}"))?;
        effects.push(Effect::new(herm).map_err(|e| format!("{ctx}: {e}"))?);
        labels.push(item.label.clone());
    }
    Observable::new(labels, effects).map_err(|e| format!("{context}: {e}"))
}

pub fn operation_from_file(f: &OperationFile, context: &str) -> Result<QuantumOperation, String> {
    let kraus = f
        .kraus
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let k = matrix_from_json(m, &format!("{context}.kraus[{i}]"))?;
            if k.nrows() != f.out_dim || k.ncols() != f.in_dim {
                return Err(format!(
                    "{context}.kraus[{i}]: expected {}x{}, got {}x{}",
                    f.out_dim,
                    f.in_dim,
                    k.nrows(),
                    k.ncols()
                ));
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>, String>>()?;
    QuantumOperation::new(kraus).map_err(|e| format!("{context}: {e}"))
}

pub fn operation_to_file(op: &QuantumOperation) -> OperationFile {
    OperationFile {
        in_dim: op.in_dim(),
        out_dim: op.out_dim(),
        kraus: op.kraus().iter().map(matrix_to_json).collect(),
    }
}

pub fn unitaries_from_file(f: &UnitariesFile, context: &str) -> Result<Vec<CMatrix>, String> {
    f.unitaries
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m, &format!("{context}.unitaries[{i}]")))
        .collect()
}

pub fn process_from_file(f: &ProcessFile) -> Result<MeasurementProcess, String> {
    let xi = state_from_json(&f.xi, "process.xi")?;
    if xi.dim() != f.app_dim {
        return Err(format!(
            "process.app_dim is {} but xi has dimension {}",
            f.app_dim,
            xi.dim()
        ));
    }
    let premeasurement = operation_from_file(&f.premeasurement, "process.premeasurement")?;
    let mut labels = Vec::with_capacity(f.objectification.len());
    let mut ops = Vec::with_capacity(f.objectification.len());
    for (i, item) in f.objectification.iter().enumerate() {
        let ctx = format!("process.objectification[{i}]");
        let kraus = item
            .kraus
            .iter()
            .enumerate()
            .map(|(j, m)| matrix_from_json(m, &format!("{ctx}.kraus[{j}]")))
            .collect::<Result<Vec<_>, String>>()?;
        ops.push(QuantumOperation::new(kraus).map_err(|e| format!("{ctx}: {e}"))?);
        labels.push(item.label.clone());
    }
    let objectification =
        Instrument::new(labels, ops).map_err(|e| format!("process.objectification: {e}"))?;
    let proc = MeasurementProcess::new(f.sys_dim, xi, premeasurement, objectification)
        .map_err(|e| format!("process: {e}"))?;
    Ok(proc.with_indecomposable(f.indecomposable))
}

pub fn process_to_file(proc: &MeasurementProcess, metadata: Option<Value>) -> ProcessFile {
    ProcessFile {
        sys_dim: proc.sys_dim(),
        app_dim: proc.app_dim(),
        xi: matrix_to_json(proc.xi().matrix()),
        premeasurement: operation_to_file(proc.premeasurement()),
        objectification: proc
            .objectification()
            .labels()
            .iter()
            .zip(proc.objectification().operations())
            .map(|(label, op)| LabeledKraus {
                label: label.clone(),
                kraus: op.kraus().iter().map(matrix_to_json).collect(),
            })
            .collect(),
        indecomposable: proc.indecomposable(),
        metadata,
    }
}
