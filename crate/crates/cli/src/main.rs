//! `qmt` — build measurement processes, audit them against the second and
//! third laws, and run seeded verification sweeps with machine-readable
//! reports.
//!
//! Exit codes: 0 all checks pass, 2 checks failed, 3 invalid input,
//! 4 internal inconsistency.

use qmt_cli::{formats, report};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qmt_core::channels::{classify_channel, purity_class, PurityTag, QuantumOperation};
use qmt_core::instruments::{efficient_instrument, random_instrument};
use qmt_core::linop::{self, CMatrix, HermitianMatrix};
use qmt_core::measproc::{
    induced_instrument, max_induced_choi_distance, ozawa_dilation, thermo_construction,
    MeasurementProcess,
};
use qmt_core::qobjects::{
    classify_observable, is_trivial_effect, random, Effect, Observable, State,
};
use qmt_core::sweep::subseed;
use qmt_core::thermo::{
    glo_info_gain, mutual_information, panel_state, second_law_audit, second_law_panel,
    third_law_audit, trilemma_classify, Side, IDENTITY_TOL, SECOND_LAW_SLACK,
};
use qmt_core::Error as CoreError;

use report::{ConfigEcho, Report, ToleranceEcho};

const EXIT_CHECKS_FAILED: u8 = 2;
const EXIT_INVALID_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Desk-scale caps for verification sweeps.
const MAX_DIM: usize = 4;
const MAX_OUTCOMES: usize = 4;
const MAX_TRIALS: usize = 10_000;

/// Number of panel states backing the trilemma's second-law evidence.
const TRILEMMA_PANEL: usize = 50;

#[derive(Parser)]
#[command(
    name = "qmt",
    version,
    about = "Measurement-process thermodynamics: construction, audits, verification sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructKind {
    /// Unitary dilation: pure apparatus state, unitary interaction,
    /// projective pointer.
    Ozawa,
    /// Strictly positive non-unitary realization with a full-rank apparatus
    /// preparation.
    Thermo,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    /// Unitary premeasurement + full-rank apparatus forces multi-Kraus
    /// induced operations.
    Nogo,
    /// Two-route agreement of the total entropy change.
    #[value(name = "lemma2_identity")]
    Lemma2Identity,
    /// Premeasurement dual identity on strictly positive realizations.
    Lemma3,
    /// Closure properties of the strictly positive realization.
    Theorem2,
    /// Purity-form tagging of constructed operations.
    Davies,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Build a measurement-process file from an observable file.
    Construct {
        /// Which synthesis to run.
        #[arg(value_enum)]
        kind: ConstructKind,
        /// Observable JSON file ({"effects": [{"label", "matrix"}, ...]}).
        #[arg(long)]
        observable: PathBuf,
        /// Optional per-outcome unitaries ({"unitaries": [M, ...]});
        /// defaults to identities.
        #[arg(long)]
        unitaries: Option<PathBuf>,
        /// Optional apparatus preparation (bare matrix JSON); thermo only,
        /// defaults to the complete mixture.
        #[arg(long)]
        xi: Option<PathBuf>,
        /// Output process file.
        #[arg(long)]
        out: PathBuf,
        /// Recorded in the process metadata.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Audit a process file against the second and third laws and classify
    /// the trilemma.
    Audit {
        /// Process JSON file.
        #[arg(long)]
        process: PathBuf,
        /// Audit a single prior state (bare matrix JSON).
        #[arg(long, conflicts_with = "random_states")]
        state: Option<PathBuf>,
        /// Audit this many seeded panel states instead of a state file.
        #[arg(long)]
        random_states: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Inverse temperature for the net-cycle-work column.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded verification sweep.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn invalid(message: String) -> Self {
        Self {
            code: EXIT_INVALID_INPUT,
            kind: "invalid_input",
            message,
        }
    }

    fn internal(message: String) -> Self {
        Self {
            code: EXIT_INTERNAL,
            kind: "internal_inconsistency",
            message,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::InvalidInput(_) => "invalid_input",
            CoreError::NotPositiveSemidefinite { .. } => "not_positive_semidefinite",
            CoreError::NotCompletelyPositive { .. } => "not_completely_positive",
            CoreError::MalformedInstrument(_) => "malformed_instrument",
            CoreError::MalformedProcess(_) => "malformed_process",
            CoreError::ThirdLawObstruction(_) => "third_law_obstruction",
            CoreError::AmbiguousClassification(_) => "ambiguous_classification",
            CoreError::InternalInconsistency(_) => "internal_inconsistency",
        };
        let code = if matches!(e, CoreError::InternalInconsistency(_)) {
            EXIT_INTERNAL
        } else {
            EXIT_INVALID_INPUT
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; anything else is invalid input.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID_INPUT),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS_FAILED),
        Err(f) => {
            let payload = json!({
                "error": {
                    "exit_code": f.code,
                    "kind": f.kind,
                    "message": f.message,
                }
            });
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&payload).expect("error payload")
            );
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Construct {
            kind,
            observable,
            unitaries,
            xi,
            out,
            seed,
        } => cmd_construct(
            kind,
            &observable,
            unitaries.as_deref(),
            xi.as_deref(),
            &out,
            seed,
        ),
        Command::Audit {
            process,
            state,
            random_states,
            seed,
            beta,
            format,
            out,
        } => cmd_audit(
            &process,
            state.as_deref(),
            random_states,
            seed,
            beta,
            format,
            out.as_deref(),
        ),
        Command::Verify {
            suite,
            dim,
            outcomes,
            trials,
            seed,
            format,
            out,
        } => cmd_verify(suite, dim, outcomes, trials, seed, format, out.as_deref()),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::invalid(format!("cannot read {what} file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::invalid(format!(
            "{what} file {}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))
}

fn load_observable(path: &Path) -> Result<Observable, Failure> {
    let file: formats::ObservableFile = read_json(path, "observable")?;
    formats::observable_from_file(&file, "observable").map_err(Failure::invalid)
}

fn load_process(path: &Path) -> Result<MeasurementProcess, Failure> {
    let file: formats::ProcessFile = read_json(path, "process")?;
    formats::process_from_file(&file).map_err(Failure::invalid)
}

fn cmd_construct(
    kind: ConstructKind,
    observable: &Path,
    unitaries: Option<&Path>,
    xi: Option<&Path>,
    out: &Path,
    seed: u64,
) -> Result<bool, Failure> {
    let obs = load_observable(observable)?;
    let us: Vec<CMatrix> = match unitaries {
        Some(p) => {
            let file: formats::UnitariesFile = read_json(p, "unitaries")?;
            formats::unitaries_from_file(&file, "unitaries").map_err(Failure::invalid)?
        }
        None => vec![linop::identity(obs.dim()); obs.len()],
    };
    if us.len() != obs.len() {
        return Err(Failure::invalid(format!(
            "need one unitary per outcome: {} outcomes, {} unitaries",
            obs.len(),
            us.len()
        )));
    }

    let (proc, metadata) = match kind {
        ConstructKind::Ozawa => {
            if xi.is_some() {
                return Err(Failure::invalid(
                    "the unitary dilation fixes the apparatus preparation; --xi is not accepted"
                        .into(),
                ));
            }
            let inst = efficient_instrument(&obs, &us)?;
            let proc = ozawa_dilation(&inst)?;
            let metadata = json!({
                "construction": "ozawa",
                "completion": "standard-basis orthonormal completion in index order",
                "pointer": "kraus-index projectors, square-root objectification",
                "apparatus_preparation": "pure basis state",
                "seed": seed,
            });
            (proc, metadata)
        }
        ConstructKind::Thermo => {
            let xi_state = match xi {
                Some(p) => {
                    let m: formats::JsonMatrix = read_json(p, "apparatus state")?;
                    formats::state_from_json(&m, "xi").map_err(Failure::invalid)?
                }
                None => State::maximally_mixed(obs.len())?,
            };
            let proc = thermo_construction(&obs, &us, &xi_state)?;
            let metadata = json!({
                "construction": "thermo",
                "objectification": "pointer-basis readout preparing the complete mixture",
                "seed": seed,
            });
            (proc, metadata)
        }
    };

    let file = formats::process_to_file(&proc, Some(metadata));
    let text = serde_json::to_string_pretty(&file).expect("process serializes");
    write_text(out, &text)?;

    // The written file must re-validate on load.
    let reloaded = load_process(out).map_err(|f| {
        Failure::internal(format!(
            "written process fails to re-validate: {}",
            f.message
        ))
    })?;
    println!(
        "wrote {} (system {}, apparatus {}, {} outcomes)",
        out.display(),
        reloaded.sys_dim(),
        reloaded.app_dim(),
        reloaded.outcomes()
    );
    Ok(true)
}

fn cmd_audit(
    process: &Path,
    state: Option<&Path>,
    random_states: Option<usize>,
    seed: u64,
    beta: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> Result<bool, Failure> {
    let proc = load_process(process)?;

    let mut states: Vec<(String, State)> = Vec::new();
    match (state, random_states) {
        (Some(p), None) => {
            let m: formats::JsonMatrix = read_json(p, "state")?;
            let rho = formats::state_from_json(&m, "state").map_err(Failure::invalid)?;
            if rho.dim() != proc.sys_dim() {
                return Err(Failure::invalid(format!(
                    "state dimension {} does not match the system dimension {}",
                    rho.dim(),
                    proc.sys_dim()
                )));
            }
            states.push((format!("file:{}", p.display()), rho));
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(Failure::invalid(
                    "--random-states must be at least 1".into(),
                ));
            }
            for i in 0..n {
                states.push((
                    format!("random[{i}]"),
                    panel_state(proc.sys_dim(), i, seed)?,
                ));
            }
        }
        (None, None) => {
            return Err(Failure::invalid(
                "provide either --state FILE or --random-states N".into(),
            ));
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }

    let mut rep = Report::new(ConfigEcho {
        subcommand: "audit".into(),
        inputs: vec![process.display().to_string()],
        seed,
        trials: random_states,
        beta,
        tolerances: ToleranceEcho::current(),
    });

    for (label, rho) in &states {
        let audit = second_law_audit(&proc, rho, beta)?;
        rep.push_check(
            format!("second-law balance [{label}]"),
            audit.second_law_pass,
            audit.delta_s_total,
            SECOND_LAW_SLACK,
            format!(
                "lhs {:.6e}, rhs {:.6e}",
                audit.second_law_lhs, audit.second_law_rhs
            ),
        );
        rep.push_check(
            format!("entropy-balance identity [{label}]"),
            audit.identity_residual <= IDENTITY_TOL,
            audit.identity_residual,
            IDENTITY_TOL,
            String::new(),
        );
        rep.thermo_reports.push(audit);
    }

    let third = third_law_audit(&proc);
    rep.push_check(
        "third-law: apparatus preparation strictly positive".into(),
        third.xi_strictly_positive,
        third.xi_min_eigenvalue,
        qmt_core::tol::tol_strict(),
        String::new(),
    );
    rep.push_check(
        "third-law: premeasurement strictly positive".into(),
        third.premeasurement_strictly_positive,
        third.premeasurement_unit_image_min_eigenvalue,
        qmt_core::tol::tol_strict(),
        String::new(),
    );
    rep.third_law = Some(third);

    let verdict = trilemma_classify(&proc, TRILEMMA_PANEL, subseed(seed, 0x7121))?;
    rep.push_check(
        "trilemma: not all arms hold".into(),
        !verdict.failed_arms.is_empty() || !verdict.nontrivial_observable,
        verdict.failed_arms.len() as f64,
        1.0,
        format!("failed arms {:?}", verdict.failed_arms),
    );
    rep.trilemma = Some(verdict);

    emit(&rep, format, out)
}

fn smooth_xi(proc: &MeasurementProcess, eps: f64) -> Result<MeasurementProcess, CoreError> {
    let mm = State::maximally_mixed(proc.app_dim())?;
    let xi = State::mix(&[(1.0 - eps, proc.xi()), (eps, &mm)])?;
    MeasurementProcess::new(
        proc.sys_dim(),
        xi,
        proc.premeasurement().clone(),
        proc.objectification().clone(),
    )
}

fn cmd_verify(
    suite: Suite,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<bool, Failure> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Failure::invalid(format!("--dim must be in 2..={MAX_DIM}")));
    }
    if !(2..=MAX_OUTCOMES).contains(&outcomes) {
        return Err(Failure::invalid(format!(
            "--outcomes must be in 2..={MAX_OUTCOMES}"
        )));
    }
    if trials == 0 || trials > MAX_TRIALS {
        return Err(Failure::invalid(format!(
            "--trials must be in 1..={MAX_TRIALS}"
        )));
    }

    let name = match suite {
        Suite::Nogo => "nogo",
        Suite::Lemma2Identity => "lemma2_identity",
        Suite::Lemma3 => "lemma3",
        Suite::Theorem2 => "theorem2",
        Suite::Davies => "davies",
    };
    let mut rep = Report::new(ConfigEcho {
        subcommand: format!("verify {name}"),
        inputs: vec![],
        seed,
        trials: Some(trials),
        beta: None,
        tolerances: ToleranceEcho::current(),
    });

    match suite {
        Suite::Nogo => verify_nogo(&mut rep, dim, outcomes, trials, seed)?,
        Suite::Lemma2Identity => verify_identity(&mut rep, dim, outcomes, trials, seed)?,
        Suite::Lemma3 => verify_dual_identity(&mut rep, dim, outcomes, trials, seed)?,
        Suite::Theorem2 => verify_realization(&mut rep, dim, outcomes, trials, seed)?,
        Suite::Davies => verify_purity_forms(&mut rep, dim, outcomes, trials, seed)?,
    }

    emit(&rep, format, out)
}

fn verify_nogo(
    rep: &mut Report,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(), Failure> {
    for trial in 0..trials {
        let inst = random_instrument(dim, outcomes, 1, subseed(seed, trial as u64))?;
        let proc = smooth_xi(&ozawa_dilation(&inst)?, 0.05)?;
        let induced = induced_instrument(&proc)?;
        let mut min_kraus = usize::MAX;
        let mut min_margin = f64::INFINITY;
        let mut nontrivial = 0;
        let mut single_tagged = 0;
        for op in induced.operations() {
            let effect = Effect::new(op.compatible_effect()?)?;
            if is_trivial_effect(&effect, qmt_core::tol::TOL_EQ).is_some() {
                continue;
            }
            nontrivial += 1;
            min_kraus = min_kraus.min(op.min_kraus_count(qmt_core::tol::tol_rank()));
            let class = purity_class(op)?;
            min_margin = min_margin.min(class.rank_margin);
            if matches!(class.tag, PurityTag::SingleKraus { .. }) {
                single_tagged += 1;
            }
        }
        let pass = nontrivial > 0 && min_kraus >= 2 && single_tagged == 0;
        rep.push_check(
            format!("multi-kraus induced operations [trial {trial}]"),
            pass,
            min_margin,
            qmt_core::tol::tol_rank(),
            format!("{nontrivial} nontrivial outcomes, min Kraus count {min_kraus}"),
        );
    }
    Ok(())
}

fn seeded_process(
    kind: usize,
    dim: usize,
    outcomes: usize,
    seed: u64,
) -> Result<MeasurementProcess, Failure> {
    match kind {
        0 => Ok(ozawa_dilation(&random_instrument(dim, outcomes, 1, seed)?)?),
        1 => Ok(smooth_xi(
            &ozawa_dilation(&random_instrument(dim, outcomes, 2, seed)?)?,
            0.05,
        )?),
        _ => {
            let obs = random::povm(dim, outcomes, seed)?;
            let us: Vec<CMatrix> = (0..outcomes)
                .map(|x| random::unitary(dim, subseed(seed, 50 + x as u64)))
                .collect::<Result<_, _>>()?;
            let xi = random::full_rank_state(outcomes, subseed(seed, 99))?;
            Ok(thermo_construction(&obs, &us, &xi)?)
        }
    }
}

fn verify_identity(
    rep: &mut Report,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(), Failure> {
    for trial in 0..trials {
        let proc = seeded_process(trial % 3, dim, outcomes, subseed(seed, trial as u64))?;
        let rho = panel_state(dim, trial, subseed(seed, 0xA11CE))?;
        let audit = second_law_audit(&proc, &rho, None)?;
        rep.push_check(
            format!("entropy-balance identity [trial {trial}]"),
            audit.identity_residual <= IDENTITY_TOL,
            audit.identity_residual,
            IDENTITY_TOL,
            String::new(),
        );
    }
    Ok(())
}

fn verify_dual_identity(
    rep: &mut Report,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(), Failure> {
    for trial in 0..trials {
        let obs = random::povm(dim, outcomes, subseed(seed, trial as u64))?;
        let us: Vec<CMatrix> = (0..outcomes)
            .map(|x| random::unitary(dim, subseed(seed, 1000 + (trial * 10 + x) as u64)))
            .collect::<Result<_, _>>()?;
        let xi = random::full_rank_state(outcomes, subseed(seed, 2000 + trial as u64))?;
        let proc = thermo_construction(&obs, &us, &xi)?;
        let target = efficient_instrument(&obs, &us)?;
        let mut worst: f64 = 0.0;
        for x in 0..outcomes {
            let z = proc.pointer().effect(x).matrix();
            for i in 0..dim {
                for j in 0..dim {
                    let b = linop::matrix_unit(dim, i, j);
                    let lhs = proc.premeasurement().dual_apply(&linop::kron(&b, z))?;
                    let rhs = linop::kron(
                        &target.operation(x).dual_apply(&b)?,
                        &linop::identity(outcomes),
                    );
                    worst = worst.max(linop::max_abs_diff(&lhs, &rhs));
                }
            }
        }
        rep.push_check(
            format!("premeasurement dual identity [trial {trial}]"),
            worst <= 1e-9,
            worst,
            1e-9,
            String::new(),
        );
    }
    Ok(())
}

fn verify_realization(
    rep: &mut Report,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(), Failure> {
    for trial in 0..trials {
        let base = subseed(seed, trial as u64);
        let obs = random::povm(dim, outcomes, base)?;
        let us: Vec<CMatrix> = (0..outcomes)
            .map(|x| random::unitary(dim, subseed(base, x as u64)))
            .collect::<Result<_, _>>()?;
        let xi = random::full_rank_state(outcomes, subseed(base, 77))?;
        let proc = thermo_construction(&obs, &us, &xi)?;
        let target = efficient_instrument(&obs, &us)?;

        let dist = max_induced_choi_distance(&proc, &target)?;
        rep.push_check(
            format!("induced instrument matches target [trial {trial}]"),
            dist <= 1e-9,
            dist,
            1e-9,
            String::new(),
        );

        let third = third_law_audit(&proc);
        rep.push_check(
            format!("third-law compatibility [trial {trial}]"),
            third.compatible,
            third
                .xi_min_eigenvalue
                .min(third.premeasurement_unit_image_min_eigenvalue),
            qmt_core::tol::tol_strict(),
            String::new(),
        );

        if classify_observable(&obs).nontrivial {
            let image = proc
                .premeasurement()
                .apply(&linop::identity(proc.joint_dim()))?;
            let residual = linop::max_abs_diff(&image, &linop::identity(proc.joint_dim()));
            rep.push_check(
                format!("premeasurement is not unital [trial {trial}]"),
                residual > 1e-3 && !classify_channel(proc.premeasurement()).unital,
                residual,
                1e-3,
                "residual must exceed the tolerance".into(),
            );
        }

        let equal = thermo_construction(&obs, &vec![us[0].clone(); outcomes], &xi)?;
        rep.push_check(
            format!("equal-unitary composition is bistochastic [trial {trial}]"),
            classify_channel(&equal.composed_channel()?).bistochastic,
            0.0,
            qmt_core::tol::TOL_TP,
            String::new(),
        );

        let mut worst_mi: f64 = 0.0;
        let mut worst_gain = f64::NEG_INFINITY;
        for s in 0..5 {
            let rho = panel_state(dim, s, subseed(base, 500))?;
            let bundle = qmt_core::measproc::posterior_bundle(&proc, &rho)?;
            for x in 0..bundle.outcomes() {
                if bundle.is_degenerate(x) {
                    continue;
                }
                worst_mi =
                    worst_mi.max(mutual_information(bundle.joint(x), (dim, outcomes))?.abs());
            }
            worst_gain = worst_gain.max(glo_info_gain(&bundle, Side::Apparatus));
        }
        rep.push_check(
            format!("posterior mutual information vanishes [trial {trial}]"),
            worst_mi <= 1e-9,
            worst_mi,
            1e-9,
            String::new(),
        );
        rep.push_check(
            format!("apparatus information gain is nonpositive [trial {trial}]"),
            worst_gain <= 1e-9,
            worst_gain,
            1e-9,
            String::new(),
        );

        let panel = second_law_panel(&proc, 50, subseed(base, 900))?;
        rep.push_check(
            format!("second-law balance on 50-state panel [trial {trial}]"),
            panel.all_pass,
            panel.min_slack,
            SECOND_LAW_SLACK,
            format!("worst state index {}", panel.worst_state_index),
        );
    }
    Ok(())
}

fn verify_purity_forms(
    rep: &mut Report,
    dim: usize,
    outcomes: usize,
    trials: usize,
    seed: u64,
) -> Result<(), Failure> {
    for trial in 0..trials {
        let base = subseed(seed, trial as u64);
        let obs = random::povm(dim, outcomes, base)?;
        let sqrt_e = obs
            .effect(0)
            .hermitian()
            .sqrt_psd(qmt_core::tol::tol_psd())?
            .into_matrix();
        let u = random::unitary(dim, subseed(base, 1))?;

        let single = QuantumOperation::new(vec![&u * &sqrt_e])?;
        let single_ok = matches!(purity_class(&single)?.tag, PurityTag::SingleKraus { .. });

        let phi = principal_vector(random::pure_state(dim, subseed(base, 2))?.matrix());
        let kraus: Vec<CMatrix> = (0..dim)
            .map(|k| {
                let mut bra = CMatrix::zeros(1, dim);
                bra[(0, k)] = nalgebra::Complex::new(1.0, 0.0);
                (&phi * bra) * &sqrt_e
            })
            .collect();
        let prepare = QuantumOperation::new(kraus)?;
        let prepare_ok = matches!(purity_class(&prepare)?.tag, PurityTag::PurePrepare { .. });

        let half = nalgebra::Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mixture = QuantumOperation::new(vec![&sqrt_e * half, (&u * &sqrt_e) * half])?;
        let mixture_class = purity_class(&mixture)?;
        let mixture_ok = matches!(mixture_class.tag, PurityTag::NotPurityPreserving);

        rep.push_check(
            format!("purity-form tags [trial {trial}]"),
            single_ok && prepare_ok && mixture_ok,
            mixture_class.rank_margin,
            qmt_core::tol::tol_rank(),
            format!("single {single_ok}, prepare {prepare_ok}, mixture {mixture_ok}"),
        );
    }
    Ok(())
}

fn principal_vector(projector: &CMatrix) -> qmt_core::linop::CVector {
    let eig = HermitianMatrix::from_nearly_hermitian(projector)
        .expect("projector is Hermitian")
        .eig();
    let n = eig.eigenvalues.len();
    eig.eigenvectors.column(n - 1).into_owned()
}

fn emit(rep: &Report, format: Format, out: Option<&Path>) -> Result<bool, Failure> {
    let rendered = match format {
        Format::Json => rep.to_json(),
        Format::Markdown => rep.to_markdown(),
    };
    match out {
        Some(path) => {
            write_text(path, &rendered)?;
            println!(
                "{}: wrote {}",
                if rep.passed { "PASS" } else { "FAIL" },
                path.display()
            );
        }
        None => println!("{rendered}"),
    }
    Ok(rep.passed)
}
