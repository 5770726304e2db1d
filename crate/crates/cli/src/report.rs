//! Machine-readable run reports.
//!
//! Every verdict row carries the numeric residual and the tolerance that
//! produced it; reports are deterministic functions of (inputs, seed,
//! version) — no timestamps, no environment echo beyond the tolerances.

use serde::Serialize;

use qmt_core::thermo::{ThermoReport, ThirdLawReport, TrilemmaVerdict};

#[derive(Debug, Serialize)]
pub struct ToleranceEcho {
    pub psd: f64,
    pub strict: f64,
    pub rank: f64,
}

impl ToleranceEcho {
    pub fn current() -> Self {
        Self {
            psd: qmt_core::tol::tol_psd(),
            strict: qmt_core::tol::tol_strict(),
            rank: qmt_core::tol::tol_rank(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub tolerances: ToleranceEcho,
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub config: ConfigEcho,
    pub passed: bool,
    pub checks: Vec<CheckRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub thermo_reports: Vec<ThermoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub third_law: Option<ThirdLawReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trilemma: Option<TrilemmaVerdict>,
}

impl Report {
    pub fn new(config: ConfigEcho) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            passed: true,
            checks: Vec::new(),
            thermo_reports: Vec::new(),
            third_law: None,
            trilemma: None,
        }
    }

    pub fn push_check(
        &mut self,
        name: String,
        pass: bool,
        residual: f64,
        tolerance: f64,
        detail: String,
    ) {
        self.passed &= pass;
        self.checks.push(CheckRow {
            name,
            pass,
            residual,
            tolerance,
            detail,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} report (v{})\n\n",
            self.config.subcommand, self.version
        ));
        out.push_str(&format!(
            "- inputs: {}\n- seed: {}\n",
            if self.config.inputs.is_empty() {
                "none".to_string()
            } else {
                self.config.inputs.join(", ")
            },
            self.config.seed
        ));
        if let Some(t) = self.config.trials {
            out.push_str(&format!("- trials: {t}\n"));
        }
        if let Some(b) = self.config.beta {
            out.push_str(&format!("- beta: {b}\n"));
        }
        out.push_str(&format!(
            "- overall: **{}**\n\n",
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out.push_str("| check | verdict | residual | tolerance |\n");
        out.push_str("|---|---|---|---|\n");
        for c in &self.checks {
            out.push_str(&format!(
                "| {} | {} | {:.3e} | {:.1e} |\n",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.residual,
                c.tolerance
            ));
        }
        if let Some(t) = &self.third_law {
            out.push_str(&format!(
                "\nThird law: {} (xi min eigenvalue {:.3e}, premeasurement unit-image min eigenvalue {:.3e})\n",
                if t.compatible { "compatible" } else { "incompatible" },
                t.xi_min_eigenvalue,
                t.premeasurement_unit_image_min_eigenvalue
            ));
        }
        if let Some(v) = &self.trilemma {
            out.push_str(&format!(
                "\nTrilemma: law-compatible={}, autonomous-premeasurement={}, quasicomplete={}, failed arms {:?}\n",
                v.law_compatible, v.premeasurement_autonomous_ok, v.quasicomplete, v.failed_arms
            ));
        }
        out
    }
}
