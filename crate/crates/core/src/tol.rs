//! Default numerical tolerances.
//!
//! The three headline tolerances can be overridden through environment
//! variables (`QMT_TOL_PSD`, `QMT_TOL_STRICT`, `QMT_TOL_RANK`), read once at
//! first use. Overrides below [`TOL_FLOOR`] are clamped to the floor.

use std::sync::OnceLock;

/// Hard floor for any override; double-precision eigensolvers cannot
/// meaningfully resolve spectra below this.
pub const TOL_FLOOR: f64 = 1e-12;

/// Hermiticity residual accepted at `HermitianMatrix` construction.
pub const TOL_HERM: f64 = 1e-12;

/// Trace-preservation / unitality / normalization tolerance.
pub const TOL_TP: f64 = 1e-9;

/// Max-norm tolerance for operator and Choi-matrix equality tests.
pub const TOL_EQ: f64 = 1e-9;

/// Probabilities below this are treated as zero-probability outcomes.
pub const P_FLOOR: f64 = 1e-12;

/// Eigenvalues at or below this floor contribute nothing to entropies
/// (the 0 ln 0 = 0 convention); |x ln x| < 4e-14 at the floor, far inside
/// every entropy-identity tolerance used by the audits.
pub const ENTROPY_EIG_FLOOR: f64 = 1e-15;

fn env_tol(var: &str, default: f64) -> f64 {
    match std::env::var(var) {
        Ok(s) => s
            .parse::<f64>()
            .map(|v| v.max(TOL_FLOOR))
            .unwrap_or(default),
        Err(_) => default,
    }
}

/// Eigenvalues down to `-tol_psd()` still count as positive semidefinite
/// (and are clipped to zero where a nonnegative spectrum is needed).
pub fn tol_psd() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| env_tol("QMT_TOL_PSD", 1e-9))
}

/// Strict positivity means every eigenvalue exceeds `tol_strict()`.
pub fn tol_strict() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| env_tol("QMT_TOL_STRICT", 1e-9))
}

/// Relative eigenvalue threshold separating numerical rank from noise in
/// Choi/Gram spectra.
pub fn tol_rank() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| env_tol("QMT_TOL_RANK", 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_sane() {
        assert!(tol_psd() >= TOL_FLOOR);
        assert!(tol_strict() >= TOL_FLOOR);
        assert!(tol_rank() >= TOL_FLOOR);
    }
}
