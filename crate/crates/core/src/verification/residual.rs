//! The ci-differentiability residual along a general extension.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{Extension, HistoryData, Mesh, Problem};
use crate::sensitivity::{ci_derivatives, rho};
use crate::verification::fd::{restart_mesh, FdSchedule};
use crate::volterra::SolverOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct CiResidualReport {
    pub offsets: Vec<f64>,
    /// r(τ) = |ρ(τ, λ_τ) − ρ(t, w) − p(T)(τ − t) − q(T)∫ₜ^τ ℓ|.
    pub residuals: Vec<f64>,
    /// r(τ)/(τ − t).
    pub ratios: Vec<f64>,
    /// Least-squares slope of log r against log(τ − t); NaN when some r is 0.
    pub slope: f64,
    pub p_t: f64,
    pub q_t: f64,
    pub base_rho: f64,
}

impl CiResidualReport {
    /// All residuals at rounding level: the expansion holds exactly.
    pub fn is_exact(&self) -> bool {
        let scale = 1.0 + self.base_rho.abs();
        self.residuals.iter().all(|&r| r <= 1e-13 * scale)
    }

    /// The o(τ − t) trend: slope above 1.05 and last ratio at most 0.2× the
    /// first, or exact.
    pub fn is_superlinear(&self) -> bool {
        if self.is_exact() {
            return true;
        }
        let (first, last) = (self.ratios[0], *self.ratios.last().unwrap());
        self.slope > 1.05 && last <= 0.2 * first
    }
}

/// Residual of the first-order expansion of ρ along `extension` at every
/// schedule offset, with p(T), q(T) from [`ci_derivatives`].
pub fn ci_residual(
    problem: &Problem,
    history: &HistoryData,
    extension: &Extension,
    schedule: &FdSchedule,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<CiResidualReport> {
    if extension.base() != history {
        return Err(Error::Invalid("extension must start from the given history".into()));
    }
    let t = history.t();
    let end = extension.ell().end().unwrap_or(t);
    if schedule.steps().iter().any(|&d| t + d > end) {
        return Err(Error::Invalid(format!("schedule reaches beyond the extension end {end}")));
    }
    let sens = ci_derivatives(problem, history, mesh, opts)?;
    let base_rho = sens.rho;
    let (p_t, q_t) = (sens.p_t, sens.q_t);
    let span = problem.horizon() - t;
    let residuals = schedule
        .steps()
        .par_iter()
        .map(|&delta| {
            let h = extension.history_at(t + delta)?;
            let value = rho(problem, &h, &restart_mesh(mesh, span, delta)?, opts)?;
            Ok((value - base_rho - p_t * delta - q_t * extension.ell_integral(t + delta)).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let offsets = schedule.steps().to_vec();
    let ratios: Vec<f64> = residuals.iter().zip(&offsets).map(|(r, d)| r / d).collect();
    let slope = log_log_slope(&offsets, &residuals);
    Ok(CiResidualReport { offsets, residuals, ratios, slope, p_t, q_t, base_rho })
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    if y.iter().any(|&v| !(v > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.6)).collect();
        assert!((log_log_slope(&x, &y) - 1.6).abs() < 1e-12);
        assert!(log_log_slope(&x, &[0.0, 1.0, 1.0, 1.0]).is_nan());
    }

    #[test]
    fn zero_extension_on_zero_rhs_is_exact() {
        let p = Problem::from_expr(0.5, 2.0, "0", 0.0).unwrap();
        let h = HistoryData::constant(1.0, 0.0, 1.0).unwrap();
        let ext = Extension::constant(h.clone(), 0.0, 2.0).unwrap();
        let s = FdSchedule::standard(1.0).unwrap();
        let r = ci_residual(&p, &h, &ext, &s, &Mesh::uniform(64).unwrap(), &SolverOptions::default()).unwrap();
        // With f ≡ 0 and ℓ_w ≡ 1 the residual is the free-term remainder,
        // which is o(δ).
        assert!(r.is_superlinear(), "{r:?}");
    }
}
