//! Difference quotients of ρ along constant-derivative extensions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{Extension, HistoryData, Mesh, Problem};
use crate::sensitivity::rho;
use crate::verification::tolerance::{richardson, Extrapolation};
use crate::volterra::{SolverOptions, MIN_CELLS};

/// Offsets τ − t at which the extended problems are re-solved, and the
/// values ℓ of the constant extension derivatives to probe.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSchedule {
    steps: Vec<f64>,
    ell_values: Vec<f64>,
}

impl FdSchedule {
    /// Validates that the offsets are strictly decreasing and lie in (0, span).
    pub fn new(steps: Vec<f64>, ell_values: Vec<f64>, span: f64) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Invalid("schedule needs at least one offset".into()));
        }
        if steps.iter().any(|&d| !(d > 0.0 && d < span)) {
            return Err(Error::Invalid(format!("schedule offsets must lie in (0, {span})")));
        }
        if steps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Invalid("schedule offsets must be strictly decreasing".into()));
        }
        if ell_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("extension derivatives must be finite".into()));
        }
        Ok(Self { steps, ell_values })
    }

    /// Offsets 2^{−k}·span/4 for k = kmin..=kmax.
    pub fn geometric(span: f64, kmin: i32, kmax: i32, ell_values: Vec<f64>) -> Result<Self> {
        let steps = (kmin..=kmax).map(|k| 0.25 * span * 0.5f64.powi(k)).collect();
        Self::new(steps, ell_values, span)
    }

    /// k = 2..10 with ℓ ∈ {−1, 0, 1, 2}.
    pub fn standard(span: f64) -> Result<Self> {
        Self::geometric(span, 2, 10, vec![-1.0, 0.0, 1.0, 2.0])
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn ell_values(&self) -> &[f64] {
        &self.ell_values
    }

    /// Whether consecutive offsets halve exactly (needed for extrapolation).
    pub fn is_halving(&self) -> bool {
        self.steps.windows(2).all(|w| (w[1] * 2.0 - w[0]).abs() <= 1e-14 * w[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub ell: f64,
    pub offsets: Vec<f64>,
    /// [ρ(t + δ, λ_{t+δ}) − ρ(t, w)]/δ.
    pub quotients: Vec<f64>,
    pub base_rho: f64,
    /// Present when the schedule halves and has at least five offsets.
    pub extrapolation: Option<Extrapolation>,
}

/// Difference quotients of ρ along λ^(ℓ), re-solving the Cauchy problem
/// from every restricted history with the same number of cells.
pub fn fd_directional(
    problem: &Problem,
    history: &HistoryData,
    ell: f64,
    schedule: &FdSchedule,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<FdReport> {
    let base_rho = rho(problem, history, mesh, opts)?;
    fd_directional_from(problem, history, ell, schedule, mesh, opts, base_rho)
}

/// As [`fd_directional`], reusing an already computed ρ(t, w).
pub fn fd_directional_from(
    problem: &Problem,
    history: &HistoryData,
    ell: f64,
    schedule: &FdSchedule,
    mesh: &Mesh,
    opts: &SolverOptions,
    base_rho: f64,
) -> Result<FdReport> {
    let ext = Extension::constant(history.clone(), ell, problem.horizon())?;
    let t = history.t();
    let span = problem.horizon() - t;
    let quotients = schedule
        .steps()
        .par_iter()
        .map(|&delta| {
            let h = ext.history_at(t + delta)?;
            let moved = restart_mesh(mesh, span, delta)?;
            Ok((rho(problem, &h, &moved, opts)? - base_rho) / delta)
        })
        .collect::<Result<Vec<f64>>>()?;
    let extrapolation =
        if schedule.is_halving() { richardson(&quotients, problem.alpha()) } else { None };
    Ok(FdReport { ell, offsets: schedule.steps().to_vec(), quotients, base_rho, extrapolation })
}

/// Mesh for a problem restarted at t + δ. When the base mesh is uniform and
/// δ is a whole number m of cells, the restarted mesh keeps the same
/// physical nodes (N − m cells); the discretization error then varies
/// smoothly with δ instead of jittering on the cell scale. Otherwise the
/// base mesh is reused.
pub fn restart_mesh(mesh: &Mesh, span: f64, delta: f64) -> Result<Mesh> {
    if let Some(h) = mesh.step() {
        let cells = delta / (h * span);
        let m = cells.round();
        if (cells - m).abs() <= 1e-9 * cells.max(1.0) && m >= 1.0 {
            let remaining = mesh.n() - m as usize;
            if remaining >= MIN_CELLS {
                return Mesh::uniform(remaining);
            }
        }
    }
    Ok(mesh.clone())
}

/// Least-squares line v ≈ intercept + slope·ℓ.
pub fn fit_line(ells: &[f64], values: &[f64]) -> (f64, f64) {
    let n = ells.len() as f64;
    let mx = ells.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxy: f64 = ells.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = ells.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
