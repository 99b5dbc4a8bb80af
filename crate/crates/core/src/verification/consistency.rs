//! Self-consistency checks of the solvers: restarting from an interior time,
//! the rescaled versus physical formulations, the substituted versus original
//! linear equation, the Gronwall-type bound, and the local Lipschitz estimate
//! along extensions with equal integral.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{CaputoProfile, Extension, HistoryData, LinearPiece, Mesh, Problem};
use crate::sensitivity::{ci_derivatives, ci_derivatives_direct, linear_problems, rho};
use crate::verification::fd::restart_mesh;
use crate::verification::tolerance::tol_solver;
use crate::volterra::{
    gronwall_bound, linear_residual, solve_linear_singular, solve_nonlinear, solve_nonlinear_direct,
    LinearVolterraProblem, SolverOptions,
};

/// A measured discrepancy together with the tolerance it is judged by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub discrepancy: f64,
    pub tol: f64,
}

impl Agreement {
    pub fn passes(&self) -> bool {
        self.discrepancy <= self.tol
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn uniform_pow2(n: usize) -> Result<Mesh> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::Invalid(format!("check needs an even number of cells >= 16, got {n}")));
    }
    Mesh::uniform(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    /// x(T) from the full solve and from the restart at the midpoint node.
    pub full: f64,
    pub restarted: f64,
    /// Largest difference over the shared nodes.
    pub nodes: Agreement,
}

/// Solves on [t, T] with `n` cells, then restarts at τ* = node n/2 with the
/// history extended by the piecewise-linear interpolant of f(τ_j, x_j) on
/// [t, τ*] and compares the shared nodes.
pub fn semigroup_check(problem: &Problem, history: &HistoryData, n: usize, opts: &SolverOptions) -> Result<SemigroupReport> {
    let mesh = uniform_pow2(n)?;
    let sol = solve_nonlinear(problem, history, &mesh, opts)?;
    let half = n / 2;
    let pieces = (0..half)
        .map(|j| LinearPiece {
            a: sol.path.taus[j],
            b: sol.path.taus[j + 1],
            va: sol.rhs_values[j],
            vb: sol.rhs_values[j + 1],
        })
        .collect();
    let ell = CaputoProfile::new(pieces)?;
    let restart_history = history.extended(&ell)?;
    let restarted = solve_nonlinear(problem, &restart_history, &Mesh::uniform(half)?, opts)?;
    let discrepancy = max_abs_diff(&sol.path.values[half..], &restarted.path.values);
    Ok(SemigroupReport {
        full: sol.path.last(),
        restarted: restarted.path.last(),
        nodes: Agreement { discrepancy, tol: tol_solver(problem.alpha(), n) },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescalingReport {
    /// Rescaled versus physical-variable nonlinear solve on the same nodes.
    pub same_nodes: Agreement,
    /// ρ, p(T), q(T): rescaled uniform versus physical graded.
    pub rho: Agreement,
    pub p_t: Agreement,
    pub q_t: Agreement,
}

impl RescalingReport {
    pub fn passes(&self) -> bool {
        [self.same_nodes, self.rho, self.p_t, self.q_t].iter().all(Agreement::passes)
    }
}

/// Compares the rescaled formulation on a uniform mesh with the physical
/// formulation, first on the same nodes, then on a graded mesh.
pub fn rescaling_check(
    problem: &Problem,
    history: &HistoryData,
    n: usize,
    grading: f64,
    opts: &SolverOptions,
) -> Result<RescalingReport> {
    let mesh = uniform_pow2(n)?;
    let tol = tol_solver(problem.alpha(), n);
    let resc = solve_nonlinear(problem, history, &mesh, opts)?;
    let direct = solve_nonlinear_direct(problem, history, &mesh, opts)?;
    let scale = 1.0 + resc.path.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let same_nodes = Agreement { discrepancy: max_abs_diff(&resc.path.values, &direct.path.values), tol: 1e-10 * scale };
    let graded = Mesh::graded(n, grading)?;
    let (a, b) = rayon::join(
        || ci_derivatives(problem, history, &mesh, opts),
        || ci_derivatives_direct(problem, history, &graded, opts),
    );
    let (a, b) = (a?, b?);
    Ok(RescalingReport {
        same_nodes,
        rho: Agreement { discrepancy: (a.rho - b.rho).abs(), tol },
        p_t: Agreement { discrepancy: (a.p_t - b.p_t).abs(), tol },
        q_t: Agreement { discrepancy: (a.q_t - b.q_t).abs(), tol },
    })
}

/// Largest nodal residual of the original (unsubstituted) equation,
/// weighted by σ^{1−α} so that it is measured on the same scale as the
/// continuous factor s.
pub fn substitution_residual(lp: &LinearVolterraProblem) -> Result<f64> {
    let y = solve_linear_singular(lp)?;
    let res = linear_residual(lp, &y.values)?;
    let alpha = lp.order.alpha();
    Ok(res
        .iter()
        .zip(lp.mesh.nodes())
        .skip(1)
        .fold(0.0, |m, (r, th)| m.max(r.abs() * (lp.span * th).powf(1.0 - alpha))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionReport {
    pub p: Agreement,
    pub q: Agreement,
}

/// Residuals of the p and q equations of a problem, in both the rescaled
/// and the physical variable.
pub fn substitution_check(problem: &Problem, history: &HistoryData, n: usize, opts: &SolverOptions) -> Result<SubstitutionReport> {
    let mesh = uniform_pow2(n)?;
    let x = solve_nonlinear(problem, history, &mesh, opts)?;
    let tol = tol_solver(problem.alpha(), n);
    let mut worst = [0.0_f64; 2];
    for physical in [false, true] {
        let (p_lp, q_lp) = linear_problems(problem, history, &x.path, physical)?;
        worst[0] = worst[0].max(substitution_residual(&p_lp)?);
        worst[1] = worst[1].max(substitution_residual(&q_lp)?);
    }
    Ok(SubstitutionReport { p: Agreement { discrepancy: worst[0], tol }, q: Agreement { discrepancy: worst[1], tol } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    /// max over nodes of y − bound (negative when dominated with room).
    pub max_excess: f64,
    pub tol: f64,
    pub bound_at_one: f64,
    pub solution_at_one: f64,
}

impl GronwallReport {
    pub fn passes(&self) -> bool {
        self.max_excess <= self.tol
    }
}

/// Solves a linear equation with nonnegative data and checks it against
/// E_{α,α}(c)ŷ/ϑ^{1−α} + ȳ_r + cE_{α,α}(c)∫ȳ_r(ϑ − ζ)^{α−1}dζ, where
/// c = max c(ζ), ŷ = κ and ȳ_r = r + (1/Γ(α))∫d(ϑ − ζ)^{α−1}dζ (the
/// inhomogeneity folded into the free term). Requires span = 1.
pub fn gronwall_check(lp: &LinearVolterraProblem) -> Result<GronwallReport> {
    if lp.span != 1.0 {
        return Err(Error::Invalid("the Gronwall check is posed on [0, 1]".into()));
    }
    let nonneg = |v: &[f64]| v.iter().all(|x| *x >= 0.0);
    if !nonneg(&lp.c) || !nonneg(&lp.d) || !nonneg(lp.ybar.regular()) || lp.ybar.kappa() < 0.0 {
        return Err(Error::Invalid("the Gronwall check needs nonnegative data".into()));
    }
    let y = solve_linear_singular(lp)?;
    let order = &lp.order;
    let quad = crate::kernel::AbelQuadrature::new(order.alpha(), &lp.mesh);
    let yr: Vec<f64> = (0..=lp.mesh.n())
        .map(|j| {
            let (hist, diag) = quad.trapezoid(j, &lp.d);
            lp.ybar.regular()[j] + (hist + diag * lp.d[j]) / order.gamma()
        })
        .collect();
    let cmax = lp.c.iter().copied().fold(0.0, f64::max);
    let bound = gronwall_bound(order, lp.ybar.kappa(), &yr, cmax, &lp.mesh)?;
    let max_excess = y.values.iter().zip(&bound).skip(1).fold(f64::NEG_INFINITY, |m, (v, b)| m.max(v - b));
    Ok(GronwallReport {
        max_excess,
        tol: tol_solver(order.alpha(), lp.mesh.n()),
        bound_at_one: *bound.last().unwrap(),
        solution_at_one: y.last(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub offsets: Vec<f64>,
    /// |ρ(τ, λ'_τ) − ρ(τ, λ''_τ)|.
    pub differences: Vec<f64>,
    /// differences/(τ − t)^{1+α}.
    pub ratios: Vec<f64>,
    /// μ₂ = max ratio.
    pub mu: f64,
}

impl LipschitzReport {
    /// Consecutive ratios change by at most `factor` and all are ≤ μ₂.
    pub fn is_stable(&self, factor: f64) -> bool {
        self.ratios.windows(2).all(|w| w[1] <= factor * w[0].max(f64::MIN_POSITIVE) || w[1] <= 1e-12)
    }
}

/// Compares the two extensions with derivative (+m, −m) and (−m, +m) on the
/// halves of (t, τ]; both have zero integral and are bounded by |m|.
pub fn lipschitz_smoke(
    problem: &Problem,
    history: &HistoryData,
    m: f64,
    offsets: &[f64],
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<LipschitzReport> {
    let t = history.t();
    let alpha = problem.alpha();
    let differences = offsets
        .par_iter()
        .map(|&delta| {
            let tau = t + delta;
            let mid = t + 0.5 * delta;
            let build = |first: f64| -> Result<HistoryData> {
                let ell = CaputoProfile::piecewise_constant(&[t, mid, tau], &[first, -first])?;
                Extension::new(history.clone(), ell)?.history_at(tau)
            };
            let moved = restart_mesh(mesh, problem.horizon() - t, delta)?;
            let a = rho(problem, &build(m)?, &moved, opts)?;
            let b = rho(problem, &build(-m)?, &moved, opts)?;
            Ok((a - b).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = differences.iter().zip(offsets).map(|(d, o)| d / o.powf(1.0 + alpha)).collect();
    let mu = ratios.iter().copied().fold(0.0, f64::max);
    Ok(LipschitzReport { offsets: offsets.to_vec(), differences, ratios, mu })
}
