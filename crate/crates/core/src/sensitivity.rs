//! The endpoint functional ρ(t, w) = x(T) and its coinvariant derivatives
//! ∂ₜ^α ρ = p(T), ∇^α ρ = q(T).
//!
//! p and q solve linear Volterra equations with the Abel kernel whose free
//! terms p̄, q̄ behave like ϑ^{α−1} near ϑ = 0:
//!
//! ```text
//! p(ϑ) = p̄(ϑ) + (1/Γ(α)) ∫₀^ϑ (a(ζ) p(ζ) + b(ζ))(ϑ − ζ)^{α−1} dζ,
//! q(ϑ) = q̄(ϑ) + (1/Γ(α)) ∫₀^ϑ  a(ζ) q(ζ)        (ϑ − ζ)^{α−1} dζ,
//! ```
//!
//! with a = L^α ∂f/∂x and b = L^α((1 − ϑ)∂f/∂τ − α f/L) along the solution,
//! L = T − t.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::linear_piece_moment;
use crate::problem::{HistoryData, Mesh, Order, Problem};
use crate::volterra::{
    solve_linear_singular, solve_nonlinear, LinearVolterraProblem, NonlinearSolution, SingularFreeTerm,
    SolutionPath, SolverOptions,
};

/// Coefficients of the linear equations at the mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCoefficients {
    /// ∂f/∂x(τ, x(τ)).
    pub a: Vec<f64>,
    /// ((T − τ)/(T − t)) ∂f/∂τ(τ, x(τ)) − α f(τ, x(τ))/(T − t).
    pub b: Vec<f64>,
    /// (T − t)^α a.
    pub a_resc: Vec<f64>,
    /// (T − t)^α b.
    pub b_resc: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SensitivityResult {
    /// ρ(t, w) = x(T).
    pub rho: f64,
    /// ∂ₜ^α ρ = p(T).
    pub p_t: f64,
    /// ∇^α ρ = q(T).
    pub q_t: f64,
    pub p_path: SolutionPath,
    pub q_path: SolutionPath,
    pub x: NonlinearSolution,
}

/// ρ(t, w) = x(T).
pub fn rho(problem: &Problem, history: &HistoryData, mesh: &Mesh, opts: &SolverOptions) -> Result<f64> {
    Ok(solve_nonlinear(problem, history, mesh, opts)?.path.last())
}

/// p̄(ϑ) = −((1 − α)/Γ(α))(1 − ϑ) ∫₀ᵗ ℓ_w(ξ)(t + ϑL − ξ)^{α−2} dξ,
/// evaluated directly (ϑ > 0).
pub fn pbar_direct(problem: &Problem, history: &HistoryData, theta: f64) -> f64 {
    let alpha = problem.alpha();
    let t = history.t();
    let span = problem.horizon() - t;
    let tau = t + theta * span;
    -(1.0 - alpha) / problem.order().gamma() * (1.0 - theta) * history.lw().kernel_integral(tau, t, alpha - 2.0)
}

/// Regular part of p̄ after removing κϑ^{α−1}/Γ(α) with κ = −ℓ_w(t⁻)L^{α−1}.
/// The jump at ξ = t is subtracted before integrating, so the expression is
/// bounded and valid down to ϑ = 0.
fn pbar_regular(order: &Order, history: &HistoryData, span: f64, theta: f64) -> f64 {
    let t = history.t();
    if t == 0.0 {
        return 0.0;
    }
    let alpha = order.alpha();
    let gam = order.gamma();
    let m = history.lw().end_value();
    let eps = theta * span;
    let x = t + eps;
    let rest: f64 = history
        .lw()
        .pieces()
        .iter()
        .map(|pc| linear_piece_moment(x - pc.b, x - pc.a, pc.vb - m, pc.va - m, alpha - 2.0))
        .sum();
    m * span.powf(alpha - 1.0) * theta.powf(alpha) / gam + (1.0 - theta) * m * x.powf(alpha - 1.0) / gam
        - (1.0 - alpha) / gam * (1.0 - theta) * rest
}

/// The rescaled free terms (p̄, q̄) in singular form on the mesh. Both carry a
/// pointwise evaluator.
pub fn pbar_qbar(problem: &Problem, history: &HistoryData, mesh: &Mesh) -> Result<(SingularFreeTerm, SingularFreeTerm)> {
    problem.check_history(history)?;
    let order = *problem.order();
    let t = history.t();
    let span = problem.horizon() - t;
    let alpha = order.alpha();
    let m = if t == 0.0 { 0.0 } else { history.lw().end_value() };
    let regular: Vec<f64> = mesh.nodes().iter().map(|&th| pbar_regular(&order, history, span, th)).collect();

    let p_problem = problem.clone();
    let p_history = history.clone();
    let pbar = SingularFreeTerm::new(-m * span.powf(alpha - 1.0), regular)
        .with_evaluator(Arc::new(move |th| pbar_direct(&p_problem, &p_history, th)));
    let gam = order.gamma();
    let qbar = SingularFreeTerm::new(span.powf(alpha - 1.0), vec![0.0; mesh.n() + 1])
        .with_evaluator(Arc::new(move |th: f64| 1.0 / (gam * (th * span).powf(1.0 - alpha))));
    Ok((pbar, qbar))
}

/// a and b along a solution path of the nonlinear problem.
pub fn coefficients(problem: &Problem, x: &SolutionPath, t: f64, horizon: f64) -> Result<SensitivityCoefficients> {
    let span = horizon - t;
    if !(span > 0.0) {
        return Err(Error::Invalid(format!("coefficients need t < T, got t = {t}, T = {horizon}")));
    }
    let alpha = problem.alpha();
    let scale = span.powf(alpha);
    let rhs = problem.rhs();
    let nodes = x.mesh.nodes();
    let n = x.values.len();
    let mut out = SensitivityCoefficients {
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        a_resc: Vec::with_capacity(n),
        b_resc: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (tau, xv) = (x.taus[j], x.values[j]);
        let a = rhs.d_x(tau, xv)?;
        let weight = 1.0 - nodes[j];
        let ft = if weight == 0.0 { 0.0 } else { weight * rhs.d_tau(tau, xv)? };
        let b = ft - alpha * rhs.value(tau, xv)? / span;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Solver(format!("non-finite sensitivity coefficient at tau = {tau}")));
        }
        out.a.push(a);
        out.b.push(b);
        out.a_resc.push(scale * a);
        out.b_resc.push(scale * b);
    }
    Ok(out)
}

/// The linear equations for p and q along a solved path. With `physical`
/// set they are posed in σ = τ − t ∈ [0, T − t] with unscaled coefficients;
/// otherwise in ϑ ∈ [0, 1].
pub fn linear_problems(
    problem: &Problem,
    history: &HistoryData,
    x: &SolutionPath,
    physical: bool,
) -> Result<(LinearVolterraProblem, LinearVolterraProblem)> {
    let t = history.t();
    let span = problem.horizon() - t;
    let mesh = &x.mesh;
    let coef = coefficients(problem, x, t, problem.horizon())?;
    let (pbar, qbar) = pbar_qbar(problem, history, mesh)?;
    let order = *problem.order();
    // In σ = ϑL the singular coefficient loses the L^{α−1} factor.
    let (lin_span, c, d, kp, kq) = if physical {
        let unscale = span.powf(1.0 - order.alpha());
        (span, coef.a, coef.b, pbar.kappa() * unscale, qbar.kappa() * unscale)
    } else {
        (1.0, coef.a_resc, coef.b_resc, pbar.kappa(), qbar.kappa())
    };
    let n = mesh.n();
    let p_lp = LinearVolterraProblem {
        order,
        mesh: mesh.clone(),
        span: lin_span,
        c: c.clone(),
        d,
        ybar: SingularFreeTerm::new(kp, pbar.regular().to_vec()),
    };
    let q_lp = LinearVolterraProblem {
        order,
        mesh: mesh.clone(),
        span: lin_span,
        c,
        d: vec![0.0; n + 1],
        ybar: SingularFreeTerm::new(kq, qbar.regular().to_vec()),
    };
    Ok((p_lp, q_lp))
}

fn assemble(problem: &Problem, history: &HistoryData, x: NonlinearSolution, physical: bool) -> Result<SensitivityResult> {
    let (p_lp, q_lp) = linear_problems(problem, history, &x.path, physical)?;
    let (p, q) = rayon::join(|| solve_linear_singular(&p_lp), || solve_linear_singular(&q_lp));
    let (mut p_path, mut q_path) = (p?, q?);
    p_path.taus.clone_from(&x.path.taus);
    q_path.taus.clone_from(&x.path.taus);
    Ok(SensitivityResult { rho: x.path.last(), p_t: p_path.last(), q_t: q_path.last(), p_path, q_path, x })
}

/// ρ, ∂ₜ^α ρ and ∇^α ρ, solving everything in the rescaled variable ϑ.
pub fn ci_derivatives(
    problem: &Problem,
    history: &HistoryData,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<SensitivityResult> {
    let x = solve_nonlinear(problem, history, mesh, opts)?;
    assemble(problem, history, x, false)
}

/// Same quantities with the linear equations posed in the physical variable
/// τ − t ∈ [0, T − t] with unscaled coefficients. Used as a cross-check of
/// the rescaled formulation.
pub fn ci_derivatives_direct(
    problem: &Problem,
    history: &HistoryData,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<SensitivityResult> {
    let x = crate::volterra::solve_nonlinear_direct(problem, history, mesh, opts)?;
    assemble(problem, history, x, true)
}
