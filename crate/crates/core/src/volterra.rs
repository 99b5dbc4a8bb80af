//! Solvers for weakly-singular Volterra integral equations with the Abel
//! kernel (ϑ − ζ)^{α−1}:
//!
//! * the nonlinear equation
//!   x(ϑ) = x̄(ϑ) + (L^α/Γ(α)) ∫₀^ϑ f(t + ζL, x(ζ))(ϑ − ζ)^{α−1} dζ
//!   by a fractional Adams predictor–corrector with product-integration
//!   weights;
//! * linear equations y = ȳ + (1/Γ(α)) ∫ (c y + d)(ϑ − ζ)^{α−1} dζ whose free
//!   term has a ϑ^{α−1} singularity, via the substitution
//!   s(ϑ) = ϑ^{1−α}(y(ϑ) − ȳ(ϑ)), which is continuous with s(0) = 0.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{AbelQuadrature, TwoSidedQuadrature};
use crate::problem::{free_term_xbar, rescaled_free_term, HistoryData, Mesh, Order, Problem};
use crate::special::{mittag_leffler, MLParams};

/// How the implicit corrector equation is solved at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Corrector {
    /// Newton iteration from the predictor, using ∂f/∂x.
    #[default]
    Newton,
    /// Fixed-point iteration to tolerance.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub corrector: Corrector,
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { corrector: Corrector::Newton, fixed_point_tol: 1e-12, fixed_point_max_iter: 50 }
    }
}

/// Minimum number of cells accepted by the nonlinear solver.
pub const MIN_CELLS: usize = 8;

/// Decomposition used for solutions in C^{1−α}: y = (κ/Γ(α) + s)ϑ^{α−1} + r.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularRepr {
    pub kappa: f64,
    pub s: Vec<f64>,
    pub regular: Vec<f64>,
}

/// Node values of a solution on a mesh of [t, T] (ϑ ∈ [0, 1]).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub mesh: Mesh,
    /// Physical times τ_j.
    pub taus: Vec<f64>,
    /// Values at the nodes. For singular solutions values[0] is NaN: the
    /// solution is defined on (0, 1] only.
    pub values: Vec<f64>,
    pub singular: Option<SingularRepr>,
}

impl SolutionPath {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }
}

/// Counters reported by the nonlinear solver.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// Nodes where |f(τ, x)| > γ(1 + |x|).
    pub growth_violations: usize,
    /// Largest observed |f(τ, x)|/(1 + |x|).
    pub max_growth_ratio: f64,
    /// Steps where the Newton step was replaced by fixed-point iteration.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearSolution {
    pub path: SolutionPath,
    /// f(τ_j, x_j) at the nodes.
    pub rhs_values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Solves the rescaled integral equation for x on [t, T].
pub fn solve_nonlinear(
    problem: &Problem,
    history: &HistoryData,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<NonlinearSolution> {
    problem.check_history(history)?;
    let n_cells = mesh.n();
    if n_cells < MIN_CELLS {
        return Err(Error::Invalid(format!("solver needs at least {MIN_CELLS} cells, got {n_cells}")));
    }
    let order = problem.order();
    let (t, horizon) = (history.t(), problem.horizon());
    let span = horizon - t;
    let xbar = rescaled_free_term(history, order, horizon, mesh)?;
    let taus = mesh.taus(t, horizon);
    let quad = AbelQuadrature::new(order.alpha(), mesh);
    let coef = span.powf(order.alpha()) / order.gamma();
    let (values, rhs_values, diagnostics) = march(problem, &xbar, &taus, &quad, coef, opts)?;
    Ok(NonlinearSolution {
        path: SolutionPath { mesh: mesh.clone(), taus, values, singular: None },
        rhs_values,
        diagnostics,
    })
}

/// Solves the unscaled equation
/// x(τ) = x̄(τ) + (1/Γ(α)) ∫ₜ^τ f(ξ, x(ξ))(τ − ξ)^{α−1} dξ
/// with product-integration weights built from the physical offsets
/// τ_j − t of the mapped mesh nodes. Used to cross-check the rescaled solver.
pub fn solve_nonlinear_direct(
    problem: &Problem,
    history: &HistoryData,
    mesh: &Mesh,
    opts: &SolverOptions,
) -> Result<NonlinearSolution> {
    problem.check_history(history)?;
    let n_cells = mesh.n();
    if n_cells < MIN_CELLS {
        return Err(Error::Invalid(format!("solver needs at least {MIN_CELLS} cells, got {n_cells}")));
    }
    let order = problem.order();
    let (t, horizon) = (history.t(), problem.horizon());
    let taus = mesh.taus(t, horizon);
    let offsets: Vec<f64> = taus.iter().map(|tau| tau - t).collect();
    let xbar = taus
        .iter()
        .map(|&tau| free_term_xbar(history, order, horizon, tau))
        .collect::<Result<Vec<_>>>()?;
    let quad = AbelQuadrature::from_nodes(order.alpha(), &offsets);
    let coef = 1.0 / order.gamma();
    let (values, rhs_values, diagnostics) = march(problem, &xbar, &taus, &quad, coef, opts)?;
    Ok(NonlinearSolution {
        path: SolutionPath { mesh: mesh.clone(), taus, values, singular: None },
        rhs_values,
        diagnostics,
    })
}

/// Predictor–corrector time marching shared by the rescaled and direct
/// solvers: x_n = x̄_n + coef·Σ_j w_{n,j} f(τ_j, x_j).
fn march(
    problem: &Problem,
    xbar: &[f64],
    taus: &[f64],
    quad: &AbelQuadrature,
    coef: f64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<f64>, Diagnostics)> {
    let n_cells = taus.len() - 1;
    let rhs = problem.rhs();
    let gamma_growth = problem.growth_gamma();

    let mut diag = Diagnostics::default();
    let mut check_growth = |fx: f64, x: f64, tau: f64| {
        let ratio = fx.abs() / (1.0 + x.abs());
        diag.max_growth_ratio = diag.max_growth_ratio.max(ratio);
        if ratio > gamma_growth * (1.0 + 1e-12) {
            if diag.growth_violations == 0 {
                log::warn!("growth condition violated at tau = {tau}: |f|/(1+|x|) = {ratio} > {gamma_growth}");
            }
            diag.growth_violations += 1;
        }
    };

    let mut x = vec![0.0; n_cells + 1];
    let mut fv = vec![0.0; n_cells + 1];
    x[0] = xbar[0];
    fv[0] = rhs.value(taus[0], x[0])?;
    check_growth(fv[0], x[0], taus[0]);
    let mut fallbacks = 0;

    for n in 1..=n_cells {
        let tau = taus[n];
        let (hist, w_nn) = quad.trapezoid(n, &fv);
        let base = xbar[n] + coef * hist;
        let weight = coef * w_nn;
        let predictor = xbar[n] + coef * quad.rectangle(n, &fv);
        let picard = |xv: f64| -> Result<f64> { Ok(base + weight * rhs.value(tau, xv)?) };

        let newton = || -> Result<Option<f64>> {
            let mut xv = predictor;
            for _ in 0..opts.fixed_point_max_iter {
                let deriv = 1.0 - weight * rhs.d_x(tau, xv)?;
                if !deriv.is_finite() || deriv.abs() < 1e-8 {
                    return Ok(None);
                }
                let next = xv - (xv - picard(xv)?) / deriv;
                if !next.is_finite() {
                    return Ok(None);
                }
                let done = (next - xv).abs() <= opts.fixed_point_tol * (1.0 + next.abs());
                xv = next;
                if done {
                    return Ok(Some(xv));
                }
            }
            Ok(None)
        };
        let value = match opts.corrector {
            Corrector::Newton => match newton()? {
                Some(v) => v,
                None => {
                    fallbacks += 1;
                    fixed_point(predictor, picard, opts, tau)?
                }
            },
            Corrector::FixedPoint => fixed_point(predictor, picard, opts, tau)?,
        };
        x[n] = value;
        fv[n] = rhs.value(tau, value)?;
        check_growth(fv[n], value, tau);
    }
    diag.fallbacks = fallbacks;
    Ok((x, fv, diag))
}

fn fixed_point(
    start: f64,
    map: impl Fn(f64) -> Result<f64>,
    opts: &SolverOptions,
    tau: f64,
) -> Result<f64> {
    let mut xv = start;
    for _ in 0..opts.fixed_point_max_iter {
        let next = map(xv)?;
        if !next.is_finite() {
            return Err(Error::Solver(format!("corrector diverged at tau = {tau}")));
        }
        if (next - xv).abs() <= opts.fixed_point_tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        xv = next;
    }
    Err(Error::Solver(format!(
        "corrector did not converge in {} iterations at tau = {tau}",
        opts.fixed_point_max_iter
    )))
}

/// Free term ȳ(ϑ) = κ ϑ^{α−1}/Γ(α) + r(ϑ) with r continuous on [0, 1].
#[derive(Clone)]
pub struct SingularFreeTerm {
    kappa: f64,
    regular: Vec<f64>,
    evaluator: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for SingularFreeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingularFreeTerm")
            .field("kappa", &self.kappa)
            .field("regular", &self.regular)
            .field("evaluator", &self.evaluator.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl SingularFreeTerm {
    /// `regular` holds r at every mesh node, including ϑ = 0.
    pub fn new(kappa: f64, regular: Vec<f64>) -> Self {
        Self { kappa, regular, evaluator: None }
    }

    /// Attach a pointwise evaluator ϑ ↦ ȳ(ϑ) for ϑ ∈ (0, 1].
    pub fn with_evaluator(mut self, f: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Self {
        self.evaluator = Some(f);
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn regular(&self) -> &[f64] {
        &self.regular
    }

    /// ȳ at node j of a mesh with node values `nodes` (j ≥ 1), in a variable
    /// scaled by `span`.
    pub fn node_value(&self, order: &Order, nodes: &[f64], span: f64, j: usize) -> f64 {
        let sigma = span * nodes[j];
        self.kappa * sigma.powf(order.alpha() - 1.0) / order.gamma() + self.regular[j]
    }

    /// Pointwise value if an evaluator is attached.
    pub fn eval(&self, theta: f64) -> Option<f64> {
        self.evaluator.as_ref().map(|f| f(theta))
    }
}

/// y(σ) = ȳ(σ) + (1/Γ(α)) ∫₀^σ (c(ζ) y(ζ) + d(ζ))(σ − ζ)^{α−1} dζ on
/// σ ∈ [0, span], with mesh nodes σ_j = span·ϑ_j.
#[derive(Debug, Clone)]
pub struct LinearVolterraProblem {
    pub order: Order,
    pub mesh: Mesh,
    pub span: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub ybar: SingularFreeTerm,
}

impl LinearVolterraProblem {
    fn validate(&self) -> Result<()> {
        let len = self.mesh.n() + 1;
        if self.c.len() != len || self.d.len() != len || self.ybar.regular.len() != len {
            return Err(Error::Invalid(format!(
                "coefficient arrays must have {len} entries (got c: {}, d: {}, regular: {})",
                self.c.len(),
                self.d.len(),
                self.ybar.regular.len()
            )));
        }
        if !(self.span > 0.0) {
            return Err(Error::Invalid(format!("span must be positive, got {}", self.span)));
        }
        if self.c.iter().chain(&self.d).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("coefficients must be finite at every node".into()));
        }
        if !self.ybar.kappa.is_finite() || self.ybar.regular.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(
                "free term is not of the form κϑ^(α−1)/Γ(α) + bounded part".into(),
            ));
        }
        Ok(())
    }
}

/// Solves a linear equation with singular free term by the substitution
/// s = σ^{1−α}(y − ȳ) and product integration. Returns y (NaN at σ = 0)
/// together with s.
pub fn solve_linear_singular(lp: &LinearVolterraProblem) -> Result<SolutionPath> {
    lp.validate()?;
    let alpha = lp.order.alpha();
    let gam = lp.order.gamma();
    let n_cells = lp.mesh.n();
    let nodes = lp.mesh.nodes();
    let kappa_g = lp.ybar.kappa / gam;
    let r = &lp.ybar.regular;

    let one_sided = AbelQuadrature::new(alpha, &lp.mesh);
    let two_sided = TwoSidedQuadrature::new(alpha, &lp.mesh);
    let scale_one = lp.span.powf(alpha);
    let scale_two = lp.span.powf(2.0 * alpha - 1.0);

    let g2: Vec<f64> = (0..=n_cells).map(|j| lp.c[j] * r[j] + lp.d[j]).collect();
    let mut s = vec![0.0; n_cells + 1];
    let mut conv = two_sided.convolution();
    conv.push(lp.c[0] * kappa_g);
    for n in 1..=n_cells {
        let (known, w) = conv.step();
        let (known, w) = (scale_two * known, scale_two * w);
        let (hist, diag) = one_sided.trapezoid(n, &g2);
        let one = scale_one * (hist + diag * g2[n]);
        let beta = (lp.span * nodes[n]).powf(1.0 - alpha) / gam;
        let denom = 1.0 - beta * w * lp.c[n];
        if !(denom.abs() > 1e-12) {
            return Err(Error::Solver(format!("singular step matrix at node {n}")));
        }
        s[n] = beta * (known + w * lp.c[n] * kappa_g + one) / denom;
        if !s[n].is_finite() {
            return Err(Error::Solver(format!("non-finite solution at node {n}")));
        }
        conv.push(lp.c[n] * (s[n] + kappa_g));
    }

    let mut values = vec![f64::NAN; n_cells + 1];
    for j in 1..=n_cells {
        let sigma = lp.span * nodes[j];
        values[j] = (kappa_g + s[j]) * sigma.powf(alpha - 1.0) + r[j];
    }
    let taus = nodes.iter().map(|th| lp.span * th).collect();
    Ok(SolutionPath {
        mesh: lp.mesh.clone(),
        taus,
        values,
        singular: Some(SingularRepr { kappa: lp.ybar.kappa, s, regular: r.clone() }),
    })
}

/// Nodewise residual of the linear equation for a candidate solution y,
/// with the integral evaluated by exact-moment product integration of the
/// recovered regular factor σ^{1−α}(y − r). Entry 0 is 0 by convention.
pub fn linear_residual(lp: &LinearVolterraProblem, y: &[f64]) -> Result<Vec<f64>> {
    lp.validate()?;
    let alpha = lp.order.alpha();
    let gam = lp.order.gamma();
    let n_cells = lp.mesh.n();
    let nodes = lp.mesh.nodes();
    let r = &lp.ybar.regular;
    let kappa_g = lp.ybar.kappa / gam;
    // Exact moments on every cell, independent of the tabulated Gauss rule
    // used by the solver on uniform meshes.
    let one_sided = AbelQuadrature::exact_moments(alpha, &lp.mesh);
    let two_sided = TwoSidedQuadrature::exact_moments(alpha, &lp.mesh);
    let scale_one = lp.span.powf(alpha);
    let scale_two = lp.span.powf(2.0 * alpha - 1.0);

    let rho: Vec<f64> = (0..=n_cells)
        .map(|j| if j == 0 { kappa_g } else { (lp.span * nodes[j]).powf(1.0 - alpha) * (y[j] - r[j]) })
        .collect();
    let g2: Vec<f64> = (0..=n_cells).map(|j| lp.c[j] * r[j] + lp.d[j]).collect();
    let mut out = vec![0.0; n_cells + 1];
    let mut conv = two_sided.convolution();
    conv.push(lp.c[0] * rho[0]);
    for n in 1..=n_cells {
        let (known, w) = conv.step();
        let two = scale_two * (known + w * lp.c[n] * rho[n]);
        let (hist, diag) = one_sided.trapezoid(n, &g2);
        let one = scale_one * (hist + diag * g2[n]);
        let ybar = lp.ybar.node_value(&lp.order, nodes, lp.span, n);
        out[n] = y[n] - ybar - (two + one) / gam;
        conv.push(lp.c[n] * rho[n]);
    }
    Ok(out)
}

/// Right-hand side of the Gronwall-type estimate
/// E_{α,α}(c) ŷ/ϑ^{1−α} + ȳ_r(ϑ) + c E_{α,α}(c) ∫₀^ϑ ȳ_r(ζ)(ϑ − ζ)^{α−1} dζ
/// at every node (the integral by the product trapezoid rule). At ϑ = 0 the
/// bound is +∞ when ŷ > 0.
pub fn gronwall_bound(order: &Order, yhat: f64, yr: &[f64], c: f64, mesh: &Mesh) -> Result<Vec<f64>> {
    if !(c >= 0.0) || !(yhat >= 0.0) {
        return Err(Error::Invalid(format!("bound needs c >= 0 and yhat >= 0, got c = {c}, yhat = {yhat}")));
    }
    if yr.len() != mesh.n() + 1 {
        return Err(Error::Invalid(format!("regular part needs {} entries, got {}", mesh.n() + 1, yr.len())));
    }
    if yr.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Invalid("regular part must be nonnegative at every node".into()));
    }
    let alpha = order.alpha();
    let e = mittag_leffler(MLParams::new(alpha, alpha)?, c)?;
    let quad = AbelQuadrature::new(alpha, mesh);
    let nodes = mesh.nodes();
    let mut out = Vec::with_capacity(nodes.len());
    for (j, &theta) in nodes.iter().enumerate() {
        let (hist, diag) = quad.trapezoid(j, yr);
        let integral = hist + diag * yr[j];
        let singular = if yhat == 0.0 {
            0.0
        } else if theta == 0.0 {
            f64::INFINITY
        } else {
            e * yhat / theta.powf(1.0 - alpha)
        };
        out.push(singular + yr[j] + c * e * integral);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::HistoryData;
    use approx::assert_relative_eq;

    #[test]
    fn zero_rhs_reproduces_history_constant() {
        let p = Problem::from_expr(0.5, 2.0, "0", 0.0).unwrap();
        let h = HistoryData::constant(1.0, 3.0, 0.0).unwrap();
        let sol = solve_nonlinear(&p, &h, &Mesh::uniform(64).unwrap(), &SolverOptions::default()).unwrap();
        assert!(sol.path.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn too_coarse_mesh_is_rejected() {
        let p = Problem::from_expr(0.5, 1.0, "x", 1.0).unwrap();
        let h = HistoryData::point(1.0);
        assert!(solve_nonlinear(&p, &h, &Mesh::uniform(4).unwrap(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn newton_and_fixed_point_agree() {
        let p = Problem::from_expr(0.6, 1.0, "sin(x) + tau", 2.0).unwrap();
        let h = HistoryData::point(0.3);
        let mesh = Mesh::uniform(128).unwrap();
        let a = solve_nonlinear(&p, &h, &mesh, &SolverOptions::default()).unwrap();
        let opts = SolverOptions { corrector: Corrector::FixedPoint, ..Default::default() };
        let b = solve_nonlinear(&p, &h, &mesh, &opts).unwrap();
        for (x, y) in a.path.values.iter().zip(&b.path.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn growth_violations_are_reported() {
        let p = Problem::from_expr(0.5, 1.0, "5*x", 1.0).unwrap();
        let h = HistoryData::point(1.0);
        let sol = solve_nonlinear(&p, &h, &Mesh::uniform(16).unwrap(), &SolverOptions::default()).unwrap();
        assert!(sol.diagnostics.growth_violations > 0);
        assert!(sol.diagnostics.max_growth_ratio > 1.0);
    }

    fn linear(c: f64, d: f64, kappa: f64, n: usize) -> LinearVolterraProblem {
        let mesh = Mesh::uniform(n).unwrap();
        LinearVolterraProblem {
            order: Order::new(0.5).unwrap(),
            c: vec![c; n + 1],
            d: vec![d; n + 1],
            ybar: SingularFreeTerm::new(kappa, vec![0.0; n + 1]),
            mesh,
            span: 1.0,
        }
    }

    #[test]
    fn linear_without_integral_term_returns_free_term() {
        let mut lp = linear(0.0, 0.0, 1.0, 32);
        lp.ybar = SingularFreeTerm::new(1.0, (0..=32).map(|j| j as f64 * 0.1).collect());
        let y = solve_linear_singular(&lp).unwrap();
        assert!(y.values[0].is_nan());
        for j in 1..=32 {
            assert_relative_eq!(y.values[j], lp.ybar.node_value(&lp.order, lp.mesh.nodes(), 1.0, j), max_relative = 1e-15);
        }
    }

    #[test]
    fn linear_abel_integral_of_one() {
        let y = solve_linear_singular(&linear(0.0, 1.0, 0.0, 256)).unwrap();
        assert_relative_eq!(y.last(), 1.128_379_167_095_512_6, max_relative = 1e-12);
    }

    #[test]
    fn gronwall_examples() {
        let order = Order::new(0.5).unwrap();
        let mesh = Mesh::uniform(64).unwrap();
        let b = gronwall_bound(&order, 1.0, &vec![0.0; 65], 0.0, &mesh).unwrap();
        assert_relative_eq!(b[64], 0.564_189_583_547_756_3, max_relative = 1e-14);
        assert!(b[0].is_infinite());
        let yr: Vec<f64> = (0..=64).map(|j| j as f64 / 64.0).collect();
        let b = gronwall_bound(&order, 0.0, &yr, 0.0, &mesh).unwrap();
        assert_eq!(b, yr);
        let b = gronwall_bound(&order, 0.0, &vec![1.0; 65], 1.0, &mesh).unwrap();
        assert_relative_eq!(b[64], 12.146_339_328_620_08, max_relative = 1e-13);
        assert!(gronwall_bound(&order, -1.0, &vec![0.0; 65], 0.0, &mesh).is_err());
        assert!(gronwall_bound(&order, 0.0, &vec![-1.0; 65], 0.0, &mesh).is_err());
    }
}
