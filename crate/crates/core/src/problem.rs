//! Problem definition: fractional order, history data, right-hand side,
//! admissible extensions, meshes and the free term of the integral equation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Expression};
use crate::kernel::linear_piece_moment;
use crate::special::gamma;

/// Fractional order α ∈ (0, 1) with Γ(α) cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    alpha: f64,
    gamma_alpha: f64,
}

impl Order {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Invalid(format!("order alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { alpha, gamma_alpha: gamma(alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Γ(α)
    pub fn gamma(&self) -> f64 {
        self.gamma_alpha
    }
}

/// One piece of a piecewise-linear function on [a, b], with values `va` at a
/// and `vb` at b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPiece {
    pub a: f64,
    pub b: f64,
    pub va: f64,
    pub vb: f64,
}

impl LinearPiece {
    pub fn constant(a: f64, b: f64, v: f64) -> Self {
        Self { a, b, va: v, vb: v }
    }

    fn value_at(&self, xi: f64) -> f64 {
        if self.va == self.vb {
            self.va
        } else {
            self.va + (self.vb - self.va) * (xi - self.a) / (self.b - self.a)
        }
    }

    /// ∫ over the piece, clipped to ξ ≤ `upto`, of ℓ(ξ)(τ − ξ)^p dξ.
    fn kernel_moment(&self, tau: f64, upto: f64, p: f64) -> f64 {
        let b = self.b.min(upto);
        if b <= self.a {
            return 0.0;
        }
        let vb = if b < self.b { self.value_at(b) } else { self.vb };
        linear_piece_moment(tau - b, tau - self.a, vb, self.va, p)
    }
}

/// A piecewise-linear (possibly discontinuous) function given on
/// contiguous pieces. Used for Caputo derivatives of histories and
/// extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoProfile {
    pieces: Vec<LinearPiece>,
}

impl CaputoProfile {
    /// The empty profile (no history).
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    /// Validates that pieces are contiguous, nondegenerate and finite.
    pub fn new(pieces: Vec<LinearPiece>) -> Result<Self> {
        for (i, p) in pieces.iter().enumerate() {
            if !(p.a.is_finite() && p.b.is_finite() && p.va.is_finite() && p.vb.is_finite()) {
                return Err(Error::Invalid(format!("profile piece {i} has non-finite data")));
            }
            if p.b <= p.a {
                return Err(Error::Invalid(format!("profile piece {i} has empty interval [{}, {}]", p.a, p.b)));
            }
            if i > 0 && pieces[i - 1].b != p.a {
                return Err(Error::Invalid(format!(
                    "profile pieces {} and {i} are not contiguous ({} vs {})",
                    i - 1,
                    pieces[i - 1].b,
                    p.a
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// Constant value on [a, b].
    pub fn constant(a: f64, b: f64, v: f64) -> Result<Self> {
        Self::new(vec![LinearPiece::constant(a, b, v)])
    }

    /// Piecewise-constant profile: `values[i]` on (breaks[i], breaks[i+1]].
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::Invalid(format!(
                "piecewise profile needs len(breaks) = len(values) + 1, got {} and {}",
                breaks.len(),
                values.len()
            )));
        }
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| LinearPiece::constant(breaks[i], breaks[i + 1], v))
                .collect(),
        )
    }

    /// Samples a function of ξ on `cells` equal cells of [a, b] and joins the
    /// samples linearly.
    pub fn sample(a: f64, b: f64, cells: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        if cells == 0 || b <= a {
            return Err(Error::Invalid("sampling needs at least one cell on a nonempty interval".into()));
        }
        let xs: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { b } else { a + (b - a) * i as f64 / cells as f64 })
            .collect();
        let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(
            (0..cells)
                .map(|i| LinearPiece { a: xs[i], b: xs[i + 1], va: vals[i], vb: vals[i + 1] })
                .collect(),
        )
    }

    /// Samples a parsed expression in one variable.
    pub fn sample_expression(a: f64, b: f64, cells: usize, expr: &Expression) -> Result<Self> {
        Self::sample(a, b, cells, |x| Ok(expr.eval(&[x])?))
    }

    pub fn pieces(&self) -> &[LinearPiece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn start(&self) -> Option<f64> {
        self.pieces.first().map(|p| p.a)
    }

    pub fn end(&self) -> Option<f64> {
        self.pieces.last().map(|p| p.b)
    }

    /// Left limit at the right end of the support.
    pub fn end_value(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.vb)
    }

    /// max |ℓ| over the piece endpoints (exact for piecewise-linear ℓ).
    pub fn sup_abs(&self) -> f64 {
        self.pieces.iter().fold(0.0, |m, p| m.max(p.va.abs()).max(p.vb.abs()))
    }

    /// Value at ξ (pieces are taken as (a, b]; the first one includes a).
    pub fn value(&self, xi: f64) -> Option<f64> {
        let first = self.pieces.first()?;
        if xi < first.a || xi > self.end()? {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.b < xi);
        Some(self.pieces[idx.min(self.pieces.len() - 1)].value_at(xi))
    }

    /// ∫ over the support clipped to ξ ≤ `upto` of ℓ(ξ)(τ − ξ)^p dξ.
    pub fn kernel_integral(&self, tau: f64, upto: f64, p: f64) -> f64 {
        let mut sum = 0.0;
        for piece in &self.pieces {
            if piece.a >= upto {
                break;
            }
            sum += piece.kernel_moment(tau, upto, p);
        }
        sum
    }

    /// ∫ₐᵇ ℓ(ξ) dξ over the support clipped to [a, b].
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut sum = 0.0;
        for p in &self.pieces {
            let lo = p.a.max(a);
            let hi = p.b.min(b);
            if hi > lo {
                sum += 0.5 * (p.value_at(lo) + p.value_at(hi)) * (hi - lo);
            }
        }
        sum
    }

    /// Concatenation with another profile that starts where this one ends.
    pub fn concat(&self, other: &CaputoProfile) -> Result<Self> {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Self::new(pieces)
    }

    /// Restriction to [start, b], splitting the piece containing b.
    pub fn truncate(&self, b: f64) -> Self {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if p.a >= b {
                break;
            }
            if p.b <= b {
                pieces.push(*p);
            } else {
                pieces.push(LinearPiece { a: p.a, b, va: p.va, vb: p.value_at(b) });
            }
        }
        Self { pieces }
    }
}

/// Initial data (t, w(·)) encoded by w(0) and ℓ_w = ᶜD^α w on [0, t].
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryData {
    t: f64,
    w0: f64,
    lw: CaputoProfile,
    m_bound: f64,
}

impl HistoryData {
    /// `margin` is added to max |ℓ_w| to form the essential bound M.
    pub fn new(t: f64, w0: f64, lw: CaputoProfile, margin: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() || !w0.is_finite() {
            return Err(Error::Invalid(format!("history needs finite t >= 0 and w0, got t = {t}, w0 = {w0}")));
        }
        if !(margin >= 0.0) {
            return Err(Error::Invalid(format!("bound margin must be nonnegative, got {margin}")));
        }
        if t == 0.0 {
            if !lw.is_empty() {
                return Err(Error::Invalid("history derivative must be empty when t = 0".into()));
            }
        } else if lw.start() != Some(0.0) || lw.end() != Some(t) {
            return Err(Error::Invalid(format!(
                "history derivative must cover [0, {t}], got [{:?}, {:?}]",
                lw.start(),
                lw.end()
            )));
        }
        let m_bound = lw.sup_abs() + margin;
        Ok(Self { t, w0, lw, m_bound })
    }

    /// History consisting of the single point w(0) = w0 at t = 0.
    pub fn point(w0: f64) -> Self {
        Self { t: 0.0, w0, lw: CaputoProfile::empty(), m_bound: 0.0 }
    }

    /// Constant ℓ_w ≡ c on [0, t].
    pub fn constant(t: f64, w0: f64, c: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(Self::point(w0));
        }
        Self::new(t, w0, CaputoProfile::constant(0.0, t, c)?, 0.0)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn lw(&self) -> &CaputoProfile {
        &self.lw
    }

    /// Essential bound M on |ℓ_w|.
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// The history at a later time whose derivative on (t, t_new] is `ell`.
    pub fn extended(&self, ell: &CaputoProfile) -> Result<Self> {
        let Some(end) = ell.end() else {
            return Ok(self.clone());
        };
        if ell.start() != Some(self.t) {
            return Err(Error::Invalid(format!(
                "extension must start at t = {}, got {:?}",
                self.t,
                ell.start()
            )));
        }
        let lw = self.lw.concat(ell)?;
        let m_bound = self.m_bound.max(ell.sup_abs());
        Ok(Self { t: end, w0: self.w0, lw, m_bound })
    }

    /// (1/Γ(α)) ∫₀^{min(t, upto)} ℓ_w(ξ)(τ − ξ)^{α−1} dξ.
    fn fractional_integral(&self, order: &Order, tau: f64, upto: f64) -> f64 {
        self.lw.kernel_integral(tau, upto, order.alpha() - 1.0) / order.gamma()
    }
}

/// Right-hand side f(τ, x) with its partial derivatives.
pub trait Rhs: Send + Sync + fmt::Debug {
    fn value(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError>;
    fn d_tau(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError>;
    fn d_x(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError>;
}

/// Right-hand side given by an expression in (tau, x); the partials are
/// obtained by symbolic differentiation.
#[derive(Debug, Clone)]
pub struct ExprRhs {
    f: Expression,
    f_tau: Expression,
    f_x: Expression,
}

impl ExprRhs {
    pub const VARS: [&'static str; 2] = ["tau", "x"];

    pub fn parse(src: &str) -> Result<Self> {
        let f = Expression::parse(src, &Self::VARS)?;
        Ok(Self { f_tau: f.differentiate("tau")?, f_x: f.differentiate("x")?, f })
    }

    pub fn expression(&self) -> &Expression {
        &self.f
    }
}

impl Rhs for ExprRhs {
    fn value(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError> {
        self.f.eval(&[tau, x])
    }

    fn d_tau(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError> {
        self.f_tau.eval(&[tau, x])
    }

    fn d_x(&self, tau: f64, x: f64) -> std::result::Result<f64, EvalError> {
        self.f_x.eval(&[tau, x])
    }
}

/// The Cauchy problem data other than the initial history.
#[derive(Debug, Clone)]
pub struct Problem {
    order: Order,
    horizon: f64,
    rhs: Arc<dyn Rhs>,
    growth_gamma: f64,
}

impl Problem {
    pub fn new(order: Order, horizon: f64, rhs: Arc<dyn Rhs>, growth_gamma: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Invalid(format!("horizon T must be positive, got {horizon}")));
        }
        if !(growth_gamma >= 0.0) {
            return Err(Error::Invalid(format!("growth constant must be nonnegative, got {growth_gamma}")));
        }
        Ok(Self { order, horizon, rhs, growth_gamma })
    }

    /// Convenience constructor from an expression in (tau, x).
    pub fn from_expr(alpha: f64, horizon: f64, f: &str, growth_gamma: f64) -> Result<Self> {
        Self::new(Order::new(alpha)?, horizon, Arc::new(ExprRhs::parse(f)?), growth_gamma)
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    /// Horizon T.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rhs(&self) -> &dyn Rhs {
        self.rhs.as_ref()
    }

    pub fn growth_gamma(&self) -> f64 {
        self.growth_gamma
    }

    /// Checks that the history fits the horizon.
    pub fn check_history(&self, h: &HistoryData) -> Result<()> {
        if h.t() >= self.horizon {
            return Err(Error::Invalid(format!(
                "initial time t = {} must be smaller than T = {}",
                h.t(),
                self.horizon
            )));
        }
        Ok(())
    }
}

/// An admissible extension of the history: w on [0, t] followed by a
/// function whose Caputo derivative on (t, T] is `ell`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    base: HistoryData,
    ell: CaputoProfile,
}

impl Extension {
    pub fn new(base: HistoryData, ell: CaputoProfile) -> Result<Self> {
        if ell.start() != Some(base.t()) {
            return Err(Error::Invalid(format!(
                "extension derivative must start at t = {}, got {:?}",
                base.t(),
                ell.start()
            )));
        }
        Ok(Self { base, ell })
    }

    /// The extension λ^(c) with constant derivative c on [t, T].
    pub fn constant(base: HistoryData, c: f64, horizon: f64) -> Result<Self> {
        let ell = CaputoProfile::constant(base.t(), horizon, c)?;
        Self::new(base, ell)
    }

    pub fn base(&self) -> &HistoryData {
        &self.base
    }

    pub fn ell(&self) -> &CaputoProfile {
        &self.ell
    }

    /// The restriction λ_τ as history data at time τ ∈ (t, end].
    pub fn history_at(&self, tau: f64) -> Result<HistoryData> {
        let end = self.ell.end().unwrap_or(self.base.t());
        if !(tau > self.base.t() && tau <= end) {
            return Err(Error::OutOfRange(format!(
                "restriction time {tau} outside ({}, {end}]",
                self.base.t()
            )));
        }
        self.base.extended(&self.ell.truncate(tau))
    }

    /// ∫ₜ^τ ℓ(ξ) dξ.
    pub fn ell_integral(&self, tau: f64) -> f64 {
        self.ell.integral(self.base.t(), tau)
    }

    /// λ(τ) for τ in [0, end].
    pub fn value(&self, order: &Order, tau: f64) -> Result<f64> {
        let end = self.ell.end().unwrap_or(self.base.t());
        if !(tau >= 0.0 && tau <= end) {
            return Err(Error::OutOfRange(format!("time {tau} outside [0, {end}]")));
        }
        let full = self.base.extended(&self.ell)?;
        eval_history(&full, order, tau)
    }
}

/// Kind of mesh on the rescaled interval [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    Uniform,
    /// ϑ_j = (j/N)^r
    Graded { r: f64 },
}

/// Mesh on [0, 1] with nodes[0] = 0 and nodes[N] = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    kind: MeshKind,
    nodes: Vec<f64>,
}

impl Mesh {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("mesh needs at least one cell".into()));
        }
        let nodes = (0..=n).map(|j| j as f64 / n as f64).collect();
        Ok(Self { kind: MeshKind::Uniform, nodes })
    }

    pub fn graded(n: usize, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("mesh needs at least one cell".into()));
        }
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::Invalid(format!("grading exponent must be >= 1, got {r}")));
        }
        let nodes = (0..=n).map(|j| (j as f64 / n as f64).powf(r)).collect();
        Ok(Self { kind: MeshKind::Graded { r }, nodes })
    }

    pub fn new(kind: MeshKind, n: usize) -> Result<Self> {
        match kind {
            MeshKind::Uniform => Self::uniform(n),
            MeshKind::Graded { r } => Self::graded(n, r),
        }
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Number of cells N.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cell width for uniform meshes.
    pub fn step(&self) -> Option<f64> {
        match self.kind {
            MeshKind::Uniform => Some(1.0 / self.n() as f64),
            MeshKind::Graded { r } if r == 1.0 => Some(1.0 / self.n() as f64),
            MeshKind::Graded { .. } => None,
        }
    }

    /// Physical times τ_j = t + ϑ_j (T − t).
    pub fn taus(&self, t: f64, horizon: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(j, &th)| if j == self.n() { horizon } else { rescale(t, horizon, Direction::ToTau, th).unwrap() })
            .collect()
    }
}

/// Direction of the affine map between τ ∈ [t, T] and ϑ ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToTheta,
    ToTau,
}

/// ϑ = (τ − t)/(T − t) or its inverse.
pub fn rescale(t: f64, horizon: f64, direction: Direction, value: f64) -> Result<f64> {
    if !(horizon > t) {
        return Err(Error::Invalid(format!("rescaling needs t < T, got t = {t}, T = {horizon}")));
    }
    let span = horizon - t;
    match direction {
        Direction::ToTheta => {
            if !(value >= t && value <= horizon) {
                return Err(Error::OutOfRange(format!("time {value} outside [{t}, {horizon}]")));
            }
            Ok((value - t) / span)
        }
        Direction::ToTau => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange(format!("rescaled time {value} outside [0, 1]")));
            }
            Ok(t + value * span)
        }
    }
}

/// w(τ) = w0 + I^α ℓ_w (τ) for τ ∈ [0, t].
pub fn eval_history(h: &HistoryData, order: &Order, tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau <= h.t()) {
        return Err(Error::OutOfRange(format!("history time {tau} outside [0, {}]", h.t())));
    }
    Ok(h.w0() + h.fractional_integral(order, tau, tau))
}

/// The free term x̄(τ): w(τ) for τ ≤ t and
/// w0 + (1/Γ(α)) ∫₀ᵗ ℓ_w(ξ)(τ − ξ)^{α−1} dξ for τ > t.
pub fn free_term_xbar(h: &HistoryData, order: &Order, horizon: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau <= horizon) {
        return Err(Error::OutOfRange(format!("time {tau} outside [0, {horizon}]")));
    }
    if tau <= h.t() {
        return eval_history(h, order, tau);
    }
    Ok(h.w0() + h.fractional_integral(order, tau, h.t()))
}

/// λ^(c)(τ) = x̄(τ) + c(τ − t)^α/Γ(α + 1) for τ > t, and w(τ) for τ ≤ t:
/// the extension whose Caputo derivative equals c on (t, T].
pub fn lambda_ell(h: &HistoryData, order: &Order, horizon: f64, c: f64, tau: f64) -> Result<f64> {
    let xbar = free_term_xbar(h, order, horizon, tau)?;
    if tau <= h.t() {
        return Ok(xbar);
    }
    Ok(xbar + c * (tau - h.t()).powf(order.alpha()) / (order.alpha() * order.gamma()))
}

/// The rescaled free term x̄(t + ϑ(T − t)) at every mesh node.
pub fn rescaled_free_term(h: &HistoryData, order: &Order, horizon: f64, mesh: &Mesh) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    mesh.taus(h.t(), horizon)
        .par_iter()
        .map(|&tau| free_term_xbar(h, order, horizon, tau))
        .collect()
}
