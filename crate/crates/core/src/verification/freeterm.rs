//! Limits of the free-term difference quotient along λ^(ℓ):
//! [x̄(ϑ | τ) − x̄(ϑ | t)]/(τ − t) → p̄(ϑ) + q̄(ϑ)ℓ pointwise and in the
//! Abel-weighted integral sense, together with the explicit majorants.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{gauss_legendre_unit, pow_diff, two_sided_moment};
use crate::problem::{free_term_xbar, Extension, HistoryData, Problem};
use crate::sensitivity::pbar_direct;
use crate::special::beta_fn;
use crate::verification::fd::FdSchedule;

/// Per-ϑ sequences over the schedule offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeTermSample {
    pub theta: f64,
    /// z̄(ϑ | τ) = |[x̄(ϑ|τ) − x̄(ϑ|t)]/(τ − t) − p̄(ϑ) − q̄(ϑ)ℓ|.
    pub pointwise: Vec<f64>,
    /// (M + 2|ℓ|)/Γ(α)·[(ϑ(T − τ))^{α−1} − (τ + ϑ(T − τ) − t)^{α−1}].
    pub majorant: Vec<f64>,
    /// ∫₀^ϑ z̄(ζ | τ)(ϑ − ζ)^{α−1} dζ.
    pub weighted: Vec<f64>,
    /// The same integral of the pointwise majorant, in closed form.
    pub weighted_majorant: Vec<f64>,
    /// ϑ^{1−α}|x̄(ϑ|τ) − x̄(ϑ|t)|/(τ − t), to compare with L̄.
    pub scaled_quotient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeTermReport {
    pub ell: f64,
    pub offsets: Vec<f64>,
    /// Essential bound M of the history derivative.
    pub m_bound: f64,
    /// L̄ = (M + |ℓ|)/(Γ(α)η^{1−α}) with η = (T − t)/2.
    pub lipschitz_constant: f64,
    pub samples: Vec<FreeTermSample>,
}

impl FreeTermReport {
    /// Pointwise and weighted quantities stay below their majorants (up to a
    /// relative slack for rounding and quadrature).
    pub fn majorants_hold(&self) -> bool {
        let le = |a: f64, b: f64| a <= b * (1.0 + 1e-8) + 1e-13;
        self.samples.iter().all(|s| {
            s.pointwise.iter().zip(&s.majorant).all(|(a, b)| le(*a, *b))
                && s.weighted.iter().zip(&s.weighted_majorant).all(|(a, b)| le(*a, *b))
        })
    }

    /// Last value at most `factor` times the first one, for both sequences.
    pub fn decays(&self, factor: f64) -> bool {
        let dec = |v: &[f64]| v.iter().all(|x| *x == 0.0) || *v.last().unwrap() <= factor * v[0];
        self.samples.iter().all(|s| dec(&s.pointwise) && dec(&s.weighted))
    }

    /// ϑ^{1−α}|Δx̄|/δ ≤ L̄ at every sample.
    pub fn lipschitz_holds(&self) -> bool {
        let bound = self.lipschitz_constant * (1.0 + 1e-10);
        self.samples.iter().all(|s| s.scaled_quotient.iter().all(|q| *q <= bound))
    }
}

struct Setup<'a> {
    problem: &'a Problem,
    history: &'a HistoryData,
    ext: Extension,
    ell: f64,
}

impl Setup<'_> {
    fn span(&self) -> f64 {
        self.problem.horizon() - self.history.t()
    }

    /// x̄(ϑ | s) for the problem restarted at s with history `h`.
    fn xbar(&self, h: &HistoryData, theta: f64) -> Result<f64> {
        let s = h.t();
        let horizon = self.problem.horizon();
        free_term_xbar(h, self.problem.order(), horizon, s + theta * (horizon - s))
    }

    fn qbar(&self, theta: f64) -> f64 {
        let alpha = self.problem.alpha();
        1.0 / (self.problem.order().gamma() * (theta * self.span()).powf(1.0 - alpha))
    }

    /// Signed difference quotient [x̄(ϑ|τ) − x̄(ϑ|t)]/δ.
    fn quotient(&self, moved: &HistoryData, delta: f64, theta: f64) -> Result<f64> {
        Ok((self.xbar(moved, theta)? - self.xbar(self.history, theta)?) / delta)
    }

    fn gap(&self, moved: &HistoryData, delta: f64, theta: f64) -> Result<f64> {
        let limit = pbar_direct(self.problem, self.history, theta) + self.qbar(theta) * self.ell;
        Ok((self.quotient(moved, delta, theta)? - limit).abs())
    }
}

/// ∫₀^θ g(ζ)(θ − ζ)^{α−1} dζ for g with at most a ζ^{α−1} singularity at 0.
///
/// Each half of [0, θ] is mapped by ζ = u^{1/α} (left) or θ − ζ = u^{1/α}
/// (right), which removes the endpoint singularities, and integrated by
/// Gauss–Legendre on geometrically graded panels.
fn abel_weighted(g: impl Fn(f64) -> Result<f64>, theta: f64, alpha: f64) -> Result<f64> {
    const LEVELS: i32 = 60;
    let (gx, gw) = gauss_legendre_unit(16);
    let half = 0.5 * theta;
    let inv = 1.0 / alpha;
    let mut edges: Vec<f64> = (0..=LEVELS).map(|k| half * 0.5f64.powi(k)).collect();
    edges.push(0.0);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (u_hi, u_lo) = (w[0].powf(alpha), w[1].powf(alpha));
        let du = u_hi - u_lo;
        for (x, wt) in gx.iter().zip(&gw) {
            let u = u_lo + x * du;
            let s = u.powf(inv);
            let jac = inv * u.powf(inv - 1.0);
            // Left half: ζ = s, kernel (θ − s)^{α−1}, jacobian·ζ^{α−1}-free.
            let left = g(s)? * (theta - s).powf(alpha - 1.0) * jac;
            // Right half: ζ = θ − s, kernel s^{α−1}, s^{α−1}·jac = 1/α.
            let right = g(theta - s)? * inv;
            total += wt * du * (left + right);
        }
    }
    Ok(total)
}

/// Checks the pointwise and weighted limits at the sample points `thetas`
/// along the schedule offsets.
pub fn free_term_limits(
    problem: &Problem,
    history: &HistoryData,
    ell: f64,
    schedule: &FdSchedule,
    thetas: &[f64],
) -> Result<FreeTermReport> {
    problem.check_history(history)?;
    if thetas.iter().any(|&th| !(th > 0.0 && th <= 1.0)) {
        return Err(Error::OutOfRange("sample points must lie in (0, 1]".into()));
    }
    let t = history.t();
    let horizon = problem.horizon();
    let span = horizon - t;
    if schedule.steps().iter().any(|&d| d > 0.5 * span) {
        return Err(Error::Invalid("free-term offsets must not exceed (T − t)/2".into()));
    }
    let ext = Extension::constant(history.clone(), ell, horizon)?;
    let setup = Setup { problem, history, ext, ell };
    let order = problem.order();
    let (alpha, gam) = (order.alpha(), order.gamma());
    let m = history.m_bound();
    let k = m + 2.0 * ell.abs();
    let eta = 0.5 * span;
    let lipschitz_constant = (m + ell.abs()) / (gam * eta.powf(1.0 - alpha));
    let beta = beta_fn(alpha, alpha)?;

    let moved: Vec<HistoryData> = schedule
        .steps()
        .iter()
        .map(|&d| setup.ext.history_at(t + d))
        .collect::<Result<_>>()?;

    let samples = thetas
        .par_iter()
        .map(|&theta| {
            let mut s = FreeTermSample {
                theta,
                pointwise: Vec::new(),
                majorant: Vec::new(),
                weighted: Vec::new(),
                weighted_majorant: Vec::new(),
                scaled_quotient: Vec::new(),
            };
            for (h, &delta) in moved.iter().zip(schedule.steps()) {
                let tau = t + delta;
                let rest = horizon - tau;
                s.pointwise.push(setup.gap(h, delta, theta)?);
                s.majorant.push(
                    k / gam * ((theta * rest).powf(alpha - 1.0) - (tau + theta * rest - t).powf(alpha - 1.0)),
                );
                s.weighted.push(abel_weighted(|z| setup.gap(h, delta, z), theta, alpha)?);
                let c = delta / rest;
                // ∫₀^ϑ [ζ^{α−1} − (c + ζ)^{α−1}](ϑ − ζ)^{α−1} dζ
                //   = B[ϑ^{2α−1} − (ϑ + c)^{2α−1}] + ∫₀^c s^{α−1}(ϑ + c − s)^{α−1} ds
                let bracket = -beta * pow_diff(theta + c, theta, 2.0 * alpha - 1.0)
                    + two_sided_moment(0.0, c, theta + c, alpha, alpha);
                s.weighted_majorant.push(k / gam * rest.powf(alpha - 1.0) * bracket);
                s.scaled_quotient.push(theta.powf(1.0 - alpha) * setup.quotient(h, delta, theta)?.abs());
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FreeTermReport { ell, offsets: schedule.steps().to_vec(), m_bound: m, lipschitz_constant, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_quadrature_is_exact_on_model_functions() {
        let alpha = 0.4;
        let theta = 0.7;
        let b = beta_fn(alpha, alpha).unwrap();
        let v = abel_weighted(|z| Ok(z.powf(alpha - 1.0)), theta, alpha).unwrap();
        assert!((v - b * theta.powf(2.0 * alpha - 1.0)).abs() < 1e-12);
        let v = abel_weighted(|_| Ok(1.0), theta, alpha).unwrap();
        assert!((v - theta.powf(alpha) / alpha).abs() < 1e-12);
    }

    #[test]
    fn zero_history_zero_ell_is_identically_zero() {
        let p = Problem::from_expr(0.5, 2.0, "0", 0.0).unwrap();
        let h = HistoryData::constant(1.0, 0.3, 0.0).unwrap();
        let s = FdSchedule::standard(1.0).unwrap();
        let r = free_term_limits(&p, &h, 0.0, &s, &[0.25, 1.0]).unwrap();
        for smp in &r.samples {
            assert!(smp.pointwise.iter().chain(&smp.weighted).all(|&v| v == 0.0));
        }
    }
}
