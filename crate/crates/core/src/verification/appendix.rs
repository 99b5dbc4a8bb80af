//! A history whose derivative oscillates on factorially shrinking blocks, so
//! that ϑ^{1−α}p̄(ϑ) stays bounded but has no limit as ϑ → 0⁺.
//!
//! With T = 2, t = 1, ϑ_i = 1/i! and blocks Δ_i = (ϑ_{i+1}/ϑ*, ϑ_i/ϑ*], the
//! control ℓ equals 1 on even blocks and 0 on odd ones, and the history
//! derivative is ℓ_w(ξ) = ℓ(1 − ξ). Then
//! ϑ^{1−α}p̄(ϑ) = −(1 − α)(1 − ϑ)h(ϑ)/Γ(α) with
//! h(ϑ) = ∫₀^{1/ϑ} ℓ(ϑu)(1 + u)^{α−2} du, evaluated block by block from the
//! antiderivative −(1 + u)^{α−1}/(1 − α).

use crate::error::{Error, Result};
use crate::kernel::pow_diff;
use crate::problem::{CaputoProfile, HistoryData, Order};
use crate::special::ln_gamma;

/// Largest oscillation index i (the gap uses ϑ_{2i} = 1/(2i)!).
pub const MAX_INDEX: usize = 8;

/// Fraction of the admissible threshold used for ϑ*.
pub const THETA_STAR_FRACTION: f64 = 0.8;

/// ϑ_i = 1/i!.
pub fn factorial_node(i: usize) -> f64 {
    (-ln_gamma(i as f64 + 1.0).expect("positive argument")).exp()
}

/// The admissible bound on ϑ*: ∫₀^{1/ϑ*} > 2∫_{1/ϑ*}^∞ for (1 + u)^{α−2}
/// holds iff ϑ* < 1/(3^{1/(1−α)} − 1).
pub fn theta_star_threshold(alpha: f64) -> f64 {
    1.0 / (3f64.powf(1.0 / (1.0 - alpha)) - 1.0)
}

/// ∫ₐᵇ (1 + u)^{α−2} du for 0 ≤ a ≤ b ≤ ∞.
fn block_integral(a: f64, b: f64, alpha: f64) -> f64 {
    if b.is_infinite() {
        return (1.0 + a).powf(alpha - 1.0) / (1.0 - alpha);
    }
    if b <= a {
        return 0.0;
    }
    -pow_diff(1.0 + b, 1.0 + a, alpha - 1.0) / (1.0 - alpha)
}

/// The oscillating control ℓ and the function h built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatingControl {
    pub alpha: f64,
    pub theta_star: f64,
    /// Value of ℓ on the even blocks (1 in the construction, 0 for the
    /// degenerate control).
    pub even_value: f64,
}

impl OscillatingControl {
    pub fn new(order: &Order) -> Self {
        let alpha = order.alpha();
        Self { alpha, theta_star: THETA_STAR_FRACTION * theta_star_threshold(alpha), even_value: 1.0 }
    }

    /// Block Δ_i as an interval of ℓ's argument.
    fn block(&self, i: usize) -> (f64, f64) {
        (factorial_node(i + 1) / self.theta_star, factorial_node(i) / self.theta_star)
    }

    /// h(ϑ) = ∫₀^{1/ϑ} ℓ(ϑu)(1 + u)^{α−2} du for ϑ ∈ (0, 1].
    pub fn h(&self, theta: f64) -> f64 {
        if self.even_value == 0.0 {
            return 0.0;
        }
        let cap = 1.0 / theta;
        let mut sum = 0.0;
        for i in (2..).step_by(2) {
            let (lo, hi) = self.block(i);
            let (a, b) = (lo / theta, (hi / theta).min(cap));
            if b < 1e-18 {
                break;
            }
            sum += block_integral(a, b, self.alpha);
        }
        self.even_value * sum
    }

    /// The history on [0, 1] with derivative ℓ(1 − ξ), keeping the blocks
    /// Δ_i with i ≤ `last_block` (the rest of (0, ϑ_{last+1}/ϑ*] has ℓ = 0).
    pub fn history(&self, last_block: usize) -> Result<HistoryData> {
        // Breaks in ξ = 1 − (block edge), increasing.
        let mut edges = vec![0.0];
        let mut values = Vec::new();
        let first = (1..).find(|&i| self.block(i).0 < 1.0).expect("blocks shrink to 0");
        let value_of = |i: usize| if i % 2 == 0 { self.even_value } else { 0.0 };
        // Piece ξ ∈ [0, 1 − lo_first] lies in block `first` (argument ≤ 1).
        for i in first..=last_block {
            let lo = self.block(i).0;
            edges.push(1.0 - lo);
            values.push(value_of(i));
        }
        edges.push(1.0);
        values.push(0.0);
        let mut merged_edges = vec![edges[0]];
        let mut merged_values: Vec<f64> = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if edges[k + 1] <= *merged_edges.last().unwrap() {
                continue;
            }
            merged_edges.push(edges[k + 1]);
            merged_values.push(*v);
        }
        let lw = CaputoProfile::piecewise_constant(&merged_edges, &merged_values)?;
        HistoryData::new(1.0, 0.0, lw, 0.0)
    }

    /// Lower bound on the gap:
    /// ∫_{1/((2i+1)ϑ*)}^{1/ϑ*} − 2∫_{1/ϑ*}^∞ − ∫₀^{1/(2iϑ*)}.
    pub fn gap_lower_bound(&self, i: usize) -> f64 {
        let (a, s) = (self.alpha, self.theta_star);
        let i = i as f64;
        block_integral(1.0 / ((2.0 * i + 1.0) * s), 1.0 / s, a)
            - 2.0 * block_integral(1.0 / s, f64::INFINITY, a)
            - block_integral(0.0, 1.0 / (2.0 * i * s), a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub alpha: f64,
    pub theta_star: f64,
    pub threshold: f64,
    pub indices: Vec<usize>,
    /// |h(ϑ_{2i}) − h(ϑ_{2i−1})| for each index.
    pub gaps: Vec<f64>,
    /// The lower bound of the estimate for each index (may be negative,
    /// i.e. vacuous, below i*).
    pub gap_bounds: Vec<f64>,
    /// First i with a positive bound and ϑ_{2i−1} < ϑ*, and the bound there.
    pub i_star: Option<usize>,
    pub eps_star: Option<f64>,
    /// (ϑ_k, ϑ_k^{1−α}p̄(ϑ_k)) for k = 1..=2·max index.
    pub scaled_pbar: Vec<(f64, f64)>,
    /// M/(Γ(α)(T − t)^{1−α}) with M = 1, T − t = 1.
    pub pbar_bound: f64,
}

impl AppendixReport {
    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn pbar_bounded(&self) -> bool {
        self.scaled_pbar.iter().all(|(_, v)| v.abs() <= self.pbar_bound)
    }
}

/// Search limit for i*.
const I_STAR_SEARCH: usize = 100_000;

/// Oscillation gaps for i in `i_range` (inclusive) and the associated bounds.
pub fn appendix_example(order: &Order, i_range: (usize, usize)) -> Result<AppendixReport> {
    let (lo, hi) = i_range;
    if lo == 0 || lo > hi {
        return Err(Error::Invalid(format!("index range must satisfy 1 <= lo <= hi, got ({lo}, {hi})")));
    }
    if hi > MAX_INDEX {
        return Err(Error::OutOfRange(format!(
            "index {hi} exceeds {MAX_INDEX}: 1/(2i)! is below double-precision resolution"
        )));
    }
    let ctrl = OscillatingControl::new(order);
    let alpha = order.alpha();
    let indices: Vec<usize> = (lo..=hi).collect();
    let gaps = indices
        .iter()
        .map(|&i| (ctrl.h(factorial_node(2 * i)) - ctrl.h(factorial_node(2 * i - 1))).abs())
        .collect();
    let gap_bounds = indices.iter().map(|&i| ctrl.gap_lower_bound(i)).collect();
    let i_star = (1..=I_STAR_SEARCH)
        .find(|&i| ctrl.gap_lower_bound(i) > 0.0 && factorial_node(2 * i - 1) < ctrl.theta_star);
    let eps_star = i_star.map(|i| ctrl.gap_lower_bound(i));
    let gam = order.gamma();
    let scaled_pbar = (1..=2 * hi)
        .map(|k| {
            let th = factorial_node(k);
            (th, -(1.0 - alpha) * (1.0 - th) * ctrl.h(th) / gam)
        })
        .collect();
    Ok(AppendixReport {
        alpha,
        theta_star: ctrl.theta_star,
        threshold: theta_star_threshold(alpha),
        indices,
        gaps,
        gap_bounds,
        i_star,
        eps_star,
        scaled_pbar,
        pbar_bound: 1.0 / gam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_for_half() {
        assert!((theta_star_threshold(0.5) - 0.125).abs() < 1e-15);
        let c = OscillatingControl::new(&Order::new(0.5).unwrap());
        assert!((c.theta_star - 0.1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_control_is_zero() {
        let mut c = OscillatingControl::new(&Order::new(0.5).unwrap());
        c.even_value = 0.0;
        assert_eq!(c.h(0.01), 0.0);
    }

    #[test]
    fn guard_on_index() {
        let o = Order::new(0.5).unwrap();
        assert!(appendix_example(&o, (3, 9)).is_err());
        assert!(appendix_example(&o, (0, 2)).is_err());
    }

    #[test]
    fn history_has_factorial_breaks() {
        let c = OscillatingControl::new(&Order::new(0.5).unwrap());
        let h = c.history(15).unwrap();
        // Block 3 starts at argument 10/24, i.e. ξ = 1 − 10/24.
        assert!((h.lw().pieces()[0].b - (1.0 - 10.0 / 24.0)).abs() < 1e-15);
        assert_eq!(h.lw().value(0.1), Some(0.0));
        assert_eq!(h.lw().value(0.7), Some(1.0));
    }
}
