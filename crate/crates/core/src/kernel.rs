//! Product-integration weights for the Abel kernel (θ − ζ)^{α−1} and the
//! two-sided kernel ζ^{α−1}(θ − ζ)^{α−1}.
//!
//! All kernel moments are exact (closed form or rapidly convergent series);
//! only the regular factor of the integrand is interpolated.

use crate::problem::Mesh;

/// `hi^q − lo^q` for `hi ≥ lo ≥ 0`, accurate when `lo` is close to `hi`.
pub fn pow_diff(hi: f64, lo: f64, q: f64) -> f64 {
    if lo <= 0.0 {
        return hi.powf(q);
    }
    hi.powf(q) * -((q * ((lo - hi) / hi).ln_1p()).exp_m1())
}

/// ∫₀¹ (m + v)^{α−1} dv for m ≥ 0.
pub fn abel_m0(m: f64, alpha: f64) -> f64 {
    pow_diff(m + 1.0, m, alpha) / alpha
}

/// ∫₀¹ v (m + v)^{α−1} dv for m ≥ 0.
pub fn abel_m1(m: f64, alpha: f64) -> f64 {
    if m < 16.0 {
        // Integration by parts; the cancellation is at most a factor of ~16.
        (m + 1.0).powf(alpha) / alpha - pow_diff(m + 1.0, m, alpha + 1.0) / (alpha * (alpha + 1.0))
    } else {
        // m^{α−1} Σ_j C(α−1, j) m^{−j} / (j + 2)
        let inv = 1.0 / m;
        let mut coef = 1.0;
        let mut pw = 1.0;
        let mut sum = 0.0;
        for j in 0..60 {
            let term = coef * pw / (j as f64 + 2.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            coef *= (alpha - 1.0 - j as f64) / (j as f64 + 1.0);
            pw *= inv;
        }
        m.powf(alpha - 1.0) * sum
    }
}

/// ∫ over u ∈ [u0, u1] of ℓ(u)·u^p, where ℓ is linear with ℓ(u0) = `at_u0`
/// and ℓ(u1) = `at_u1`. Requires p > −1 or u0 > 0.
pub fn linear_piece_moment(u0: f64, u1: f64, at_u0: f64, at_u1: f64, p: f64) -> f64 {
    let width = u1 - u0;
    if width <= 0.0 {
        return 0.0;
    }
    // M0 = ∫ u^p du is only needed when it is multiplied by something nonzero;
    // this keeps the p ≤ −1, u0 = 0 case finite when ℓ(u0) = 0.
    let needs_m0 = at_u0 != 0.0 || (u0 > 0.0 && at_u0 != at_u1);
    let m0 = if needs_m0 { pow_diff(u1, u0, p + 1.0) / (p + 1.0) } else { 0.0 };
    let mut total = if at_u0 != 0.0 { at_u0 * m0 } else { 0.0 };
    if at_u0 != at_u1 {
        // ∫ (u − u0) u^p du = MU − u0·M0
        let mu = pow_diff(u1, u0, p + 2.0) / (p + 2.0);
        let shifted = if u0 > 0.0 { mu - u0 * m0 } else { mu };
        total += (at_u1 - at_u0) / width * shifted;
    }
    total
}

/// ∫ₐᵇ ζ^{e1−1} (θ − ζ)^{e2−1} dζ for 0 ≤ a < b ≤ θ and e1, e2 > 0.
///
/// The interval is split at θ/2; on each half the non-singular factor is
/// expanded in a binomial series in a ratio ≤ 1/2.
pub fn two_sided_moment(a: f64, b: f64, theta: f64, e1: f64, e2: f64) -> f64 {
    debug_assert!(0.0 <= a && a < b && b <= theta * (1.0 + 1e-14));
    let b = b.min(theta);
    let mid = 0.5 * theta;
    let mut total = 0.0;
    if a < mid {
        total += near_origin_moment(a, b.min(mid), theta, e1, e2);
    }
    if b > mid {
        // Reflect ζ → θ − ζ.
        total += near_origin_moment(theta - b, theta - a.max(mid), theta, e2, e1);
    }
    total
}

/// ∫ₐᵇ ζ^{e1−1}(θ−ζ)^{e2−1} dζ with 0 ≤ a < b ≤ θ/2.
fn near_origin_moment(a: f64, b: f64, theta: f64, e1: f64, e2: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let xa = a / theta;
    let xb = b / theta;
    // (1 − x)^{e2−1} = Σ c_j x^j, c_{j+1} = c_j (j + 1 − e2)/(j + 1).
    let ln_ratio = if xa > 0.0 { ((xa - xb) / xb).ln_1p() } else { f64::NEG_INFINITY };
    let mut coef = 1.0;
    let mut xb_pow = xb.powf(e1);
    let mut sum = 0.0;
    for j in 0..400 {
        let q = e1 + j as f64;
        let diff = if xa > 0.0 { xb_pow * -((q * ln_ratio).exp_m1()) } else { xb_pow };
        let term = coef * diff / q;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && j > 2 {
            break;
        }
        coef *= (j as f64 + 1.0 - e2) / (j as f64 + 1.0);
        xb_pow *= xb;
    }
    theta.powf(e1 + e2 - 1.0) * sum
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Product-trapezoid and product-rectangle weights for
/// ∫₀^{θ_n} g(ζ)(θ_n − ζ)^{α−1} dζ with g piecewise linear (resp. constant)
/// on the mesh cells.
#[derive(Debug, Clone)]
pub struct AbelQuadrature {
    alpha: f64,
    nodes: Vec<f64>,
    uniform: Option<UniformAbelTables>,
}

#[derive(Debug, Clone)]
struct UniformAbelTables {
    scale: f64,
    m0: Vec<f64>,
    m1: Vec<f64>,
}

impl AbelQuadrature {
    pub fn new(alpha: f64, mesh: &Mesh) -> Self {
        let nodes = mesh.nodes().to_vec();
        let uniform = mesh.step().map(|h| {
            let n = mesh.n();
            UniformAbelTables {
                scale: h.powf(alpha),
                m0: (0..=n).map(|m| abel_m0(m as f64, alpha)).collect(),
                m1: (0..=n).map(|m| abel_m1(m as f64, alpha)).collect(),
            }
        });
        Self { alpha, nodes, uniform }
    }

    /// Like [`Self::new`] but evaluating every weight from its closed form,
    /// without the uniform-mesh tables.
    pub fn exact_moments(alpha: f64, mesh: &Mesh) -> Self {
        Self::from_nodes(alpha, mesh.nodes())
    }

    /// Rule on arbitrary increasing nodes starting at 0 (e.g. physical
    /// offsets τ_j − t).
    pub fn from_nodes(alpha: f64, nodes: &[f64]) -> Self {
        Self { alpha, nodes: nodes.to_vec(), uniform: None }
    }

    /// Weights (left node, right node) of cell k for target node n.
    fn cell_weights(&self, k: usize, n: usize) -> (f64, f64) {
        match &self.uniform {
            Some(t) => {
                let m = n - k - 1;
                (t.scale * t.m1[m], t.scale * (t.m0[m] - t.m1[m]))
            }
            None => {
                let width = self.nodes[k + 1] - self.nodes[k];
                let m = (self.nodes[n] - self.nodes[k + 1]) / width;
                let s = width.powf(self.alpha);
                let m1 = abel_m1(m, self.alpha);
                (s * m1, s * (abel_m0(m, self.alpha) - m1))
            }
        }
    }

    /// Returns (Σ_{j<n} w_{n,j} g_j, w_{n,n}). Only g[0..n] is read.
    pub fn trapezoid(&self, n: usize, g: &[f64]) -> (f64, f64) {
        if n == 0 {
            return (0.0, 0.0);
        }
        let mut sum = 0.0;
        let mut carry = 0.0; // right-node weight of the previous cell
        for k in 0..n {
            let (wl, wr) = self.cell_weights(k, n);
            sum += (carry + wl) * g[k];
            carry = wr;
        }
        (sum, carry)
    }

    /// Full weight vector w_{n,0..=n} of the product trapezoid rule.
    pub fn trapezoid_weights(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n + 1];
        for k in 0..n {
            let (wl, wr) = self.cell_weights(k, n);
            w[k] += wl;
            w[k + 1] += wr;
        }
        w
    }

    /// Σ_{j<n} b_{n,j} g_j for the product rectangle (left-point) rule.
    pub fn rectangle(&self, n: usize, g: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (k, gk) in g.iter().enumerate().take(n) {
            let w = match &self.uniform {
                Some(t) => t.scale * t.m0[n - k - 1],
                None => {
                    let width = self.nodes[k + 1] - self.nodes[k];
                    let m = (self.nodes[n] - self.nodes[k + 1]) / width;
                    width.powf(self.alpha) * abel_m0(m, self.alpha)
                }
            };
            sum += w * gk;
        }
        sum
    }
}

const GL_POINTS: usize = 10;

/// Weights for ∫₀^{θ_n} g(ζ) ζ^{α−1}(θ_n − ζ)^{α−1} dζ with g interpolated
/// linearly in the variable v = ζ^α on each cell. Interpolating in v rather
/// than ζ captures the ζ^α behaviour of the regular factor near the origin.
#[derive(Debug, Clone)]
pub struct TwoSidedQuadrature {
    alpha: f64,
    nodes: Vec<f64>,
    uniform: Option<UniformTwoSidedTables>,
}

#[derive(Debug, Clone)]
struct UniformTwoSidedTables {
    /// h^{2α−1}
    scale: f64,
    /// ω_i (k + u_i)^{α−1}, per cell k.
    pre: Vec<[f64; GL_POINTS]>,
    /// v-basis weight of the right node at GL point i of cell k.
    phi_right: Vec<[f64; GL_POINTS]>,
    /// (m + 1 − u_i)^{α−1}, per distance m.
    far: Vec<[f64; GL_POINTS]>,
}

impl TwoSidedQuadrature {
    pub fn new(alpha: f64, mesh: &Mesh) -> Self {
        let nodes = mesh.nodes().to_vec();
        let uniform = mesh.step().map(|h| {
            let n = mesh.n();
            let (u, w) = gauss_legendre_unit(GL_POINTS);
            let mut pre = Vec::with_capacity(n);
            let mut phi_right = Vec::with_capacity(n);
            let mut far = Vec::with_capacity(n);
            for k in 0..n {
                let kf = k as f64;
                let dv = pow_diff(kf + 1.0, kf, alpha);
                let mut p = [0.0; GL_POINTS];
                let mut phi = [0.0; GL_POINTS];
                let mut q = [0.0; GL_POINTS];
                for i in 0..GL_POINTS {
                    p[i] = w[i] * (kf + u[i]).powf(alpha - 1.0);
                    phi[i] = pow_diff(kf + u[i], kf, alpha) / dv;
                    q[i] = (kf + 1.0 - u[i]).powf(alpha - 1.0);
                }
                pre.push(p);
                phi_right.push(phi);
                far.push(q);
            }
            UniformTwoSidedTables { scale: h.powf(2.0 * alpha - 1.0), pre, phi_right, far }
        });
        Self { alpha, nodes, uniform }
    }

    /// Like [`Self::new`] but with exact moments on every cell instead of
    /// tabulated Gauss–Legendre sums on interior cells.
    pub fn exact_moments(alpha: f64, mesh: &Mesh) -> Self {
        Self { alpha, nodes: mesh.nodes().to_vec(), uniform: None }
    }

    /// Exact-moment weights (left node, right node) of cell k for target n,
    /// in the coordinates of `nodes` (unit-spaced for uniform meshes).
    fn moment_weights(&self, k: usize, n: usize) -> (f64, f64) {
        let a = self.alpha;
        let (zl, zr, theta) = match self.uniform {
            Some(_) => (k as f64, (k + 1) as f64, n as f64),
            None => (self.nodes[k], self.nodes[k + 1], self.nodes[n]),
        };
        let i0 = two_sided_moment(zl, zr, theta, a, a);
        let i1 = two_sided_moment(zl, zr, theta, 2.0 * a, a);
        let vl = zl.powf(a);
        let vr = zr.powf(a);
        let dv = pow_diff(zr, zl, a);
        ((vr * i0 - i1) / dv, (i1 - vl * i0) / dv)
    }

    /// Start a convolution whose regular factor values are pushed node by node.
    pub fn convolution(&self) -> TwoSidedConvolution<'_> {
        TwoSidedConvolution { quad: self, g: Vec::new(), cells: Vec::new() }
    }
}

/// Incremental evaluation of the two-sided product rule along a mesh.
pub struct TwoSidedConvolution<'a> {
    quad: &'a TwoSidedQuadrature,
    g: Vec<f64>,
    /// GL samples of the interpolated regular factor per completed cell.
    cells: Vec<[f64; GL_POINTS]>,
}

impl TwoSidedConvolution<'_> {
    /// Append the regular-factor value at the next node.
    pub fn push(&mut self, value: f64) {
        self.g.push(value);
        let len = self.g.len();
        if len >= 2 {
            if let Some(t) = &self.quad.uniform {
                let k = len - 2;
                let (gl, gr) = (self.g[k], self.g[k + 1]);
                let mut cell = [0.0; GL_POINTS];
                for (i, c) in cell.iter_mut().enumerate() {
                    let phi = t.phi_right[k][i];
                    *c = t.pre[k][i] * (gl * (1.0 - phi) + gr * phi);
                }
                self.cells.push(cell);
            }
        }
    }

    /// For target node n = number of pushed values, returns
    /// (contribution of the known values, weight of the unknown value g_n).
    pub fn step(&self) -> (f64, f64) {
        let n = self.g.len();
        assert!(n >= 1, "step requires at least one pushed value");
        let quad = self.quad;
        let (last_l, last_r) = quad.moment_weights(n - 1, n);
        let mut known = last_l * self.g[n - 1];
        match &quad.uniform {
            Some(t) => {
                if n >= 2 {
                    let (w0l, w0r) = quad.moment_weights(0, n);
                    known += w0l * self.g[0] + w0r * self.g[1];
                }
                for k in 1..n.saturating_sub(1) {
                    let far = &t.far[n - k - 1];
                    let cell = &self.cells[k];
                    let mut s = 0.0;
                    for i in 0..GL_POINTS {
                        s += cell[i] * far[i];
                    }
                    known += s;
                }
                (t.scale * known, t.scale * last_r)
            }
            None => {
                for k in 0..n - 1 {
                    let (wl, wr) = quad.moment_weights(k, n);
                    known += wl * self.g[k] + wr * self.g[k + 1];
                }
                (known, last_r)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta_fn;
    use approx::assert_relative_eq;

    #[test]
    fn pow_diff_is_accurate_for_close_arguments() {
        let v = pow_diff(1.0 + 1e-10, 1.0, 0.5);
        assert_relative_eq!(v, 0.5e-10, max_relative = 1e-8);
        assert_relative_eq!(pow_diff(4.0, 1.0, 0.5), 1.0, max_relative = 1e-15);
        assert_relative_eq!(pow_diff(4.0, 0.0, 0.5), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn m1_branches_agree() {
        for &alpha in &[0.3, 0.5, 0.9] {
            for &m in &[15.9, 16.0, 40.0, 1000.0] {
                let closed = (m + 1.0f64).powf(alpha) / alpha
                    - pow_diff(m + 1.0, m, alpha + 1.0) / (alpha * (alpha + 1.0));
                assert_relative_eq!(abel_m1(m, alpha), closed, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn linear_moment_matches_closed_form() {
        // ∫_1^3 (2u) u^{-1/2} du with ℓ(1) = 2, ℓ(3) = 6.
        let v = linear_piece_moment(1.0, 3.0, 2.0, 6.0, -0.5);
        let exact = 2.0 * (2.0 / 3.0) * (3f64.powf(1.5) - 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn two_sided_full_interval_is_beta() {
        for &(e1, e2, theta) in &[(0.5, 0.5, 1.0_f64), (0.3, 0.7, 2.0), (0.6, 1.2, 0.25)] {
            let exact = theta.powf(e1 + e2 - 1.0) * beta_fn(e1, e2).unwrap();
            assert_relative_eq!(two_sided_moment(0.0, theta, theta, e1, e2), exact, max_relative = 1e-13);
            let split = two_sided_moment(0.0, 0.3 * theta, theta, e1, e2)
                + two_sided_moment(0.3 * theta, 0.8 * theta, theta, e1, e2)
                + two_sided_moment(0.8 * theta, theta, theta, e1, e2);
            assert_relative_eq!(split, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit(GL_POINTS);
        for deg in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            assert_relative_eq!(s, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn trapezoid_integrates_linear_functions_exactly() {
        let alpha = 0.4;
        for mesh in [Mesh::uniform(16).unwrap(), Mesh::graded(16, 2.5).unwrap()] {
            let quad = AbelQuadrature::new(alpha, &mesh);
            let n = 11;
            let theta = mesh.nodes()[n];
            let g: Vec<f64> = mesh.nodes().iter().map(|z| 2.0 + 3.0 * z).collect();
            let (sum, diag) = quad.trapezoid(n, &g);
            let exact = 2.0 * theta.powf(alpha) / alpha
                + 3.0 * theta.powf(alpha + 1.0) * beta_fn(2.0, alpha).unwrap();
            assert_relative_eq!(sum + diag * g[n], exact, max_relative = 1e-13);
            let w = quad.trapezoid_weights(n);
            let s2: f64 = w.iter().zip(&g).map(|(w, g)| w * g).sum();
            assert_relative_eq!(s2, exact, max_relative = 1e-13);
            let rect = quad.rectangle(n, &vec![1.0; n]);
            assert_relative_eq!(rect, theta.powf(alpha) / alpha, max_relative = 1e-13);
        }
    }

    #[test]
    fn two_sided_rule_is_exact_in_v_basis() {
        // g(ζ) = 1 + ζ^α is linear in v = ζ^α, so the rule is exact.
        let alpha: f64 = 0.35;
        for mesh in [Mesh::uniform(32).unwrap(), Mesh::graded(32, 2.0).unwrap()] {
            let quad = TwoSidedQuadrature::new(alpha, &mesh);
            let mut conv = quad.convolution();
            for n in 1..=mesh.n() {
                let z = mesh.nodes()[n - 1];
                conv.push(1.0 + z.powf(alpha));
                let (known, w) = conv.step();
                let theta = mesh.nodes()[n];
                let value = known + w * (1.0 + theta.powf(alpha));
                let exact = theta.powf(2.0 * alpha - 1.0) * beta_fn(alpha, alpha).unwrap()
                    + theta.powf(3.0 * alpha - 1.0) * beta_fn(2.0 * alpha, alpha).unwrap();
                assert_relative_eq!(value, exact, max_relative = 1e-12);
            }
        }
    }
}
