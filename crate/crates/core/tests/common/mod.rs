//! Shared fixtures for the integration tests: the bundled problem corpus and
//! reference values obtained independently of the crate (closed forms and
//! high-precision series evaluated offline).
#![allow(dead_code)]

use std::path::PathBuf;

use fracsens::config::ProblemConfig;

pub const CORPUS: [&str; 6] =
    ["zero_rhs", "constant_history", "linear_autonomous", "manufactured", "sine_rhs", "appendix_history"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.json"))
}

pub fn corpus(name: &str) -> ProblemConfig {
    ProblemConfig::from_path(&corpus_path(name)).unwrap_or_else(|e| panic!("corpus entry {name}: {e}"))
}

/// 1/Γ(1/2) = 1/√π.
pub const INV_GAMMA_HALF: f64 = 0.564_189_583_547_756_3;
/// 2/√π.
pub const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_6;
/// Γ(5/2) = (3/4)√π.
pub const GAMMA_5_2: f64 = 1.329_340_388_179_137;
/// E_{1/2}(1) = e·(1 + erf 1).
pub const ML_HALF_ONE: f64 = 5.008_980_080_762_283;
/// E_{1/2,1/2}(1) = 1/√π + E_{1/2}(1).
pub const ML_HALF_HALF_ONE: f64 = 5.573_169_664_310_04;
/// (1/Γ(1/2))∫₀¹(2 − ξ)^{−1/2}dξ = 2(√2 − 1)/√π.
pub const XBAR_CONSTANT_HISTORY: f64 = 0.467_389_954_510_218_14;

/// Oscillation gaps |h(ϑ_{2i}) − h(ϑ_{2i−1})| for α = 1/2, ϑ* = 1/10 and
/// i = 1..=8, by adaptive quadrature at 30 digits.
pub const APPENDIX_GAPS: [f64; 8] = [
    0.145_054_391_125_716_5,
    0.147_022_265_624_062_08,
    0.039_376_431_735_907_994,
    0.050_870_118_482_203_043,
    0.106_146_914_629_319_73,
    0.165_391_147_851_479_86,
    0.219_692_621_069_136_99,
    0.267_877_377_647_037_44,
];

/// Common lower bound frozen for the gaps with i ∈ {3, 4, 5}.
pub const APPENDIX_GAP_FLOOR: f64 = 0.039;
