//! Mittag-Leffler values at negative arguments against independent
//! high-precision quadrature of the real integral representation.

use fracsens::special::{mittag_leffler, MLParams};

/// (alpha, beta, z, E_{alpha,beta}(z))
const NEGATIVE_ARGUMENT: &[(f64, f64, f64, f64)] = &[
    (0.3, 1.0, -100.0, 0.007658856222286642),
    (0.3, 1.0, -50.0, 0.015228201501814696),
    (0.3, 1.0, -20.0, 0.03740622621388445),
    (0.3, 1.0, -5.0, 0.13708086902027064),
    (0.3, 1.0, -1.0, 0.45659440832969067),
    (0.3, 0.3, -100.0, 2.284196721428951e-05),
    (0.3, 0.3, -50.0, 9.029779526985106e-05),
    (0.3, 0.3, -20.0, 0.000544624898044652),
    (0.3, 0.3, -5.0, 0.007275100803154912),
    (0.3, 0.3, -1.0, 0.07731679903008967),
    (0.5, 1.0, -100.0, 0.005641613782989433),
    (0.5, 1.0, -50.0, 0.011281536265323773),
    (0.5, 1.0, -20.0, 0.02817434874105132),
    (0.5, 1.0, -5.0, 0.11070463773306863),
    (0.5, 1.0, -1.0, 0.427583576155807),
    (0.5, 0.5, -100.0, 2.8205248812996592e-05),
    (0.5, 0.5, -50.0, 0.00011277028156766193),
    (0.5, 0.5, -20.0, 0.0007026087267299006),
    (0.5, 0.5, -5.0, 0.010666394882413156),
    (0.5, 0.5, -1.0, 0.13660600739194928),
    (0.7, 1.0, -100.0, 0.003369687416305994),
    (0.7, 1.0, -50.0, 0.006793665670383094),
    (0.7, 1.0, -20.0, 0.01739569829160398),
    (0.7, 1.0, -5.0, 0.07756935776476981),
    (0.7, 1.0, -1.0, 0.3996119781155994),
    (0.7, 0.7, -100.0, 2.377720552356958e-05),
    (0.7, 0.7, -50.0, 9.663624446241807e-05),
    (0.7, 0.7, -20.0, 0.0006329972460096978),
    (0.7, 0.7, -5.0, 0.012201124167156126),
    (0.7, 0.7, -1.0, 0.21039334638902368),
    (0.9, 1.0, -100.0, 0.001068972418287089),
    (0.9, 1.0, -50.0, 0.002175353076856976),
    (0.9, 1.0, -20.0, 0.005749507816109113),
    (0.9, 1.0, -5.0, 0.03443132480409842),
    (0.9, 1.0, -1.0, 0.3760660214246419),
    (0.9, 0.9, -100.0, 9.785063588909692e-06),
    (0.9, 0.9, -50.0, 4.053624958092219e-05),
    (0.9, 0.9, -20.0, 0.0002840259574119264),
    (0.9, 0.9, -5.0, 0.010212790452992133),
    (0.9, 0.9, -1.0, 0.30814879777662196),
];

#[test]
fn negative_argument_table() {
    for &(alpha, beta, z, expected) in NEGATIVE_ARGUMENT {
        let got = mittag_leffler(MLParams::new(alpha, beta).unwrap(), z).unwrap();
        let rel = ((got - expected) / expected).abs();
        assert!(rel < 1e-10, "E_{{{alpha},{beta}}}({z}) = {got}, expected {expected} (rel {rel:e})");
    }
}

#[test]
fn beta_above_one_plus_alpha_uses_recurrence() {
    // E_{a,b+a}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z with b = 1.
    for &(alpha, beta, z, lower) in NEGATIVE_ARGUMENT.iter().filter(|r| r.1 == 1.0) {
        let got = mittag_leffler(MLParams::new(alpha, beta + alpha).unwrap(), z).unwrap();
        let expected = (lower - 1.0) / z;
        assert!(((got - expected) / expected).abs() < 1e-9, "alpha {alpha} z {z}: {got} vs {expected}");
    }
}
