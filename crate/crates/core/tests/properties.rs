//! Randomized invariants, 1000 cases each.

mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decide_is_monotone_in_lambda(case in common::decide_case()) {
        common::check_decide_monotone(case)?;
    }

    #[test]
    fn roc_is_monotone(case in common::roc_case()) {
        common::check_roc_monotone(case)?;
    }

    #[test]
    fn generated_spectra_are_symmetric(case in common::spectrum_case()) {
        common::check_spectrum_symmetric(case)?;
    }

    #[test]
    fn solver_is_scale_covariant(case in common::scaling_case()) {
        common::check_scale_covariance(case)?;
    }
}
