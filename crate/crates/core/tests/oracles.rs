//! Frozen reference values from independent 40-digit evaluations.

use approx::assert_relative_eq;
use qlab_core::coherent::{self, Cutoff};
use qlab_core::deformation::{self, DeformationSpec, FactorialConvention};
use qlab_core::thermo::{self, SpectrumConvention::*};
use qlab_core::Complex64;

#[test]
fn partition_sums() {
    let (ln_z, _) = thermo::log_partition(2.0, 0.3, SymmetricOrdering).unwrap();
    assert_relative_eq!(ln_z, 0.524877972851925, max_relative = 1e-13);
    let n = thermo::mean_occupation(2.0, 0.3, SymmetricOrdering).unwrap();
    assert_relative_eq!(n, 0.9754202518340445, max_relative = 1e-13);
    let n = thermo::mean_occupation(5.0, 0.2, NumberOperator).unwrap();
    assert_relative_eq!(n, 2.569199382943876, max_relative = 1e-13);
}

#[test]
fn specific_heat_values() {
    let c = thermo::specific_heat(2.0, 0.3, NumberOperator).unwrap();
    assert_relative_eq!(c, 0.619993285361601, max_relative = 1e-8);
    let c = thermo::specific_heat(50.0, 0.1, SymmetricOrdering).unwrap();
    assert_relative_eq!(c, 0.3124641274453195, max_relative = 1e-8);
    let v = thermo::specific_heat_variance(50.0, 0.1, SymmetricOrdering).unwrap();
    assert_relative_eq!(v, 0.3124641274453195, max_relative = 1e-10);
}

#[test]
fn q_factorial_log() {
    let spec = DeformationSpec::q(1.0).unwrap();
    let v = deformation::ln_f_factorial(20, &spec, FactorialConvention::QNumber).unwrap();
    assert_relative_eq!(v, 192.74150039753582, max_relative = 1e-14);
    let direct = deformation::f_factorial(20, &spec, FactorialConvention::QNumber).unwrap();
    assert_relative_eq!(direct.ln(), v, max_relative = 1e-14);
}

#[test]
fn q_coherent_norm_factor() {
    let alpha = Complex64::new(0.7, 0.0);
    let want = 0.7880695388693189;
    assert_relative_eq!(coherent::q_coherent_normalization(alpha, 0.5, 60).unwrap(), want, max_relative = 1e-13);
    let state = coherent::build_f_coherent(alpha, &DeformationSpec::q(0.5).unwrap(), Cutoff::Auto).unwrap();
    assert_relative_eq!(state.norm_factor(), want, max_relative = 1e-12);
}

#[test]
fn planck_correction_at_unit_x() {
    // the closed form at x = 1, λ = 0.1; its first five digits are -0.060065
    let v = 0.01 * thermo::planck_correction_coefficient(1.0);
    assert!((v - -0.060_065_127_966_367_6).abs() <= 1e-12);
    let approx = thermo::deformed_planck_approx(1.0, 0.1).unwrap();
    assert!((approx - thermo::bose_einstein(1.0) - v).abs() <= 1e-15);
}
