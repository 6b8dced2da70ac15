//! Cross-module invariants over random inputs.

use std::f64::consts::TAU;

use proptest::prelude::*;
use qlab_core::classical::{self, ClassicalState};
use qlab_core::coherent::{self, Cutoff};
use qlab_core::deformation::DeformationSpec;
use qlab_core::one_level::{self, LevelState};
use qlab_core::thermo::{self, SpectrumConvention};
use qlab_core::wave::{self, Direction, WaveField};
use qlab_core::Complex64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coherent_states_are_eigenvectors(re in -1.5f64..1.5, im in -1.5f64..1.5, lambda in 0.0f64..1.0) {
        let spec = DeformationSpec::q(lambda).unwrap();
        let s = coherent::build_f_coherent(Complex64::new(re, im), &spec, Cutoff::Auto).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        let r = coherent::eigenvalue_residual(&s, s.cutoff() + 2).unwrap();
        prop_assert!(r <= 1e-9, "residual {r}");
    }

    #[test]
    fn one_level_frequency_is_classical(re in -1.0f64..1.0, im in -1.0f64..1.0, lambda in -1.0f64..1.0) {
        let psi = Complex64::new(re, im);
        let w = one_level::nonlinear_frequency(psi, lambda);
        prop_assert!((w - classical::omega_q(psi.norm_sqr(), lambda)).abs() <= 1e-12 * w);
        let run = one_level::evolve_one_level(LevelState::new(psi, lambda), 2.0, 1e-3).unwrap();
        let alpha = classical::exact_alpha(psi, lambda, 2.0);
        prop_assert!((run.exact - alpha).norm() <= 1e-12);
    }

    #[test]
    fn classical_energy_is_a_function_of_intensity(q in -1.0f64..1.0, p in -1.0f64..1.0, lambda in 0.0f64..1.0) {
        let s = ClassicalState::new(q, p, lambda);
        let traj = classical::integrate_eom(s, 1.0, 1e-3).unwrap();
        prop_assert!(traj.energy_drift <= 1e-10);
        prop_assert!(traj.max_q_error <= 1e-9);
    }

    #[test]
    fn wave_invariant_survives_evolution(
        a in 0.1f64..1.0, b in -0.5f64..0.5, c in -0.5f64..0.5, lambda in -1.2f64..1.2,
    ) {
        let field = WaveField::from_fn(64, TAU, lambda, |x| a * x.sin() + b * (3.0 * x).cos(), |x| c * (2.0 * x).cos()).unwrap();
        let run = field.evolve(20.0, 2.5).unwrap();
        prop_assert!(run.mu_drift <= 1e-9, "mu drift {}", run.mu_drift);
        prop_assert!(run.energy_drift <= 1e-9 * field.energy().max(1.0));
        let exact = field.dalembert(20.0);
        let err = run.final_field.phi().iter().zip(&exact).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        prop_assert!(err <= 1e-10, "shape error {err}");
    }

    #[test]
    fn traveling_profiles_keep_shape(a in 0.2f64..1.0, b in -0.4f64..0.4, lambda in 0.0f64..1.0, plus in any::<bool>()) {
        let n = 128;
        let profile: Vec<f64> = (0..n).map(|j| {
            let x = TAU * j as f64 / n as f64;
            a * x.sin() + b * (2.0 * x).cos()
        }).collect();
        let dir = if plus { Direction::Plus } else { Direction::Minus };
        let r = wave::soliton_check(&profile, TAU, dir, lambda, 3.0).unwrap();
        prop_assert!(r.shape_error <= 1e-8);
    }

    #[test]
    fn heat_capacity_two_ways(t in 0.3f64..30.0, lambda in 0.0f64..0.5) {
        for conv in [SpectrumConvention::SymmetricOrdering, SpectrumConvention::NumberOperator] {
            let fd = thermo::specific_heat(t, lambda, conv).unwrap();
            let var = thermo::specific_heat_variance(t, lambda, conv).unwrap();
            prop_assert!((fd - var).abs() <= 1e-5 * var.max(1e-3), "{fd} vs {var}");
        }
    }
}
