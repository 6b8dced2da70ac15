//! Which subcommand reaches each library operation.
//!
//! Arguments may contain `{dir}`, standing for a directory that holds
//! `tiny.suite` (a one-experiment suite) and `ic.csv` (wave Cauchy data).

pub struct Entry {
    pub module: &'static str,
    pub operation: &'static str,
    pub args: &'static [&'static str],
}

const fn e(module: &'static str, operation: &'static str, args: &'static [&'static str]) -> Entry {
    Entry { module, operation, args }
}

const DEFORM_EVAL: &[&str] = &["deform", "eval", "--lambda", "1", "--n-max", "6"];
const OPS_CHECK: &[&str] = &["operators", "check", "--lambda", "1", "--dim", "16"];
const CLASSICAL_SIM: &[&str] = &["classical", "simulate", "--lambda", "0.5", "--t-end", "1", "--dt", "1e-2"];
const CLASSICAL_AMP: &[&str] = &["classical", "amplitude", "--lambda", "1", "--alpha-re", "0.6", "--t", "2"];
const CLASSICAL_BRACKET: &[&str] = &["classical", "bracket", "--lambda", "0.5", "--alpha-re", "0.3"];
const CLASSICAL_MOMENTUM: &[&str] = &["classical", "momentum", "--lambda", "0.1", "--q", "1", "--qdot", "0.5"];
const WAVE_SIM: &[&str] = &["wave", "simulate", "--lambda", "1", "--ic", "{dir}/ic.csv", "--t-end", "5", "--dt", "1"];
const COHERENT_BUILD: &[&str] = &["coherent", "build", "--lambda", "1", "--alpha-re", "0.5"];
const THERMO_TABLE: &[&str] = &["thermo", "table", "--lambda", "0.1", "--t-min", "0.5", "--t-max", "5", "--points", "4"];

pub const REGISTRY: &[Entry] = &[
    e("deformation", "q_number", DEFORM_EVAL),
    e("deformation", "f_of_n", DEFORM_EVAL),
    e("deformation", "big_f", DEFORM_EVAL),
    e("deformation", "big_f_inverse", &["deform", "invert", "--lambda", "1", "--x", "3"]),
    e("deformation", "phi_of_z", DEFORM_EVAL),
    e("deformation", "commutator_function", DEFORM_EVAL),
    e("deformation", "f_factorial", DEFORM_EVAL),
    e("fock", "annihilation", &["operators", "export", "--operator", "a", "--dim", "4"]),
    e("fock", "deformed_annihilation", &["operators", "export", "--operator", "deformed", "--lambda", "1"]),
    e("fock", "check_commutator", OPS_CHECK),
    e("fock", "check_reordering", OPS_CHECK),
    e("fock", "linearoid_roundtrip", OPS_CHECK),
    e("fock", "hamiltonian", &["operators", "export", "--operator", "hamiltonian-deformed", "--lambda", "0.5"]),
    e("fock", "heisenberg_residual", OPS_CHECK),
    e("fock", "quadrature_uncertainty", &["operators", "uncertainty", "--lambda", "0.5", "--n", "1", "--dim", "16"]),
    e("classical", "deform_amplitude", CLASSICAL_BRACKET),
    e("classical", "poisson_bracket_check", CLASSICAL_BRACKET),
    e("classical", "omega_q", CLASSICAL_AMP),
    e("classical", "exact_alpha", CLASSICAL_AMP),
    e("classical", "exact_alpha_deformed", CLASSICAL_AMP),
    e("classical", "exact_q", CLASSICAL_SIM),
    e("classical", "momentum_from_velocity", CLASSICAL_MOMENTUM),
    e("classical", "approx_momentum", CLASSICAL_MOMENTUM),
    e("classical", "integrate_eom", CLASSICAL_SIM),
    e("wave", "fourier_modes", &["wave", "modes", "--n", "16"]),
    e("wave", "solve_mu", WAVE_SIM),
    e("wave", "evolve", WAVE_SIM),
    e("wave", "soliton_check", &["wave", "soliton", "--lambda", "0.5", "--n", "64", "--direction", "minus"]),
    e("one_level", "psi_to_phase_space", &["level", "phase-space", "--re", "0.3", "--im", "-0.2"]),
    e("one_level", "evolve_one_level", &["level", "simulate", "--lambda", "1", "--re", "0.5", "--im", "0.2", "--t-end", "1"]),
    e("coherent", "build_f_coherent", COHERENT_BUILD),
    e("coherent", "eigenvalue_residual", COHERENT_BUILD),
    e("coherent", "scalar_product", &["coherent", "overlap", "--lambda", "1"]),
    e("coherent", "f_from_coefficients", &["coherent", "recover-f", "--coeffs", "1,0.9,0.5,0.2"]),
    e("thermo", "energy_levels", &["thermo", "levels", "--lambda", "0.3", "--convention", "num"]),
    e("thermo", "partition_function", THERMO_TABLE),
    e("thermo", "specific_heat", THERMO_TABLE),
    e("thermo", "mean_occupation", THERMO_TABLE),
    e("thermo", "deformed_planck_approx", THERMO_TABLE),
    e("thermo", "planck_coefficient_check", &["thermo", "planck-check", "--x", "1"]),
    e("thermo", "blue_shift", &["thermo", "blueshift", "--lambda", "1e-3", "--n", "1000"]),
    e("cli", "run", OPS_CHECK),
    e("cli", "suite", &["suite", "--config", "{dir}/tiny.suite"]),
];
