//! Argument grammar and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlab_core::classical::{self, ClassicalState};
use qlab_core::coherent::{self, Cutoff};
use qlab_core::deformation::{self, DeformationSpec, FactorialConvention};
use qlab_core::fock::{self, FockState, HamiltonianForm};
use qlab_core::one_level::{self, LevelState};
use qlab_core::par::Execution;
use qlab_core::thermo::{self, SpectrumConvention};
use qlab_core::wave::{self, Direction, EvolveOptions, Scheme, WaveField};
use qlab_core::Complex64;
use serde_json::json;

use crate::error::{exit, CliError};
use crate::output::{self, Format, Output, Table};
use crate::suite;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Parser)]
#[command(name = "qlab", version, about = "Deformed oscillator experiments", allow_negative_numbers = true)]
pub struct Cli {
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; tables default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized experiment inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deformation functions.
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Truncated Fock-space operators.
    #[command(subcommand)]
    Operators(OperatorsCmd),
    /// The classical q-oscillator.
    #[command(subcommand)]
    Classical(ClassicalCmd),
    /// The deformed wave equation on a periodic domain.
    #[command(subcommand)]
    Wave(WaveCmd),
    /// One-level nonlinear Schrödinger dynamics.
    #[command(subcommand)]
    Level(LevelCmd),
    /// f-coherent states.
    #[command(subcommand)]
    Coherent(CoherentCmd),
    /// Thermodynamics of the q-oscillator.
    #[command(subcommand)]
    Thermo(ThermoCmd),
    /// Run an experiment suite; exits 1 if any experiment fails.
    #[command(allow_negative_numbers = true)]
    Suite(SuiteArgs),
}

/// A q-deformation `--lambda` or a tabulated `f` from `--table`.
#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long, conflicts_with = "table")]
    pub lambda: Option<f64>,
    /// CSV of `f(n)` values, one per line or in an `f` column.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

impl SpecArgs {
    fn spec(&self) -> Result<DeformationSpec, CliError> {
        Ok(match &self.table {
            Some(path) => DeformationSpec::Custom(deformation::CustomTable::from_csv_path(path)?),
            None => DeformationSpec::q(self.lambda.unwrap_or(0.0))?,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum DeformCmd {
    /// Tabulate f, F, F⁻¹(F), φ and factorials for n = 0..=n-max.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Solve F(n) = x for real n.
    #[command(allow_negative_numbers = true)]
    Invert {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        x: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OperatorKind {
    /// Undeformed `a`.
    A,
    /// Undeformed `a†`.
    ADag,
    /// `A = a f(n̂)`.
    Deformed,
    /// `A†`.
    DeformedDag,
    /// `n̂`.
    Number,
    /// `n̂ + ½`.
    Hamiltonian,
    /// `F⁻¹(A†A) + ½`.
    HamiltonianDeformed,
}

#[derive(Debug, Subcommand)]
pub enum OperatorsCmd {
    /// Residuals of the operator identities.
    #[command(allow_negative_numbers = true)]
    Check {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = fock::DEFAULT_DIM)]
        dim: usize,
    },
    /// Quadrature spreads in the number state |n⟩.
    #[command(allow_negative_numbers = true)]
    Uncertainty {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = fock::DEFAULT_DIM)]
        dim: usize,
    },
    /// Dump an operator matrix as row-major `[re, im]` pairs.
    #[command(allow_negative_numbers = true)]
    Export {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        operator: OperatorKind,
        #[arg(long, default_value_t = 8)]
        dim: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCmd {
    /// RK4 trajectory next to the closed-form solution.
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        q0: f64,
        #[arg(long, default_value_t = 0.0)]
        p0: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Emit every k-th sample.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Momentum from position and velocity: exact and expanded.
    #[command(allow_negative_numbers = true)]
    Momentum {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        qdot: f64,
    },
    /// Deformed amplitude and the Poisson bracket check.
    #[command(allow_negative_numbers = true)]
    Bracket {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha_im: f64,
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
    },
    /// Closed-form amplitudes α(t) and α_q(t).
    #[command(allow_negative_numbers = true)]
    Amplitude {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha_im: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Spectral,
    Leapfrog,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Grid size; taken from the file when `--ic` is given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = TWO_PI)]
    pub length: f64,
    /// Cauchy data as CSV with columns x, phi, pi.
    #[arg(long)]
    pub ic: Option<PathBuf>,
}

impl GridArgs {
    fn field(&self) -> Result<WaveField, CliError> {
        match &self.ic {
            Some(path) => {
                let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let field = WaveField::from_csv_reader(file, self.length, self.lambda)?;
                if let Some(n) = self.n {
                    if n != field.grid_size() {
                        return Err(CliError::Usage(format!(
                            "--n {n} does not match the {} rows of {}",
                            field.grid_size(),
                            path.display()
                        )));
                    }
                }
                Ok(field)
            }
            None => {
                let k = TWO_PI / self.length;
                Ok(WaveField::from_fn(
                    self.n.unwrap_or(256),
                    self.length,
                    self.lambda,
                    |x| (k * x).sin() + 0.4 * (3.0 * k * x).cos() + 0.2 * (5.0 * k * x).sin(),
                    |x| 0.3 * (2.0 * k * x).cos() - 0.1 * (4.0 * k * x).sin(),
                )?)
            }
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum WaveCmd {
    /// Evolve Cauchy data; snapshots as CSV plus a summary.
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Output spacing; defaults to t-end/10.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Spectral)]
        scheme: SchemeArg,
    },
    /// Fourier modes of the Cauchy data.
    #[command(allow_negative_numbers = true)]
    Modes {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Shape preservation of a traveling profile.
    #[command(allow_negative_numbers = true)]
    Soliton {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = TWO_PI)]
        length: f64,
        #[arg(long, default_value_t = 7.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = DirectionArg::Plus)]
        direction: DirectionArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum LevelCmd {
    /// RK4 evolution of the nonlinear one-level equation.
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long = "re", default_value_t = 1.0)]
        re: f64,
        #[arg(long = "im", default_value_t = 0.0)]
        im: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Map ψ to classical (q, p).
    #[command(allow_negative_numbers = true)]
    PhaseSpace {
        #[arg(long = "re")]
        re: f64,
        #[arg(long = "im")]
        im: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoherentCmd {
    /// Number-basis coefficients of |α⟩_f.
    #[command(allow_negative_numbers = true)]
    Build {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha_im: f64,
        /// Highest kept number state; chosen automatically when absent.
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// ⟨α|β⟩ for two f-coherent states.
    #[command(allow_negative_numbers = true)]
    Overlap {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha_im: f64,
        #[arg(long, default_value_t = 0.0)]
        beta_re: f64,
        #[arg(long, default_value_t = 1.0)]
        beta_im: f64,
    },
    /// Recover f(n) from the series coefficients C_0, C_1, ...
    #[command(allow_negative_numbers = true)]
    RecoverF {
        #[arg(long, value_delimiter = ',', required = true)]
        coeffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    /// `(F(n) + F(n+1))/2`.
    Sym,
    /// `F(n)`.
    Num,
}

impl From<ConventionArg> for SpectrumConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Sym => SpectrumConvention::SymmetricOrdering,
            ConventionArg::Num => SpectrumConvention::NumberOperator,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ThermoCmd {
    /// Energy levels E_0..E_{n-max}.
    #[command(allow_negative_numbers = true)]
    Levels {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Sym)]
        convention: ConventionArg,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
    /// Z, ⟨n⟩, C and the deformed Planck approximation on a log grid in T.
    #[command(allow_negative_numbers = true)]
    Table {
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Sym)]
        convention: ConventionArg,
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// λ² coefficient of ⟨n⟩ − Bose at x = ħω/T against the closed form.
    #[command(allow_negative_numbers = true)]
    PlanckCheck {
        #[arg(long)]
        x: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01])]
        lambdas: Vec<f64>,
        /// Restrict to one spectrum; both are reported by default.
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
    },
    /// Frequency shift cosh(λn) − 1 and its λ²n²/2 approximation.
    #[command(allow_negative_numbers = true)]
    Blueshift {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: f64,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SuiteArgs {
    /// Suite file: one `[section]` per experiment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run the acceptance suite shipped with the binary.
    #[arg(long)]
    pub bundled: bool,
}

fn complex(re: f64, im: f64) -> Result<Complex64, CliError> {
    if !(re.is_finite() && im.is_finite()) {
        return Err(CliError::Usage(format!("amplitude must be finite, got {re} + {im}i")));
    }
    Ok(Complex64::new(re, im))
}

fn stride(every: usize) -> Result<usize, CliError> {
    if every == 0 {
        return Err(CliError::Usage("--every must be at least 1".into()));
    }
    Ok(every)
}

fn deform(cmd: &DeformCmd) -> Result<Output, CliError> {
    match cmd {
        DeformCmd::Eval { spec, n_max } => {
            let s = spec.spec()?;
            let mut t = Table::new(&[
                "n", "f", "F", "F_inv_F", "phi", "commutator", "fact_q", "ln_fact_q", "ln_fact_f",
            ]);
            for n in 0..=*n_max {
                let big = deformation::big_f(n, &s)?;
                let inv = if s.is_invertible() { deformation::big_f_inverse(big, &s)? } else { f64::NAN };
                // φ needs F(n+1), which a table may not have at its last row
                let phi = match s.max_index() {
                    Some(m) if n >= m => f64::NAN,
                    _ => deformation::phi_of_z(n, &s)?,
                };
                let comm = s.lambda().map_or(f64::NAN, |l| deformation::commutator_function(n, l));
                t.push(vec![
                    n as f64,
                    deformation::f_of_n(n, &s)?,
                    big,
                    inv,
                    phi,
                    comm,
                    deformation::f_factorial(n, &s, FactorialConvention::QNumber)?,
                    deformation::ln_f_factorial(n, &s, FactorialConvention::QNumber)?,
                    deformation::ln_f_factorial(n, &s, FactorialConvention::FProduct)?,
                ]);
            }
            Ok(Output::Table(t))
        }
        DeformCmd::Invert { spec, x } => {
            let s = spec.spec()?;
            let n = deformation::big_f_inverse(*x, &s)?;
            Ok(Output::Json(output::to_json(&json!({"x": x, "n": n}))?))
        }
    }
}

fn operators(cmd: &OperatorsCmd) -> Result<Output, CliError> {
    match cmd {
        OperatorsCmd::Check { spec, dim } => {
            let s = spec.spec()?;
            let dim = *dim;
            let mut t = Table::new(&["identity", "absolute", "scaled"]);
            let mut row = |name: &str, r: fock::Residual| {
                t.push_cells(vec![name.into(), r.absolute.into(), r.scaled.into()]);
            };
            row("commutator", fock::check_commutator(dim, &s)?);
            row("commutator_untruncated", fock::check_commutator_untruncated(dim, &s)?);
            row("alternative_commutator", fock::check_alternative_commutator(dim, &s)?);
            if let Some(lambda) = s.lambda() {
                row("reordering", fock::check_reordering(dim, lambda)?);
            }
            if s.is_invertible() {
                row("linearoid", fock::linearoid_roundtrip(dim, &s)?);
            }
            row("heisenberg", fock::heisenberg_residual(dim, &s)?);
            row("heisenberg_evolution", fock::heisenberg_evolution_residual(dim, &s, 1.0)?);
            let spectrum = fock::spectrum_residual(dim, &s)?;
            t.push_cells(vec!["spectrum".into(), f64::NAN.into(), spectrum.into()]);
            Ok(Output::Table(t))
        }
        OperatorsCmd::Uncertainty { spec, n, dim } => {
            let s = spec.spec()?;
            let state = FockState::basis(*dim, *n)?;
            let q = fock::quadrature_uncertainty(&state, &s)?;
            let closed = s.lambda().map(|l| fock::number_state_uncertainty(*n, l));
            Ok(Output::Json(output::to_json(&json!({
                "n": n,
                "delta_q": q.delta_q,
                "delta_p": q.delta_p,
                "product": q.product,
                "closed_form": closed,
            }))?))
        }
        OperatorsCmd::Export { spec, operator, dim } => {
            let s = spec.spec()?;
            let dim = *dim;
            let m = match operator {
                OperatorKind::A => fock::annihilation(dim)?,
                OperatorKind::ADag => fock::annihilation(dim)?.adjoint(),
                OperatorKind::Deformed => fock::deformed_annihilation(dim, &s)?,
                OperatorKind::DeformedDag => fock::deformed_annihilation(dim, &s)?.adjoint(),
                OperatorKind::Number => fock::number_operator(dim),
                OperatorKind::Hamiltonian => fock::hamiltonian(dim, &HamiltonianForm::Standard)?,
                OperatorKind::HamiltonianDeformed => fock::hamiltonian(dim, &HamiltonianForm::InN(s))?,
            };
            let name = operator.to_possible_value().map(|v| v.get_name().to_string());
            Ok(Output::Json(output::to_json(&json!({
                "operator": name,
                "dim": dim,
                "rows": m.rows(),
            }))?))
        }
    }
}

fn classical_cmd(cmd: &ClassicalCmd) -> Result<Output, CliError> {
    match cmd {
        ClassicalCmd::Simulate { lambda, q0, p0, t_end, dt, every } => {
            let every = stride(*every)?;
            let state = ClassicalState::new(*q0, *p0, *lambda);
            let traj = classical::integrate_eom(state, *t_end, *dt)?;
            let mut t = Table::new(&["t", "q", "p", "q_exact", "|alpha|^2", "H_q"]);
            let last = traj.points.len().saturating_sub(1);
            for (i, pt) in traj.points.iter().enumerate() {
                if i % every == 0 || i == last {
                    t.push(vec![pt.t, pt.q, pt.p, pt.q_exact, pt.intensity, pt.energy]);
                }
            }
            let summary = json!({
                "omega": classical::omega_q(state.intensity(), *lambda),
                "intensity_drift": traj.intensity_drift,
                "energy_drift": traj.energy_drift,
                "max_q_error": traj.max_q_error,
            });
            Ok(Output::TableWithSummary(t, output::to_json(&summary)?))
        }
        ClassicalCmd::Momentum { lambda, q, qdot } => {
            let report = json!({
                "p": classical::momentum_from_velocity(*q, *qdot, *lambda)?,
                "approx": classical::approx_momentum(*q, *qdot, *lambda),
                "approx_second_order": classical::approx_momentum_second_order(*q, *qdot, *lambda),
                "orbit_frequency": classical::orbit_frequency(*q, *qdot, *lambda)?,
            });
            Ok(Output::Json(output::to_json(&report)?))
        }
        ClassicalCmd::Bracket { lambda, alpha_re, alpha_im, h } => {
            let alpha = complex(*alpha_re, *alpha_im)?;
            let report = json!({
                "alpha_q": classical::deform_amplitude(alpha, *lambda),
                "bracket_residual": classical::poisson_bracket_check(alpha, *lambda, *h)?,
            });
            Ok(Output::Json(output::to_json(&report)?))
        }
        ClassicalCmd::Amplitude { lambda, alpha_re, alpha_im, t } => {
            let alpha = complex(*alpha_re, *alpha_im)?;
            let alpha_t = classical::exact_alpha(alpha, *lambda, *t);
            let alpha_q0 = classical::deform_amplitude(alpha, *lambda);
            let report = json!({
                "omega": classical::omega_q(alpha.norm_sqr(), *lambda),
                "alpha_t": alpha_t,
                "alpha_q0": alpha_q0,
                "alpha_q_t": classical::exact_alpha_deformed(alpha_q0, *lambda, *t),
                "deformed_alpha_t": classical::deform_amplitude(alpha_t, *lambda),
            });
            Ok(Output::Json(output::to_json(&report)?))
        }
    }
}

fn wave_cmd(cmd: &WaveCmd, exec: Execution) -> Result<Output, CliError> {
    match cmd {
        WaveCmd::Simulate { grid, t_end, dt, scheme } => {
            let field = grid.field()?;
            let dt = dt.unwrap_or(t_end / 10.0);
            let scheme = match scheme {
                SchemeArg::Spectral => Scheme::Spectral,
                SchemeArg::Leapfrog => Scheme::Leapfrog,
            };
            let run = field.evolve_with(*t_end, dt, EvolveOptions { scheme, exec, record: true })?;
            let xs = field.grid();
            let mut t = Table::new(&["t", "x", "phi", "pi"]);
            let mut emit = |time: f64, phi: &[f64], pi: &[f64]| {
                for ((x, f), p) in xs.iter().zip(phi).zip(pi) {
                    t.push(vec![time, *x, *f, *p]);
                }
            };
            emit(field.time(), field.phi(), field.pi());
            for s in &run.snapshots {
                emit(s.t, &s.phi, &s.pi);
            }
            let exact = field.dalembert(*t_end);
            let shape_error = run
                .final_field
                .phi()
                .iter()
                .zip(&exact)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let summary = json!({
                "mu": field.mu(),
                "speed": field.speed(),
                "mu_drift": run.mu_drift,
                "energy_drift": run.energy_drift,
                "shape_error": shape_error,
                "grid_size": field.grid_size(),
            });
            Ok(Output::TableWithSummary(t, output::to_json(&summary)?))
        }
        WaveCmd::Modes { grid } => {
            let field = grid.field()?;
            let phi = field.phi_spectrum();
            let pi = field.pi_spectrum();
            let n = field.grid_size();
            let mut t = Table::new(&["m", "k", "phi_re", "phi_im", "pi_re", "pi_im"]);
            for j in 0..n {
                let (a, b) = (phi.coeffs[j], pi.coeffs[j]);
                t.push(vec![wave::mode_number(j, n) as f64, phi.wavenumbers[j], a.re, a.im, b.re, b.im]);
            }
            Ok(Output::Table(t))
        }
        WaveCmd::Soliton { lambda, n, length, t_end, direction } => {
            let k = TWO_PI / length;
            let h = length / *n as f64;
            let profile: Vec<f64> = (0..*n)
                .map(|j| {
                    let x = j as f64 * h;
                    (k * x).sin() + 0.3 * (2.0 * k * x).sin() + 0.1 * (3.0 * k * x).cos()
                })
                .collect();
            let dir = match direction {
                DirectionArg::Plus => Direction::Plus,
                DirectionArg::Minus => Direction::Minus,
            };
            let report = wave::soliton_check(&profile, *length, dir, *lambda, *t_end)?;
            Ok(Output::Json(output::to_json(&report)?))
        }
    }
}

fn level(cmd: &LevelCmd) -> Result<Output, CliError> {
    match cmd {
        LevelCmd::Simulate { lambda, re, im, t_end, dt, every } => {
            let every = stride(*every)?;
            let run = one_level::evolve_one_level(LevelState::new(complex(*re, *im)?, *lambda), *t_end, *dt)?;
            let mut t = Table::new(&["t", "re_psi", "im_psi", "abs_psi_sq", "phase"]);
            let last = run.samples.len().saturating_sub(1);
            for (i, s) in run.samples.iter().enumerate() {
                if i % every == 0 || i == last {
                    t.push(vec![s.t, s.psi.re, s.psi.im, s.psi.norm_sqr(), s.psi.arg()]);
                }
            }
            let summary = json!({
                "frequency": run.frequency,
                "max_deviation": run.max_deviation,
                "norm_drift": run.norm_drift,
            });
            Ok(Output::TableWithSummary(t, output::to_json(&summary)?))
        }
        LevelCmd::PhaseSpace { re, im, omega } => {
            let (q, p) = one_level::psi_to_phase_space(complex(*re, *im)?, *omega)?;
            Ok(Output::Json(output::to_json(&json!({"q": q, "p": p}))?))
        }
    }
}

fn coherent_cmd(cmd: &CoherentCmd) -> Result<Output, CliError> {
    match cmd {
        CoherentCmd::Build { spec, alpha_re, alpha_im, cutoff } => {
            let s = spec.spec()?;
            let cut = cutoff.map_or(Cutoff::Auto, Cutoff::Fixed);
            let state = coherent::build_f_coherent(complex(*alpha_re, *alpha_im)?, &s, cut)?;
            let mut t = Table::new(&["n", "re", "im", "abs2"]);
            for (n, c) in state.coeffs().iter().enumerate() {
                t.push(vec![n as f64, c.re, c.im, c.norm_sqr()]);
            }
            let mut summary = output::to_json(&coherent::summarize(&state)?)?;
            summary["mean_number"] = output::to_json(&state.mean_number())?;
            Ok(Output::TableWithSummary(t, summary))
        }
        CoherentCmd::Overlap { spec, alpha_re, alpha_im, beta_re, beta_im } => {
            let s = spec.spec()?;
            let a = coherent::build_f_coherent(complex(*alpha_re, *alpha_im)?, &s, Cutoff::Auto)?;
            let b = coherent::build_f_coherent(complex(*beta_re, *beta_im)?, &s, Cutoff::Auto)?;
            let q_series = match s.lambda() {
                Some(l) => Some(coherent::q_scalar_product(a.alpha(), b.alpha(), l, a.cutoff().max(b.cutoff()))?),
                None => None,
            };
            let report = json!({
                "series": coherent::scalar_product(&a, &b)?,
                "coefficients": coherent::coefficient_overlap(&a, &b)?,
                "q_series": q_series,
            });
            Ok(Output::Json(output::to_json(&report)?))
        }
        CoherentCmd::RecoverF { coeffs } => {
            let f = coherent::f_from_coefficients(coeffs)?;
            let mut t = Table::new(&["n", "f"]);
            for (i, v) in f.iter().enumerate() {
                t.push(vec![(i + 1) as f64, *v]);
            }
            Ok(Output::Table(t))
        }
    }
}

fn thermo_cmd(cmd: &ThermoCmd, exec: Execution) -> Result<Output, CliError> {
    match cmd {
        ThermoCmd::Levels { lambda, convention, n_max } => {
            let levels = thermo::energy_levels(*n_max, *lambda, (*convention).into())?;
            let mut t = Table::new(&["n", "E"]);
            for (n, e) in levels.iter().enumerate() {
                t.push(vec![n as f64, *e]);
            }
            Ok(Output::Table(t))
        }
        ThermoCmd::Table { lambda, convention, t_min, t_max, points } => {
            let temps = thermo::log_grid(*t_min, *t_max, *points)?;
            let table = thermo::thermo_table(&temps, *lambda, (*convention).into(), exec)?;
            let mut t = Table::new(&["T", "Z", "mean_n", "C", "planck_approx"]);
            for r in &table.rows {
                t.push(vec![r.t, r.z, r.mean_n, r.c, r.planck_approx]);
            }
            let summary = json!({
                "lambda": table.lambda,
                "convention": table.convention,
                "cutoff_used": table.cutoff_used,
            });
            Ok(Output::TableWithSummary(t, output::to_json(&summary)?))
        }
        ThermoCmd::PlanckCheck { x, lambdas, convention } => {
            let conventions: Vec<SpectrumConvention> = match convention {
                Some(c) => vec![(*c).into()],
                None => vec![SpectrumConvention::SymmetricOrdering, SpectrumConvention::NumberOperator],
            };
            let reports = conventions
                .into_iter()
                .map(|c| thermo::planck_coefficient_check(lambdas, *x, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Output::Json(output::to_json(&reports)?))
        }
        ThermoCmd::Blueshift { lambda, n } => {
            let b = thermo::blue_shift(*n, *lambda)?;
            let ratio = if b.approx == 0.0 { f64::NAN } else { b.exact / b.approx };
            Ok(Output::Json(output::to_json(&json!({"exact": b.exact, "approx": b.approx, "ratio": ratio}))?))
        }
    }
}

fn suite_cmd(args: &SuiteArgs, seed: u64, exec: Execution) -> Result<(Output, i32), CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => suite::BUNDLED.to_string(),
    };
    let report = suite::run_suite(&text, seed, exec)?;
    let code = if report.passed { exit::OK } else { exit::SUITE_FAILED };
    Ok((Output::Json(output::to_json(&report)?), code))
}

fn dispatch(cli: &Cli) -> Result<(Output, i32), CliError> {
    let exec = Execution::default();
    let out = match &cli.command {
        Command::Deform(c) => deform(c)?,
        Command::Operators(c) => operators(c)?,
        Command::Classical(c) => classical_cmd(c)?,
        Command::Wave(c) => wave_cmd(c, exec)?,
        Command::Level(c) => level(c)?,
        Command::Coherent(c) => coherent_cmd(c)?,
        Command::Thermo(c) => thermo_cmd(c, exec)?,
        Command::Suite(a) => return suite_cmd(a, cli.seed, exec),
    };
    Ok((out, exit::OK))
}

fn default_format(out: &Output) -> Format {
    match out {
        Output::Json(_) => Format::Json,
        _ => Format::Csv,
    }
}

fn emit(main: &str, side: Option<&str>, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            output::write_atomic(path, main)?;
            if let Some(side) = side {
                output::write_atomic(&output::summary_path(path), side)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(main.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

/// Parsed-argument entry point.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let (out, code) = dispatch(cli)?;
    let format = cli.format.unwrap_or_else(|| default_format(&out));
    let (main, side) = output::render(&out, format);
    emit(&main, side.as_deref(), cli.out.as_deref())?;
    Ok(code)
}

fn configure_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os("QLAB_MAX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("QLAB_MAX_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    {
        // a second call in the same process finds the pool already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Runs `qlab` with `args` (program name first) and returns the exit code.
/// Errors go to stderr as a single JSON line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    exit::OK
                }
                _ => {
                    let msg = e.render().to_string();
                    let msg = msg.trim().lines().next().unwrap_or("").trim_start_matches("error: ");
                    let err = CliError::Usage(msg.to_string());
                    eprintln!("{}", err.to_json_line());
                    err.exit_code()
                }
            };
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}
