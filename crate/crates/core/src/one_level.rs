//! One-level quantum system as a classical-like oscillator, and its
//! q-nonlinear Schrödinger equation `iΨ̇ = (λ/sinh λ) cosh(λ|Ψ|²) Ψ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::classical::omega_q;
use crate::error::ensure;
use crate::{rk4, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelState {
    pub psi: Complex64,
    pub lambda: f64,
    /// `H/ħ`. Time units are chosen so that it is 1 for the nonlinear equation.
    pub omega: f64,
}

impl LevelState {
    pub fn new(psi: Complex64, lambda: f64) -> Self {
        LevelState { psi, lambda, omega: 1.0 }
    }
}

/// `Ψ = ((H/ħ) q + i p)/√2`, solved for `(q, p)`.
pub fn psi_to_phase_space(psi: Complex64, omega: f64) -> Result<(f64, f64)> {
    ensure(omega > 0.0 && omega.is_finite(), || format!("omega must be positive, got {omega}"))?;
    Ok((SQRT_2 * psi.re / omega, SQRT_2 * psi.im))
}

pub fn phase_space_to_psi(q: f64, p: f64, omega: f64) -> Result<Complex64> {
    ensure(omega > 0.0 && omega.is_finite(), || format!("omega must be positive, got {omega}"))?;
    Ok(Complex64::new(omega * q, p) / SQRT_2)
}

/// Nonlinear frequency `Ω = (λ/sinh λ) cosh(λ|Ψ|²)`.
pub fn nonlinear_frequency(psi: Complex64, lambda: f64) -> f64 {
    omega_q(psi.norm_sqr(), lambda)
}

/// Closed-form solution `Ψ(t) = Ψ(0) e^{−iΩt}`.
pub fn exact_psi(psi0: Complex64, lambda: f64, t: f64) -> Complex64 {
    psi0 * Complex64::from_polar(1.0, -nonlinear_frequency(psi0, lambda) * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSample {
    pub t: f64,
    pub psi: Complex64,
    pub exact: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRun {
    pub frequency: f64,
    pub samples: Vec<LevelSample>,
    pub exact: Complex64,
    pub integrated: Complex64,
    /// `max_t |Ψ_rk4(t) − Ψ_exact(t)|`.
    pub max_deviation: f64,
    /// `max_t | |Ψ_rk4(t)| − |Ψ(0)| |`.
    pub norm_drift: f64,
}

/// Evolves the nonlinear equation by RK4 and alongside the closed form.
pub fn evolve_one_level(state: LevelState, t_end: f64, dt: f64) -> Result<LevelRun> {
    ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be positive, got {dt}"))?;
    ensure(t_end >= 0.0 && t_end.is_finite(), || format!("t_end must be >= 0, got {t_end}"))?;
    ensure(state.omega == 1.0, || {
        "the nonlinear equation is defined in units with omega = 1".into()
    })?;
    let lambda = state.lambda;
    let psi0 = state.psi;
    let norm0 = psi0.norm();
    let rhs = |_t: f64, y: &[f64; 2]| {
        let w = omega_q(y[0] * y[0] + y[1] * y[1], lambda);
        // Ψ̇ = −iΩΨ
        [w * y[1], -w * y[0]]
    };
    let mut samples = Vec::with_capacity((t_end / dt).ceil() as usize + 2);
    let mut max_deviation = 0.0f64;
    let mut norm_drift = 0.0f64;
    let last = rk4::integrate(rhs, [psi0.re, psi0.im], t_end, dt, |t, y| {
        let psi = Complex64::new(y[0], y[1]);
        let exact = exact_psi(psi0, lambda, t);
        max_deviation = max_deviation.max((psi - exact).norm());
        norm_drift = norm_drift.max((psi.norm() - norm0).abs());
        samples.push(LevelSample { t, psi, exact });
    });
    Ok(LevelRun {
        frequency: nonlinear_frequency(psi0, lambda),
        samples,
        exact: exact_psi(psi0, lambda, t_end),
        integrated: Complex64::new(last[0], last[1]),
        max_deviation,
        norm_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::exact_alpha;
    use approx::assert_relative_eq;

    #[test]
    fn phase_space_map() {
        let psi = Complex64::new(1.0, 1.0) / SQRT_2;
        let (q, p) = psi_to_phase_space(psi, 1.0).unwrap();
        assert_relative_eq!(q, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p, 1.0, epsilon = 1e-15);
        for (re, im, w) in [(0.3, -1.2, 1.0), (2.0, 0.5, 3.5), (-0.1, 0.0, 0.2)] {
            let psi = Complex64::new(re, im);
            let (q, p) = psi_to_phase_space(psi, w).unwrap();
            assert!((phase_space_to_psi(q, p, w).unwrap() - psi).norm() <= 1e-15);
        }
        assert!(psi_to_phase_space(psi, 0.0).is_err());
    }

    #[test]
    fn linear_schrodinger_gives_oscillator_equations() {
        // iΨ̇ = ωΨ, so Ψ(t) = Ψ₀ e^{−iωt}; difference (q, p) numerically
        let w = 1.7;
        let psi0 = Complex64::new(0.4, -0.9);
        let at = |t: f64| psi_to_phase_space(psi0 * Complex64::from_polar(1.0, -w * t), w).unwrap();
        let (t, h) = (0.8, 1e-5);
        let (qm, pm) = at(t - h);
        let (q, p) = at(t);
        let (qp, pp) = at(t + h);
        assert!(((qp - qm) / (2.0 * h) - p).abs() < 1e-8);
        assert!(((pp - pm) / (2.0 * h) + w * w * q).abs() < 1e-8);
    }

    #[test]
    fn evolution_examples() {
        let psi0 = Complex64::new(0.6, 0.3);
        let run = evolve_one_level(LevelState::new(psi0, 0.0), 2.0, 1e-3).unwrap();
        assert!((run.exact - psi0 * Complex64::from_polar(1.0, -2.0)).norm() < 1e-15);

        let unit = LevelState::new(Complex64::new(1.0, 0.0), 1.0);
        let run = evolve_one_level(unit, 1.0, 1e-3).unwrap();
        assert_relative_eq!(run.frequency, 1.313_035_285_499_331_3, max_relative = 1e-14);
        assert_relative_eq!(run.frequency, omega_q(1.0, 1.0), max_relative = 1e-15);

        let run = evolve_one_level(LevelState::new(Complex64::new(0.7, -0.5), 1.0), 10.0, 1e-4).unwrap();
        assert!(run.max_deviation <= 1e-8, "{}", run.max_deviation);
        assert!(run.norm_drift <= 1e-10, "{}", run.norm_drift);
    }

    #[test]
    fn matches_classical_amplitude_rotation() {
        let psi0 = Complex64::new(0.5, 0.8);
        for t in [0.3, 4.0] {
            assert!((exact_psi(psi0, 0.9, t) - exact_alpha(psi0, 0.9, t)).norm() <= 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = LevelState::new(Complex64::new(1.0, 0.0), 0.5);
        assert!(evolve_one_level(s, 1.0, -1e-3).is_err());
        s.omega = 2.0;
        assert!(evolve_one_level(s, 1.0, 1e-3).is_err());
    }
}
