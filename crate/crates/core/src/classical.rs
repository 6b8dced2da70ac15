//! The classical q-oscillator.
//!
//! Units with `m = ω = 1`. The complex amplitude is `α = (q + ip)/√2` and the
//! intensity `|α|² = (q² + p²)/2` is a constant of the motion. The deformed
//! dynamics is a harmonic rotation whose frequency
//! `ω_q = (λ / sinh λ) cosh(λ|α|²)` depends on the orbit.

use num_complex::Complex64;
use serde::Serialize;

use crate::deformation::{lambda_over_sinh, q_number, sinh_over_lambda};
use crate::error::ensure;
use crate::{rk4, roots, Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Phase-space point of the classical q-oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalState {
    pub q: f64,
    pub p: f64,
    pub lambda: f64,
}

impl ClassicalState {
    pub fn new(q: f64, p: f64, lambda: f64) -> Self {
        ClassicalState { q, p, lambda }
    }

    pub fn from_alpha(alpha: Complex64, lambda: f64) -> Self {
        ClassicalState { q: SQRT_2 * alpha.re, p: SQRT_2 * alpha.im, lambda }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.q, self.p) / SQRT_2
    }

    /// `αα* = (q² + p²)/2`.
    pub fn intensity(&self) -> f64 {
        0.5 * (self.q * self.q + self.p * self.p)
    }

    /// `H_q = sinh(λαα*) / sinh λ`.
    pub fn energy(&self) -> f64 {
        hamiltonian_q(self.intensity(), self.lambda)
    }
}

/// `H_q(α, α*) = sinh(λ|α|²) / sinh λ`.
pub fn hamiltonian_q(intensity: f64, lambda: f64) -> f64 {
    q_number(intensity, lambda)
}

/// `ω_q = (λ / sinh λ) cosh(λ · intensity)`.
pub fn omega_q(intensity: f64, lambda: f64) -> f64 {
    lambda_over_sinh(lambda) * (lambda * intensity).cosh()
}

/// `α_q = sqrt(sinh(λ|α|²) / (|α|² sinh λ)) α`.
pub fn deform_amplitude(alpha: Complex64, lambda: f64) -> Complex64 {
    let i = alpha.norm_sqr();
    if i == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    alpha * (q_number(i, lambda) / i).sqrt()
}

/// Closed form of `{α_q, α_q*}`: `−i (λ / sinh λ) sqrt(1 + |α_q|⁴ sinh² λ)`.
pub fn deformed_bracket(alpha_q: Complex64, lambda: f64) -> Complex64 {
    let s = alpha_q.norm_sqr() * lambda.sinh();
    Complex64::new(0.0, -lambda_over_sinh(lambda) * 1f64.hypot(s))
}

/// `{α_q, α_q*} = ∂_q α_q ∂_p α_q* − ∂_p α_q ∂_q α_q*` by central differences
/// with step `h` in `q` and `p`.
pub fn poisson_bracket_fd(alpha: Complex64, lambda: f64, h: f64) -> Complex64 {
    let state = ClassicalState::from_alpha(alpha, lambda);
    let aq = |q: f64, p: f64| deform_amplitude(Complex64::new(q, p) / SQRT_2, lambda);
    let dq = (aq(state.q + h, state.p) - aq(state.q - h, state.p)) / (2.0 * h);
    let dp = (aq(state.q, state.p + h) - aq(state.q, state.p - h)) / (2.0 * h);
    // derivatives of α_q* are the conjugates of those of α_q
    dq * dp.conj() - dp * dq.conj()
}

/// `|finite-difference bracket − closed form|` at `α`.
pub fn poisson_bracket_check(alpha: Complex64, lambda: f64, h: f64) -> Result<f64> {
    ensure((1e-6..=1e-3).contains(&h), || format!("step h = {h} outside [1e-6, 1e-3]"))?;
    let fd = poisson_bracket_fd(alpha, lambda, h);
    Ok((fd - deformed_bracket(deform_amplitude(alpha, lambda), lambda)).norm())
}

/// `α(t) = α₀ exp(−i t ω_q(|α₀|²))`.
pub fn exact_alpha(alpha0: Complex64, lambda: f64, t: f64) -> Complex64 {
    alpha0 * Complex64::from_polar(1.0, -t * omega_q(alpha0.norm_sqr(), lambda))
}

/// Solution of `α̇_q = −i (λ/sinh λ) sqrt(1 + |α_q|⁴ sinh² λ) α_q`.
pub fn exact_alpha_deformed(alpha_q0: Complex64, lambda: f64, t: f64) -> Complex64 {
    let freq = deformed_bracket(alpha_q0, lambda).im.abs();
    alpha_q0 * Complex64::from_polar(1.0, -t * freq)
}

/// Damped fixed-point tuning for [`momentum_from_velocity`].
const MOMENTUM_DAMPING: f64 = 0.5;
const MOMENTUM_TOL: f64 = 1e-12;
const MOMENTUM_MAX_ITER: usize = 200;

/// Solves `p = (sinh λ / λ) q̇ / cosh((λ/2)(q² + p²))` for `p`.
///
/// Runs a damped fixed-point iteration; if it has not settled within the
/// iteration budget (or a contraction estimate reaches 1), falls back to
/// bisection on the residual, whose root is unique and lies between 0 and
/// `(sinh λ / λ) q̇`.
pub fn momentum_from_velocity(q: f64, qdot: f64, lambda: f64) -> Result<f64> {
    ensure(q.is_finite() && qdot.is_finite() && lambda.is_finite(), || {
        format!("non-finite input q={q} qdot={qdot} lambda={lambda}")
    })?;
    let scale = sinh_over_lambda(lambda);
    let g = |p: f64| scale * qdot / (0.5 * lambda * (q * q + p * p)).cosh();
    if qdot == 0.0 {
        return Ok(0.0);
    }

    let mut p = qdot;
    let mut prev_step = f64::INFINITY;
    for _ in 0..MOMENTUM_MAX_ITER {
        let next = (1.0 - MOMENTUM_DAMPING) * p + MOMENTUM_DAMPING * g(p);
        let step = (next - p).abs();
        p = next;
        if step <= MOMENTUM_TOL * p.abs().max(1.0) {
            return Ok(p);
        }
        if !p.is_finite() || step >= prev_step {
            break;
        }
        prev_step = step;
    }

    let bound = scale * qdot;
    let (lo, hi) = if bound > 0.0 { (0.0, bound) } else { (bound, 0.0) };
    roots::bisect(|p| p - g(p), lo, hi, 1e-15, 400).map_err(|e| match e {
        Error::Solver { residual, .. } => Error::Solver { solver: "momentum solver", residual },
        other => other,
    })
}

/// Small-λ expansion `q̇ [1 + λ²/6 − (λ²/8)(q² + q̇²)]`, as commonly quoted.
pub fn approx_momentum(q: f64, qdot: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    qdot * (1.0 + l2 / 6.0 - l2 / 8.0 * (q * q + qdot * qdot))
}

/// Consistent second-order expansion of the implicit momentum relation,
/// `q̇ [1 + λ²/6 − (λ²/8)(q² + q̇²)²]`.
pub fn approx_momentum_second_order(q: f64, qdot: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    let r2 = q * q + qdot * qdot;
    qdot * (1.0 + l2 / 6.0 - l2 / 8.0 * r2 * r2)
}

/// Orbit frequency `Ω = (λ / sinh λ) cosh((λ/2)(q₀² + p²(q₀, q̇₀)))`.
pub fn orbit_frequency(q0: f64, qdot0: f64, lambda: f64) -> Result<f64> {
    let p0 = momentum_from_velocity(q0, qdot0, lambda)?;
    Ok(omega_q(0.5 * (q0 * q0 + p0 * p0), lambda))
}

/// `q(t) = q₀ cos Ωt + (q̇₀/Ω) sin Ωt`, the resummed exact solution.
pub fn exact_q(q0: f64, qdot0: f64, lambda: f64, t: f64) -> Result<f64> {
    let w = orbit_frequency(q0, qdot0, lambda)?;
    Ok(q0 * (w * t).cos() + qdot0 / w * (w * t).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub q_exact: f64,
    pub intensity: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// `max |αα*(t) − αα*(0)|`.
    pub intensity_drift: f64,
    /// `max |H_q(t) − H_q(0)|`.
    pub energy_drift: f64,
    /// `max |q_rk4(t) − q_exact(t)|`.
    pub max_q_error: f64,
}

/// RK4 integration of `q̇ = ω_q p`, `ṗ = −ω_q q` with `ω_q` evaluated at the
/// current intensity. The exact solution is taken from [`exact_q`] with
/// `q̇₀ = ω_q p₀`, which routes through the momentum solver.
pub fn integrate_eom(state0: ClassicalState, t_end: f64, dt: f64) -> Result<Trajectory> {
    ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be positive, got {dt}"))?;
    ensure(t_end >= 0.0 && t_end.is_finite(), || format!("t_end must be >= 0, got {t_end}"))?;
    let lambda = state0.lambda;
    let rhs = |_t: f64, y: &[f64; 2]| {
        let w = omega_q(0.5 * (y[0] * y[0] + y[1] * y[1]), lambda);
        [w * y[1], -w * y[0]]
    };

    let i0 = state0.intensity();
    let e0 = state0.energy();
    let w0 = omega_q(i0, lambda);
    let qdot0 = w0 * state0.p;
    let big_omega = orbit_frequency(state0.q, qdot0, lambda)?;

    let mut points = Vec::with_capacity((t_end / dt).ceil() as usize + 2);
    let mut intensity_drift = 0.0f64;
    let mut energy_drift = 0.0f64;
    let mut max_q_error = 0.0f64;
    rk4::integrate(rhs, [state0.q, state0.p], t_end, dt, |t, y| {
        let s = ClassicalState::new(y[0], y[1], lambda);
        let q_exact = state0.q * (big_omega * t).cos() + qdot0 / big_omega * (big_omega * t).sin();
        let intensity = s.intensity();
        let energy = s.energy();
        intensity_drift = intensity_drift.max((intensity - i0).abs());
        energy_drift = energy_drift.max((energy - e0).abs());
        max_q_error = max_q_error.max((y[0] - q_exact).abs());
        points.push(TrajectoryPoint { t, q: y[0], p: y[1], q_exact, intensity, energy });
    });
    Ok(Trajectory { points, intensity_drift, energy_drift, max_q_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn deform_amplitude_examples() {
        let a = Complex64::new(0.3, -0.7);
        assert_eq!(deform_amplitude(a, 0.0), a);
        let unit = Complex64::from_polar(1.0, 0.4);
        assert_relative_eq!((deform_amplitude(unit, 1.0) - unit).norm(), 0.0, epsilon = 1e-15);
        let aq = deform_amplitude(Complex64::new(2f64.sqrt(), 0.0), 1.0);
        assert_relative_eq!(aq.re, 1.756_747_355_094_205_8, max_relative = 1e-14);
        assert_eq!(deform_amplitude(Complex64::new(0.0, 0.0), 1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bracket_examples() {
        let a = Complex64::new(0.6, 0.2);
        assert!((poisson_bracket_fd(a, 1e-9, 1e-4) - Complex64::new(0.0, -1.0)).norm() <= 1e-8);
        let b = deformed_bracket(Complex64::new(0.0, 0.0), 1.0);
        assert_relative_eq!(b.im, -0.850_918_128_239_321_5, max_relative = 1e-14);
        assert!(poisson_bracket_check(Complex64::new(1.0, 0.0), 0.5, 1e-4).unwrap() <= 1e-6);
        assert!(poisson_bracket_check(a, 0.5, 1e-2).is_err());
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_q(3.7, 0.0), 1.0);
        assert_relative_eq!(omega_q(0.0, 1.0), 0.850_918_128_239_321_5, max_relative = 1e-14);
        assert_relative_eq!(omega_q(1.0, 1.0), 1.313_035_285_499_331_3, max_relative = 1e-14);
    }

    #[test]
    fn exact_alpha_examples() {
        let a0 = Complex64::new(0.4, 0.9);
        let t = 1.7;
        assert!((exact_alpha(a0, 0.0, t) - a0 * Complex64::from_polar(1.0, -t)).norm() < 1e-15);
        assert_eq!(exact_alpha(a0, 0.8, 0.0), a0);
        let z = exact_alpha(Complex64::new(1.0, 0.0), 1.0, 1.0);
        assert_relative_eq!(z.re, 0.254_916_202_082_568_7, epsilon = 1e-13);
        assert_relative_eq!(z.im, -0.966_963_148_168_428_9, epsilon = 1e-13);
    }

    #[test]
    fn deformed_picture_matches_deformed_hamiltonian_picture() {
        let aq0 = Complex64::new(0.2, 0.5);
        assert!((exact_alpha_deformed(aq0, 0.0, 2.0) - aq0 * Complex64::from_polar(1.0, -2.0)).norm() < 1e-15);
        assert_eq!(exact_alpha_deformed(Complex64::new(0.0, 0.0), 1.0, 3.0).norm(), 0.0);
        let a0 = Complex64::new(0.8, 0.0);
        for t in [0.5, 2.0] {
            let lhs = deform_amplitude(exact_alpha(a0, 0.7, t), 0.7);
            let rhs = exact_alpha_deformed(deform_amplitude(a0, 0.7), 0.7, t);
            assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    /// The four-exponential expression for `q(t)`.
    fn q_four_exponential(q0: f64, qdot0: f64, lambda: f64, t: f64) -> f64 {
        let p = momentum_from_velocity(q0, qdot0, lambda).unwrap();
        let c = (0.5 * lambda * (q0 * q0 + p * p)).cosh();
        let i = Complex64::new(0.0, 1.0);
        let phase = i * lambda * t / lambda.sinh() * c;
        let plus = phase.exp();
        let minus = (-phase).exp();
        let v = q0 / 2.0 * (plus + minus) + qdot0 * lambda.sinh() / (2.0 * i * lambda) / c * (plus - minus);
        v.re
    }

    #[test]
    fn resummed_q_matches_four_exponential_form() {
        for &(q0, qd, l) in &[(1.0, 0.0, 0.5), (0.3, -0.8, 1.0), (1.2, 0.4, 0.2)] {
            for t in [0.0, 0.9, 3.3, 10.0] {
                let a = exact_q(q0, qd, l, t).unwrap();
                let b = q_four_exponential(q0, qd, l, t);
                assert!((a - b).abs() <= 1e-12, "{q0} {qd} {l} {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_q_examples() {
        let t = 2.3;
        assert_relative_eq!(exact_q(0.7, 0.2, 0.0, t).unwrap(), 0.7 * t.cos() + 0.2 * t.sin(), epsilon = 1e-15);
        assert_eq!(exact_q(0.7, 0.2, 0.9, 0.0).unwrap(), 0.7);
        let w = orbit_frequency(1.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(exact_q(1.0, 0.0, 0.5, PI / w).unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_q_solves_second_order_equation() {
        let (q0, qd, l) = (0.9, 0.5, 0.6);
        let w = orbit_frequency(q0, qd, l).unwrap();
        let h = 1e-3;
        let mut prev_err = f64::INFINITY;
        for hh in [h, h / 2.0] {
            let t = 1.3;
            let qm = exact_q(q0, qd, l, t - hh).unwrap();
            let q = exact_q(q0, qd, l, t).unwrap();
            let qp = exact_q(q0, qd, l, t + hh).unwrap();
            let err = ((qp - 2.0 * q + qm) / (hh * hh) + w * w * q).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn momentum_examples() {
        assert_relative_eq!(momentum_from_velocity(0.4, 1.3, 0.0).unwrap(), 1.3, epsilon = 1e-15);
        assert_eq!(momentum_from_velocity(0.4, 0.0, 0.7).unwrap(), 0.0);
        // bisection oracle on the implicit relation, independent of the iteration
        let (q, qd, l) = (1.0f64, 1.0f64, 0.1f64);
        let g = |p: f64| p - l.sinh() / l * qd / (0.5 * l * (q * q + p * p)).cosh();
        let oracle = roots::bisect(g, 0.5, 1.5, 1e-16, 500).unwrap();
        let p = momentum_from_velocity(q, qd, l).unwrap();
        assert_relative_eq!(p, oracle, epsilon = 1e-12);
        assert_relative_eq!(p, 0.996_712_497_049_139_2, epsilon = 1e-12);
    }

    #[test]
    fn momentum_solver_falls_back_for_strong_nonlinearity() {
        let (q, qd, l) = (2.0, 3.0, 1.5);
        let p = momentum_from_velocity(q, qd, l).unwrap();
        let rhs = l.sinh() / l * qd / (0.5 * l * (q * q + p * p)).cosh();
        assert!((p - rhs).abs() <= 1e-12);
        let p = momentum_from_velocity(q, -qd, l).unwrap();
        let rhs = -l.sinh() / l * qd / (0.5 * l * (q * q + p * p)).cosh();
        assert!((p - rhs).abs() <= 1e-12);
    }

    #[test]
    fn approx_momentum_examples() {
        assert_eq!(approx_momentum(0.3, 0.8, 0.0), 0.8);
        assert_relative_eq!(approx_momentum(1.0, 1.0, 0.1), 0.999_166_666_666_666_7, epsilon = 1e-15);
    }

    #[test]
    fn quoted_expansion_is_fourth_order_only_on_the_unit_circle() {
        let ratio = |q: f64, qd: f64, f: fn(f64, f64, f64) -> f64| {
            let e = |l: f64| (momentum_from_velocity(q, qd, l).unwrap() - f(q, qd, l)).abs();
            e(0.2) / e(0.1)
        };
        let on_circle = ratio(0.6, 0.8, approx_momentum);
        assert!((12.0..=20.0).contains(&on_circle), "{on_circle}");
        let off_circle = ratio(1.0, 1.0, approx_momentum);
        assert!(off_circle < 5.0, "{off_circle}");
        let corrected = ratio(1.0, 1.0, approx_momentum_second_order);
        assert!((12.0..=20.0).contains(&corrected), "{corrected}");
    }

    #[test]
    fn linear_oscillator_returns_after_one_period() {
        let tr = integrate_eom(ClassicalState::new(1.0, 0.0, 0.0), 2.0 * PI, 1e-3).unwrap();
        let last = tr.points.last().unwrap();
        assert_relative_eq!(last.t, 2.0 * PI);
        assert!((last.q - 1.0).abs() <= 1e-8 && last.p.abs() <= 1e-8);
    }

    #[test]
    fn integrated_orbit_conserves_invariants() {
        let tr = integrate_eom(ClassicalState::new(1.0, 0.0, 1.0), 10.0, 1e-3).unwrap();
        assert!(tr.intensity_drift <= 1e-9, "{}", tr.intensity_drift);
        assert!(tr.energy_drift <= 1e-9, "{}", tr.energy_drift);
        // orbits stay on the circle of radius sqrt(2|α₀|²)
        for pt in &tr.points {
            assert!(((pt.q * pt.q + pt.p * pt.p).sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn integrated_orbit_tracks_exact_solution() {
        let tr = integrate_eom(ClassicalState::new(1.0, 0.5, 0.5), 10.0, 1e-4).unwrap();
        assert!(tr.max_q_error <= 1e-7, "{}", tr.max_q_error);
        assert!(integrate_eom(ClassicalState::new(1.0, 0.5, 0.5), 1.0, 0.0).is_err());
    }

    #[test]
    fn blue_shift_asymptotics() {
        let (l, n) = (0.001, 100.0);
        let rel = (omega_q(n, l) - omega_q(0.0, l)) / omega_q(0.0, l);
        let ratio = rel / (l * l * n * n / 2.0);
        assert!((0.999..=1.002).contains(&ratio), "{ratio}");
    }
}
