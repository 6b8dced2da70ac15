//! f-coherent (nonlinear coherent) states: eigenvectors of `A = a f(n̂)`.
//!
//! Coefficients follow `c_{n+1} = c_n α / (√(n+1) f(n+1)) = c_n α / √F(n+1)`
//! and are carried as log-magnitude plus phase so that large cutoffs never
//! overflow a factorial.

use num_complex::Complex64;
use serde::Serialize;

use crate::deformation::{big_f, ln_big_f, DeformationSpec};
use crate::error::ensure;
use crate::fock::deformed_annihilation;
use crate::{Error, Result};

/// Largest cutoff the automatic search will try.
pub const MAX_CUTOFF: usize = 100_000;
/// Truncated probability mass a state may leave out.
pub const TAIL_TOLERANCE: f64 = 1e-10;

// Auto cutoff: the last kept probability must be below this, and `|α c_last|`
// (the truncation edge of `A|α⟩ − α|α⟩`) below `EDGE_TOL`.
const LAST_TERM_TOL: f64 = 1e-14;
const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FCoherentState {
    alpha: Complex64,
    spec: DeformationSpec,
    coeffs: Vec<Complex64>,
    ln_norm_factor: f64,
    tail_bound: f64,
}

/// `ln |c_n|²` of the unnormalized series `α^n / √(F(1)⋯F(n))`.
fn ln_weights(alpha: Complex64, spec: &DeformationSpec, cutoff: usize) -> Result<Vec<f64>> {
    let ln_a2 = alpha.norm_sqr().ln();
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=cutoff {
        acc += ln_a2 - ln_big_f(n, spec)?;
        out.push(acc);
    }
    Ok(out)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Geometric estimate of the probability left out beyond the last term.
fn tail_estimate(ln_w: &[f64], ln_total: f64) -> f64 {
    let n = ln_w.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let last = (ln_w[n - 1] - ln_total).exp();
    let ratio = (ln_w[n - 1] - ln_w[n - 2]).exp();
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        last * ratio / (1.0 - ratio)
    }
}

fn auto_cutoff(alpha: Complex64, spec: &DeformationSpec) -> Result<usize> {
    let limit = spec.max_index().unwrap_or(MAX_CUTOFF).min(MAX_CUTOFF);
    let ln_a2 = alpha.norm_sqr().ln();
    let mut ln_w = 0.0;
    // running log of Σ|c_k|², updated incrementally
    let mut ln_total = 0.0f64;
    for n in 1..=limit {
        let step = ln_a2 - ln_big_f(n, spec)?;
        ln_w += step;
        ln_total = ln_total.max(ln_w) + (-(ln_total - ln_w).abs()).exp().ln_1p();
        let p = (ln_w - ln_total).exp();
        let edge = (ln_a2 + ln_w - ln_total).exp();
        if step < 0.0 && p < LAST_TERM_TOL && edge < EDGE_TOL * EDGE_TOL {
            return Ok(n);
        }
    }
    Err(Error::CutoffTooSmall { cutoff: limit, required: limit + 1 })
}

/// Builds `|α, f⟩` truncated at `n_max`, normalized over the kept terms.
pub fn build_f_coherent(alpha: Complex64, spec: &DeformationSpec, cutoff: Cutoff) -> Result<FCoherentState> {
    ensure(alpha.re.is_finite() && alpha.im.is_finite(), || format!("alpha must be finite, got {alpha}"))?;
    if alpha == Complex64::new(0.0, 0.0) {
        let n_max = match cutoff {
            Cutoff::Auto => 0,
            Cutoff::Fixed(n) => n,
        };
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        return Ok(FCoherentState { alpha, spec: spec.clone(), coeffs, ln_norm_factor: 0.0, tail_bound: 0.0 });
    }
    let n_max = match cutoff {
        Cutoff::Auto => auto_cutoff(alpha, spec)?,
        Cutoff::Fixed(n) => {
            if let Some(max) = spec.max_index() {
                if n > max {
                    return Err(Error::OutOfRange { index: n, max });
                }
            }
            n
        }
    };
    let ln_w = ln_weights(alpha, spec, n_max)?;
    let ln_total = log_sum_exp(&ln_w);
    let tail_bound = tail_estimate(&ln_w, ln_total);
    if tail_bound.is_nan() || tail_bound >= TAIL_TOLERANCE {
        let required = auto_cutoff(alpha, spec).unwrap_or(n_max.saturating_mul(2).max(n_max + 1));
        return Err(Error::CutoffTooSmall { cutoff: n_max, required });
    }
    let arg = alpha.arg();
    let coeffs = ln_w
        .iter()
        .enumerate()
        .map(|(n, lw)| Complex64::from_polar((0.5 * (lw - ln_total)).exp(), n as f64 * arg))
        .collect();
    Ok(FCoherentState { alpha, spec: spec.clone(), coeffs, ln_norm_factor: -0.5 * ln_total, tail_bound })
}

/// The raw recurrence `C_0 = 1, C_{n+1} = C_n α / √F(n+1)` without
/// normalization or tail checks.
pub fn unnormalized_coefficients(alpha: Complex64, spec: &DeformationSpec, cutoff: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new(1.0, 0.0);
    out.push(c);
    for n in 1..=cutoff {
        c *= alpha / big_f(n, spec)?.sqrt();
        out.push(c);
    }
    Ok(out)
}

impl FCoherentState {
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn spec(&self) -> &DeformationSpec {
        &self.spec
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `N_{f,α} = (Σ |α|^{2n} / (n! [f(n)]!²))^{−1/2}` with `[f(n)]! = f(1)⋯f(n)`,
    /// summed to the cutoff.
    pub fn norm_factor(&self) -> f64 {
        self.ln_norm_factor.exp()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ n |c_n|²`.
    pub fn mean_number(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// `max_n |c_{n+1} √F(n+1) − α c_n|`.
    pub fn recurrence_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for n in 0..self.cutoff() {
            let d = self.coeffs[n + 1] * big_f(n + 1, &self.spec)?.sqrt() - self.alpha * self.coeffs[n];
            worst = worst.max(d.norm());
        }
        Ok(worst)
    }
}

/// `‖A|α,f⟩ − α|α,f⟩‖` with the state embedded in dimension `dim`.
pub fn eigenvalue_residual(state: &FCoherentState, dim: usize) -> Result<f64> {
    let min = state.cutoff() + 2;
    if dim < min {
        return Err(Error::Dimension { dim, min });
    }
    let a = deformed_annihilation(dim, &state.spec)?;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[..state.coeffs.len()].copy_from_slice(&state.coeffs);
    let av = a.apply(&v);
    Ok(av.iter().zip(&v).map(|(x, y)| (x - state.alpha * y).norm_sqr()).sum::<f64>().sqrt())
}

fn check_compatible(a: &FCoherentState, b: &FCoherentState) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::Incompatible("states use different deformations".into()));
    }
    Ok(())
}

/// `⟨α,f|β,f⟩ = N_{f,α} N_{f,β} Σ (α*β)^n / (n! [f(n)]!²)` to the common cutoff.
pub fn scalar_product(a: &FCoherentState, b: &FCoherentState) -> Result<Complex64> {
    check_compatible(a, b)?;
    let m = a.cutoff().min(b.cutoff());
    let zero = Complex64::new(0.0, 0.0);
    if a.alpha == zero || b.alpha == zero {
        // only the vacuum term survives
        return Ok(a.coeffs[0].conj() * b.coeffs[0]);
    }
    let ab = a.alpha.conj() * b.alpha;
    let ln_ab = ab.norm().ln();
    let arg = ab.arg();
    let mut ln_fact = 0.0;
    let mut sum = zero;
    for n in 0..=m {
        if n > 0 {
            ln_fact += ln_big_f(n, &a.spec)?;
        }
        let ln_mag = n as f64 * ln_ab - ln_fact + a.ln_norm_factor + b.ln_norm_factor;
        sum += Complex64::from_polar(ln_mag.exp(), n as f64 * arg);
    }
    Ok(sum)
}

/// `Σ conj(a_n) b_n` over the common cutoff.
pub fn coefficient_overlap(a: &FCoherentState, b: &FCoherentState) -> Result<Complex64> {
    check_compatible(a, b)?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.conj() * y).sum())
}

/// `f(n) = C_{n−1} / (C_n √n)` for `n = 1..=m`.
///
/// Any nonzero reals are accepted. A sequence whose sign alternates yields
/// negative `f` values, which no positive deformation table can hold.
pub fn f_from_coefficients(c: &[f64]) -> Result<Vec<f64>> {
    ensure(c.len() >= 2, || "need at least C_0 and C_1".into())?;
    if let Some(index) = c.iter().position(|&v| v == 0.0) {
        return Err(Error::Degenerate { index });
    }
    ensure(c.iter().all(|v| v.is_finite()), || "coefficients must be finite".into())?;
    Ok((1..c.len()).map(|n| c[n - 1] / (c[n] * (n as f64).sqrt())).collect())
}

/// Table spec whose f-coherent state at `α = 1` has coefficients
/// proportional to `c`. `f(0)` does not enter the recurrence and is set to 1.
pub fn spec_from_coefficients(c: &[f64]) -> Result<DeformationSpec> {
    let mut values = vec![1.0];
    values.extend(f_from_coefficients(c)?);
    DeformationSpec::custom(values)
}

/// `Σ_{n ≤ cutoff} z^n / [n]!` with each term built from the previous one,
/// so neither `z^n` nor `[n]!` is formed on its own.
fn q_exponential(z: Complex64, spec: &DeformationSpec, cutoff: usize) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..=cutoff {
        term *= z / big_f(n, spec)?;
        sum += term;
        if term.norm() <= f64::EPSILON * 1e-3 * sum.norm() && big_f(n, spec)? >= z.norm() {
            break;
        }
    }
    Ok(sum)
}

/// `N_{q,α} = (Σ |α|^{2n} / [n]!)^{−1/2}` over the q-number factorial, summed
/// directly rather than through the recurrence.
pub fn q_coherent_normalization(alpha: Complex64, lambda: f64, cutoff: usize) -> Result<f64> {
    let spec = DeformationSpec::q(lambda)?;
    Ok(q_exponential(Complex64::new(alpha.norm_sqr(), 0.0), &spec, cutoff)?.re.powf(-0.5))
}

/// `⟨α|β⟩_λ = N_{q,α} N_{q,β} Σ (α*β)^n / [n]!` summed directly.
pub fn q_scalar_product(alpha: Complex64, beta: Complex64, lambda: f64, cutoff: usize) -> Result<Complex64> {
    let spec = DeformationSpec::q(lambda)?;
    let sum = q_exponential(alpha.conj() * beta, &spec, cutoff)?;
    Ok(sum * q_coherent_normalization(alpha, lambda, cutoff)? * q_coherent_normalization(beta, lambda, cutoff)?)
}

/// Summary used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentSummary {
    pub norm: f64,
    pub residual: f64,
    pub cutoff: usize,
    pub tail_bound: f64,
    pub norm_factor: f64,
}

pub fn summarize(state: &FCoherentState) -> Result<CoherentSummary> {
    Ok(CoherentSummary {
        norm: state.norm_sqr(),
        residual: eigenvalue_residual(state, state.cutoff() + 2)?,
        cutoff: state.cutoff(),
        tail_bound: state.tail_bound(),
        norm_factor: state.norm_factor(),
    })
}
