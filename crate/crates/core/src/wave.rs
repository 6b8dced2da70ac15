//! q-deformed wave equation on a periodic 1-D domain.
//!
//! Cauchy data `(φ, π)` fixes the constant of the motion
//! `μ = Σ_{k≠0} (1/(2|k|)) [k² |φ̂_k|² + |π̂_k|² / f_q²(μ)]` and with it the
//! propagation speed `f_q(μ) = (λ / sinh λ) cosh(λμ)`. The field then obeys
//! `φ̈ = f_q²(μ) φ''` and every Fourier mode is a harmonic oscillator of
//! frequency `|k| f_q(μ)`.
//!
//! Transform convention: `φ̂_k = (1/N) Σ_j φ_j e^{−2πi jk/N}`; `k` in the
//! formulas is the physical wavenumber `2π m / L` for integer mode `m`.

use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::classical::omega_q;
use crate::error::ensure;
use crate::par::{self, Execution};
use crate::{roots, Error, Result};

/// Signed integer mode for FFT slot `j` of an `n`-point transform.
pub fn mode_number(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Fourier coefficients in FFT order with their physical wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coeffs: Vec<Complex64>,
    pub wavenumbers: Vec<f64>,
}

impl Spectrum {
    /// Coefficient of integer mode `m` (negative modes wrap).
    pub fn mode(&self, m: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        self.coeffs[m.rem_euclid(n) as usize]
    }

    /// `max |φ̂_k − conj(φ̂_{−k})|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.coeffs.len();
        (0..n)
            .map(|j| (self.coeffs[j] - self.coeffs[(n - j) % n].conj()).norm())
            .fold(0.0, f64::max)
    }
}

struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let n = values.len() as f64;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf.iter_mut().for_each(|c| *c /= n);
        buf
    }

    fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    // the Nyquist slot maps to +N/2
    (0..n).map(|j| 2.0 * std::f64::consts::PI * mode_number(j, n) as f64 / length).collect()
}

/// Spectrum of grid values under the crate's transform convention.
pub fn fourier_modes(values: &[f64], length: f64) -> Spectrum {
    let t = Transforms::new(values.len());
    Spectrum { coeffs: t.forward(values), wavenumbers: wavenumbers(values.len(), length) }
}

/// Solves the scalar equation for `μ` given the spectra of `φ` and `π`.
/// Returns `(μ, f_q(μ))`.
///
/// With `F_k = π̂_k / f_q(μ)` substituted, the right side
/// `G(μ) = a + b / f_q²(μ)` is continuous and nonincreasing for `μ ≥ 0`, so
/// the root is bracketed by `[0, G(0)]`.
pub fn solve_mu(phi_hat: &[Complex64], pi_hat: &[Complex64], wavenumbers: &[f64], lambda: f64) -> Result<(f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    for ((ph, pi), k) in phi_hat.iter().zip(pi_hat).zip(wavenumbers) {
        let k = k.abs();
        if k == 0.0 {
            continue;
        }
        a += 0.5 * k * ph.norm_sqr();
        b += 0.5 * pi.norm_sqr() / k;
    }
    let g = |mu: f64| {
        let f = omega_q(mu, lambda);
        a + b / (f * f)
    };
    let upper = g(0.0);
    if upper == 0.0 {
        return Ok((0.0, omega_q(0.0, lambda)));
    }
    let mu = roots::bisect(|mu| mu - g(mu), 0.0, upper, 1e-16, 400).map_err(|e| match e {
        Error::Solver { residual, .. } => Error::Solver { solver: "wave invariant solver", residual },
        other => other,
    })?;
    Ok((mu, omega_q(mu, lambda)))
}

/// Real periodic field with its time derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveField {
    length: f64,
    lambda: f64,
    time: f64,
    phi: Vec<f64>,
    pi: Vec<f64>,
    mu: f64,
    speed: f64,
}

const ZERO_MODE_TOL: f64 = 1e-10;

impl WaveField {
    /// Validates the grid and zero-mean condition and computes `μ` and the speed.
    pub fn new(length: f64, phi: Vec<f64>, pi: Vec<f64>, lambda: f64) -> Result<Self> {
        let n = phi.len();
        ensure(n >= 4 && n.is_power_of_two(), || format!("grid size {n} must be a power of two >= 4"))?;
        ensure(pi.len() == n, || format!("phi has {n} points but pi has {}", pi.len()))?;
        ensure(length > 0.0 && length.is_finite(), || format!("length must be positive, got {length}"))?;
        ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
        ensure(phi.iter().chain(&pi).all(|v| v.is_finite()), || "field values must be finite".into())?;
        let t = Transforms::new(n);
        let phi_hat = t.forward(&phi);
        let pi_hat = t.forward(&pi);
        for (hat, vals) in [(&phi_hat, &phi), (&pi_hat, &pi)] {
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let zero = hat[0].norm();
            if zero > ZERO_MODE_TOL * scale {
                return Err(Error::ZeroMode { magnitude: zero });
            }
        }
        let (mu, speed) = solve_mu(&phi_hat, &pi_hat, &wavenumbers(n, length), lambda)?;
        Ok(WaveField { length, lambda, time: 0.0, phi, pi, mu, speed })
    }

    /// Samples `phi_fn` and `pi_fn` on `x_j = j L / n`.
    pub fn from_fn(
        n: usize,
        length: f64,
        lambda: f64,
        phi_fn: impl Fn(f64) -> f64,
        pi_fn: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let xs: Vec<f64> = (0..n).map(|j| j as f64 * length / n as f64).collect();
        Self::new(length, xs.iter().map(|&x| phi_fn(x)).collect(), xs.iter().map(|&x| pi_fn(x)).collect(), lambda)
    }

    /// Reads `x, phi, pi` CSV (header optional). `x` must be the uniform grid
    /// `j L / N`.
    pub fn from_csv_reader<R: Read>(reader: R, length: f64, lambda: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows: Vec<[f64; 3]> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("row {}: expected 3 columns (x, phi, pi)", i + 1)));
            }
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) => rows.push([v[0], v[1], v[2]]),
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("row {}: {e}", i + 1))),
            }
        }
        let n = rows.len();
        for (j, r) in rows.iter().enumerate() {
            let x = j as f64 * length / n as f64;
            if (r[0] - x).abs() > 1e-9 * length.max(1.0) {
                return Err(Error::Parse(format!("row {}: x = {} but the grid point is {x}", j + 1, r[0])));
            }
        }
        Self::new(length, rows.iter().map(|r| r[1]).collect(), rows.iter().map(|r| r[2]).collect(), lambda)
    }

    pub fn grid_size(&self) -> usize {
        self.phi.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.phi.len() as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.grid_size()).map(|j| j as f64 * self.spacing()).collect()
    }

    pub fn phi_spectrum(&self) -> Spectrum {
        fourier_modes(&self.phi, self.length)
    }

    pub fn pi_spectrum(&self) -> Spectrum {
        fourier_modes(&self.pi, self.length)
    }

    /// `½ Σ_k [k² |φ̂_k|² + |π̂_k|² / f_q²(μ)]`.
    pub fn energy(&self) -> f64 {
        let ph = self.phi_spectrum();
        let pi = self.pi_spectrum();
        let c2 = self.speed * self.speed;
        0.5 * ph
            .coeffs
            .iter()
            .zip(&pi.coeffs)
            .zip(&ph.wavenumbers)
            .map(|((a, b), k)| k * k * a.norm_sqr() + b.norm_sqr() / c2)
            .sum::<f64>()
    }

    /// Largest stable step for the leapfrog scheme, `dx / (π · speed)`.
    pub fn stability_bound(&self) -> f64 {
        self.spacing() / (std::f64::consts::PI * self.speed)
    }

    fn with_data(&self, time: f64, phi: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        let mut f = WaveField::new(self.length, phi, pi, self.lambda)?;
        f.time = time;
        Ok(f)
    }

    /// Solution at `self.time + t` from d'Alembert's formula: the data are
    /// split into right- and left-moving profiles which are translated by
    /// `∓ speed · t`.
    pub fn dalembert(&self, t: f64) -> Vec<f64> {
        let n = self.grid_size();
        let tr = Transforms::new(n);
        let ph = tr.forward(&self.phi);
        let pi = tr.forward(&self.pi);
        let ks = wavenumbers(n, self.length);
        let c = self.speed;
        let i = Complex64::new(0.0, 1.0);
        let moved: Vec<Complex64> = (0..n)
            .map(|j| {
                let k = ks[j];
                if k == 0.0 {
                    return ph[j] + pi[j] * t;
                }
                let right = 0.5 * (ph[j] + i * pi[j] / (c * k));
                let left = 0.5 * (ph[j] - i * pi[j] / (c * k));
                right * Complex64::from_polar(1.0, -k * c * t) + left * Complex64::from_polar(1.0, k * c * t)
            })
            .collect();
        tr.inverse(&moved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Each mode is rotated exactly; `dt` only sets the output times.
    Spectral,
    /// Velocity-Verlet stepping with a spectral second derivative; kept for
    /// cross-checking and subject to the stability bound.
    Leapfrog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub scheme: Scheme,
    pub exec: Execution,
    /// Keep every output snapshot (otherwise only invariants are tracked).
    pub record: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { scheme: Scheme::Spectral, exec: Execution::default(), record: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSnapshot {
    pub t: f64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveEvolution {
    pub snapshots: Vec<WaveSnapshot>,
    pub final_field: WaveField,
    /// `max_t |μ(t) − μ(0)|` with `μ(t)` recomputed from the evolved grid data.
    pub mu_drift: f64,
    /// `max_t |E(t) − E(0)|`.
    pub energy_drift: f64,
}

fn output_times(t_end: f64, dt: f64) -> Vec<f64> {
    let full = (t_end / dt).floor() as usize;
    let mut ts: Vec<f64> = (1..=full).map(|i| i as f64 * dt).collect();
    if t_end - full as f64 * dt > dt * 1e-9 {
        ts.push(t_end);
    }
    ts
}

impl WaveField {
    /// Spectral evolution to `time + t_end`, sampled every `dt`.
    pub fn evolve(&self, t_end: f64, dt: f64) -> Result<WaveEvolution> {
        self.evolve_with(t_end, dt, EvolveOptions::default())
    }

    pub fn evolve_with(&self, t_end: f64, dt: f64, opts: EvolveOptions) -> Result<WaveEvolution> {
        ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be positive, got {dt}"))?;
        ensure(t_end >= 0.0 && t_end.is_finite(), || format!("t_end must be >= 0, got {t_end}"))?;
        match opts.scheme {
            Scheme::Spectral => self.evolve_spectral(t_end, dt, opts),
            Scheme::Leapfrog => {
                let bound = self.stability_bound();
                if dt > bound {
                    return Err(Error::Stability { dt, bound });
                }
                self.evolve_leapfrog(t_end, dt, opts)
            }
        }
    }

    fn finish(&self, states: impl Iterator<Item = Result<WaveField>>, record: bool) -> Result<WaveEvolution> {
        let e0 = self.energy();
        let mut snapshots = Vec::new();
        let mut mu_drift = 0.0f64;
        let mut energy_drift = 0.0f64;
        let mut last = self.clone();
        for f in states {
            let f = f?;
            mu_drift = mu_drift.max((f.mu - self.mu).abs());
            energy_drift = energy_drift.max((f.energy() - e0).abs());
            if record {
                snapshots.push(WaveSnapshot { t: f.time, phi: f.phi.clone(), pi: f.pi.clone(), mu: f.mu });
            }
            last = f;
        }
        Ok(WaveEvolution { snapshots, final_field: last, mu_drift, energy_drift })
    }

    fn evolve_spectral(&self, t_end: f64, dt: f64, opts: EvolveOptions) -> Result<WaveEvolution> {
        let n = self.grid_size();
        let tr = Transforms::new(n);
        let ph0 = tr.forward(&self.phi);
        let pi0 = tr.forward(&self.pi);
        let ks = wavenumbers(n, self.length);
        let c = self.speed;
        let states = output_times(t_end, dt).into_iter().map(|t| {
            let modes = par::map_range(opts.exec, n, |j| {
                let w = ks[j].abs() * c;
                if w == 0.0 {
                    return (ph0[j] + pi0[j] * t, pi0[j]);
                }
                let (s, co) = (w * t).sin_cos();
                (ph0[j] * co + pi0[j] * (s / w), pi0[j] * co - ph0[j] * (w * s))
            });
            let (ph, pi): (Vec<Complex64>, Vec<Complex64>) = modes.into_iter().unzip();
            self.with_data(self.time + t, tr.inverse(&ph), tr.inverse(&pi))
        });
        self.finish(states, opts.record)
    }

    fn evolve_leapfrog(&self, t_end: f64, dt: f64, opts: EvolveOptions) -> Result<WaveEvolution> {
        let n = self.grid_size();
        let tr = Transforms::new(n);
        let ks = wavenumbers(n, self.length);
        let c2 = self.speed * self.speed;
        let accel = |phi: &[f64]| -> Vec<f64> {
            let hat = tr.forward(phi);
            let lap: Vec<Complex64> = par::map_range(opts.exec, n, |j| hat[j] * (-c2 * ks[j] * ks[j]));
            tr.inverse(&lap)
        };
        let mut phi = self.phi.clone();
        let mut pi = self.pi.clone();
        let mut acc = accel(&phi);
        let mut t_now = 0.0;
        let mut out = Vec::new();
        for t in output_times(t_end, dt) {
            let h = t - t_now;
            for j in 0..n {
                pi[j] += 0.5 * h * acc[j];
                phi[j] += h * pi[j];
            }
            acc = accel(&phi);
            for j in 0..n {
                pi[j] += 0.5 * h * acc[j];
            }
            t_now = t;
            out.push(self.with_data(self.time + t, phi.clone(), pi.clone()));
        }
        self.finish(out.into_iter(), opts.record)
    }
}

/// Which way a traveling profile moves: `Plus` is `Φ(x + f_q(μ) t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonReport {
    pub mu: f64,
    pub speed: f64,
    pub shape_error: f64,
}

/// Cauchy data for `Φ(x ± f_q(μ) t)`: `π = ± f_q(μ) Φ'`.
///
/// For a single traveling profile the invariant reduces to
/// `μ = Σ_k |k| |Φ̂_k|²`, independent of the speed, so the data can be built
/// directly; [`WaveField::new`] then recomputes `μ` from them.
pub fn traveling_wave(profile: &[f64], length: f64, direction: Direction, lambda: f64) -> Result<WaveField> {
    let n = profile.len();
    ensure(n >= 4 && n.is_power_of_two(), || format!("grid size {n} must be a power of two >= 4"))?;
    let tr = Transforms::new(n);
    let hat = tr.forward(profile);
    let ks = wavenumbers(n, length);
    let peak = hat.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let alias = (0..n)
        .filter(|&j| mode_number(j, n).unsigned_abs() as usize >= n / 4)
        .fold(0.0f64, |m, j| m.max(hat[j].norm()));
    ensure(alias <= 1e-12 * peak.max(1e-300), || {
        format!("profile is not band-limited below N/4 (high-mode amplitude {alias:e})")
    })?;
    let mu: f64 = hat.iter().zip(&ks).map(|(c, k)| k.abs() * c.norm_sqr()).sum();
    let speed = omega_q(mu, lambda);
    let i = Complex64::new(0.0, 1.0);
    let deriv: Vec<Complex64> = hat.iter().zip(&ks).map(|(c, k)| i * k * c).collect();
    let pi: Vec<f64> = tr.inverse(&deriv).into_iter().map(|v| direction.sign() * speed * v).collect();
    WaveField::new(length, profile.to_vec(), pi, lambda)
}

/// Evolves traveling-wave data to `t_end` and compares with the profile
/// translated by `∓ speed · t_end` (spectral interpolation).
pub fn soliton_check(profile: &[f64], length: f64, direction: Direction, lambda: f64, t_end: f64) -> Result<SolitonReport> {
    let field = traveling_wave(profile, length, direction, lambda)?;
    let evolved = field.evolve_with(
        t_end,
        t_end.max(f64::MIN_POSITIVE),
        EvolveOptions { record: false, ..EvolveOptions::default() },
    )?;
    let n = profile.len();
    let tr = Transforms::new(n);
    let hat = tr.forward(profile);
    let ks = wavenumbers(n, length);
    let shift = direction.sign() * field.speed * t_end;
    let shifted: Vec<Complex64> = hat.iter().zip(&ks).map(|(c, k)| c * Complex64::from_polar(1.0, k * shift)).collect();
    let target = tr.inverse(&shifted);
    let shape_error = evolved
        .final_field
        .phi
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SolitonReport { mu: field.mu, speed: field.speed, shape_error })
}
