//! Statistical mechanics of a single q-oscillator in units `k_B = ħ = ω = 1`.

use serde::Serialize;

use crate::deformation::q_number;
use crate::error::ensure;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Energy levels entering the partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumConvention {
    /// `E_n = ½(F(n) + F(n+1))`, the spectrum of `(AA† + A†A)/2`.
    SymmetricOrdering,
    /// `E_n = F(n)`, the spectrum of `A†A`.
    NumberOperator,
}

impl SpectrumConvention {
    pub fn level(self, n: usize, lambda: f64) -> f64 {
        let n = n as f64;
        match self {
            SpectrumConvention::SymmetricOrdering => 0.5 * (q_number(n, lambda) + q_number(n + 1.0, lambda)),
            SpectrumConvention::NumberOperator => q_number(n, lambda),
        }
    }

    fn ground(self) -> f64 {
        match self {
            SpectrumConvention::SymmetricOrdering => 0.5,
            SpectrumConvention::NumberOperator => 0.0,
        }
    }
}

/// `E_0..=E_{n_max}`.
pub fn energy_levels(n_max: usize, lambda: f64, convention: SpectrumConvention) -> Result<Vec<f64>> {
    ensure(n_max >= 1, || "n_max must be at least 1".into())?;
    ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let e = convention.level(n, lambda);
        if !e.is_finite() {
            return Err(Error::Saturation { last_finite: n.saturating_sub(1) });
        }
        out.push(e);
    }
    Ok(out)
}

/// Safety stop for the level sum; reached only for `λ` so small that the
/// spectrum is practically linear at a very high temperature.
const MAX_TERMS: usize = 20_000_000;
const TAIL_TOL: f64 = 1e-15;

/// Level sums relative to the ground level: `S_k = Σ n^k e^{−β(E_n − E_0)}`
/// and the cutoff used.
#[derive(Debug, Clone, Copy)]
struct Sums {
    ln_s: f64,
    mean_n: f64,
    cutoff: usize,
}

fn check_temperature(t: f64) -> Result<()> {
    ensure(t > 0.0 && t.is_finite(), || format!("temperature must be positive, got {t}"))
}

fn sums(beta: f64, lambda: f64, convention: SpectrumConvention) -> Result<Sums> {
    if lambda == 0.0 {
        // geometric series: S = 1/(1 − e^{−β}), ⟨n⟩ = 1/(e^β − 1)
        return Ok(Sums { ln_s: -(-(-beta).exp()).ln_1p(), mean_n: 1.0 / beta.exp_m1(), cutoff: 0 });
    }
    let e0 = convention.level(0, lambda);
    let mut s = 1.0;
    let mut sn = 0.0;
    let mut prev = 1.0;
    for n in 1..MAX_TERMS {
        let e = convention.level(n, lambda);
        let w = if e.is_finite() { (-beta * (e - e0)).exp() } else { 0.0 };
        s += w;
        sn += n as f64 * w;
        let ratio = w / prev;
        // gaps grow with n, so the ratio of successive terms keeps falling
        if w == 0.0 || (ratio < 1.0 && w * ratio / (1.0 - ratio) < TAIL_TOL * s) {
            return Ok(Sums { ln_s: s.ln(), mean_n: sn / s, cutoff: n });
        }
        prev = w;
    }
    Err(Error::Solver { solver: "partition sum", residual: prev / s })
}

/// `ln Z = −β E_0 + ln Σ e^{−β(E_n − E_0)}`.
pub fn log_partition(t: f64, lambda: f64, convention: SpectrumConvention) -> Result<(f64, usize)> {
    check_temperature(t)?;
    ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
    let beta = 1.0 / t;
    let s = sums(beta, lambda, convention)?;
    let e0 = if lambda == 0.0 { convention.ground() } else { convention.level(0, lambda) };
    Ok((-beta * e0 + s.ln_s, s.cutoff))
}

/// `Z(T) = Σ e^{−E_n/T}` and the number of levels summed (0 when the
/// undeformed closed form is used).
pub fn partition_function(t: f64, lambda: f64, convention: SpectrumConvention) -> Result<(f64, usize)> {
    let (ln_z, cutoff) = log_partition(t, lambda, convention)?;
    Ok((ln_z.exp(), cutoff))
}

/// `⟨n⟩ = Σ n e^{−βE_n} / Z`.
pub fn mean_occupation(t: f64, lambda: f64, convention: SpectrumConvention) -> Result<f64> {
    check_temperature(t)?;
    ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
    Ok(sums(1.0 / t, lambda, convention)?.mean_n)
}

/// `C = β² ∂²ln Z/∂β²` by central differences with step `β·2e-3` and one
/// Richardson step.
///
/// The ground-level term `−βE_0` is linear in `β` and dropped before
/// differencing.
pub fn specific_heat(t: f64, lambda: f64, convention: SpectrumConvention) -> Result<f64> {
    check_temperature(t)?;
    ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
    let beta = 1.0 / t;
    let g = |b: f64| sums(b, lambda, convention).map(|s| s.ln_s);
    let g0 = g(beta)?;
    let second = |h: f64| -> Result<f64> { Ok((g(beta + h)? - 2.0 * g0 + g(beta - h)?) / (h * h)) };
    let h = beta * 2e-3;
    let d1 = second(h)?;
    let d2 = second(0.5 * h)?;
    Ok(beta * beta * (4.0 * d2 - d1) / 3.0)
}

/// `β² Var(E)`, the same quantity without differencing.
pub fn specific_heat_variance(t: f64, lambda: f64, convention: SpectrumConvention) -> Result<f64> {
    check_temperature(t)?;
    let beta = 1.0 / t;
    let (_, cutoff) = log_partition(t, lambda, convention)?;
    let n_max = if cutoff == 0 { (60.0 * t).ceil() as usize + 60 } else { cutoff };
    let levels = energy_levels(n_max, lambda, convention)?;
    let w: Vec<f64> = levels.iter().map(|e| (-beta * (e - levels[0])).exp()).collect();
    let s: f64 = w.iter().sum();
    let mean = levels.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / s;
    let var = levels.iter().zip(&w).map(|(e, w)| (e - mean).powi(2) * w).sum::<f64>() / s;
    Ok(beta * beta * var)
}

/// `1/(e^x − 1)` with `x = 1/T`.
pub fn bose_einstein(t: f64) -> f64 {
    1.0 / (1.0 / t).exp_m1()
}

/// `−x (e^{3x} + 4e^{2x} + e^x) / (e^x − 1)⁴`, written in `z = e^{−x}`.
pub fn planck_correction_coefficient(x: f64) -> f64 {
    let z = (-x).exp();
    let one_minus_z = -(-x).exp_m1();
    -x * (z + 4.0 * z * z + z * z * z) / one_minus_z.powi(4)
}

/// Small-λ deformed Planck distribution
/// `1/(e^x − 1) − λ² x (e^{3x} + 4e^{2x} + e^x)/(e^x − 1)⁴`, `x = 1/T`.
pub fn deformed_planck_approx(t: f64, lambda: f64) -> Result<f64> {
    check_temperature(t)?;
    Ok(bose_einstein(t) + lambda * lambda * planck_correction_coefficient(1.0 / t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanckPoint {
    pub lambda: f64,
    pub mean_n: f64,
    /// `(⟨n⟩ − Bose)/λ²`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanckReport {
    pub x: f64,
    pub convention: SpectrumConvention,
    pub points: Vec<PlanckPoint>,
    /// Richardson estimates `(λ_a² r_b − λ_b² r_a)/(λ_a² − λ_b²)` from
    /// consecutive pairs of the grid, largest `λ` first.
    pub richardson: Vec<f64>,
    /// The last Richardson estimate.
    pub coefficient: f64,
    /// Relative change between the last two Richardson estimates.
    pub stabilization: f64,
    /// The last two Richardson estimates agree to three significant digits.
    pub stabilized: bool,
    /// `r(λ₁)/r(λ₂)` of `r(λ) = ⟨n⟩ − Bose − coefficient·λ²` for the two
    /// largest `λ`; near 16 when the remainder is `O(λ⁴)`.
    pub scaling_ratio: f64,
    pub planck_correction_coefficient: f64,
    pub ratio_to_closed_form: f64,
    pub matches_closed_form: bool,
}

/// Extracts the `λ²` coefficient of `⟨n⟩ − Bose` at `x = ħω/T` from exact
/// level sums and compares it with [`planck_correction_coefficient`].
pub fn planck_coefficient_check(lambdas: &[f64], x: f64, convention: SpectrumConvention) -> Result<PlanckReport> {
    ensure(x > 0.0 && x.is_finite(), || format!("x must be positive, got {x}"))?;
    ensure(lambdas.len() >= 3, || "need at least three lambda values".into())?;
    ensure(lambdas.iter().all(|&l| l > 0.0 && l <= 0.1), || "lambda grid must lie in (0, 0.1]".into())?;
    let mut grid = lambdas.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let t = 1.0 / x;
    let bose = bose_einstein(t);
    let points: Vec<PlanckPoint> = grid
        .iter()
        .map(|&l| {
            let mean_n = mean_occupation(t, l, convention)?;
            Ok(PlanckPoint { lambda: l, mean_n, ratio: (mean_n - bose) / (l * l) })
        })
        .collect::<Result<_>>()?;
    let richardson: Vec<f64> = points
        .windows(2)
        .map(|w| {
            let (la2, lb2) = (w[0].lambda * w[0].lambda, w[1].lambda * w[1].lambda);
            (la2 * w[1].ratio - lb2 * w[0].ratio) / (la2 - lb2)
        })
        .collect();
    let k = richardson.len();
    let coefficient = richardson[k - 1];
    let prev = richardson[k - 2];
    let stabilization = ((coefficient - prev) / coefficient).abs();
    let remainder = |p: &PlanckPoint| p.mean_n - bose - coefficient * p.lambda * p.lambda;
    let scaling_ratio = remainder(&points[0]) / remainder(&points[1]);
    let closed = planck_correction_coefficient(x);
    let ratio_to_closed_form = coefficient / closed;
    Ok(PlanckReport {
        x,
        convention,
        stabilized: agree_to_digits(prev, coefficient, 3),
        stabilization,
        richardson,
        scaling_ratio,
        coefficient,
        planck_correction_coefficient: closed,
        ratio_to_closed_form,
        matches_closed_form: (ratio_to_closed_form - 1.0).abs() <= 1e-3,
        points,
    })
}

/// `|a − b|` is at most half a unit in the `digits`-th significant digit of `b`.
pub fn agree_to_digits(a: f64, b: f64, digits: i32) -> bool {
    if b == 0.0 {
        return a == 0.0;
    }
    let unit = 10f64.powi(b.abs().log10().floor() as i32 + 1 - digits);
    (a - b).abs() <= 0.5 * unit
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlueShift {
    /// `cosh(λn) − 1`.
    pub exact: f64,
    /// `λ²n²/2`.
    pub approx: f64,
}

/// Relative frequency shift of a mode with `n` quanta.
pub fn blue_shift(n: f64, lambda: f64) -> Result<BlueShift> {
    ensure(n >= 0.0 && n.is_finite(), || format!("photon number must be >= 0, got {n}"))?;
    ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
    let s = (0.5 * lambda * n).sinh();
    Ok(BlueShift { exact: 2.0 * s * s, approx: 0.5 * (lambda * n).powi(2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoRow {
    pub t: f64,
    pub z: f64,
    pub mean_n: f64,
    pub c: f64,
    pub planck_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoTable {
    pub lambda: f64,
    pub convention: SpectrumConvention,
    pub cutoff_used: usize,
    pub rows: Vec<ThermoRow>,
}

/// `points` temperatures spaced evenly in `ln T` over `[t_min, t_max]`.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    check_temperature(t_min)?;
    ensure(t_max >= t_min && t_max.is_finite(), || format!("t_max must be >= t_min, got {t_max}"))?;
    ensure(points >= 1, || "need at least one point".into())?;
    if points == 1 {
        return Ok(vec![t_min]);
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..points)
        .map(|i| match i {
            0 => t_min,
            _ if i == points - 1 => t_max,
            _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}

/// One row per temperature, computed independently.
pub fn thermo_table(temps: &[f64], lambda: f64, convention: SpectrumConvention, exec: Execution) -> Result<ThermoTable> {
    let rows = par::map(exec, temps, |&t| -> Result<(ThermoRow, usize)> {
        let (z, cutoff) = partition_function(t, lambda, convention)?;
        Ok((
            ThermoRow {
                t,
                z,
                mean_n: mean_occupation(t, lambda, convention)?,
                c: specific_heat(t, lambda, convention)?,
                planck_approx: deformed_planck_approx(t, lambda)?,
            },
            cutoff,
        ))
    });
    let rows: Vec<(ThermoRow, usize)> = rows.into_iter().collect::<Result<_>>()?;
    Ok(ThermoTable {
        lambda,
        convention,
        cutoff_used: rows.iter().map(|r| r.1).max().unwrap_or(0),
        rows: rows.into_iter().map(|r| r.0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use SpectrumConvention::*;

    const BOSE_AT_1: f64 = 0.581_976_706_869_326_4;

    #[test]
    fn levels() {
        assert_eq!(energy_levels(3, 0.0, SymmetricOrdering).unwrap(), vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(energy_levels(3, 0.0, NumberOperator).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        let e = energy_levels(1, 1.0, SymmetricOrdering).unwrap();
        assert_relative_eq!(e[1], 0.5 * (1.0 + 3.086_161_269_630_487_6), max_relative = 1e-14);
        assert!(matches!(energy_levels(2000, 1.0, NumberOperator), Err(Error::Saturation { .. })));
        assert!(energy_levels(0, 1.0, NumberOperator).is_err());
    }

    #[test]
    fn undeformed_closed_forms() {
        for t in [0.1, 1.0, 7.0] {
            let b = 1.0 / t;
            let (z, _) = partition_function(t, 0.0, SymmetricOrdering).unwrap();
            assert_relative_eq!(z, (-b / 2.0).exp() / (1.0 - (-b).exp()), max_relative = 1e-12);
            let (z, _) = partition_function(t, 0.0, NumberOperator).unwrap();
            assert_relative_eq!(z, 1.0 / (1.0 - (-b).exp()), max_relative = 1e-12);
            let c = specific_heat(t, 0.0, SymmetricOrdering).unwrap();
            let exact = b * b * b.exp() / b.exp_m1().powi(2);
            assert!((c - exact).abs() <= 1e-6, "T={t}: {c} vs {exact}");
        }
        assert_relative_eq!(mean_occupation(1.0, 0.0, SymmetricOrdering).unwrap(), BOSE_AT_1, max_relative = 1e-14);
        assert!(partition_function(0.0, 0.1, SymmetricOrdering).is_err());
        assert!(partition_function(-1.0, 0.1, SymmetricOrdering).is_err());
    }

    #[test]
    fn small_lambda_approaches_closed_form() {
        for conv in [SymmetricOrdering, NumberOperator] {
            let (z0, _) = partition_function(2.0, 0.0, conv).unwrap();
            let (z, _) = partition_function(2.0, 1e-7, conv).unwrap();
            assert!((z - z0).abs() <= 1e-10 * z0);
            let n0 = mean_occupation(2.0, 0.0, conv).unwrap();
            assert!((mean_occupation(2.0, 1e-7, conv).unwrap() - n0).abs() <= 1e-10);
        }
    }

    #[test]
    fn cutoff_at_unit_temperature() {
        let (z, cutoff) = partition_function(1.0, 1.0, SymmetricOrdering).unwrap();
        assert!(z.is_finite() && z > 0.0);
        assert!(cutoff <= 40, "{cutoff}");
        // same sum with many more levels
        let levels = energy_levels(200, 1.0, SymmetricOrdering).unwrap();
        let direct: f64 = levels.iter().map(|e| (-e).exp()).sum();
        assert_relative_eq!(z, direct, max_relative = 1e-14);
    }

    #[test]
    fn monotone_in_temperature() {
        for conv in [SymmetricOrdering, NumberOperator] {
            let ts = log_grid(0.05, 1e4, 40).unwrap();
            let mut prev_z = 0.0;
            let mut prev_n = -1.0;
            for &t in &ts {
                let (z, _) = partition_function(t, 0.3, conv).unwrap();
                let n = mean_occupation(t, 0.3, conv).unwrap();
                assert!(z > prev_z && n > prev_n, "T={t}");
                prev_z = z;
                prev_n = n;
            }
        }
    }

    #[test]
    fn occupation_limits() {
        assert!(mean_occupation(0.01, 0.5, SymmetricOrdering).unwrap() < 1e-40);
        assert!(mean_occupation(1.0, 0.05, SymmetricOrdering).unwrap() < BOSE_AT_1);
        assert!(mean_occupation(1.0, 0.05, NumberOperator).unwrap() < BOSE_AT_1);
    }

    #[test]
    fn heat_capacity_matches_variance() {
        for (t, l) in [(0.5, 0.3), (10.0, 0.1), (1e3, 0.3), (2.0, 1.0)] {
            for conv in [SymmetricOrdering, NumberOperator] {
                let fd = specific_heat(t, l, conv).unwrap();
                let var = specific_heat_variance(t, l, conv).unwrap();
                assert!((fd - var).abs() <= 1e-5 * var.max(1e-3), "T={t} λ={l}: {fd} vs {var}");
            }
        }
        assert!((specific_heat(1e4, 0.0, SymmetricOrdering).unwrap() - 1.0).abs() < 1e-3);
        assert!(specific_heat(0.02, 0.0, SymmetricOrdering).unwrap() < 1e-15);
    }

    #[test]
    fn heat_capacity_single_peak() {
        let ts = log_grid(0.05, 1e6, 80).unwrap();
        let c: Vec<f64> = ts.iter().map(|&t| specific_heat(t, 0.3, SymmetricOrdering).unwrap()).collect();
        assert!(c.iter().all(|&v| v >= -1e-6));
        let peak = c.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(c[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(c[peak..].windows(2).all(|w| w[1] <= w[0]));
        assert!(peak > 0 && peak < c.len() - 1);
    }

    #[test]
    fn planck_formula() {
        assert_eq!(deformed_planck_approx(1.0, 0.0).unwrap(), bose_einstein(1.0));
        let corr = deformed_planck_approx(1.0, 0.1).unwrap() - BOSE_AT_1;
        assert!((corr - -0.060_065_127_966_367_6).abs() <= 1e-12, "{corr}");
        // low temperature: correction → −λ² x e^{−x}
        let x = 30.0;
        let ratio = planck_correction_coefficient(x) / (-x * (-x).exp());
        assert!((ratio - 1.0).abs() < 1e-11);
    }

    #[test]
    fn planck_coefficient_conventions() {
        let grid = [0.04, 0.02, 0.01];
        for x in [0.5, 1.0, 2.0] {
            let sym = planck_coefficient_check(&grid, x, SymmetricOrdering).unwrap();
            let num = planck_coefficient_check(&grid, x, NumberOperator).unwrap();
            for r in [&sym, &num] {
                // at x = 0.5 the λ⁴ term is still large on this grid
                assert_eq!(r.stabilized, x > 0.5, "x={x}: {:?}", r.richardson);
                assert!((12.0..=20.0).contains(&r.scaling_ratio), "x={x}: {}", r.scaling_ratio);
            }
            // symmetric ordering reproduces half the closed-form coefficient
            assert!((sym.ratio_to_closed_form - 0.5).abs() < 1e-3, "x={x}: {}", sym.ratio_to_closed_form);
            assert!(!sym.matches_closed_form && !num.matches_closed_form);
        }
        assert!(planck_coefficient_check(&[0.2, 0.02, 0.01], 1.0, SymmetricOrdering).is_err());
    }

    #[test]
    fn planck_ratios_match_high_precision_sums() {
        // (⟨n⟩ − Bose)/λ² at x = 0.5, symmetric ordering, 40-digit summation
        let r = planck_coefficient_check(&[0.04, 0.02, 0.01], 0.5, SymmetricOrdering).unwrap();
        let want = [-21.806_914_824_739_735, -23.370_573_406_089_58, -23.837_270_911_435_475];
        for (p, w) in r.points.iter().zip(want) {
            assert_relative_eq!(p.ratio, w, max_relative = 1e-8);
        }
        assert!(agree_to_digits(3.0011, 3.0018, 3));
        assert!(!agree_to_digits(-23.89, -23.99, 3));
    }

    #[test]
    fn blue_shift_values() {
        let b = blue_shift(0.0, 0.3).unwrap();
        assert_eq!((b.exact, b.approx), (0.0, 0.0));
        let b = blue_shift(100.0, 0.001).unwrap();
        assert_relative_eq!(b.exact, 0.005_004_168_055_803_6, max_relative = 1e-12);
        assert_relative_eq!(b.approx, 0.005, max_relative = 1e-14);
        let b = blue_shift(100.0, 0.01).unwrap();
        assert!((b.exact - 0.543_080_634_815_244).abs() <= 1e-12);
        assert!(blue_shift(-1.0, 0.1).is_err());
    }

    #[test]
    fn table_modes_agree() {
        let ts = log_grid(0.5, 1e3, 12).unwrap();
        let a = thermo_table(&ts, 0.2, SymmetricOrdering, Execution::Sequential).unwrap();
        let b = thermo_table(&ts, 0.2, SymmetricOrdering, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 12);
        assert_eq!(a.rows[0].t, 0.5);
        assert_eq!(a.rows[11].t, 1e3);
    }
}
