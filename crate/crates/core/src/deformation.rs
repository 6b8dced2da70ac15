//! Scalar deformation calculus.
//!
//! A deformation is described by a function `f(n)` on the nonnegative
//! integers. The deformed annihilation operator is `A = a f(n̂)`, the spectrum
//! of `A†A` is `F(n) = n f²(n)` and the deformed commutator is
//! `φ(z) = F(z + 1) − F(z)`. For the q-deformation with real parameter `λ`
//! (`q = e^λ`), `F(n)` is the q-number `sinh(nλ) / sinh(λ)`.

use std::io::Read;
use std::path::Path;

use crate::error::ensure;
use crate::{Error, Result};

/// Below this `|λ|` the q-formulas switch to their series limits.
pub const LAMBDA_SWITCH: f64 = 1e-6;

/// `λ / sinh λ`, with the series limit near zero.
pub fn lambda_over_sinh(lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_SWITCH {
        1.0 - lambda * lambda / 6.0
    } else {
        lambda / lambda.sinh()
    }
}

/// `sinh λ / λ`, with the series limit near zero.
pub fn sinh_over_lambda(lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_SWITCH {
        1.0 + lambda * lambda / 6.0
    } else {
        lambda.sinh() / lambda
    }
}

/// The q-number `n_q = sinh(nλ) / sinh λ`, defined for real `n ≥ 0`.
///
/// Even in `λ`. Large arguments use the exponential form so the ratio stays
/// finite as long as the result itself is representable.
pub fn q_number(n: f64, lambda: f64) -> f64 {
    let a = lambda.abs();
    if a < LAMBDA_SWITCH && n * a < 1e-3 {
        let l2 = a * a;
        let n2 = n * n;
        return n * (1.0 + l2 * (n2 - 1.0) / 6.0 + l2 * l2 * (n2 - 1.0) * (3.0 * n2 - 7.0) / 360.0);
    }
    if a == 0.0 {
        return n;
    }
    let na = n * a;
    if na < 700.0 {
        na.sinh() / a.sinh()
    } else {
        ((n - 1.0) * a).exp() * (-(-2.0 * na).exp_m1()) / (-(-2.0 * a).exp_m1())
    }
}

/// `ln n_q`, finite wherever `n λ` is, even after `n_q` overflows.
pub fn ln_q_number(n: f64, lambda: f64) -> f64 {
    let a = lambda.abs();
    let na = n * a;
    if na < 700.0 {
        return q_number(n, lambda).ln();
    }
    (n - 1.0) * a + (-(-2.0 * na).exp()).ln_1p() - (-(-2.0 * a).exp()).ln_1p()
}

/// `(sinh λ(n+1) − sinh λn) / sinh λ`, evaluated as `cosh(λ(n + ½)) / cosh(λ/2)`.
pub fn commutator_function(n: usize, lambda: f64) -> f64 {
    (lambda * (n as f64 + 0.5)).cosh() / (0.5 * lambda).cosh()
}

/// Which deformation function is in use.
#[derive(Debug, Clone, PartialEq)]
pub enum DeformationSpec {
    /// `f ≡ 1`: the undeformed oscillator.
    Identity,
    /// `f(n) = sqrt(n_q / n)` with real parameter `λ`.
    QDeform { lambda: f64 },
    /// Tabulated `f(0..=n_max)`.
    Custom(CustomTable),
}

impl DeformationSpec {
    /// q-deformation; `λ = 0` collapses to [`DeformationSpec::Identity`].
    pub fn q(lambda: f64) -> Result<Self> {
        ensure(lambda.is_finite(), || format!("lambda must be finite, got {lambda}"))?;
        if lambda == 0.0 {
            Ok(DeformationSpec::Identity)
        } else {
            Ok(DeformationSpec::QDeform { lambda })
        }
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        CustomTable::new(values).map(DeformationSpec::Custom)
    }

    /// `λ` for q-deformations, 0 for the identity, `None` for tables.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            DeformationSpec::Identity => Some(0.0),
            DeformationSpec::QDeform { lambda } => Some(*lambda),
            DeformationSpec::Custom(_) => None,
        }
    }

    /// Largest `n` for which `f(n)` is defined.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            DeformationSpec::Custom(t) => Some(t.max_index()),
            _ => None,
        }
    }

    /// Whether `F` is strictly increasing (always true for q and identity).
    pub fn is_invertible(&self) -> bool {
        match self {
            DeformationSpec::Custom(t) => t.monotone,
            _ => true,
        }
    }
}

/// A strictly positive table of `f(n)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomTable {
    values: Vec<f64>,
    monotone: bool,
}

impl CustomTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        ensure(!values.is_empty(), || "deformation table is empty".into())?;
        for (n, v) in values.iter().enumerate() {
            ensure(v.is_finite() && *v > 0.0, || format!("f({n}) = {v} is not strictly positive"))?;
        }
        let monotone = values
            .iter()
            .enumerate()
            .map(|(n, v)| n as f64 * v * v)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] > w[0]);
        Ok(CustomTable { values, monotone })
    }

    /// Parses two-column `n, f(n)` CSV. A header row is optional; rows must
    /// list `n = 0, 1, 2, …` in order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("row {}: expected 2 columns, got {}", row + 1, rec.len())));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            let (n, f) = match parsed {
                (Ok(n), Ok(f)) => (n, f),
                _ if row == 0 => continue,
                _ => return Err(Error::Parse(format!("row {}: cannot parse {:?}", row + 1, rec))),
            };
            if n != values.len() as f64 {
                return Err(Error::Parse(format!("row {}: expected n = {}, got {n}", row + 1, values.len())));
            }
            values.push(f);
        }
        CustomTable::new(values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    fn get(&self, n: usize) -> Result<f64> {
        self.values.get(n).copied().ok_or(Error::OutOfRange { index: n, max: self.max_index() })
    }

    fn big_f(&self, n: usize) -> Result<f64> {
        let f = self.get(n)?;
        Ok(n as f64 * f * f)
    }
}

/// The deformation function `f(n)`.
///
/// For the q-deformation `f(0)` is taken as the `z → 0` limit of
/// `sqrt(sinh(λz) / (z sinh λ))`, i.e. `sqrt(λ / sinh λ)`.
pub fn f_of_n(n: usize, spec: &DeformationSpec) -> Result<f64> {
    match spec {
        DeformationSpec::Identity => Ok(1.0),
        DeformationSpec::QDeform { lambda } => {
            if n == 0 {
                Ok(lambda_over_sinh(*lambda).sqrt())
            } else {
                Ok((q_number(n as f64, *lambda) / n as f64).sqrt())
            }
        }
        DeformationSpec::Custom(t) => t.get(n),
    }
}

/// `f` extended to real arguments: the analytic continuation for the
/// q-deformation, linear interpolation for tables.
pub fn f_continuous(y: f64, spec: &DeformationSpec) -> Result<f64> {
    ensure(y >= 0.0, || format!("f is defined for y >= 0, got {y}"))?;
    match spec {
        DeformationSpec::Identity => Ok(1.0),
        DeformationSpec::QDeform { lambda } => {
            if y == 0.0 {
                Ok(lambda_over_sinh(*lambda).sqrt())
            } else {
                Ok((q_number(y, *lambda) / y).sqrt())
            }
        }
        DeformationSpec::Custom(t) => {
            let lo = y.floor() as usize;
            let frac = y - lo as f64;
            let a = t.get(lo)?;
            if frac == 0.0 {
                return Ok(a);
            }
            let b = t.get(lo + 1)?;
            Ok(a + frac * (b - a))
        }
    }
}

/// `F(n) = n f²(n)`, the spectrum of `A†A`. Equals `n_q` for q-deformations.
pub fn big_f(n: usize, spec: &DeformationSpec) -> Result<f64> {
    match spec {
        DeformationSpec::Identity => Ok(n as f64),
        DeformationSpec::QDeform { lambda } => Ok(q_number(n as f64, *lambda)),
        DeformationSpec::Custom(t) => t.big_f(n),
    }
}

/// `ln F(n)` for `n ≥ 1`.
pub fn ln_big_f(n: usize, spec: &DeformationSpec) -> Result<f64> {
    match spec {
        DeformationSpec::QDeform { lambda } => Ok(ln_q_number(n as f64, *lambda)),
        _ => Ok(big_f(n, spec)?.ln()),
    }
}

/// Inverse of `F` on its continuous extension.
///
/// q-deformation: `y = asinh(x sinh|λ|) / |λ|` in closed form. Tables: the
/// bracketing segment of the piecewise-linear `F` is located by binary search
/// and inverted exactly.
pub fn big_f_inverse(x: f64, spec: &DeformationSpec) -> Result<f64> {
    ensure(x >= 0.0 && x.is_finite(), || format!("F^-1 needs finite x >= 0, got {x}"))?;
    match spec {
        DeformationSpec::Identity => Ok(x),
        DeformationSpec::QDeform { lambda } => {
            let a = lambda.abs();
            if a < LAMBDA_SWITCH && x * a < 1e-3 {
                return Ok(x * (1.0 - a * a * (x * x - 1.0) / 6.0));
            }
            let u = x * a.sinh();
            if u.is_finite() {
                Ok(u.asinh() / a)
            } else {
                // asinh(u) ≈ ln(2u) and ln sinh a = a + ln(1 − e^{−2a}) − ln 2
                let ln_sinh = a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2;
                Ok((std::f64::consts::LN_2 + x.ln() + ln_sinh) / a)
            }
        }
        DeformationSpec::Custom(t) => {
            if !t.monotone {
                return Err(Error::NotInvertible("F(n) = n f(n)^2 is not strictly increasing".into()));
            }
            let fs: Vec<f64> = (0..t.values.len()).map(|n| t.big_f(n).unwrap()).collect();
            let last = *fs.last().unwrap();
            // A†A built from sqrt(F) can land an ulp above the top entry
            let x = if x > last && x <= last * (1.0 + 4.0 * f64::EPSILON) { last } else { x };
            if x > last {
                return Err(Error::OutOfRange { index: t.values.len(), max: t.max_index() });
            }
            let hi = fs.partition_point(|&v| v < x);
            if hi == 0 || fs[hi] == x {
                return Ok(hi as f64);
            }
            let lo = hi - 1;
            Ok(lo as f64 + (x - fs[lo]) / (fs[hi] - fs[lo]))
        }
    }
}

/// `φ(z) = (z+1) f²(z+1) − z f²(z) = F(z+1) − F(z)`.
pub fn phi_of_z(z: usize, spec: &DeformationSpec) -> Result<f64> {
    Ok(big_f(z + 1, spec)? - big_f(z, spec)?)
}

/// Convention for deformed factorials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorialConvention {
    /// `[n]! = F(1) F(2) ⋯ F(n)`; for q-deformations `n_q (n−1)_q ⋯ 1_q`.
    QNumber,
    /// `f(1) f(2) ⋯ f(n)`. `f(0)` is left out, so `[f(0)]! = 1`.
    FProduct,
}

/// Deformed factorial, `1` at `n = 0`.
pub fn f_factorial(n: usize, spec: &DeformationSpec, convention: FactorialConvention) -> Result<f64> {
    let mut acc = 1.0f64;
    for k in 1..=n {
        let factor = match convention {
            FactorialConvention::QNumber => big_f(k, spec)?,
            FactorialConvention::FProduct => f_of_n(k, spec)?,
        };
        let next = acc * factor;
        if !next.is_finite() {
            return Err(Error::Saturation { last_finite: k - 1 });
        }
        acc = next;
    }
    Ok(acc)
}

/// Natural log of [`f_factorial`]; never saturates for finite factors.
pub fn ln_f_factorial(n: usize, spec: &DeformationSpec, convention: FactorialConvention) -> Result<f64> {
    let mut acc = 0.0;
    for k in 1..=n {
        let ln_f = ln_big_f(k, spec)?;
        acc += match convention {
            FactorialConvention::QNumber => ln_f,
            // f(k) = sqrt(F(k)/k)
            FactorialConvention::FProduct => 0.5 * (ln_f - (k as f64).ln()),
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // sinh(2)/sinh(1) = 2 cosh(1), evaluated at 30 digits.
    const TWO_Q_AT_1: f64 = 3.086_161_269_630_487_6;

    fn q(l: f64) -> DeformationSpec {
        DeformationSpec::q(l).unwrap()
    }

    #[test]
    fn q_number_examples() {
        assert_eq!(q_number(5.0, 0.0), 5.0);
        assert_relative_eq!(q_number(1.0, 2.3), 1.0, epsilon = 1e-15);
        assert_relative_eq!(q_number(2.0, 1.0), TWO_Q_AT_1, max_relative = 1e-15);
    }

    #[test]
    fn q_number_near_zero_series() {
        for n in 0..=20 {
            let n = n as f64;
            for l in [1e-7, 5e-7, 1e-3, 0.05, 0.1] {
                let d = (q_number(n, l) - n).abs();
                assert!(d <= l * l * n.powi(3) + 1e-15, "n={n} l={l} d={d}");
            }
        }
        // series branch and direct branch agree across the switch
        assert_relative_eq!(q_number(3.0, 0.999e-6), q_number(3.0, 1.001e-6), max_relative = 1e-12);
    }

    #[test]
    fn q_number_large_argument_stays_finite() {
        let v = q_number(705.0, 1.0);
        assert!(v.is_finite());
        let want = 704.0 + (1.0 - (-2.0f64).exp()).recip().ln();
        assert_relative_eq!(v.ln(), want, max_relative = 1e-12);
        assert_relative_eq!(ln_q_number(705.0, 1.0), want, max_relative = 1e-14);
        assert_relative_eq!(ln_q_number(900.0, 1.0), want + 195.0, max_relative = 1e-14);
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_of_n(3, &DeformationSpec::Identity).unwrap(), 1.0);
        assert_relative_eq!(f_of_n(1, &q(1.0)).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f_of_n(2, &q(1.0)).unwrap(), 1.242_207_967_618_644_7, max_relative = 1e-14);
        // f(0) is the continuous limit
        assert_relative_eq!(f_of_n(0, &q(1.0)).unwrap(), f_continuous(1e-9, &q(1.0)).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn custom_table_out_of_range() {
        let spec = DeformationSpec::custom(vec![1.0, 1.0, 1.1]).unwrap();
        assert_eq!(f_of_n(3, &spec), Err(Error::OutOfRange { index: 3, max: 2 }));
        assert!(DeformationSpec::custom(vec![1.0, 0.0]).is_err());
        assert!(DeformationSpec::custom(vec![]).is_err());
    }

    #[test]
    fn big_f_examples() {
        assert_eq!(big_f(7, &DeformationSpec::Identity).unwrap(), 7.0);
        assert_relative_eq!(big_f(2, &q(1.0)).unwrap(), TWO_Q_AT_1, max_relative = 1e-15);
        let f2 = f_of_n(2, &q(1.0)).unwrap();
        assert_relative_eq!(big_f(2, &q(1.0)).unwrap(), 2.0 * f2 * f2, max_relative = 1e-14);
        for spec in [DeformationSpec::Identity, q(0.3), DeformationSpec::custom(vec![2.0, 1.0]).unwrap()] {
            assert_eq!(big_f(0, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(big_f_inverse(4.0, &DeformationSpec::Identity).unwrap(), 4.0);
        assert_relative_eq!(big_f_inverse(TWO_Q_AT_1, &q(1.0)).unwrap(), 2.0, max_relative = 1e-14);
        for l in [0.1, 0.5, 1.0] {
            for n in 0..=50 {
                let y = big_f_inverse(big_f(n, &q(l)).unwrap(), &q(l)).unwrap();
                assert!((y - n as f64).abs() <= 1e-9, "l={l} n={n} y={y}");
            }
        }
    }

    #[test]
    fn inverse_handles_overflowing_product() {
        let spec = q(5.0);
        let x = 1e306;
        let y = big_f_inverse(x, &spec).unwrap();
        assert_relative_eq!(q_number(y, 5.0), x, max_relative = 1e-10);
    }

    #[test]
    fn inverse_custom_tables() {
        let spec = DeformationSpec::custom(vec![1.0, 1.0, 1.2, 1.3]).unwrap();
        for n in 0..=3 {
            let x = big_f(n, &spec).unwrap();
            assert_relative_eq!(big_f_inverse(x, &spec).unwrap(), n as f64, epsilon = 1e-12);
        }
        assert!(matches!(big_f_inverse(100.0, &spec), Err(Error::OutOfRange { .. })));
        let bumpy = DeformationSpec::custom(vec![1.0, 2.0, 0.5]).unwrap();
        assert!(!bumpy.is_invertible());
        assert!(matches!(big_f_inverse(1.0, &bumpy), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn phi_and_commutator_examples() {
        assert_eq!(phi_of_z(9, &DeformationSpec::Identity).unwrap(), 1.0);
        assert_relative_eq!(phi_of_z(1, &q(1.0)).unwrap(), TWO_Q_AT_1 - 1.0, max_relative = 1e-14);
        assert_eq!(commutator_function(5, 0.0), 1.0);
        assert_relative_eq!(commutator_function(0, 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(commutator_function(1, 1.0), TWO_Q_AT_1 - 1.0, max_relative = 1e-14);
        for l in [0.1, 0.5, 1.0, -0.7] {
            for z in 0..=20 {
                let a = phi_of_z(z, &q(l)).unwrap();
                let b = commutator_function(z, l);
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn factorial_examples() {
        for spec in [DeformationSpec::Identity, q(1.0)] {
            for c in [FactorialConvention::QNumber, FactorialConvention::FProduct] {
                assert_eq!(f_factorial(0, &spec, c).unwrap(), 1.0);
            }
        }
        assert_eq!(f_factorial(4, &DeformationSpec::Identity, FactorialConvention::FProduct).unwrap(), 1.0);
        assert_relative_eq!(
            f_factorial(2, &q(1.0), FactorialConvention::QNumber).unwrap(),
            TWO_Q_AT_1,
            max_relative = 1e-14
        );
        // the q-convention is n! times the square of the f-product
        let s = q(0.8);
        for n in 0..12 {
            let qn = f_factorial(n, &s, FactorialConvention::QNumber).unwrap();
            let fp = f_factorial(n, &s, FactorialConvention::FProduct).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert_relative_eq!(qn, fact * fp * fp, max_relative = 1e-12);
        }
    }

    #[test]
    fn factorial_recurrence() {
        let s = q(0.6);
        for n in 0..15 {
            let a = f_factorial(n, &s, FactorialConvention::FProduct).unwrap();
            let b = f_factorial(n + 1, &s, FactorialConvention::FProduct).unwrap();
            assert_relative_eq!(b / a, f_of_n(n + 1, &s).unwrap(), max_relative = 1e-13);
            let a = f_factorial(n, &s, FactorialConvention::QNumber).unwrap();
            let b = f_factorial(n + 1, &s, FactorialConvention::QNumber).unwrap();
            assert_relative_eq!(b / a, big_f(n + 1, &s).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn factorial_saturates() {
        match f_factorial(400, &q(2.0), FactorialConvention::QNumber) {
            Err(Error::Saturation { last_finite }) => assert!(last_finite > 10 && last_finite < 400),
            other => panic!("expected saturation, got {other:?}"),
        }
        assert!(ln_f_factorial(400, &q(2.0), FactorialConvention::QNumber).unwrap().is_finite());
    }

    #[test]
    fn csv_tables() {
        let with_header = "n,f\r\n0,1.0\r\n1,1.5\r\n2,1.25\r\n";
        let t = CustomTable::from_csv_reader(with_header.as_bytes()).unwrap();
        assert_eq!(t.values(), &[1.0, 1.5, 1.25]);
        let bare = "0, 2\n1, 1\n";
        assert_eq!(CustomTable::from_csv_reader(bare.as_bytes()).unwrap().values(), &[2.0, 1.0]);
        assert!(CustomTable::from_csv_reader("0,1\n2,1\n".as_bytes()).is_err());
        assert!(CustomTable::from_csv_reader("0,1\n1,x\n".as_bytes()).is_err());
        assert!(CustomTable::from_csv_reader("0,1,3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn q_number_is_even_in_lambda(n in 0.0f64..40.0, l in -3.0f64..3.0) {
            let a = q_number(n, l);
            let b = q_number(n, -l);
            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }

        #[test]
        fn inverse_roundtrip_on_reals(y in 0.0f64..30.0, l in -2.0f64..2.0) {
            let spec = DeformationSpec::q(l).unwrap();
            let x = q_number(y, l);
            let back = big_f_inverse(x, &spec).unwrap();
            prop_assert!((back - y).abs() <= 1e-9 * y.max(1.0));
        }
    }
}
