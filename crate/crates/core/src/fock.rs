//! Ladder operators in a truncated Fock basis.
//!
//! Identities such as `[a, a†] = 1` only hold in infinite dimension. A `D × D`
//! truncation breaks them on the last basis state, so every check here
//! restricts the comparison to the leading `(D−1) × (D−1)` block.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::deformation::{
    big_f, big_f_inverse, commutator_function, f_continuous, phi_of_z, q_number, DeformationSpec,
};
use crate::error::ensure;
use crate::{Error, Result};

pub const DEFAULT_DIM: usize = 32;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dense complex `D × D` operator in the number basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    /// Products involving this operator are only exact on the first `D − 1`
    /// basis states.
    truncated: bool,
}

impl FockMatrix {
    pub fn zeros(dim: usize) -> Self {
        FockMatrix { dim, entries: vec![ZERO; dim * dim], truncated: false }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries[row * self.dim + col] = v;
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        out.truncated = self.truncated;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &FockMatrix) -> FockMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        out.truncated = self.truncated || rhs.truncated;
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> FockMatrix {
        FockMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * c).collect(),
            truncated: self.truncated,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Row-major `[re, im]` pairs.
    pub fn rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).map(|c| [c.re, c.im]).collect())
            .collect()
    }
}

impl Serialize for FockMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            truncated: bool,
            entries: Vec<Vec<[f64; 2]>>,
        }
        Repr { dim: self.dim, truncated: self.truncated, entries: self.rows() }.serialize(s)
    }
}

/// Normalizable state vector in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
    norm: f64,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        ensure(!amplitudes.is_empty(), || "state has no amplitudes".into())?;
        ensure(amplitudes.iter().all(|c| c.re.is_finite() && c.im.is_finite()), || {
            "state has non-finite amplitudes".into()
        })?;
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Ok(FockState { amplitudes, norm })
    }

    /// The number state `|n⟩` in dimension `dim`.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        ensure(n < dim, || format!("|{n}> does not fit in dimension {dim}"))?;
        let mut amps = vec![ZERO; dim];
        amps[n] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn normalized(&self) -> Result<Self> {
        ensure(self.norm > 0.0, || "cannot normalize the zero vector".into())?;
        Self::new(self.amplitudes.iter().map(|c| c / self.norm).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn expectation(&self, op: &FockMatrix) -> Complex64 {
        let applied = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum()
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        Err(Error::Dimension { dim, min })
    } else {
        Ok(())
    }
}

/// Standard annihilation operator: `(n, n+1) = sqrt(n+1)`.
pub fn annihilation(dim: usize) -> Result<FockMatrix> {
    deformed_annihilation(dim, &DeformationSpec::Identity)
}

/// `A = a f(n̂)`: `(n, n+1) = sqrt(F(n+1))`.
pub fn deformed_annihilation(dim: usize, spec: &DeformationSpec) -> Result<FockMatrix> {
    check_dim(dim, 2)?;
    let mut m = FockMatrix::zeros(dim);
    m.truncated = true;
    for n in 0..dim - 1 {
        m.set(n, n + 1, Complex64::new(big_f(n + 1, spec)?.sqrt(), 0.0));
    }
    Ok(m)
}

pub fn number_operator(dim: usize) -> FockMatrix {
    FockMatrix::from_real_diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>())
}

/// Deviation of an operator identity `Σ cᵢ Mᵢ = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// `max |Σ cᵢ Mᵢ − rhs|` over the compared block.
    pub absolute: f64,
    /// Entrywise deviation divided by `max(1, Σ |cᵢ||Mᵢ| + |rhs|)`.
    ///
    /// Entries of q-deformed operators grow like `e^{λn}`, so for `D = 32`
    /// the terms reach `1e13` and the absolute residual is bounded below by
    /// their rounding error; this is the quantity the identity checks bound.
    pub scaled: f64,
}

fn identity_residual(terms: &[(Complex64, &FockMatrix)], rhs: &FockMatrix, keep: usize) -> Residual {
    let mut absolute = 0.0f64;
    let mut scaled = 0.0f64;
    for i in 0..keep {
        for j in 0..keep {
            let mut lhs = ZERO;
            let mut mag = rhs.get(i, j).norm();
            for (c, m) in terms {
                let v = m.get(i, j);
                lhs += c * v;
                mag += c.norm() * v.norm();
            }
            let d = (lhs - rhs.get(i, j)).norm();
            absolute = absolute.max(d);
            scaled = scaled.max(d / mag.max(1.0));
        }
    }
    Residual { absolute, scaled }
}

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const MINUS_ONE: Complex64 = Complex64 { re: -1.0, im: 0.0 };

fn commutator_target(n: usize, spec: &DeformationSpec) -> Result<f64> {
    match spec.lambda() {
        Some(l) => Ok(commutator_function(n, l)),
        None => phi_of_z(n, spec),
    }
}

fn commutator_residual(dim: usize, spec: &DeformationSpec, keep: usize) -> Result<Residual> {
    let a = deformed_annihilation(dim, spec)?;
    let ad = a.adjoint();
    let target: Vec<f64> = (0..dim).map(|n| commutator_target(n, spec)).collect::<Result<_>>()?;
    Ok(identity_residual(
        &[(ONE, &a.matmul(&ad)), (MINUS_ONE, &ad.matmul(&a))],
        &FockMatrix::from_real_diagonal(&target),
        keep,
    ))
}

/// `[a_q, a_q†] − F(n̂)` with `F(n) = (sinh λ(n+1) − sinh λn) / sinh λ`
/// (for tables, `F(n+1) − F(n)`), edge excluded.
pub fn check_commutator(dim: usize, spec: &DeformationSpec) -> Result<Residual> {
    check_dim(dim, 3)?;
    commutator_residual(dim, spec, dim - 1)
}

/// Same as [`check_commutator`] but over the full matrix, including the
/// truncation edge where the identity necessarily fails.
pub fn check_commutator_untruncated(dim: usize, spec: &DeformationSpec) -> Result<Residual> {
    check_dim(dim, 3)?;
    commutator_residual(dim, spec, dim)
}

/// `AA† − A†A − φ(F⁻¹(N̂))` with `N̂ = A†A` built from the matrices and
/// `φ(z) = (z+1) f²(z+1) − z f²(z)` on the continuous extension of `f`.
pub fn check_alternative_commutator(dim: usize, spec: &DeformationSpec) -> Result<Residual> {
    check_dim(dim, 3)?;
    let a = deformed_annihilation(dim, spec)?;
    let ad = a.adjoint();
    let n_op = ad.matmul(&a);
    let phi: Vec<f64> = n_op
        .diagonal()
        .iter()
        .map(|x| {
            let z = big_f_inverse(x.re.max(0.0), spec)?;
            let fz = f_continuous(z, spec)?;
            let fz1 = f_continuous(z + 1.0, spec)?;
            Ok((z + 1.0) * fz1 * fz1 - z * fz * fz)
        })
        .collect::<Result<_>>()?;
    Ok(identity_residual(
        &[(ONE, &a.matmul(&ad)), (MINUS_ONE, &n_op)],
        &FockMatrix::from_real_diagonal(&phi),
        dim - 1,
    ))
}

/// `a_q a_q† − q a_q† a_q − q^{−n̂}` with `q = e^λ`, edge excluded.
pub fn check_reordering(dim: usize, lambda: f64) -> Result<Residual> {
    check_dim(dim, 3)?;
    let spec = DeformationSpec::q(lambda)?;
    let a = deformed_annihilation(dim, &spec)?;
    let ad = a.adjoint();
    let target: Vec<f64> = (0..dim).map(|n| (-lambda * n as f64).exp()).collect();
    Ok(identity_residual(
        &[(ONE, &a.matmul(&ad)), (Complex64::new(-lambda.exp(), 0.0), &ad.matmul(&a))],
        &FockMatrix::from_real_diagonal(&target),
        dim - 1,
    ))
}

/// Inverts the linearoid: rebuilds `a = A · 1/f(F⁻¹(N̂))` from `A` alone and
/// compares with [`annihilation`] away from the edge.
pub fn linearoid_roundtrip(dim: usize, spec: &DeformationSpec) -> Result<Residual> {
    check_dim(dim, 2)?;
    let a_def = deformed_annihilation(dim, spec)?;
    let n_op = a_def.adjoint().matmul(&a_def);
    let inv_f: Vec<f64> = n_op
        .diagonal()
        .iter()
        .map(|x| Ok(1.0 / f_continuous(big_f_inverse(x.re.max(0.0), spec)?, spec)?))
        .collect::<Result<_>>()?;
    let rebuilt = a_def.matmul(&FockMatrix::from_real_diagonal(&inv_f));
    Ok(identity_residual(&[(ONE, &rebuilt)], &annihilation(dim)?, dim - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianForm {
    /// `a†a + ½`.
    Standard,
    /// `F⁻¹(A†A) + ½` for `A = a f(n̂)`.
    InN(DeformationSpec),
}

pub fn hamiltonian(dim: usize, form: &HamiltonianForm) -> Result<FockMatrix> {
    check_dim(dim, 2)?;
    match form {
        HamiltonianForm::Standard => {
            Ok(FockMatrix::from_real_diagonal(&(0..dim).map(|n| n as f64 + 0.5).collect::<Vec<_>>()))
        }
        HamiltonianForm::InN(spec) => {
            let a = deformed_annihilation(dim, spec)?;
            let n_op = a.adjoint().matmul(&a);
            let diag: Vec<f64> = n_op
                .diagonal()
                .iter()
                .map(|x| Ok(big_f_inverse(x.re.max(0.0), spec)? + 0.5))
                .collect::<Result<_>>()?;
            Ok(FockMatrix::from_real_diagonal(&diag))
        }
    }
}

/// `[A, H] − A` with `H = n̂ + ½`; zero for every `f` since `[a f(n̂), n̂] = a f(n̂)`.
pub fn heisenberg_residual(dim: usize, spec: &DeformationSpec) -> Result<Residual> {
    check_dim(dim, 3)?;
    let a = deformed_annihilation(dim, spec)?;
    let h = hamiltonian(dim, &HamiltonianForm::Standard)?;
    Ok(identity_residual(&[(ONE, &a.matmul(&h)), (MINUS_ONE, &h.matmul(&a))], &a, dim - 1))
}

/// `e^{iHt} A e^{−iHt} − e^{−it} A`, with the exponentials taken entrywise on
/// the diagonal of `H = n̂ + ½`.
pub fn heisenberg_evolution_residual(dim: usize, spec: &DeformationSpec, t: f64) -> Result<Residual> {
    check_dim(dim, 2)?;
    let a = deformed_annihilation(dim, spec)?;
    let phases: Vec<Complex64> = (0..dim)
        .map(|n| Complex64::from_polar(1.0, -(n as f64 + 0.5) * t))
        .collect();
    let u = FockMatrix::from_diagonal(&phases);
    let evolved = u.adjoint().matmul(&a).matmul(&u);
    Ok(identity_residual(&[(ONE, &evolved)], &a.scaled(Complex64::from_polar(1.0, -t)), dim))
}

/// Largest scaled deviation of `diag(A†A)` from `F(n)`, all `n < D`.
pub fn spectrum_residual(dim: usize, spec: &DeformationSpec) -> Result<f64> {
    let a = deformed_annihilation(dim, spec)?;
    let n_op = a.adjoint().matmul(&a);
    let mut worst = 0.0f64;
    for (n, v) in n_op.diagonal().iter().enumerate() {
        let f = big_f(n, spec)?;
        worst = worst.max((v - f).norm() / f.max(1.0));
    }
    Ok(worst)
}

/// Standard deviations of `Q = (A + A†)/√2` and `P = (A − A†)/(i√2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratures {
    pub delta_q: f64,
    pub delta_p: f64,
    pub product: f64,
}

pub fn quadrature_uncertainty(state: &FockState, spec: &DeformationSpec) -> Result<Quadratures> {
    let dim = state.dim();
    check_dim(dim, 3)?;
    ensure((state.norm() - 1.0).abs() <= 1e-12, || format!("state norm is {}", state.norm()))?;
    let edge = state.amplitudes()[dim - 2].norm().max(state.amplitudes()[dim - 1].norm());
    if edge >= 1e-8 {
        return Err(Error::TruncationUnsafe { edge_amplitude: edge });
    }
    let a = deformed_annihilation(dim, spec)?;
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = a.clone();
    let mut p = a.clone();
    for i in 0..dim {
        for j in 0..dim {
            q.set(i, j, (a.get(i, j) + ad.get(i, j)) * s);
            p.set(i, j, (a.get(i, j) - ad.get(i, j)) * Complex64::new(0.0, -s));
        }
    }
    let spread = |op: &FockMatrix| {
        let mean = state.expectation(op).re;
        let sq = state.expectation(&op.matmul(op)).re;
        (sq - mean * mean).max(0.0).sqrt()
    };
    let delta_q = spread(&q);
    let delta_p = spread(&p);
    Ok(Quadratures { delta_q, delta_p, product: delta_q * delta_p })
}

/// `q^{−n}` target of the reordering relation.
pub fn reordering_target(n: usize, lambda: f64) -> f64 {
    (-lambda * n as f64).exp()
}

/// `(n+1)_q + n_q` over two: the quadrature product on `|n⟩` for the q-deformation.
pub fn number_state_uncertainty(n: usize, lambda: f64) -> f64 {
    0.5 * (q_number(n as f64 + 1.0, lambda) + q_number(n as f64, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(l: f64) -> DeformationSpec {
        DeformationSpec::q(l).unwrap()
    }

    #[test]
    fn annihilation_matrices() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.rows(), vec![vec![[0.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]]);
        assert!(matches!(annihilation(1), Err(Error::Dimension { dim: 1, min: 2 })));

        let a = annihilation(5).unwrap();
        let vac = FockState::basis(5, 0).unwrap();
        assert!(a.apply(vac.amplitudes()).iter().all(|c| *c == ZERO));
        let two = FockState::basis(5, 2).unwrap();
        let out = a.apply(two.amplitudes());
        assert_relative_eq!(out[1].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(out.iter().filter(|c| **c != ZERO).count(), 1);
    }

    #[test]
    fn deformed_annihilation_entries() {
        for d in [2, 5, 32] {
            assert_eq!(deformed_annihilation(d, &DeformationSpec::Identity).unwrap(), annihilation(d).unwrap());
        }
        let a = deformed_annihilation(4, &q(1.0)).unwrap();
        assert_relative_eq!(a.get(0, 1).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(a.get(1, 2).re, 1.756_747_355_094_205_8, max_relative = 1e-14);
        // strictly upper bidiagonal
        for i in 0..4 {
            for j in 0..4 {
                if j != i + 1 {
                    assert_eq!(a.get(i, j), ZERO);
                }
            }
        }
    }

    #[test]
    fn commutator_checks() {
        assert!(check_commutator(10, &DeformationSpec::Identity).unwrap().absolute <= 1e-12);
        let r = check_commutator(12, &q(1.0)).unwrap();
        assert!(r.scaled <= 1e-12, "{r:?}");
        // the edge breaks the identity by about F(D-1)
        let full = check_commutator_untruncated(12, &q(1.0)).unwrap();
        assert!(full.absolute > 0.5 * q_number(11.0, 1.0));
    }

    #[test]
    fn reordering_checks() {
        assert!(check_reordering(8, 0.0).unwrap().absolute <= 1e-12);
        assert!(check_reordering(12, 1.0).unwrap().scaled <= 1e-10);
        assert_relative_eq!(reordering_target(2, 1.0), 0.135_335_283_236_612_7, max_relative = 1e-14);
    }

    #[test]
    fn linearoid_checks() {
        assert_eq!(linearoid_roundtrip(10, &DeformationSpec::Identity).unwrap().absolute, 0.0);
        assert!(linearoid_roundtrip(10, &q(0.5)).unwrap().scaled <= 1e-10);
        assert!(linearoid_roundtrip(4, &q(1.0)).unwrap().scaled <= 1e-10);
        let custom = DeformationSpec::custom(vec![1.0, 1.0, 1.1, 1.3, 1.2, 1.25]).unwrap();
        assert!(linearoid_roundtrip(6, &custom).unwrap().scaled <= 1e-12);
    }

    #[test]
    fn hamiltonians() {
        let h = hamiltonian(3, &HamiltonianForm::Standard).unwrap();
        assert_eq!(h.diagonal().iter().map(|c| c.re).collect::<Vec<_>>(), vec![0.5, 1.5, 2.5]);
        let std10 = hamiltonian(10, &HamiltonianForm::Standard).unwrap();
        let alt = hamiltonian(10, &HamiltonianForm::InN(q(1.0))).unwrap();
        for n in 0..9 {
            assert!((alt.get(n, n) - std10.get(n, n)).norm() <= 1e-10);
        }
        assert!(
            hamiltonian(7, &HamiltonianForm::InN(DeformationSpec::Identity))
                .unwrap()
                .diagonal()
                .iter()
                .zip(hamiltonian(7, &HamiltonianForm::Standard).unwrap().diagonal())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                <= 1e-15
        );
    }

    #[test]
    fn heisenberg_checks() {
        assert!(heisenberg_residual(10, &DeformationSpec::Identity).unwrap().absolute <= 1e-12);
        assert!(heisenberg_residual(12, &q(1.0)).unwrap().scaled <= 1e-11);
        assert!(heisenberg_evolution_residual(12, &q(1.0), 0.7).unwrap().scaled <= 1e-9);
    }

    #[test]
    fn alternative_commutator_and_spectrum() {
        for spec in [DeformationSpec::Identity, q(0.3), q(1.0)] {
            assert!(check_alternative_commutator(16, &spec).unwrap().scaled <= 1e-10);
            assert!(spectrum_residual(16, &spec).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn uncertainty_products() {
        let vac = FockState::basis(12, 0).unwrap();
        let u = quadrature_uncertainty(&vac, &DeformationSpec::Identity).unwrap();
        assert_relative_eq!(u.product, 0.5, epsilon = 1e-14);
        let u = quadrature_uncertainty(&vac, &q(1.0)).unwrap();
        assert_relative_eq!(u.product, 0.5, epsilon = 1e-14);
        let one = FockState::basis(12, 1).unwrap();
        let u = quadrature_uncertainty(&one, &q(1.0)).unwrap();
        assert_relative_eq!(u.product, 2.043_080_634_815_243_8, max_relative = 1e-14);
        assert_relative_eq!(u.product, number_state_uncertainty(1, 1.0), max_relative = 1e-14);
        assert_relative_eq!(
            quadrature_uncertainty(&one, &DeformationSpec::Identity).unwrap().product,
            1.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn uncertainty_rejects_edge_and_unnormalized_states() {
        let edge = FockState::basis(6, 5).unwrap();
        assert!(matches!(
            quadrature_uncertainty(&edge, &DeformationSpec::Identity),
            Err(Error::TruncationUnsafe { .. })
        ));
        let big = FockState::new(vec![Complex64::new(2.0, 0.0), ZERO, ZERO, ZERO]).unwrap();
        assert!(quadrature_uncertainty(&big, &DeformationSpec::Identity).is_err());
        assert_relative_eq!(big.normalized().unwrap().norm(), 1.0);
    }

    #[test]
    fn json_layout_is_row_major_pairs() {
        let a = annihilation(2).unwrap();
        let v = serde_json_like(&a);
        assert_eq!(v, "2:true:[[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]");
    }

    fn serde_json_like(m: &FockMatrix) -> String {
        format!("{}:{}:{:?}", m.dim(), m.is_truncated(), m.rows()).replace(' ', "")
    }
}
