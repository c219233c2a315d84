//! State vectors, density matrices and operators on one or two polarization
//! qubits.
//!
//! Amplitudes are ordered `(V, H)` for one qubit and `(VV, VH, HV, HH)` for
//! two; Kronecker products are taken row-major so that this ordering is
//! preserved (signal qubit is the most significant index).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::Mul;

use crate::error::{Error, Result};

/// Tolerance on structural invariants (normalization, hermiticity, unitarity).
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const EIGEN_FLOOR: f64 = -1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Pure state `|psi> = sum_j c_j |j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("empty amplitude list".into()));
        }
        let norm2: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm2}, expected 1"
            )));
        }
        Ok(Self { amps: DVector::from_vec(amps) })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    pub(crate) fn from_dvector_normalizing(v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amps: v })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `U|psi>`; the operator must be unitary for the result to stay normalized.
    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        check_dim(op.dim(), self.dim())?;
        Self::from_dvector_normalizing(&op.mat * &self.amps)
    }

    /// Multiplies every amplitude by `exp(i phase)`.
    pub fn with_global_phase(&self, phase: f64) -> StateVector {
        Self { amps: self.amps.map(|c| c * C64::from_polar(1.0, phase)) }
    }

    /// `<psi|A|psi>` for a Hermitian `A` (imaginary part discarded).
    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        check_dim(op.dim(), self.dim())?;
        Ok(self.amps.dotc(&(&op.mat * &self.amps)).re)
    }

    /// Bloch vector of a single-qubit state in the `(V, H)` convention.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        check_dim(2, self.dim())?;
        let (a, b) = (self.amps[0], self.amps[1]);
        let off = a.conj() * b;
        Ok([2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr()])
    }
}

/// General (possibly mixed) state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        if hermiticity_defect(&mat) > STRUCTURE_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_eigen(&mat).0.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig}")));
        }
        Ok(Self { mat })
    }

    pub fn from_state(psi: &StateVector) -> Self {
        Self { mat: &psi.amps * psi.amps.adjoint() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// `Re Tr(rho A)`.
    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        check_dim(op.dim(), self.dim())?;
        Ok(trace_of_product(&self.mat, &op.mat).re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.mat).0
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.mat, &self.mat).re
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn dominant_eigenvector(&self) -> StateVector {
        dominant_eigenvector(&self.mat)
    }
}

/// Square complex matrix: a unitary, projector or POVM element.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidOperator("operator must be a nonempty square matrix".into()));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_matrix(mat: DMatrix<C64>) -> Self {
        debug_assert!(mat.is_square());
        Self { mat }
    }

    /// Builds a 2x2 operator from its rows.
    pub fn from_2x2(m: [[C64; 2]; 2]) -> Self {
        Self { mat: DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: DMatrix::from_element(dim, dim, ZERO) }
    }

    /// Rank-1 projector `|j><j|` onto a computational basis state.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut mat = DMatrix::from_element(dim, dim, ZERO);
        mat[(index, index)] = ONE;
        Self { mat }
    }

    /// `|psi><psi|`.
    pub fn projector(psi: &StateVector) -> Self {
        Self { mat: &psi.amps * psi.amps.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn dagger(&self) -> Operator {
        Self { mat: self.mat.adjoint() }
    }

    /// `U^dagger A U`.
    pub fn conjugated_by(&self, u: &Operator) -> Operator {
        Self { mat: u.mat.adjoint() * &self.mat * &u.mat }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Self { mat: self.mat.scale(s) }
    }

    pub fn add_assign_scaled(&mut self, other: &Operator, s: f64) {
        self.mat.zip_apply(&other.mat, |a, b| *a += b * s);
    }

    pub fn frobenius_distance(&self, other: &Operator) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)).norm() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_defect(&self.mat) <= tol
    }

    pub fn determinant(&self) -> C64 {
        self.mat.determinant()
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.mat).0
    }
}

/// Serialized as a row-major list of rows of `[re, im]` pairs.
impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| [self.mat[(r, c)].re, self.mat[(r, c)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("operator must be a nonempty square matrix"));
        }
        Ok(Self { mat: DMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])) })
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat * &rhs.mat }
    }
}

/// Kronecker product of objects living on separate qubits.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        Self { mat: self.mat.kronecker(&other.mat) }
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// `|<phi|psi>|^2`, clamped to `[0, 1]`.
pub fn fidelity_pure(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr().clamp(0.0, 1.0))
}

/// Haar-distributed pure state: a normalized vector of i.i.d. standard
/// complex Gaussians.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    if dim < 2 {
        return Err(Error::InvalidState(format!("Haar sampling needs dim >= 2, got {dim}")));
    }
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(psi) = StateVector::normalized(amps) {
            return Ok(psi);
        }
    }
}

pub fn density_from_state(psi: &StateVector) -> DensityMatrix {
    DensityMatrix::from_state(psi)
}

/// Pauli matrices in the `(V, H)` basis: `sigma_z |V> = |V>`.
pub fn pauli() -> [Operator; 3] {
    [
        Operator::from_2x2([[ZERO, ONE], [ONE, ZERO]]),
        Operator::from_2x2([[ZERO, -I], [I, ZERO]]),
        Operator::from_2x2([[ONE, ZERO], [ZERO, -ONE]]),
    ]
}

/// `(I + n . sigma) / 2` for a unit Bloch vector `n`.
pub fn bloch_projector(n: [f64; 3]) -> Operator {
    let [sx, sy, sz] = pauli();
    let mut op = Operator::identity(2);
    op.add_assign_scaled(&sx, n[0]);
    op.add_assign_scaled(&sy, n[1]);
    op.add_assign_scaled(&sz, n[2]);
    op.scale(0.5)
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).norm()
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let herm = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn dominant_eigenvector(m: &DMatrix<C64>) -> StateVector {
    let (_, vecs) = hermitian_eigen(m);
    let last = vecs.ncols() - 1;
    StateVector::from_dvector_normalizing(vecs.column(last).into_owned())
        .expect("eigenvectors have unit norm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn v() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    fn h() -> StateVector {
        StateVector::basis(2, 1).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor(&Operator::identity(2), &Operator::identity(2));
        assert_eq!(i4, Operator::identity(4));
    }

    #[test]
    fn basis_ordering() {
        let vh = tensor(&v(), &h());
        assert_eq!(vh.amplitudes(), &[ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn flip_on_signal_maps_vv_to_hv() {
        let x = &pauli()[0];
        let xi = tensor(x, &Operator::identity(2));
        let out = tensor(&v(), &v()).apply(&xi).unwrap();
        assert_eq!(out, tensor(&h(), &v()));
        assert_eq!(out.amplitudes(), &[ZERO, ZERO, ONE, ZERO]);
    }

    #[test]
    fn fidelity_examples() {
        let d = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert!((fidelity_pure(&d, &d).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity_pure(&v(), &h()).unwrap(), 0.0);
        assert!((fidelity_pure(&d, &v()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let four = StateVector::basis(4, 0).unwrap();
        assert!(matches!(fidelity_pure(&v(), &four), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(StateVector::new(vec![ONE, ONE]).is_err());
        assert!(StateVector::normalized(vec![ZERO, ZERO]).is_err());
    }

    #[test]
    fn density_examples() {
        let rho = density_from_state(&v());
        assert_eq!(rho.matrix()[(0, 0)], ONE);
        assert_eq!(rho.matrix()[(1, 1)], ZERO);
        let d = StateVector::normalized(vec![ONE, ONE]).unwrap();
        let rho = density_from_state(&d);
        for e in rho.matrix().iter() {
            assert!((e - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn density_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), ZERO, ZERO, c(0.7, 0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), ZERO, ZERO, c(-0.2, 0.0)]);
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(4).matrix().clone()).is_ok());
    }

    #[test]
    fn haar_is_deterministic_per_seed() {
        let a = haar_random_state(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = haar_random_state(4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(haar_random_state(1, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn haar_moments() {
        // Monte Carlo oracle: E|c_j|^2 = 1/d and E F(random, fixed) = 1/d.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for dim in [2usize, 4] {
            let fixed = StateVector::basis(dim, dim - 1).unwrap();
            let draws = 100_000;
            let mut pops = vec![0.0; dim];
            let mut fid = 0.0;
            for _ in 0..draws {
                let psi = haar_random_state(dim, &mut rng).unwrap();
                assert!((psi.as_dvector().norm_squared() - 1.0).abs() < STRUCTURE_TOL);
                for (p, a) in pops.iter_mut().zip(psi.amplitudes()) {
                    *p += a.norm_sqr();
                }
                fid += fidelity_pure(&psi, &fixed).unwrap();
            }
            for p in pops {
                assert!((p / draws as f64 - 1.0 / dim as f64).abs() < 0.01);
            }
            assert!((fid / draws as f64 - 1.0 / dim as f64).abs() < 0.01);
        }
    }

    #[test]
    fn bloch_projectors_match_poles() {
        let pz = bloch_projector([0.0, 0.0, 1.0]);
        assert!(pz.frobenius_distance(&Operator::basis_projector(2, 0)) < 1e-15);
        let py = bloch_projector([0.0, 1.0, 0.0]);
        let r = StateVector::normalized(vec![ONE, I]).unwrap();
        assert!(py.frobenius_distance(&Operator::projector(&r)) < 1e-15);
        assert_eq!(r.bloch_vector().unwrap().map(|x| x.round()), [0.0, 1.0, 0.0]);
    }
}
