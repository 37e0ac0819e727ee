// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix kernel.
//!
//! Every operator in the crate is a [`ComplexMatrix`] of dimension 2, 4, 8 or
//! 16. Values are immutable: each operation returns a fresh matrix. Products
//! through the `*` operator assert matching dimensions; the fallible
//! constructors and [`kron`] report bad shapes as [`SpinError`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};

pub type C64 = Complex64;

/// Largest supported operator dimension (four qubits).
pub const MAX_DIM: usize = 16;

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;

/// Inputs whose anti-Hermitian part exceeds this are rejected by the exponentials.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_dim(dim: usize) -> Result<()> {
    if matches!(dim, 2 | 4 | 8 | 16) {
        Ok(())
    } else {
        Err(SpinError::Dimension(format!(
            "{dim} is not one of 2, 4, 8, 16"
        )))
    }
}

/// Square complex matrix with row-major storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for col in 0..dim {
                data.push(f(r, col));
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(SpinError::Dimension(format!(
                "ragged row of length {} in a {dim}x{dim} matrix",
                bad.len()
            )));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds a matrix from real rows, mostly for literals in tests.
    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::from_fn(N, |r, col| c(rows[r][col], 0.0))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |r, col| if r == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        Self::from_fn(entries.len(), |r, col| {
            if r == col {
                entries[r]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Permutation matrix sending basis state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut seen = vec![false; dim];
        for &p in perm {
            if p >= dim || seen[p] {
                return Err(SpinError::Dimension(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Self::from_fn(dim, |r, col| if perm[col] == r { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits the matrix acts on.
    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for col in 0..dim {
                data[col * dim + r] = self.data[r * dim + col].conj();
            }
        }
        Self { dim, data }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.require_same_dim(other)?;
        let dim = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * dim..(k + 1) * dim];
                for (out, b) in data[r * dim..(r + 1) * dim].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let product = &self.adjoint() * self;
        let id = Self::identity(self.dim).expect("dimension already validated");
        product.max_abs_diff(&id).expect("same dimension")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `max |(G - G^dagger)_ij|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same dimension")
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim)
            .flat_map(|r| (0..self.dim).map(move |col| (r, col)))
            .filter(|(r, col)| r != col)
            .all(|(r, col)| self.get(r, col).norm() <= tol)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.require_same_dim(other)?;
        Ok(&(self * other) - &(other * self))
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(SpinError::DimensionMismatch {
                left: self.dim,
                right: state.dim(),
            });
        }
        let amplitudes = self
            .rows()
            .map(|row| row.iter().zip(state.amplitudes()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(StateVector { amplitudes })
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector {
            amplitudes: (0..self.dim).map(|r| self.get(r, col)).collect(),
        }
    }

    /// Assembles a matrix whose columns are the given states.
    pub fn from_columns(columns: &[StateVector]) -> Result<Self> {
        let dim = columns.len();
        check_dim(dim)?;
        if let Some(bad) = columns.iter().find(|s| s.dim() != dim) {
            return Err(SpinError::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        Self::from_fn(dim, |r, col| columns[col].amplitudes()[r])
    }

    fn require_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(SpinError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Right-to-left product of `factors`: the last entry acts first.
pub fn product<'a>(dim: usize, factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(dim)?;
    for f in factors {
        acc = acc.matmul(f)?;
    }
    Ok(acc)
}

/// Kronecker product; the left operand is the most significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim * b.dim;
    if dim > MAX_DIM {
        return Err(SpinError::Dimension(format!(
            "kron of {}x{} and {}x{} exceeds {MAX_DIM}",
            a.dim, a.dim, b.dim, b.dim
        )));
    }
    ComplexMatrix::from_fn(dim, |r, col| {
        a.get(r / b.dim, col / b.dim) * b.get(r % b.dim, col % b.dim)
    })
}

fn require_hermitian(generator: &ComplexMatrix) -> Result<()> {
    let deviation = generator.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        Err(SpinError::NotHermitian { deviation })
    } else {
        Ok(())
    }
}

/// `exp(i * angle * G)` for Hermitian `G`.
///
/// Diagonal generators are exponentiated entrywise, involutions (`G^2 = I`)
/// use `cos(angle) I + i sin(angle) G`, anything else goes through the
/// spectral decomposition.
pub fn expm_pauli(generator: &ComplexMatrix, angle: f64) -> Result<ComplexMatrix> {
    require_hermitian(generator)?;
    if generator.is_diagonal(0.0) {
        let phases: Vec<C64> = generator
            .diagonal_entries()
            .iter()
            .map(|g| C64::from_polar(1.0, angle * g.re))
            .collect();
        return ComplexMatrix::diagonal(&phases);
    }
    let square = generator * generator;
    let id = ComplexMatrix::identity(generator.dim)?;
    if square.max_abs_diff(&id)? <= EXACT_TOL {
        let cos = id.scale(c(angle.cos(), 0.0));
        let sin = generator.scale(c(0.0, angle.sin()));
        return Ok(&cos + &sin);
    }
    exp_i_hermitian(generator, angle)
}

/// `exp(i * angle * H)` through the eigendecomposition of Hermitian `H`.
pub fn exp_i_hermitian(h: &ComplexMatrix, angle: f64) -> Result<ComplexMatrix> {
    require_hermitian(h)?;
    // symmetrize so the eigensolver sees an exactly Hermitian input
    let sym = (h + &h.adjoint()).scale(c(0.5, 0.0));
    let eigen = sym.to_nalgebra().symmetric_eigen();
    let vectors = &eigen.eigenvectors;
    let phases = DMatrix::from_diagonal(&eigen.eigenvalues.map(|lambda| C64::from_polar(1.0, angle * lambda)));
    let out = vectors * phases * vectors.adjoint();
    ComplexMatrix::from_fn(h.dim, |r, col| out[(r, col)])
}

/// Propagator `exp(-i H t)` of a time-independent Hamiltonian.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    exp_i_hermitian(h, -t)
}

/// Global-phase-invariant comparison of a built unitary with a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// `|tr(target^dagger built)| / dim`, in `[0, 1]`.
    pub fidelity: f64,
    /// Phase `phi` with `built ~ e^{i phi} target`.
    pub global_phase_rad: f64,
    /// `max |built - e^{i phi} target|`.
    pub max_abs_dev: f64,
    #[serde(default)]
    pub gate_label: String,
}

impl FidelityReport {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.gate_label = label.into();
        self
    }

    /// True when the two operators agree up to a global phase, `F >= 1 - tol`.
    pub fn is_equivalent(&self, tol: f64) -> bool {
        self.fidelity >= 1.0 - tol
    }
}

/// Compares `built` against `target` modulo a global phase.
pub fn phase_fidelity(built: &ComplexMatrix, target: &ComplexMatrix) -> Result<FidelityReport> {
    built.require_same_dim(target)?;
    let overlap = (&target.adjoint() * built).trace();
    let dim = built.dim as f64;
    let fidelity = (overlap.norm() / dim).min(1.0);
    let global_phase_rad = overlap.arg();
    let aligned = target.scale(C64::from_polar(1.0, global_phase_rad));
    Ok(FidelityReport {
        fidelity,
        global_phase_rad,
        max_abs_dev: built.max_abs_diff(&aligned)?,
        gate_label: String::new(),
    })
}

/// Column vector of amplitudes over the computational basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        Ok(Self { amplitudes })
    }

    /// Basis state `index`; qubit 1 is the most significant bit and bit 0 is spin up.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(SpinError::Dimension(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amplitudes = vec![c(0.0, 0.0); dim];
        amplitudes[index] = c(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Parses a bitstring such as `"110"` (qubit 1 first, `0` = spin up).
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        if !(1..=4).contains(&n) || !bits.chars().all(|ch| ch == '0' || ch == '1') {
            return Err(SpinError::Parse(format!("`{bits}` is not a 1-4 digit bitstring")));
        }
        let index = usize::from_str_radix(bits, 2).expect("validated bitstring");
        Self::basis(1 << n, index)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Self {
        let norm = self.norm_sqr().sqrt();
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a / norm).collect(),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(SpinError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        Self {
            dim: m.dim,
            rows: m.rows().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = SpinError;

    fn try_from(json: MatrixJson) -> Result<Self> {
        if json.rows.len() != json.dim {
            return Err(SpinError::Dimension(format!(
                "declared dim {} but {} rows",
                json.dim,
                json.rows.len()
            )));
        }
        let rows: Vec<Vec<C64>> = json
            .rows
            .iter()
            .map(|row| row.iter().map(|[re, im]| c(*re, *im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<StateVector> for StateJson {
    fn from(s: StateVector) -> Self {
        Self {
            dim: s.dim(),
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<StateJson> for StateVector {
    type Error = SpinError;

    fn try_from(json: StateJson) -> Result<Self> {
        if json.amplitudes.len() != json.dim {
            return Err(SpinError::Dimension(format!(
                "declared dim {} but {} amplitudes",
                json.dim,
                json.amplitudes.len()
            )));
        }
        StateVector::new(json.amplitudes.iter().map(|[re, im]| c(*re, *im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use proptest::prelude::*;

    use super::*;

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    fn sz() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]]).unwrap()
    }

    fn id(dim: usize) -> ComplexMatrix {
        ComplexMatrix::identity(dim).unwrap()
    }

    /// Independent Kronecker product written as an explicit quadruple loop.
    fn kron_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<Vec<C64>> {
        let (m, n) = (a.dim(), b.dim());
        let mut out = vec![vec![c(0.0, 0.0); m * n]; m * n];
        for i in 0..m {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..n {
                        out[i * n + k][j * n + l] = a.get(i, j) * b.get(k, l);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn kron_identity() {
        assert_eq!(kron(&id(2), &id(2)).unwrap(), id(4));
    }

    #[test]
    fn kron_sigma_z_identity_is_block_sign() {
        let expected = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(kron(&sz(), &id(2)).unwrap(), expected);
    }

    #[test]
    fn kron_sigma_x_pair_is_antidiagonal() {
        let got = kron(&sx(), &sx()).unwrap();
        let oracle = ComplexMatrix::from_rows(&kron_oracle(&sx(), &sx())).unwrap();
        assert_eq!(got, oracle);
        let anti = ComplexMatrix::from_real_rows([
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(got, anti);
    }

    #[test]
    fn kron_rejects_oversized_result() {
        let big = id(16);
        assert!(matches!(kron(&big, &id(2)), Err(SpinError::Dimension(_))));
        assert!(kron(&id(8), &id(2)).is_ok());
    }

    #[test]
    fn rejects_unsupported_dimensions() {
        assert!(ComplexMatrix::identity(3).is_err());
        assert!(ComplexMatrix::identity(32).is_err());
        assert!(ComplexMatrix::identity(1).is_err());
    }

    #[test]
    fn expm_zero_angle_is_identity() {
        assert_eq!(expm_pauli(&sx(), 0.0).unwrap().max_abs_diff(&id(2)).unwrap(), 0.0);
    }

    #[test]
    fn expm_sigma_z_quarter_turn() {
        let got = expm_pauli(&sz(), FRAC_PI_2).unwrap();
        let expected = ComplexMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!(got.max_abs_diff(&expected).unwrap() < EXACT_TOL);
    }

    #[test]
    fn expm_zz_diagonal_generator() {
        let zz = kron(&sz(), &sz()).unwrap();
        let got = expm_pauli(&zz, -FRAC_PI_4).unwrap();
        let m = C64::from_polar(1.0, -FRAC_PI_4);
        let p = C64::from_polar(1.0, FRAC_PI_4);
        let expected = ComplexMatrix::diagonal(&[m, p, p, m]).unwrap();
        assert!(got.max_abs_diff(&expected).unwrap() < EXACT_TOL);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let upper = ComplexMatrix::from_real_rows([[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(expm_pauli(&upper, 1.0), Err(SpinError::NotHermitian { .. })));
    }

    #[test]
    fn fidelity_identical() {
        let r = phase_fidelity(&sx(), &sx()).unwrap();
        assert!((r.fidelity - 1.0).abs() < EXACT_TOL);
        assert!(r.global_phase_rad.abs() < EXACT_TOL);
    }

    #[test]
    fn fidelity_pure_global_phase() {
        let r = phase_fidelity(&sx(), &sx().scale(c(0.0, -1.0))).unwrap();
        assert!((r.fidelity - 1.0).abs() < EXACT_TOL);
        assert!((r.global_phase_rad - FRAC_PI_2).abs() < EXACT_TOL);
        assert!(r.max_abs_dev < EXACT_TOL);
    }

    #[test]
    fn fidelity_traceless_overlap() {
        let r = phase_fidelity(&id(2), &sx()).unwrap();
        assert!(r.fidelity.abs() < EXACT_TOL);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        assert!(matches!(
            phase_fidelity(&id(2), &id(4)),
            Err(SpinError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_shape() {
        let m = ComplexMatrix::diagonal(&[c(1.0, 0.5), c(-0.25, 0.0)]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["rows"][0][0], serde_json::json!([1.0, 0.5]));
        assert_eq!(v["rows"][1][1], serde_json::json!([-0.25, 0.0]));
        let bad = serde_json::json!({"dim": 2, "rows": [[[1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]});
        assert!(serde_json::from_value::<ComplexMatrix>(bad).is_err());
    }

    fn arb_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(move |v| ComplexMatrix::from_fn(dim, |r, col| c(v[r * dim + col].0, v[r * dim + col].1)).unwrap())
    }

    fn arb_hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        arb_matrix(dim).prop_map(|m| (&m + &m.adjoint()).scale(c(0.5, 0.0)))
    }

    /// Hermitian involution `V D V^dagger` with `D = diag(±1)` built from a
    /// random unitary (eigenvectors of a random Hermitian matrix).
    fn arb_involution(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        (arb_hermitian(dim), proptest::collection::vec(any::<bool>(), dim)).prop_map(move |(h, signs)| {
            let eig = h.to_nalgebra().symmetric_eigen();
            let v = ComplexMatrix::from_fn(dim, |r, col| eig.eigenvectors[(r, col)]).unwrap();
            let d: Vec<C64> = signs.iter().map(|&s| c(if s { 1.0 } else { -1.0 }, 0.0)).collect();
            &(&v * &ComplexMatrix::diagonal(&d).unwrap()) * &v.adjoint()
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_matrix(2), b in arb_matrix(2), d in arb_matrix(2)) {
            let left = kron(&kron(&a, &b).unwrap(), &d).unwrap();
            let right = kron(&a, &kron(&b, &d).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-14);
        }

        #[test]
        fn kron_is_bilinear(a in arb_matrix(2), a2 in arb_matrix(2), b in arb_matrix(2), s in -2.0f64..2.0) {
            let lhs = kron(&(&a + &a2.scale(c(s, 0.0))), &b).unwrap();
            let rhs = &kron(&a, &b).unwrap() + &kron(&a2, &b).unwrap().scale(c(s, 0.0));
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-13);
        }

        #[test]
        fn kron_matches_loop_oracle(a in arb_matrix(4), b in arb_matrix(2)) {
            let got = kron(&a, &b).unwrap();
            let oracle = ComplexMatrix::from_rows(&kron_oracle(&a, &b)).unwrap();
            prop_assert_eq!(got, oracle);
        }

        #[test]
        fn exp_adds_angles(g in arb_hermitian(4), x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let lhs = &expm_pauli(&g, x).unwrap() * &expm_pauli(&g, y).unwrap();
            let rhs = expm_pauli(&g, x + y).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < EXACT_TOL);
            prop_assert!(rhs.is_unitary(EXACT_TOL));
        }

        #[test]
        fn involution_closed_form_matches_spectral(g in arb_involution(4), x in -6.0f64..6.0) {
            let closed = expm_pauli(&g, x).unwrap();
            let spectral = exp_i_hermitian(&g, x).unwrap();
            prop_assert!(closed.max_abs_diff(&spectral).unwrap() < EXACT_TOL);
        }

        #[test]
        fn fidelity_ignores_global_phase(u in arb_hermitian(8), phi in -3.1f64..3.1) {
            let unitary = expm_pauli(&u, 0.7).unwrap();
            let r = phase_fidelity(&unitary.scale(C64::from_polar(1.0, phi)), &unitary).unwrap();
            prop_assert!((r.fidelity - 1.0).abs() < EXACT_TOL);
            prop_assert!((r.global_phase_rad - phi).abs() < 1e-10);
            prop_assert!(r.max_abs_dev < 1e-12);
        }

        #[test]
        fn json_round_trip_is_lossless(m in arb_matrix(8)) {
            let text = serde_json::to_string(&m).unwrap();
            let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
