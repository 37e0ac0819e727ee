// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pauli matrices, spin-1/2 operators and their n-qubit embeddings.
//!
//! Qubit 1 is the leftmost Kronecker factor, so in a basis index
//! `b1 b2 ... bn` qubit 1 is the most significant bit. Spin operators carry
//! the factor 1/2 (`S = sigma / 2`); [`PauliString`] generators do not.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinError};
use crate::matrix::{c, kron, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
}

/// Number of spins in the register, 1 through 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct SystemSize(usize);

impl SystemSize {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=4).contains(&n) {
            Ok(Self(n))
        } else {
            Err(SpinError::InvalidSystemSize(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn dim(self) -> usize {
        1 << self.0
    }

    pub fn sites(self) -> impl Iterator<Item = SiteIndex> {
        (1..=self.0).map(move |site| SiteIndex { site, n: self.0 })
    }

    /// All `i < j` site pairs in lexicographic order.
    pub fn pairs(self) -> Vec<(SiteIndex, SiteIndex)> {
        let mut out = Vec::new();
        for i in 1..=self.0 {
            for j in i + 1..=self.0 {
                out.push((SiteIndex { site: i, n: self.0 }, SiteIndex { site: j, n: self.0 }));
            }
        }
        out
    }
}

impl TryFrom<usize> for SystemSize {
    type Error = SpinError;

    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<SystemSize> for usize {
    fn from(n: SystemSize) -> usize {
        n.0
    }
}

/// One-based position of a spin inside an `n`-spin register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteIndex {
    site: usize,
    n: usize,
}

impl SiteIndex {
    pub fn new(site: usize, n: usize) -> Result<Self> {
        SystemSize::new(n)?;
        if (1..=n).contains(&site) {
            Ok(Self { site, n })
        } else {
            Err(SpinError::InvalidSite { site, n })
        }
    }

    pub fn site(self) -> usize {
        self.site
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Bit position of this qubit inside a basis index.
    pub fn bit(self) -> usize {
        self.n - self.site
    }
}

/// Standard 2x2 Pauli matrix.
pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let rows = match axis {
        PauliAxis::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        PauliAxis::Y => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        PauliAxis::Z => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
    };
    ComplexMatrix::from_rows(&rows).expect("2x2 literal")
}

/// Spin-1/2 component `S_axis = sigma_axis / 2`.
pub fn spin(axis: PauliAxis) -> ComplexMatrix {
    pauli(axis).scale(c(0.5, 0.0))
}

fn embed(n: usize, ops: &[(usize, ComplexMatrix)]) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2).expect("2x2");
    let factor = |site: usize| {
        ops.iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| id.clone())
    };
    (2..=n).fold(factor(1), |acc, site| {
        kron(&acc, &factor(site)).expect("at most four sites")
    })
}

/// `S_axis` acting on `site`, identity on every other spin.
pub fn embed_single(axis: PauliAxis, site: SiteIndex) -> ComplexMatrix {
    embed(site.n, &[(site.site, spin(axis))])
}

/// Ising pair term `S_zi S_zj`.
pub fn embed_pair_zz(i: SiteIndex, j: SiteIndex) -> Result<ComplexMatrix> {
    if i.n != j.n {
        return Err(SpinError::InvalidArgument(format!(
            "sites belong to registers of size {} and {}",
            i.n, j.n
        )));
    }
    if i.site == j.site {
        return Err(SpinError::CoincidentSites(i.site));
    }
    let sz = spin(PauliAxis::Z);
    Ok(embed(i.n, &[(i.site, sz.clone()), (j.site, sz)]))
}

/// `sum_i S_axis,i` over all sites.
pub fn total_spin(axis: PauliAxis, n: SystemSize) -> ComplexMatrix {
    let mut sites = n.sites();
    let first = embed_single(axis, sites.next().expect("n >= 1"));
    sites.fold(first, |acc, s| &acc + &embed_single(axis, s))
}

/// `sum_{i<j} S_zi S_zj`; the zero matrix for a single spin.
pub fn ising_sum(n: SystemSize) -> ComplexMatrix {
    n.pairs()
        .into_iter()
        .map(|(i, j)| embed_pair_zz(i, j).expect("distinct sites"))
        .fold(ComplexMatrix::zeros(n.dim()).expect("valid dim"), |acc, m| &acc + &m)
}

/// Single-site factor of a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => ComplexMatrix::identity(2).expect("2x2"),
            Pauli::X => pauli(PauliAxis::X),
            Pauli::Y => pauli(PauliAxis::Y),
            Pauli::Z => pauli(PauliAxis::Z),
        }
    }
}

impl From<PauliAxis> for Pauli {
    fn from(axis: PauliAxis) -> Self {
        match axis {
            PauliAxis::X => Pauli::X,
            PauliAxis::Y => Pauli::Y,
            PauliAxis::Z => Pauli::Z,
        }
    }
}

/// Tensor product of Pauli matrices, written qubit 1 first ("IZIZ").
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn identity(n: SystemSize) -> Self {
        Self(vec![Pauli::I; n.get()])
    }

    pub fn single(axis: PauliAxis, site: SiteIndex) -> Self {
        let mut ops = vec![Pauli::I; site.n];
        ops[site.site - 1] = axis.into();
        Self(ops)
    }

    pub fn zz(i: SiteIndex, j: SiteIndex) -> Result<Self> {
        if i.site == j.site {
            return Err(SpinError::CoincidentSites(i.site));
        }
        let mut ops = vec![Pauli::I; i.n];
        ops[i.site - 1] = Pauli::Z;
        ops[j.site - 1] = Pauli::Z;
        Ok(Self(ops))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sites (one-based) carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Exchanges the factors on two sites.
    pub fn swap_sites(&self, a: usize, b: usize) -> Self {
        let mut ops = self.0.clone();
        ops.swap(a - 1, b - 1);
        Self(ops)
    }

    /// The generator as a matrix, without the spin factor 1/2.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut iter = self.0.iter();
        let first = iter.next().expect("non-empty Pauli string").matrix();
        iter.fold(first, |acc, p| kron(&acc, &p.matrix()).expect("at most four sites"))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = SpinError;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(SpinError::Parse(format!("`{other}` is not a Pauli symbol"))),
            })
            .collect::<Result<Vec<_>>>()?;
        SystemSize::new(ops.len())?;
        Ok(Self(ops))
    }
}

impl TryFrom<String> for PauliString {
    type Error = SpinError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}
