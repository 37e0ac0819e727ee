// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the synthesis and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("generator is not Hermitian (max |G - G^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid site index {site} for a {n}-qubit system")]
    InvalidSite { site: usize, n: usize },

    #[error("system size {0} is outside 1..=4")]
    InvalidSystemSize(usize),

    #[error("pair term needs two distinct sites, got {0} twice")]
    CoincidentSites(usize),

    #[error("invalid physical configuration: {0}")]
    InvalidConfig(String),

    #[error("configuration is off resonance: omega = {omega:e}, gamma*b0 = {larmor:e}")]
    OffResonance { omega: f64, larmor: f64 },

    #[error("no timing constraints supplied")]
    EmptyConstraints,

    #[error("incommensurate timing constraints: {0}")]
    Incommensurate(String),

    #[error("infeasible constant assignment: {0}")]
    Infeasible(String),

    #[error("timing violation: {0}")]
    TimingViolation(String),

    #[error("drive term not eliminated: gamma*b1*t = {angle:e} rad is not a multiple of 2pi")]
    DriveNotEliminated { angle: f64 },

    #[error("invalid gate specification: {0}")]
    InvalidGate(String),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("integrator unstable: {0}")]
    Unstable(String),

    #[error("search cancelled")]
    Cancelled,

    #[error("argument error: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SpinError>;
